//! Witness search for dilated configurations: pairs of `(k+1)`-tuples
//! `(x_i), (y_i)` of distinct points of `E` with `‖y_i - y_j‖ = r ‖x_i - x_j‖`
//! on every edge of `A`.
//!
//! Three finders are provided. [`find_dilated_pair_bruteforce`] is an exact
//! decision procedure. The other two follow the averaging arguments for
//! `r = 1` (a large self-intersection `E ∩ (c + E)`) and for `r = t² ≠ 1`
//! (a large intersection `tE ∩ (E + a)`); both produce configurations that
//! match on *every* pair, so their witnesses certify any edge set.

use serde::Serialize;

use crate::edges::EdgeSet;
use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::geometry::{Point, PointSet, Space};

/// Default node budget for the backtracking searches.
pub const DEFAULT_NODE_GUARD: u64 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bruteforce,
    Translation,
    Scaling,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Bruteforce => "bruteforce",
            Method::Translation => "translation",
            Method::Scaling => "scaling",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DilatedWitness {
    pub xs: Vec<Point>,
    pub ys: Vec<Point>,
    pub r: FieldElem,
    pub method: Method,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Found(DilatedWitness),
    /// The search space was exhausted without a witness.
    NoWitness,
    /// The node budget ran out first; nothing is known.
    GuardExceeded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport {
    pub outcome: SearchOutcome,
    /// Candidates examined: tuple extensions for brute force, translation or
    /// offset candidates for the constructive methods.
    pub nodes: u64,
}

impl SearchReport {
    pub fn witness(&self) -> Option<&DilatedWitness> {
        match &self.outcome {
            SearchOutcome::Found(w) => Some(w),
            _ => None,
        }
    }

    pub fn guard_exceeded(&self) -> bool {
        self.outcome == SearchOutcome::GuardExceeded
    }
}

pub(crate) fn require_nonzero_square(set: &PointSet, r: FieldElem) -> Result<()> {
    let f = set.field();
    f.check(r)?;
    if r.is_zero() || !f.is_square(r) {
        return Err(Error::NotASquare(format!(
            "{} (need a nonzero square)",
            f.render(r)
        )));
    }
    Ok(())
}

/// Membership bitmap over point ranks.
pub(crate) struct RankBitmap(Vec<u64>);

impl RankBitmap {
    pub(crate) fn new(space: &Space, ranks: impl IntoIterator<Item = u32>) -> Self {
        let mut bits = vec![0u64; (space.size() as usize).div_ceil(64)];
        for r in ranks {
            bits[r as usize / 64] |= 1 << (r % 64);
        }
        RankBitmap(bits)
    }

    #[inline]
    pub(crate) fn contains(&self, rank: u32) -> bool {
        self.0[rank as usize / 64] >> (rank % 64) & 1 == 1
    }
}

/// Outcome of one run of [`PairSearch`].
pub(crate) struct PairRun {
    pub count: u128,
    /// `(x index, y index)` per vertex, 0-based vertex order.
    pub first: Option<Vec<(usize, usize)>>,
    pub nodes: u64,
    pub guard_hit: bool,
}

/// Backtracking over `(x_i, y_i)` index pairs into a sorted point set.
///
/// Vertices are placed in [`EdgeSet::placement_order`]. A vertex with an
/// already placed neighbour `c` only tries `y` with
/// `‖y - y_c‖ = r ‖x - x_c‖`, read off a per-anchor index of points by
/// distance value; every remaining edge to placed vertices and both
/// distinctness conditions are checked before descending.
pub(crate) struct PairSearch {
    n: usize,
    order: Vec<usize>,
    /// For each depth, the earlier depths joined to it by an edge.
    links: Vec<Vec<usize>>,
    norms: Vec<FieldElem>,
    scaled: Vec<FieldElem>,
    /// `offsets[a * (q + 1) + v]..offsets[a * (q + 1) + v + 1]` is the range
    /// of `members` holding the indices `b` with `‖p_a - p_b‖ = v`.
    offsets: Vec<u32>,
    members: Vec<u32>,
    q: usize,
}

impl PairSearch {
    pub(crate) fn new(set: &PointSet, r: FieldElem, edges: &EdgeSet) -> Self {
        let n = set.len();
        let f = set.field();
        let q = f.order() as usize;
        let norms = set.norm_table();
        let scaled: Vec<FieldElem> = norms.iter().map(|&d| f.mul(r, d)).collect();
        let order = edges.placement_order();
        let depth_of: Vec<usize> = {
            let mut inv = vec![0; order.len()];
            for (depth, &v) in order.iter().enumerate() {
                inv[v] = depth;
            }
            inv
        };
        let links = order
            .iter()
            .enumerate()
            .map(|(depth, &v)| {
                let mut earlier: Vec<usize> = order[..depth]
                    .iter()
                    .filter(|&&u| edges.contains(u + 1, v + 1))
                    .map(|&u| depth_of[u])
                    .collect();
                earlier.sort_unstable();
                earlier
            })
            .collect();

        let mut offsets = vec![0u32; n * (q + 1)];
        let mut members = vec![0u32; n * n];
        for a in 0..n {
            let row = &norms[a * n..(a + 1) * n];
            let base = a * (q + 1);
            let mut counts = vec![0u32; q + 1];
            for d in row {
                counts[d.rank() as usize + 1] += 1;
            }
            for v in 0..q {
                counts[v + 1] += counts[v];
            }
            for v in 0..=q {
                offsets[base + v] = a as u32 * n as u32 + counts[v];
            }
            let mut fill = counts.clone();
            for (b, d) in row.iter().enumerate() {
                let slot = &mut fill[d.rank() as usize];
                members[a * n + *slot as usize] = b as u32;
                *slot += 1;
            }
        }
        PairSearch {
            n,
            order,
            links,
            norms,
            scaled,
            offsets,
            members,
            q,
        }
    }

    pub(crate) fn run(&self, limit: u64, stop_at_first: bool) -> PairRun {
        let arity = self.order.len();
        let mut state = PairRun {
            count: 0,
            first: None,
            nodes: 0,
            guard_hit: false,
        };
        if self.n < arity {
            return state;
        }
        let mut xs = vec![0usize; arity];
        let mut ys = vec![0usize; arity];
        self.extend(0, &mut xs, &mut ys, limit, stop_at_first, &mut state);
        state
    }

    fn candidates(&self, anchor: usize, value: FieldElem) -> &[u32] {
        let base = anchor * (self.q + 1) + value.rank() as usize;
        &self.members[self.offsets[base] as usize..self.offsets[base + 1] as usize]
    }

    fn extend(
        &self,
        depth: usize,
        xs: &mut [usize],
        ys: &mut [usize],
        limit: u64,
        stop_at_first: bool,
        state: &mut PairRun,
    ) -> bool {
        if depth == self.order.len() {
            state.count += 1;
            if stop_at_first {
                let mut by_vertex = vec![(0, 0); depth];
                for (d, &v) in self.order.iter().enumerate() {
                    by_vertex[v] = (xs[d], ys[d]);
                }
                state.first = Some(by_vertex);
                return true;
            }
            return false;
        }
        let n = self.n;
        let links = &self.links[depth];
        let Some((&anchor, rest)) = links.split_first() else {
            return self.extend_unlinked(depth, xs, ys, limit, stop_at_first, state);
        };
        for x in 0..n {
            if xs[..depth].contains(&x) {
                continue;
            }
            let ys_iter = self.candidates(ys[anchor], self.scaled[xs[anchor] * n + x]);
            for &y in ys_iter {
                let y = y as usize;
                state.nodes += 1;
                if state.nodes > limit {
                    state.guard_hit = true;
                    return true;
                }
                if ys[..depth].contains(&y) {
                    continue;
                }
                if rest
                    .iter()
                    .any(|&c| self.norms[ys[c] * n + y] != self.scaled[xs[c] * n + x])
                {
                    continue;
                }
                xs[depth] = x;
                ys[depth] = y;
                if self.extend(depth + 1, xs, ys, limit, stop_at_first, state) {
                    return true;
                }
            }
        }
        false
    }

    /// A depth with no edge to earlier vertices: every `(x, y)` is a candidate.
    fn extend_unlinked(
        &self,
        depth: usize,
        xs: &mut [usize],
        ys: &mut [usize],
        limit: u64,
        stop_at_first: bool,
        state: &mut PairRun,
    ) -> bool {
        for x in 0..self.n {
            if xs[..depth].contains(&x) {
                continue;
            }
            for y in 0..self.n {
                state.nodes += 1;
                if state.nodes > limit {
                    state.guard_hit = true;
                    return true;
                }
                if ys[..depth].contains(&y) {
                    continue;
                }
                xs[depth] = x;
                ys[depth] = y;
                if self.extend(depth + 1, xs, ys, limit, stop_at_first, state) {
                    return true;
                }
            }
        }
        false
    }
}

/// Exhaustive backtracking for the lexicographically first witness.
///
/// Distinguishes "no witness exists" from "node budget exhausted".
pub fn find_dilated_pair_bruteforce(
    set: &PointSet,
    r: FieldElem,
    edges: &EdgeSet,
    node_guard: u64,
) -> Result<SearchReport> {
    require_nonzero_square(set, r)?;
    let run = PairSearch::new(set, r, edges).run(node_guard, true);
    let outcome = match (run.guard_hit, run.first) {
        (true, _) => SearchOutcome::GuardExceeded,
        (false, Some(pairs)) => {
            let pts = set.points();
            SearchOutcome::Found(DilatedWitness {
                xs: pairs.iter().map(|&(x, _)| pts[x].clone()).collect(),
                ys: pairs.iter().map(|&(_, y)| pts[y].clone()).collect(),
                r,
                method: Method::Bruteforce,
            })
        }
        (false, None) => SearchOutcome::NoWitness,
    };
    Ok(SearchReport {
        outcome,
        nodes: run.nodes,
    })
}

/// `⌊√n⌋` for integers.
pub fn isqrt(n: u64) -> u64 {
    let mut s = (n as f64).sqrt() as u64;
    while s * s > n {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    s
}

/// Congruent tuples from a large self-intersection `E ∩ (c + E)`, `c ≠ 0`.
///
/// Candidate shifts are the differences `a_i - a_j` (`i < j`) of the first
/// `⌊q^{d/2}⌋` points of the space, then every remaining nonzero shift in
/// rank order. The first shift with `|E ∩ (c + E)| ≥ k + 1` wins; the witness
/// takes the first `k + 1` points `x_i` of the intersection and
/// `y_i = x_i - c`, so `‖x_i - x_j‖ = ‖y_i - y_j‖` for all pairs and
/// `x_i ≠ y_i`. Success is guaranteed once `|E| ≥ (k+3) q^{d/2}`.
pub fn find_congruent_tuple_translation(set: &PointSet, k: usize) -> Result<SearchReport> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let space = set.space();
    let members = RankBitmap::new(space, set.ranks());
    let anchors = isqrt(space.size() as u64) as u32;
    let mut tried = vec![false; space.size() as usize];
    tried[0] = true;
    let mut nodes = 0u64;

    let attempt = |c: &Point, nodes: &mut u64| -> Option<Vec<Point>> {
        *nodes += 1;
        let mut hits = Vec::with_capacity(k + 1);
        for x in set.points() {
            let y = space.sub(x, c);
            if members.contains(space.rank(&y)) {
                hits.push(x.clone());
                if hits.len() == k + 1 {
                    return Some(hits);
                }
            }
        }
        None
    };

    let differences = (0..anchors).flat_map(|i| (i + 1..anchors).map(move |j| (i, j)));
    let shifts = differences
        .map(|(i, j)| space.sub(&space.point(i), &space.point(j)))
        .chain((1..space.size()).map(|r| space.point(r)));
    for c in shifts {
        let rank = space.rank(&c) as usize;
        if tried[rank] {
            continue;
        }
        tried[rank] = true;
        if let Some(xs) = attempt(&c, &mut nodes) {
            let ys = xs.iter().map(|x| space.sub(x, &c)).collect();
            let witness = DilatedWitness {
                xs,
                ys,
                r: FieldElem::ONE,
                method: Method::Translation,
            };
            return Ok(SearchReport {
                outcome: SearchOutcome::Found(witness),
                nodes,
            });
        }
    }
    Ok(SearchReport {
        outcome: SearchOutcome::NoWitness,
        nodes,
    })
}

/// Dilated tuples from the fullest intersection `tE ∩ (E + a)`, `t = √r`.
///
/// Uses the canonical root; see [`find_dilated_tuple_scaling_with_root`].
pub fn find_dilated_tuple_scaling(set: &PointSet, r: FieldElem, k: usize) -> Result<SearchReport> {
    require_nonzero_square(set, r)?;
    let t = set.field().sqrt(r)?;
    find_dilated_tuple_scaling_with_root(set, t, k)
}

/// Scaling method with an explicit root `t`, `t² = r ≠ 1`.
///
/// Picks the offset `a` maximizing `|tE ∩ (E + a)|` (smallest rank on ties).
/// Each intersection point is `x = t z = y + a` with `y, z ∈ E`; among these,
/// in increasing order of `x`, the first `k + 1` with `y ≠ z` give
/// `xs = (z_i)`, `ys = (y_i)` and `‖y_i - y_j‖ = r ‖z_i - z_j‖` on all pairs.
/// Since `t ≠ 1`, at most one intersection point has `y = z`, so `k + 2`
/// points always suffice; that many exist once `|E|² ≥ (k+2) q^d`.
pub fn find_dilated_tuple_scaling_with_root(
    set: &PointSet,
    t: FieldElem,
    k: usize,
) -> Result<SearchReport> {
    let space = set.space();
    let f = space.field();
    f.check(t)?;
    let r = f.square(t);
    if r == FieldElem::ONE {
        return Err(Error::InvalidArgument(
            "the scaling method needs r != 1; use the translation method".into(),
        ));
    }
    if t.is_zero() {
        return Err(Error::InvalidArgument("r must be nonzero".into()));
    }
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if set.is_empty() {
        return Ok(SearchReport {
            outcome: SearchOutcome::NoWitness,
            nodes: 0,
        });
    }
    let scaled: Vec<Point> = set.points().iter().map(|z| space.scale(t, z)).collect();
    let mut counts = vec![0u32; space.size() as usize];
    let mut nodes = 0u64;
    for x in &scaled {
        for y in set.points() {
            counts[space.rank(&space.sub(x, y)) as usize] += 1;
            nodes += 1;
        }
    }
    let (best, _) =
        counts.iter().enumerate().fold(
            (0usize, 0u32),
            |(bi, bc), (i, &c)| if c > bc { (i, c) } else { (bi, bc) },
        );
    let offset = space.point(best as u32);
    let mut hits: Vec<(Point, usize, usize)> = scaled
        .iter()
        .enumerate()
        .filter_map(|(zi, x)| {
            set.position(&space.sub(x, &offset))
                .map(|yi| (x.clone(), zi, yi))
        })
        .collect();
    hits.sort();
    let chosen: Vec<(usize, usize)> = hits
        .iter()
        .filter(|(_, zi, yi)| zi != yi)
        .take(k + 1)
        .map(|&(_, zi, yi)| (zi, yi))
        .collect();
    if chosen.len() < k + 1 {
        return Ok(SearchReport {
            outcome: SearchOutcome::NoWitness,
            nodes,
        });
    }
    let pts = set.points();
    let witness = DilatedWitness {
        xs: chosen.iter().map(|&(z, _)| pts[z].clone()).collect(),
        ys: chosen.iter().map(|&(_, y)| pts[y].clone()).collect(),
        r,
        method: Method::Scaling,
    };
    Ok(SearchReport {
        outcome: SearchOutcome::Found(witness),
        nodes,
    })
}

/// Independent recheck of a witness against `A` and `r`: arity, pairwise
/// distinctness of both tuples, and `‖y_i - y_j‖ = r ‖x_i - x_j‖` on every edge.
pub fn verify_witness(
    space: &Space,
    witness: &DilatedWitness,
    edges: &EdgeSet,
    r: FieldElem,
) -> bool {
    let (xs, ys) = (&witness.xs, &witness.ys);
    if xs.len() != edges.arity() || ys.len() != edges.arity() {
        return false;
    }
    if xs.iter().chain(ys).any(|p| space.check(p).is_err()) {
        return false;
    }
    let distinct = |v: &[Point]| (0..v.len()).all(|i| (i + 1..v.len()).all(|j| v[i] != v[j]));
    if !distinct(xs) || !distinct(ys) {
        return false;
    }
    let f = space.field();
    edges.edges().iter().all(|&(i, j)| {
        let lhs = space.norm(&space.sub(&ys[i - 1], &ys[j - 1]));
        let rhs = f.mul(r, space.norm(&space.sub(&xs[i - 1], &xs[j - 1])));
        lhs == rhs
    })
}
