//! The counting function `λ_{r,θ}(z) = |{(u, v) ∈ E² : u - √r θv = z}|`,
//! its power sums over `z` and `θ ∈ O_d(F_q)`, the tuple sets built from
//! it, and an exact check of every inequality linking them to `|S_A|`.
//!
//! All comparisons are done on integers or exact rationals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::edges::EdgeSet;
use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::geometry::{Point, PointSet, Space};
use crate::orthogonal::{enumerate_orthogonal, OrthMatrix};
use crate::search::{require_nonzero_square, PairSearch};

/// Tables over spaces up to this size are stored densely.
pub const DENSE_TABLE_LIMIT: u32 = 1 << 20;

#[derive(Clone, Debug)]
enum Counts {
    Dense(Vec<u32>),
    Sparse(BTreeMap<u32, u32>),
}

/// `λ_{r,θ}` for a fixed `(E, r, θ)`, indexed by point rank.
#[derive(Clone, Debug)]
pub struct CountingTable {
    space: Space,
    set_size: usize,
    counts: Counts,
}

impl CountingTable {
    fn from_offsets(space: &Space, set_size: usize, offsets: &[u32]) -> Self {
        let counts = if space.size() <= DENSE_TABLE_LIMIT {
            let mut dense = vec![0u32; space.size() as usize];
            for &z in offsets {
                dense[z as usize] += 1;
            }
            Counts::Dense(dense)
        } else {
            let mut sparse = BTreeMap::new();
            for &z in offsets {
                *sparse.entry(z).or_insert(0) += 1;
            }
            Counts::Sparse(sparse)
        };
        CountingTable {
            space: space.clone(),
            set_size,
            counts,
        }
    }

    pub fn get(&self, z: &Point) -> u32 {
        let rank = self.space.rank(z);
        match &self.counts {
            Counts::Dense(v) => v[rank as usize],
            Counts::Sparse(m) => m.get(&rank).copied().unwrap_or(0),
        }
    }

    /// Nonzero entries `(rank of z, λ(z))` in rank order.
    pub fn nonzero(&self) -> Vec<(u32, u32)> {
        match &self.counts {
            Counts::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(z, &c)| (z as u32, c))
                .collect(),
            Counts::Sparse(m) => m.iter().map(|(&z, &c)| (z, c)).collect(),
        }
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    /// `Σ_z λ(z)`, always `|E|²`.
    pub fn total(&self) -> u128 {
        self.nonzero().iter().map(|&(_, c)| c as u128).sum()
    }

    pub fn max(&self) -> u32 {
        self.nonzero().iter().map(|&(_, c)| c).max().unwrap_or(0)
    }

    /// `Σ_z λ(z)^p`.
    pub fn power_sum(&self, p: u32) -> Result<u128> {
        let (below, above) = self.split_power_sum(p, 0)?;
        Ok(below + above)
    }

    /// `(Σ_{λ < c} λ^p, Σ_{λ ≥ c} λ^p)`.
    pub fn split_power_sum(&self, p: u32, threshold: u64) -> Result<(u128, u128)> {
        let (mut below, mut above) = (0u128, 0u128);
        for (_, c) in self.nonzero() {
            let term = (c as u128)
                .checked_pow(p)
                .ok_or(Error::Overflow("λ power sum"))?;
            let slot = if (c as u64) < threshold {
                &mut below
            } else {
                &mut above
            };
            *slot = slot
                .checked_add(term)
                .ok_or(Error::Overflow("λ power sum"))?;
        }
        Ok((below, above))
    }
}

/// Rank of `u - t θ v` for every `(u, v) ∈ E²`, index `u * |E| + v`.
fn pair_offsets(set: &PointSet, root: FieldElem, theta: &OrthMatrix) -> Result<Vec<u32>> {
    let space = set.space();
    let moved: Vec<Point> = set
        .points()
        .iter()
        .map(|v| theta.apply(space, v).map(|w| space.scale(root, &w)))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(set.len() * set.len());
    for u in set.points() {
        for w in &moved {
            out.push(space.rank(&space.sub(u, w)));
        }
    }
    Ok(out)
}

fn canonical_root(set: &PointSet, r: FieldElem) -> Result<FieldElem> {
    require_nonzero_square(set, r)?;
    set.field().sqrt(r)
}

fn check_theta(set: &PointSet, theta: &OrthMatrix) -> Result<()> {
    if theta.dim() != set.space().dim() {
        return Err(Error::DimensionMismatch {
            expected: set.space().dim(),
            got: theta.dim(),
        });
    }
    Ok(())
}

/// `λ_{r,θ}(z)` for every `z`, built from the `|E|²` pairs.
pub fn lambda_table(set: &PointSet, r: FieldElem, theta: &OrthMatrix) -> Result<CountingTable> {
    let root = canonical_root(set, r)?;
    check_theta(set, theta)?;
    let offsets = pair_offsets(set, root, theta)?;
    Ok(CountingTable::from_offsets(
        set.space(),
        set.len(),
        &offsets,
    ))
}

/// `Σ_{θ ∈ O_d} Σ_z λ_{r,θ}(z)^p`.
pub fn lp_norm_sum(set: &PointSet, r: FieldElem, p: u32) -> Result<u128> {
    if p < 1 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let root = canonical_root(set, r)?;
    let group = enumerate_orthogonal(set.field(), set.space().dim())?;
    let sums = group
        .par_iter()
        .map(|theta| {
            let offsets = pair_offsets(set, root, theta)?;
            CountingTable::from_offsets(set.space(), set.len(), &offsets).power_sum(p)
        })
        .collect::<Result<Vec<u128>>>()?;
    sums.into_iter()
        .try_fold(0u128, |acc, s| acc.checked_add(s))
        .ok_or(Error::Overflow("L^p norm"))
}

/// The sets of `(2k+2)`-tuples `(u_1..u_{k+1}, v_1..v_{k+1}) ∈ E^{2k+2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TupleVariant {
    /// `u_i - u_j = √r θ (v_i - v_j)` for all `i < j`.
    Lambda,
    /// `Lambda` with all `v_i` distinct.
    N,
    /// The equations only on the edges of `A`, all `v_i` distinct.
    NA(EdgeSet),
    /// `Lambda` with `v_α = v_β` (1-based, `α < β`).
    APair(usize, usize),
}

struct TupleShape {
    order: Vec<usize>,
    /// Earlier depths whose `z` must equal this depth's.
    links: Vec<Vec<usize>>,
    v_distinct: bool,
    v_equal: Option<(usize, usize)>,
}

impl TupleShape {
    fn new(k: usize, variant: &TupleVariant) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let arity = k + 1;
        let complete = || TupleShape {
            order: (0..arity).collect(),
            links: (0..arity).map(|d| (0..d).collect()).collect(),
            v_distinct: false,
            v_equal: None,
        };
        Ok(match variant {
            TupleVariant::Lambda => complete(),
            TupleVariant::N => TupleShape {
                v_distinct: true,
                ..complete()
            },
            TupleVariant::APair(a, b) => {
                if !(1 <= *a && a < b && *b <= arity) {
                    return Err(Error::InvalidArgument(format!(
                        "pair ({a},{b}) outside 1 <= α < β <= {arity}"
                    )));
                }
                TupleShape {
                    v_equal: Some((a - 1, b - 1)),
                    ..complete()
                }
            }
            TupleVariant::NA(edges) => {
                if edges.k() != k {
                    return Err(Error::InvalidArgument(format!(
                        "edge set is over {} vertices, expected {arity}",
                        edges.arity()
                    )));
                }
                let order = edges.placement_order();
                let links = order
                    .iter()
                    .enumerate()
                    .map(|(d, &v)| {
                        (0..d)
                            .filter(|&e| edges.contains(order[e] + 1, v + 1))
                            .collect()
                    })
                    .collect();
                TupleShape {
                    order,
                    links,
                    v_distinct: true,
                    v_equal: None,
                }
            }
        })
    }
}

/// Backtracking over pair indices with `z`-buckets.
struct TupleSearch<'a> {
    n: usize,
    offsets: &'a [u32],
    /// Pair indices sorted by `(z, index)`.
    by_z: Vec<u32>,
    shape: &'a TupleShape,
    limit: u64,
    nodes: u64,
    count: u128,
}

impl<'a> TupleSearch<'a> {
    fn run(n: usize, offsets: &'a [u32], shape: &'a TupleShape, limit: u64) -> Result<u128> {
        let mut by_z: Vec<u32> = (0..offsets.len() as u32).collect();
        by_z.sort_by_key(|&i| (offsets[i as usize], i));
        let mut search = TupleSearch {
            n,
            offsets,
            by_z,
            shape,
            limit,
            nodes: 0,
            count: 0,
        };
        let mut pairs = vec![0usize; shape.order.len()];
        search.extend(0, &mut pairs)?;
        Ok(search.count)
    }

    fn bucket(&self, z: u32) -> &[u32] {
        let lo = self.by_z.partition_point(|&i| self.offsets[i as usize] < z);
        let hi = self
            .by_z
            .partition_point(|&i| self.offsets[i as usize] <= z);
        &self.by_z[lo..hi]
    }

    fn extend(&mut self, depth: usize, pairs: &mut [usize]) -> Result<()> {
        let shape = self.shape;
        if depth == shape.order.len() {
            self.count += 1;
            return Ok(());
        }
        let candidates: Vec<u32> = match shape.links[depth].first() {
            Some(&anchor) => self.bucket(self.offsets[pairs[anchor]]).to_vec(),
            None => (0..self.offsets.len() as u32).collect(),
        };
        let vertex = shape.order[depth];
        for cand in candidates {
            let cand = cand as usize;
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(Error::GuardExceeded(format!(
                    "tuple enumeration passed {} nodes",
                    self.limit
                )));
            }
            let z = self.offsets[cand];
            if shape.links[depth]
                .iter()
                .any(|&e| self.offsets[pairs[e]] != z)
            {
                continue;
            }
            let v = cand % self.n;
            if shape.v_distinct && pairs[..depth].iter().any(|&p| p % self.n == v) {
                continue;
            }
            if let Some((a, b)) = shape.v_equal {
                let partner = if vertex == b {
                    Some(a)
                } else if vertex == a {
                    Some(b)
                } else {
                    None
                };
                if let Some(other) = partner {
                    if let Some(d) = shape.order[..depth].iter().position(|&w| w == other) {
                        if pairs[d] % self.n != v {
                            continue;
                        }
                    }
                }
            }
            pairs[depth] = cand;
            self.extend(depth + 1, pairs)?;
        }
        Ok(())
    }
}

/// Exact size of the named tuple set. `Lambda` and `APair` use the closed
/// forms `Σ_z λ^{k+1}` and `Σ_z λ^k`; `N` and `NA` are enumerated.
pub fn count_tuples(
    set: &PointSet,
    r: FieldElem,
    theta: &OrthMatrix,
    k: usize,
    variant: &TupleVariant,
) -> Result<u128> {
    TupleShape::new(k, variant)?;
    match variant {
        TupleVariant::Lambda => lambda_table(set, r, theta)?.power_sum(k as u32 + 1),
        TupleVariant::APair(..) => lambda_table(set, r, theta)?.power_sum(k as u32),
        _ => count_tuples_direct(set, r, theta, k, variant, crate::search::DEFAULT_NODE_GUARD),
    }
}

/// Exact size of the named tuple set by backtracking over `(u_i, v_i)`
/// pairs, refusing to visit more than `node_guard` candidates.
pub fn count_tuples_direct(
    set: &PointSet,
    r: FieldElem,
    theta: &OrthMatrix,
    k: usize,
    variant: &TupleVariant,
    node_guard: u64,
) -> Result<u128> {
    let shape = TupleShape::new(k, variant)?;
    let root = canonical_root(set, r)?;
    check_theta(set, theta)?;
    if set.is_empty() {
        return Ok(0);
    }
    let offsets = pair_offsets(set, root, theta)?;
    TupleSearch::run(set.len(), &offsets, &shape, node_guard)
}

/// `|S_A|`: pairs of `(k+1)`-tuples of distinct points with
/// `‖y_i - y_j‖ = r ‖x_i - x_j‖` on `A`, counted by pruned backtracking.
pub fn count_s_a(set: &PointSet, r: FieldElem, edges: &EdgeSet, node_guard: u64) -> Result<u128> {
    require_nonzero_square(set, r)?;
    let run = PairSearch::new(set, r, edges).run(node_guard, false);
    if run.guard_hit {
        return Err(Error::GuardExceeded(format!(
            "S_A enumeration passed {node_guard} nodes"
        )));
    }
    Ok(run.count)
}

fn big(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `|E|^{2k+2} / (2 q^{dk}) - (k² + k)^{k+1} q^d / 2`.
pub fn theorem_lower_bound(set_size: u64, q: u64, d: u32, k: u32) -> BigRational {
    let e = BigInt::from(set_size);
    let q = BigInt::from(q);
    let kk = BigInt::from(k as u64 * k as u64 + k as u64);
    let first = BigRational::new(e.pow(2 * k + 2), BigInt::from(2) * q.pow(d * k));
    let second = BigRational::new(kk.pow(k + 1) * q.pow(d), BigInt::from(2));
    first - second
}

fn ratio_string<S: Serializer>(value: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_string())
}

/// Outcome of each inequality checked by [`verify_chain`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainFlags {
    /// `|S_A| ≥ Σ_θ|N_{A,θ}| / |O_d| ≥ Σ_θ|N_θ| / |O_d|`.
    pub containment: bool,
    /// `|N_θ| ≥ |Λ_θ| - C(k+1,2) Σ_z λ^k` for every θ.
    pub inclusion_exclusion: bool,
    /// `Σ_{θ,z} λ^{k+1} ≥ |O_d| |E|^{2k+2} / q^{dk}`.
    pub holder: bool,
    /// `S_1 ≥ 0` with `c = k(k+1)`.
    pub s1_nonnegative: bool,
    /// `|S_A| ≥` the closed-form lower bound.
    pub theorem_bound: bool,
    /// `S_2 ≥ |O_d| (|E|^{2k+2} / (2q^{dk}) - (k²+k)^{k+1} q^d / 2)`.
    pub s2_estimate: bool,
    /// `|S_A| ≥ (S_1 + S_2) / |O_d|`.
    pub split_bound: bool,
    /// Direct enumeration of `Λ_θ` matches `Σ_z λ^{k+1}` for every θ.
    pub lambda_identity: bool,
    /// Direct enumeration of every `A_{α,β}` matches `Σ_z λ^k` for every θ.
    pub pair_identity: bool,
}

impl ChainFlags {
    /// The five inequalities of the argument.
    pub fn core_pass(&self) -> bool {
        self.containment
            && self.inclusion_exclusion
            && self.holder
            && self.s1_nonnegative
            && self.theorem_bound
    }

    pub fn all_pass(&self) -> bool {
        self.core_pass()
            && self.s2_estimate
            && self.split_bound
            && self.lambda_identity
            && self.pair_identity
    }
}

/// Every quantity in the counting argument, computed exactly.
#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub q: u32,
    pub d: usize,
    pub k: usize,
    pub edges: String,
    pub r: String,
    pub set_size: usize,
    pub group_order: usize,
    /// `Σ_{θ,z} λ^{k+1}`.
    pub norm_k_plus_1: u128,
    /// `Σ_{θ,z} λ^k`.
    pub norm_k: u128,
    /// `Σ_θ |Λ_θ(r)|` by direct enumeration.
    pub lambda_total: u128,
    pub n_total: u128,
    pub n_a_total: u128,
    pub s_a: u128,
    /// `c = k(k+1)`.
    pub split_threshold: u64,
    #[serde(serialize_with = "ratio_string")]
    pub holder_bound: BigRational,
    #[serde(serialize_with = "ratio_string")]
    pub s1: BigRational,
    #[serde(serialize_with = "ratio_string")]
    pub s2: BigRational,
    #[serde(serialize_with = "ratio_string")]
    pub s2_lower_bound: BigRational,
    #[serde(serialize_with = "ratio_string")]
    pub theorem_lower_bound: BigRational,
    pub flags: ChainFlags,
}

struct ThetaTerms {
    norm_k1: u128,
    norm_k: u128,
    norm_k_large: u128,
    lambda_direct: u128,
    pairs_match: bool,
    n: u128,
    n_a: u128,
}

/// Computes every set and sum of the counting argument for `(E, r, A)` and
/// checks each inequality with exact arithmetic.
pub fn verify_chain(
    set: &PointSet,
    r: FieldElem,
    edges: &EdgeSet,
    node_guard: u64,
) -> Result<ChainReport> {
    let root = canonical_root(set, r)?;
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let k = edges.k();
    let space = set.space();
    let group = enumerate_orthogonal(set.field(), space.dim())?;
    let c = (k * (k + 1)) as u64;
    let shapes = [
        TupleShape::new(k, &TupleVariant::Lambda)?,
        TupleShape::new(k, &TupleVariant::N)?,
        TupleShape::new(k, &TupleVariant::NA(edges.clone()))?,
    ];
    let pair_shapes = (1..=k + 1)
        .flat_map(|a| (a + 1..=k + 1).map(move |b| (a, b)))
        .map(|(a, b)| TupleShape::new(k, &TupleVariant::APair(a, b)))
        .collect::<Result<Vec<_>>>()?;

    let per_theta = group
        .par_iter()
        .map(|theta| {
            let offsets = pair_offsets(set, root, theta)?;
            let table = CountingTable::from_offsets(space, set.len(), &offsets);
            let norm_k1 = table.power_sum(k as u32 + 1)?;
            let (_, norm_k_large) = table.split_power_sum(k as u32, c)?;
            let norm_k = table.power_sum(k as u32)?;
            let run = |shape| TupleSearch::run(set.len(), &offsets, shape, node_guard);
            let mut pairs_match = true;
            for shape in &pair_shapes {
                pairs_match &= run(shape)? == norm_k;
            }
            Ok(ThetaTerms {
                norm_k1,
                norm_k,
                norm_k_large,
                lambda_direct: run(&shapes[0])?,
                pairs_match,
                n: run(&shapes[1])?,
                n_a: run(&shapes[2])?,
            })
        })
        .collect::<Result<Vec<ThetaTerms>>>()?;

    let s_a = count_s_a(set, r, edges, node_guard)?;
    let binom = (k * (k + 1) / 2) as u128;
    let sum = |f: fn(&ThetaTerms) -> u128| per_theta.iter().map(f).sum::<u128>();
    let norm_k1 = sum(|t| t.norm_k1);
    let norm_k = sum(|t| t.norm_k);
    let norm_k_large = sum(|t| t.norm_k_large);
    let lambda_total = sum(|t| t.lambda_direct);
    let n_total = sum(|t| t.n);
    let n_a_total = sum(|t| t.n_a);

    let order = group.len() as u64;
    let q = set.field().order() as u64;
    let d = space.dim() as u32;
    let size = set.len() as u64;
    let kk = k as u32;

    let holder_bound = BigRational::new(
        BigInt::from(order) * BigInt::from(size).pow(2 * kk + 2),
        BigInt::from(q).pow(d * kk),
    );
    let half = BigRational::new(1.into(), 2.into());
    let s1 = &half * big(norm_k1) - big(binom * norm_k_large);
    let s2 = &half * big(norm_k1) - big(binom * (norm_k - norm_k_large));
    let theorem = theorem_lower_bound(size, q, d, kk);
    let s2_lower_bound = big(order) * &theorem;
    let s_a_big = big(s_a);

    let flags = ChainFlags {
        containment: s_a * order as u128 >= n_a_total && n_a_total >= n_total,
        inclusion_exclusion: per_theta
            .iter()
            .all(|t| t.n + binom * t.norm_k >= t.norm_k1),
        holder: big(norm_k1) >= holder_bound,
        s1_nonnegative: !s1.is_negative(),
        theorem_bound: s_a_big >= theorem,
        s2_estimate: s2 >= s2_lower_bound,
        split_bound: big(s_a * order as u128) >= &s1 + &s2,
        lambda_identity: per_theta.iter().all(|t| t.lambda_direct == t.norm_k1),
        pair_identity: per_theta.iter().all(|t| t.pairs_match),
    };

    Ok(ChainReport {
        q: set.field().order(),
        d: space.dim(),
        k,
        edges: edges.to_string(),
        r: set.field().render(r),
        set_size: set.len(),
        group_order: group.len(),
        norm_k_plus_1: norm_k1,
        norm_k,
        lambda_total,
        n_total,
        n_a_total,
        s_a,
        split_threshold: c,
        holder_bound,
        s1,
        s2,
        s2_lower_bound,
        theorem_lower_bound: theorem,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::search::DEFAULT_NODE_GUARD;

    fn plane(q: u64) -> Space {
        Space::new(&Field::with_order(q).unwrap(), 2).unwrap()
    }

    #[test]
    fn origin_only() {
        let s = plane(7);
        let e = PointSet::new(&s, [s.origin()]).unwrap();
        for theta in enumerate_orthogonal(s.field(), 2).unwrap() {
            let t = lambda_table(&e, FieldElem::from_rank(2), &theta).unwrap();
            assert_eq!(t.nonzero(), vec![(0, 1)]);
        }
        assert_eq!(lp_norm_sum(&e, FieldElem::ONE, 3).unwrap(), 16);
    }

    #[test]
    fn full_plane_is_flat() {
        let s = plane(3);
        let e = PointSet::full(&s);
        for theta in enumerate_orthogonal(s.field(), 2).unwrap() {
            let t = lambda_table(&e, FieldElem::ONE, &theta).unwrap();
            assert!(s.points().all(|z| t.get(&z) == 9));
            assert_eq!(t.total(), 81);
        }
        assert_eq!(lp_norm_sum(&e, FieldElem::ONE, 1).unwrap(), 8 * 81);
    }

    #[test]
    fn rejects_bad_ratios() {
        let s = plane(7);
        let e = PointSet::full(&s);
        let id = OrthMatrix::identity(2);
        assert!(lambda_table(&e, FieldElem::ZERO, &id).is_err());
        assert!(lambda_table(&e, FieldElem::from_rank(3), &id).is_err());
        assert!(lambda_table(&e, FieldElem::ONE, &OrthMatrix::identity(1)).is_err());
        assert!(count_tuples(&e, FieldElem::ONE, &id, 1, &TupleVariant::APair(2, 2)).is_err());
        assert!(count_tuples(&e, FieldElem::ONE, &id, 0, &TupleVariant::Lambda).is_err());
    }

    #[test]
    fn singleton_tuples() {
        let s = plane(5);
        let e = PointSet::new(&s, [s.point(7)]).unwrap();
        let id = OrthMatrix::identity(2);
        assert_eq!(
            count_tuples(&e, FieldElem::ONE, &id, 1, &TupleVariant::Lambda).unwrap(),
            1
        );
        assert_eq!(
            count_tuples(&e, FieldElem::ONE, &id, 1, &TupleVariant::N).unwrap(),
            0
        );
        let a = EdgeSet::path(1).unwrap();
        assert_eq!(
            count_s_a(&e, FieldElem::ONE, &a, DEFAULT_NODE_GUARD).unwrap(),
            0
        );
    }

    #[test]
    fn lower_bound_values() {
        let b = theorem_lower_bound(18, 9, 2, 1);
        assert_eq!(b, big(486));
        let b = theorem_lower_bound(9, 9, 2, 1);
        assert_eq!(b, BigRational::new(81.into(), 2.into()) - big(162));
        assert!(b.is_negative());
    }

    #[test]
    fn lower_bound_positive_at_threshold() {
        // |E| = 2k q^{d/2} with d even so the size is an integer.
        for k in 1..=5u32 {
            for d in [2u32, 4] {
                for q in [3u64, 5, 7, 9, 11, 13, 25, 27] {
                    let size = 2 * k as u64 * q.pow(d / 2);
                    assert!(
                        theorem_lower_bound(size, q, d, k).is_positive(),
                        "k={k} d={d} q={q}"
                    );
                    assert!(
                        BigInt::from(4 * k * k).pow(k + 1) > BigInt::from(k * k + k).pow(k + 1)
                    );
                }
            }
        }
    }

    #[test]
    fn lower_bound_increases_with_size() {
        for k in 1..=3u32 {
            let mut prev = theorem_lower_bound(1, 7, 2, k);
            for size in 2..60 {
                let next = theorem_lower_bound(size, 7, 2, k);
                assert!(next > prev);
                prev = next;
            }
        }
    }

    #[test]
    fn chain_on_singleton_and_full_plane() {
        let s = plane(3);
        let a = EdgeSet::path(1).unwrap();
        let single = PointSet::new(&s, [s.point(4)]).unwrap();
        let report = verify_chain(&single, FieldElem::ONE, &a, DEFAULT_NODE_GUARD).unwrap();
        assert_eq!(report.s_a, 0);
        assert!(report.flags.all_pass(), "{report:?}");

        let full = PointSet::full(&s);
        let report = verify_chain(&full, FieldElem::ONE, &a, DEFAULT_NODE_GUARD).unwrap();
        assert!(report.s_a > 0);
        assert!(report.flags.all_pass(), "{report:?}");
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(
            json["theorem_lower_bound"],
            report.theorem_lower_bound.to_string()
        );
        assert_eq!(json["flags"]["holder"], true);
    }

    #[test]
    fn guard_is_reported() {
        let s = plane(5);
        let full = PointSet::full(&s);
        let a = EdgeSet::path(2).unwrap();
        assert!(matches!(
            count_s_a(&full, FieldElem::ONE, &a, 100),
            Err(Error::GuardExceeded(_))
        ));
        let id = OrthMatrix::identity(2);
        assert!(matches!(
            count_tuples_direct(&full, FieldElem::ONE, &id, 2, &TupleVariant::N, 100),
            Err(Error::GuardExceeded(_))
        ));
    }
}
