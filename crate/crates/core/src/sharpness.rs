//! Extremal sets in the plane with no dilated configuration, and exhaustive
//! certificates for them.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::edges::EdgeSet;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElem, SubfieldEmbedding};
use crate::geometry::{sphere, Point, PointSet, Space};
use crate::search::{find_dilated_pair_bruteforce, SearchOutcome};

/// Which extremal set a certificate is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
pub enum Construction {
    SubfieldGrid { p: u32, ell: u32 },
    UnitSphere { q: u32 },
    Custom { q: u32 },
}

/// `φ(F_{p^ℓ}) × φ(F_{p^ℓ}) ⊂ F_{p^{2ℓ}}²`.
#[derive(Clone, Debug)]
pub struct SubfieldGrid {
    pub p: u32,
    pub ell: u32,
    pub embedding: SubfieldEmbedding,
    pub set: PointSet,
    /// Nonzero squares of `F_{p^{2ℓ}}` outside the embedded subfield.
    pub admissible_r: Vec<FieldElem>,
}

impl SubfieldGrid {
    pub fn field(&self) -> &Arc<Field> {
        self.embedding.big()
    }

    /// Every ratio `‖y - y'‖ / ‖x - x'‖` over grid points with nonzero
    /// denominator lies in the embedded subfield.
    pub fn ratios_in_subfield(&self) -> bool {
        let f = self.field();
        let norms = self.set.norm_table();
        norms.iter().filter(|n| !n.is_zero()).all(|&den| {
            norms
                .iter()
                .all(|&num| f.div(num, den).is_ok_and(|r| self.embedding.contains(r)))
        })
    }

    /// `‖x‖ = 0` only at the origin, for `x` ranging over the grid.
    pub fn norm_anisotropic(&self) -> bool {
        let space = self.set.space();
        self.set
            .points()
            .iter()
            .all(|x| !space.norm(x).is_zero() || *x == space.origin())
    }
}

/// Builds the grid over `F_{p^ℓ}` inside the plane over `F_{p^{2ℓ}}`.
/// Needs `p ≡ 3 (mod 4)` and `ℓ` odd.
pub fn build_subfield_grid(p: u64, ell: u32) -> Result<SubfieldGrid> {
    if p % 4 != 3 {
        return Err(Error::InvalidArgument(format!("p = {p} is not 3 mod 4")));
    }
    if ell.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("ℓ = {ell} is not odd")));
    }
    let small = Field::new(p, ell)?;
    let big = Field::new(p, 2 * ell)?;
    let embedding = SubfieldEmbedding::new(&small, &big)?;
    let space = Space::new(&big, 2)?;
    let image = embedding.image();
    let points = image
        .iter()
        .flat_map(|&a| image.iter().map(move |&b| Point::new(vec![a, b])));
    let set = PointSet::new(&space, points)?;
    let admissible_r: Vec<FieldElem> = big
        .squares_nonzero()
        .into_iter()
        .filter(|&r| !embedding.contains(r))
        .collect();
    if admissible_r.is_empty() {
        return Err(Error::InvalidArgument("no admissible ratio".into()));
    }
    Ok(SubfieldGrid {
        p: p as u32,
        ell,
        embedding,
        set,
        admissible_r,
    })
}

/// The circle `x_1² + x_2² = 1` over `F_q`, `q ≡ 3 (mod 4)`.
pub fn build_unit_sphere(q: u64) -> Result<PointSet> {
    let field = Field::with_order(q)?;
    if q % 4 != 3 {
        return Err(Error::InvalidArgument(format!("q = {q} is not 3 mod 4")));
    }
    let space = Space::new(&field, 2)?;
    sphere(&space, &space.origin(), FieldElem::ONE)
}

/// Outcome of an exhaustive search for a dilated pair in a fixed set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SharpnessCertificate {
    #[serde(flatten)]
    pub construction: Construction,
    pub set_size: usize,
    pub r: String,
    pub k: usize,
    pub edges: String,
    pub exhausted: bool,
    pub witness_found: bool,
    pub nodes_searched: u64,
    /// Rendered `(x_i, y_i)` pairs of the witness, if one turned up.
    pub witness: Option<Vec<(String, String)>>,
}

impl SharpnessCertificate {
    pub fn valid(&self) -> bool {
        self.exhausted && !self.witness_found
    }
}

/// Runs the brute-force search to completion (or to the node guard).
pub fn certify_no_dilated(
    construction: Construction,
    set: &PointSet,
    r: FieldElem,
    edges: &EdgeSet,
    node_guard: u64,
) -> Result<SharpnessCertificate> {
    let report = find_dilated_pair_bruteforce(set, r, edges, node_guard)?;
    let space = set.space();
    let witness = report.witness().map(|w| {
        w.xs.iter()
            .zip(&w.ys)
            .map(|(x, y)| (space.render(x), space.render(y)))
            .collect()
    });
    Ok(SharpnessCertificate {
        construction,
        set_size: set.len(),
        r: set.field().render(r),
        k: edges.k(),
        edges: edges.to_string(),
        exhausted: report.outcome != SearchOutcome::GuardExceeded,
        witness_found: matches!(report.outcome, SearchOutcome::Found(_)),
        nodes_searched: report.nodes,
        witness,
    })
}

/// One certificate per `(r, A)`, in input order, computed in parallel.
pub fn certify_all(
    construction: Construction,
    set: &PointSet,
    ratios: &[FieldElem],
    edge_sets: &[EdgeSet],
    node_guard: u64,
) -> Result<Vec<SharpnessCertificate>> {
    let jobs: Vec<(FieldElem, &EdgeSet)> = ratios
        .iter()
        .flat_map(|&r| edge_sets.iter().map(move |a| (r, a)))
        .collect();
    jobs.par_iter()
        .map(|&(r, a)| certify_no_dilated(construction, set, r, a, node_guard))
        .collect()
}

/// Single-edge sets `{(α, β)}` over `k + 1` vertices.
pub fn single_edges(k: usize) -> Result<Vec<EdgeSet>> {
    (1..=k + 1)
        .flat_map(|a| (a + 1..=k + 1).map(move |b| (a, b)))
        .map(|e| EdgeSet::new(k, [e]))
        .collect()
}

/// `S(c_1; R_1) ∩ S(c_2; R_2)` in the plane, by enumeration.
pub fn sphere_pair_intersection(
    space: &Space,
    c1: &Point,
    r1: FieldElem,
    c2: &Point,
    r2: FieldElem,
) -> Result<PointSet> {
    if space.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: space.dim(),
        });
    }
    space.check(c1)?;
    space.check(c2)?;
    space.field().check(r1)?;
    space.field().check(r2)?;
    let members = space
        .points()
        .filter(|x| space.dist(x, c1) == r1 && space.dist(x, c2) == r2);
    PointSet::new(space, members)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectionReport {
    pub q: u32,
    /// Ordered pairs of distinct `(centre, radius)` examined.
    pub sphere_pairs: u64,
    pub max_intersection: u32,
}

impl IntersectionReport {
    pub fn at_most_two(&self) -> bool {
        self.max_intersection <= 2
    }
}

/// Largest intersection of two distinct spheres in the plane over `F_q`,
/// over all centres and radii.
///
/// Each point lies on exactly one sphere about each centre, so for a pair
/// of distinct centres one pass over the plane tallies every radius pair.
/// Concentric distinct spheres are disjoint.
pub fn sphere_intersection_bound(field: &Arc<Field>) -> Result<IntersectionReport> {
    let space = Space::new(field, 2)?;
    let q = field.order() as u64;
    let n = space.size();
    let points: Vec<Point> = space.points().collect();
    let maxima = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut best = 0u32;
            let mut tally: HashMap<(FieldElem, FieldElem), u32> = HashMap::new();
            for b in a + 1..n {
                tally.clear();
                for x in &points {
                    let key = (
                        space.dist(x, &points[a as usize]),
                        space.dist(x, &points[b as usize]),
                    );
                    *tally.entry(key).or_insert(0) += 1;
                }
                best = best.max(tally.values().copied().max().unwrap_or(0));
            }
            best
        })
        .collect::<Vec<u32>>();
    let spheres = n as u64 * q;
    Ok(IntersectionReport {
        q: field.order(),
        sphere_pairs: spheres * (spheres - 1),
        max_intersection: maxima.into_iter().max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::DEFAULT_NODE_GUARD;

    #[test]
    fn grid_over_f3() {
        let g = build_subfield_grid(3, 1).unwrap();
        assert_eq!(g.field().order(), 9);
        assert_eq!(g.set.len(), 9);
        // Nonzero squares of F_9 minus the embedded {1, 2}.
        let squares = g.field().squares_nonzero();
        assert_eq!(squares.len(), 4);
        let expected: Vec<_> = squares
            .into_iter()
            .filter(|r| !g.embedding.image().contains(r))
            .collect();
        assert_eq!(g.admissible_r, expected);
        assert_eq!(g.admissible_r.len(), 2);
        assert!(g.ratios_in_subfield());
        assert!(g.norm_anisotropic());
    }

    #[test]
    fn grid_preconditions() {
        assert!(build_subfield_grid(5, 1).is_err());
        assert!(build_subfield_grid(3, 2).is_err());
        let g = build_subfield_grid(7, 1).unwrap();
        assert_eq!(g.set.len(), 49);
        assert!(g.ratios_in_subfield());
    }

    #[test]
    fn sphere_sizes() {
        assert_eq!(build_unit_sphere(7).unwrap().len(), 8);
        assert_eq!(build_unit_sphere(11).unwrap().len(), 12);
        assert_eq!(build_unit_sphere(3).unwrap().len(), 4);
        assert!(build_unit_sphere(5).is_err());
        assert!(build_unit_sphere(9).is_err());
    }

    #[test]
    fn grid_certificates() {
        let g = build_subfield_grid(3, 1).unwrap();
        let mut shapes = single_edges(1).unwrap();
        shapes.extend(single_edges(2).unwrap());
        shapes.push(EdgeSet::complete(2).unwrap());
        let construction = Construction::SubfieldGrid { p: 3, ell: 1 };
        let certs = certify_all(
            construction,
            &g.set,
            &g.admissible_r,
            &shapes,
            DEFAULT_NODE_GUARD,
        )
        .unwrap();
        assert_eq!(certs.len(), 2 * 5);
        assert!(certs.iter().all(|c| c.valid()), "{certs:?}");
    }

    #[test]
    fn sphere_certificates_and_control() {
        let e = build_unit_sphere(7).unwrap();
        let f = e.field().clone();
        let tri = EdgeSet::complete(2).unwrap();
        let construction = Construction::UnitSphere { q: 7 };
        for r in [2, 4] {
            let c = certify_no_dilated(construction, &e, f.from_int(r), &tri, DEFAULT_NODE_GUARD)
                .unwrap();
            assert!(c.valid(), "{c:?}");
        }
        let c = certify_no_dilated(construction, &e, f.one(), &tri, DEFAULT_NODE_GUARD).unwrap();
        assert!(c.exhausted && c.witness_found && !c.valid());
        assert_eq!(c.witness.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn guard_never_certifies() {
        let e = build_unit_sphere(7).unwrap();
        let tri = EdgeSet::complete(2).unwrap();
        let c = certify_no_dilated(
            Construction::UnitSphere { q: 7 },
            &e,
            e.field().from_int(2),
            &tri,
            5,
        )
        .unwrap();
        assert!(!c.exhausted);
        assert!(!c.valid());
    }

    #[test]
    fn pair_intersections() {
        let f = Field::with_order(7).unwrap();
        let s = Space::new(&f, 2).unwrap();
        let o = s.origin();
        let whole = sphere_pair_intersection(&s, &o, f.one(), &o, f.one()).unwrap();
        assert_eq!(whole, build_unit_sphere(7).unwrap());
        assert!(sphere_pair_intersection(&s, &o, f.one(), &o, f.from_int(2))
            .unwrap()
            .is_empty());
        let s3 = Space::new(&f, 3).unwrap();
        assert!(
            sphere_pair_intersection(&s3, &s3.origin(), f.one(), &s3.origin(), f.one()).is_err()
        );
    }

    #[test]
    fn histogram_matches_enumeration() {
        let f = Field::with_order(3).unwrap();
        let s = Space::new(&f, 2).unwrap();
        let mut best = 0;
        let spheres: Vec<(Point, FieldElem)> = s
            .points()
            .flat_map(|c| f.elements().map(move |r| (c.clone(), r)))
            .collect();
        for (i, (c1, r1)) in spheres.iter().enumerate() {
            for (c2, r2) in &spheres[i + 1..] {
                let n = sphere_pair_intersection(&s, c1, *r1, c2, *r2)
                    .unwrap()
                    .len();
                best = best.max(n as u32);
            }
        }
        let report = sphere_intersection_bound(&f).unwrap();
        assert_eq!(report.max_intersection, best);
        assert_eq!(report.sphere_pairs, 27 * 26);
        assert!(report.at_most_two());
    }

    #[test]
    fn bound_fails_when_minus_one_is_a_square() {
        // Over F_5 the radius-0 sphere is a pair of lines.
        let report = sphere_intersection_bound(&Field::with_order(5).unwrap()).unwrap();
        assert!(!report.at_most_two());
    }
}
