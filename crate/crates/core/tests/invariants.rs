use std::sync::Arc;

use proptest::prelude::*;

use fqdilate::counting::{
    count_s_a, count_tuples, count_tuples_direct, lambda_table, TupleVariant,
};
use fqdilate::edges::EdgeSet;
use fqdilate::field::{Field, FieldElem};
use fqdilate::geometry::{distance_set, PointSet, Space};
use fqdilate::orthogonal::{enumerate_orthogonal, OrthMatrix};
use fqdilate::search::{find_dilated_pair_bruteforce, DEFAULT_NODE_GUARD};

const ORDERS: [u64; 9] = [3, 5, 7, 9, 11, 13, 25, 27, 49];

fn field_strategy() -> impl Strategy<Value = Arc<Field>> {
    prop::sample::select(ORDERS.to_vec()).prop_map(|q| Field::with_order(q).unwrap())
}

fn elem_pair() -> impl Strategy<Value = (Arc<Field>, FieldElem, FieldElem)> {
    field_strategy().prop_flat_map(|f| {
        let q = f.order();
        (Just(f), 0..q, 0..q)
            .prop_map(|(f, a, b)| (f, FieldElem::from_rank(a), FieldElem::from_rank(b)))
    })
}

fn small_set(q: u64, max: usize) -> impl Strategy<Value = PointSet> {
    let space = Space::new(&Field::with_order(q).unwrap(), 2).unwrap();
    let n = space.size();
    prop::collection::btree_set(0..n, 1..=max)
        .prop_map(move |ranks| PointSet::from_ranks(&space, ranks).unwrap())
}

fn chi(f: &Field, a: FieldElem) -> i32 {
    if a.is_zero() {
        0
    } else if f.is_square(a) {
        1
    } else {
        -1
    }
}

proptest! {
    #[test]
    fn quadratic_character_is_multiplicative((f, a, b) in elem_pair()) {
        prop_assert_eq!(chi(&f, f.mul(a, b)), chi(&f, a) * chi(&f, b));
    }

    #[test]
    fn inverse_negation_and_roots((f, a, b) in elem_pair()) {
        prop_assert_eq!(f.add(a, f.neg(a)), f.zero());
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            prop_assert_eq!(f.div(f.mul(a, b), a).unwrap(), b);
        }
        let sq = f.square(a);
        let root = f.sqrt(sq).unwrap();
        prop_assert_eq!(f.square(root), sq);
        prop_assert!(root == a || root == f.neg(a));
        prop_assert!(root.rank() <= f.neg(root).rank());
    }

    #[test]
    fn distances_survive_translation_and_dilation(
        set in small_set(7, 12),
        shift in 0u32..49,
        t in 1u32..7,
    ) {
        let space = set.space();
        let f = set.field();
        let t = FieldElem::from_rank(t);
        let delta = distance_set(&set).unwrap();
        let moved = set.translate(&space.point(shift)).unwrap();
        prop_assert_eq!(distance_set(&moved).unwrap(), delta.clone());
        let scaled: std::collections::BTreeSet<_> =
            delta.iter().map(|&n| f.mul(f.square(t), n)).collect();
        prop_assert_eq!(distance_set(&set.dilate(t).unwrap()).unwrap(), scaled);
    }

    #[test]
    fn lambda_sums_to_pairs(set in small_set(9, 15), r_idx in 0usize..4, theta_idx in 0usize..20) {
        let f = set.field().clone();
        let r = f.squares_nonzero()[r_idx];
        let group = enumerate_orthogonal(&f, 2).unwrap();
        let theta = &group[theta_idx % group.len()];
        let table = lambda_table(&set, r, theta).unwrap();
        let n = set.len() as u128;
        prop_assert_eq!(table.total(), n * n);
        prop_assert!(table.max() as u128 <= n);
        prop_assert_eq!(table.power_sum(1).unwrap(), n * n);
    }
}

/// `θ v` straight from the matrix entries.
fn rotate(f: &Field, theta: &OrthMatrix, v: &[FieldElem]) -> Vec<FieldElem> {
    (0..v.len())
        .map(|i| {
            (0..v.len()).fold(f.zero(), |acc, j| {
                f.add(acc, f.mul(theta.entry(i, j), v[j]))
            })
        })
        .collect()
}

/// Naive count of the tuple sets over `E^{2k+2}`.
fn naive_tuples(
    set: &PointSet,
    r: FieldElem,
    theta: &OrthMatrix,
    k: usize,
    variant: &TupleVariant,
) -> u128 {
    let f = set.field();
    let t = f.sqrt(r).unwrap();
    let pts: Vec<Vec<FieldElem>> = set.points().iter().map(|p| p.coords().to_vec()).collect();
    let n = pts.len();
    let arity = k + 1;
    let diff = |a: &[FieldElem], b: &[FieldElem]| -> Vec<FieldElem> {
        a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
    };
    let holds = |us: &[usize], vs: &[usize], i: usize, j: usize| {
        let lhs = diff(&pts[us[i]], &pts[us[j]]);
        let rhs: Vec<FieldElem> = rotate(f, theta, &diff(&pts[vs[i]], &pts[vs[j]]))
            .iter()
            .map(|&c| f.mul(t, c))
            .collect();
        lhs == rhs
    };
    let mut count = 0u128;
    let total = n.pow(2 * arity as u32);
    for code in 0..total {
        let mut c = code;
        let mut idx = Vec::with_capacity(2 * arity);
        for _ in 0..2 * arity {
            idx.push(c % n);
            c /= n;
        }
        let (us, vs) = idx.split_at(arity);
        let pairs = (0..arity).flat_map(|i| (i + 1..arity).map(move |j| (i, j)));
        let ok = match variant {
            TupleVariant::Lambda => pairs.clone().all(|(i, j)| holds(us, vs, i, j)),
            TupleVariant::N => {
                pairs.clone().all(|(i, j)| holds(us, vs, i, j))
                    && pairs.clone().all(|(i, j)| vs[i] != vs[j])
            }
            TupleVariant::NA(a) => {
                a.edges().iter().all(|&(i, j)| holds(us, vs, i - 1, j - 1))
                    && pairs.clone().all(|(i, j)| vs[i] != vs[j])
            }
            TupleVariant::APair(a, b) => {
                pairs.clone().all(|(i, j)| holds(us, vs, i, j)) && vs[a - 1] == vs[b - 1]
            }
        };
        count += ok as u128;
    }
    count
}

/// Naive `|S_A|` over all pairs of `(k+1)`-tuples.
fn naive_s_a(set: &PointSet, r: FieldElem, edges: &EdgeSet) -> u128 {
    let space = set.space();
    let f = set.field();
    let pts = set.points();
    let n = pts.len();
    let arity = edges.arity();
    let mut count = 0u128;
    for code in 0..n.pow(2 * arity as u32) {
        let mut c = code;
        let mut idx = Vec::with_capacity(2 * arity);
        for _ in 0..2 * arity {
            idx.push(c % n);
            c /= n;
        }
        let (xs, ys) = idx.split_at(arity);
        let distinct = |v: &[usize]| (0..arity).all(|i| (i + 1..arity).all(|j| v[i] != v[j]));
        if !distinct(xs) || !distinct(ys) {
            continue;
        }
        let ok = edges.edges().iter().all(|&(i, j)| {
            space.dist(&pts[ys[i - 1]], &pts[ys[j - 1]])
                == f.mul(r, space.dist(&pts[xs[i - 1]], &pts[xs[j - 1]]))
        });
        count += ok as u128;
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tuple_counts_match_naive(
        set in small_set(5, 4),
        k in 1usize..=2,
        r_idx in 0usize..2,
        theta_idx in 0usize..8,
        shape in 0usize..3,
    ) {
        let f = set.field().clone();
        let r = f.squares_nonzero()[r_idx];
        let group = enumerate_orthogonal(&f, 2).unwrap();
        let theta = &group[theta_idx];
        let a = match shape {
            0 => EdgeSet::path(k).unwrap(),
            1 => EdgeSet::star(k).unwrap(),
            _ => EdgeSet::new(k, [(1, k + 1)]).unwrap(),
        };
        let mut variants = vec![TupleVariant::Lambda, TupleVariant::N, TupleVariant::NA(a)];
        variants.extend((1..=k + 1).flat_map(|x| (x + 1..=k + 1).map(move |y| TupleVariant::APair(x, y))));
        for v in &variants {
            let naive = naive_tuples(&set, r, theta, k, v);
            prop_assert_eq!(count_tuples(&set, r, theta, k, v).unwrap(), naive, "{:?}", v);
            prop_assert_eq!(
                count_tuples_direct(&set, r, theta, k, v, DEFAULT_NODE_GUARD).unwrap(),
                naive,
                "{:?}",
                v
            );
        }
    }

    #[test]
    fn s_a_matches_naive(set in small_set(5, 5), k in 1usize..=2, r_idx in 0usize..2, shape in 0usize..3) {
        let f = set.field().clone();
        let r = f.squares_nonzero()[r_idx];
        let a = match shape {
            0 => EdgeSet::path(k).unwrap(),
            1 => EdgeSet::complete(k).unwrap(),
            _ => EdgeSet::new(k, [(1, k + 1)]).unwrap(),
        };
        let naive = naive_s_a(&set, r, &a);
        prop_assert_eq!(count_s_a(&set, r, &a, DEFAULT_NODE_GUARD).unwrap(), naive);
        let found = find_dilated_pair_bruteforce(&set, r, &a, DEFAULT_NODE_GUARD).unwrap();
        prop_assert_eq!(found.witness().is_some(), naive > 0);
    }
}

#[test]
fn f3_cubed_orthogonal_group() {
    // Signed permutation matrices, 2^3 * 3!.
    let f = Field::with_order(3).unwrap();
    assert_eq!(enumerate_orthogonal(&f, 3).unwrap().len(), 48);
}
