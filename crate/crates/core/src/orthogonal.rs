//! The orthogonal group `O_d(F_q)`: matrices with `MᵀM = I`.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};
use crate::geometry::{Point, Space};

/// Brute-force enumeration is refused when `q^(d²)` exceeds this.
pub const ENUMERATION_GUARD: u64 = 1 << 24;

/// A `d x d` orthogonal matrix, entries row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OrthMatrix {
    dim: usize,
    entries: Vec<FieldElem>,
}

impl fmt::Debug for OrthMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<_> = self
            .entries
            .chunks(self.dim)
            .map(|r| r.iter().map(|e| e.rank()).collect::<Vec<_>>())
            .collect();
        write!(f, "OrthMatrix{rows:?}")
    }
}

impl OrthMatrix {
    /// Validates `MᵀM = I` before accepting the entries.
    pub fn new(field: &Field, dim: usize, entries: Vec<FieldElem>) -> Result<OrthMatrix> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        for &e in &entries {
            field.check(e)?;
        }
        let m = OrthMatrix { dim, entries };
        if !m.is_orthogonal(field) {
            return Err(Error::NotOrthogonal);
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> OrthMatrix {
        let mut entries = vec![FieldElem::ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = FieldElem::ONE;
        }
        OrthMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> FieldElem {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[FieldElem] {
        &self.entries
    }

    fn is_orthogonal(&self, field: &Field) -> bool {
        let d = self.dim;
        (0..d).all(|i| {
            (0..d).all(|j| {
                let dot = (0..d).fold(FieldElem::ZERO, |acc, k| {
                    field.add(acc, field.mul(self.entry(k, i), self.entry(k, j)))
                });
                dot == if i == j {
                    FieldElem::ONE
                } else {
                    FieldElem::ZERO
                }
            })
        })
    }

    pub fn transpose(&self) -> OrthMatrix {
        let d = self.dim;
        let entries = (0..d * d).map(|idx| self.entry(idx % d, idx / d)).collect();
        OrthMatrix { dim: d, entries }
    }

    pub fn compose(&self, field: &Field, other: &OrthMatrix) -> OrthMatrix {
        let d = self.dim;
        let entries = (0..d * d)
            .map(|idx| {
                let (i, j) = (idx / d, idx % d);
                (0..d).fold(FieldElem::ZERO, |acc, k| {
                    field.add(acc, field.mul(self.entry(i, k), other.entry(k, j)))
                })
            })
            .collect();
        OrthMatrix { dim: d, entries }
    }

    /// Matrix-vector product `θv`.
    pub fn apply(&self, space: &Space, v: &Point) -> Result<Point> {
        if v.dim() != self.dim || space.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        let f = space.field();
        let coords = self
            .entries
            .chunks(self.dim)
            .map(|row| {
                row.iter()
                    .zip(v.coords())
                    .fold(FieldElem::ZERO, |acc, (&m, &x)| f.add(acc, f.mul(m, x)))
            })
            .collect();
        Ok(Point::new(coords))
    }

    pub fn render(&self, field: &Field) -> Vec<Vec<String>> {
        self.entries
            .chunks(self.dim)
            .map(|r| r.iter().map(|&e| field.render(e)).collect())
            .collect()
    }
}

/// Solutions of `a² + b² = 1`, lexicographic in `(a, b)`.
pub fn unit_circle(field: &Field) -> Vec<(FieldElem, FieldElem)> {
    let mut out = Vec::new();
    for a in field.elements() {
        let need = field.sub(FieldElem::ONE, field.square(a));
        for b in field.elements() {
            if field.square(b) == need {
                out.push((a, b));
            }
        }
    }
    out
}

/// Every element of `O_d(F_q)` exactly once.
///
/// `d = 1` gives `[1], [-1]`. `d = 2` is parametrized by the unit circle:
/// rotations `[[a,-b],[b,a]]` first, then reflections `[[a,b],[b,-a]]`.
/// Larger `d` falls back to [`enumerate_orthogonal_bruteforce`].
pub fn enumerate_orthogonal(field: &Field, dim: usize) -> Result<Vec<OrthMatrix>> {
    match dim {
        0 => Err(Error::InvalidArgument(
            "dimension must be at least 1".into(),
        )),
        1 => Ok(vec![
            OrthMatrix {
                dim: 1,
                entries: vec![FieldElem::ONE],
            },
            OrthMatrix {
                dim: 1,
                entries: vec![field.neg(FieldElem::ONE)],
            },
        ]),
        2 => {
            let circle = unit_circle(field);
            let rotations = circle.iter().map(|&(a, b)| vec![a, field.neg(b), b, a]);
            let reflections = circle.iter().map(|&(a, b)| vec![a, b, b, field.neg(a)]);
            Ok(rotations
                .chain(reflections)
                .map(|entries| OrthMatrix { dim: 2, entries })
                .collect())
        }
        _ => enumerate_orthogonal_bruteforce(field, dim),
    }
}

/// Row-by-row search over all `d x d` matrices, keeping those whose rows are
/// orthonormal. Output is lexicographic in the row-major entries. Refused
/// when `q^(d²)` exceeds [`ENUMERATION_GUARD`].
pub fn enumerate_orthogonal_bruteforce(field: &Field, dim: usize) -> Result<Vec<OrthMatrix>> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "dimension must be at least 1".into(),
        ));
    }
    let cells = (field.order() as u128)
        .checked_pow((dim * dim) as u32)
        .unwrap_or(u128::MAX);
    if cells > ENUMERATION_GUARD as u128 {
        return Err(Error::GuardExceeded(format!(
            "q^(d^2) = {cells} matrices exceeds {ENUMERATION_GUARD}"
        )));
    }
    let space = Space::new(
        &Field::new(field.characteristic() as u64, field.degree())?,
        dim,
    )?;
    let dot = |x: &Point, y: &Point| {
        x.coords()
            .iter()
            .zip(y.coords())
            .fold(FieldElem::ZERO, |acc, (&a, &b)| {
                field.add(acc, field.mul(a, b))
            })
    };
    let units: Vec<Point> = space
        .points()
        .filter(|x| dot(x, x) == FieldElem::ONE)
        .collect();

    let mut out = Vec::new();
    let mut rows: Vec<usize> = Vec::with_capacity(dim);
    fn extend(
        units: &[Point],
        rows: &mut Vec<usize>,
        dim: usize,
        orthogonal: &dyn Fn(&Point, &Point) -> bool,
        out: &mut Vec<OrthMatrix>,
    ) {
        if rows.len() == dim {
            let entries = rows
                .iter()
                .flat_map(|&r| units[r].coords().iter().copied())
                .collect();
            out.push(OrthMatrix { dim, entries });
            return;
        }
        for cand in 0..units.len() {
            if rows.iter().all(|&r| orthogonal(&units[r], &units[cand])) {
                rows.push(cand);
                extend(units, rows, dim, orthogonal, out);
                rows.pop();
            }
        }
    }
    let orthogonal = |x: &Point, y: &Point| dot(x, y).is_zero();
    extend(&units, &mut rows, dim, &orthogonal, &mut out);
    Ok(out)
}
