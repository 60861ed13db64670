//! Points and finite point sets in `F_q^d`, together with the quadratic
//! "norm" `x_1^2 + ... + x_d^2` and the sets built from it.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};

/// Largest ambient space `q^d` accepted by [`Space::new`].
pub const MAX_SPACE_SIZE: u64 = 1 << 24;

/// A vector in `F_q^d`. Ordering is lexicographic on coordinates, first
/// coordinate most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<FieldElem>);

impl Point {
    pub fn new(coords: Vec<FieldElem>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[FieldElem] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<FieldElem>> for Point {
    fn from(coords: Vec<FieldElem>) -> Self {
        Point(coords)
    }
}

/// The ambient space `F_q^d`.
#[derive(Clone, Debug)]
pub struct Space {
    field: Arc<Field>,
    dim: usize,
    size: u32,
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.field.same_as(&other.field)
    }
}

impl Space {
    pub fn new(field: &Arc<Field>, dim: usize) -> Result<Space> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "dimension must be at least 1".into(),
            ));
        }
        let size = (field.order() as u128)
            .checked_pow(dim as u32)
            .unwrap_or(u128::MAX);
        if size > MAX_SPACE_SIZE as u128 {
            return Err(Error::SpaceTooLarge(size, MAX_SPACE_SIZE));
        }
        Ok(Space {
            field: Arc::clone(field),
            dim,
            size: size as u32,
        })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points, `q^d`.
    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn check(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        for &c in x.coords() {
            self.field.check(c)?;
        }
        Ok(())
    }

    /// Position of `x` in the lexicographic enumeration of `F_q^d`.
    pub fn rank(&self, x: &Point) -> u32 {
        let q = self.field.order();
        x.0.iter().fold(0, |acc, c| acc * q + c.rank())
    }

    pub fn point(&self, rank: u32) -> Point {
        let q = self.field.order();
        let mut coords = vec![FieldElem::ZERO; self.dim];
        let mut rest = rank;
        for slot in coords.iter_mut().rev() {
            *slot = FieldElem::from_rank(rest % q);
            rest /= q;
        }
        Point(coords)
    }

    /// Every point of `F_q^d` in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.size).map(|r| self.point(r))
    }

    pub fn origin(&self) -> Point {
        Point(vec![FieldElem::ZERO; self.dim])
    }

    /// `‖x‖ = x_1^2 + ... + x_d^2`.
    pub fn norm(&self, x: &Point) -> FieldElem {
        let f = &self.field;
        x.0.iter()
            .fold(FieldElem::ZERO, |acc, &c| f.add(acc, f.square(c)))
    }

    pub fn add(&self, x: &Point, y: &Point) -> Point {
        Point(
            x.0.iter()
                .zip(&y.0)
                .map(|(&a, &b)| self.field.add(a, b))
                .collect(),
        )
    }

    pub fn sub(&self, x: &Point, y: &Point) -> Point {
        Point(
            x.0.iter()
                .zip(&y.0)
                .map(|(&a, &b)| self.field.sub(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, t: FieldElem, x: &Point) -> Point {
        Point(x.0.iter().map(|&a| self.field.mul(t, a)).collect())
    }

    /// `‖x - y‖`.
    pub fn dist(&self, x: &Point, y: &Point) -> FieldElem {
        let f = &self.field;
        x.0.iter().zip(&y.0).fold(FieldElem::ZERO, |acc, (&a, &b)| {
            f.add(acc, f.square(f.sub(a, b)))
        })
    }

    pub fn render(&self, x: &Point) -> String {
        let parts: Vec<String> = x.0.iter().map(|&c| self.field.render(c)).collect();
        parts.join(",")
    }

    /// Parses the output of [`Space::render`].
    pub fn parse_point(&self, text: &str) -> Result<Point> {
        let text = text.trim();
        let pieces: Vec<&str> = if text.contains('(') {
            let mut out = Vec::new();
            let mut rest = text;
            while let Some(start) = rest.find('(') {
                let end = rest[start..]
                    .find(')')
                    .ok_or_else(|| Error::Parse(format!("unbalanced parenthesis in {text:?}")))?;
                out.push(&rest[start..start + end + 1]);
                rest = &rest[start + end + 1..];
            }
            out
        } else {
            text.split(',').collect()
        };
        let coords = pieces
            .iter()
            .map(|c| self.field.parse(c))
            .collect::<Result<Vec<_>>>()?;
        let point = Point(coords);
        self.check(&point)?;
        Ok(point)
    }
}

/// A finite subset of `F_q^d`, kept sorted and deduplicated.
#[derive(Clone, Debug)]
pub struct PointSet {
    space: Space,
    points: Vec<Point>,
    index: HashMap<Point, usize>,
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.points == other.points
    }
}

impl PointSet {
    pub fn new(space: &Space, points: impl IntoIterator<Item = Point>) -> Result<PointSet> {
        let mut points: Vec<Point> = points.into_iter().collect();
        for x in &points {
            space.check(x)?;
        }
        points.sort_unstable();
        points.dedup();
        let index = points
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, x)| (x, i))
            .collect();
        Ok(PointSet {
            space: space.clone(),
            points,
            index,
        })
    }

    pub fn from_ranks(space: &Space, ranks: impl IntoIterator<Item = u32>) -> Result<PointSet> {
        let points = ranks
            .into_iter()
            .map(|r| {
                if r < space.size() {
                    Ok(space.point(r))
                } else {
                    Err(Error::InvalidArgument(format!(
                        "point rank {r} outside space"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        PointSet::new(space, points)
    }

    /// All of `F_q^d`.
    pub fn full(space: &Space) -> PointSet {
        PointSet::new(space, space.points()).expect("points of the space are valid")
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn field(&self) -> &Arc<Field> {
        self.space.field()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.index.contains_key(x)
    }

    pub fn position(&self, x: &Point) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn ranks(&self) -> Vec<u32> {
        self.points.iter().map(|x| self.space.rank(x)).collect()
    }

    /// `E + t`.
    pub fn translate(&self, t: &Point) -> Result<PointSet> {
        self.space.check(t)?;
        PointSet::new(
            &self.space,
            self.points.iter().map(|x| self.space.add(x, t)),
        )
    }

    /// `tE`.
    pub fn dilate(&self, t: FieldElem) -> Result<PointSet> {
        self.field().check(t)?;
        PointSet::new(
            &self.space,
            self.points.iter().map(|x| self.space.scale(t, x)),
        )
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let points = self.points.iter().filter(|x| other.contains(x)).cloned();
        PointSet::new(&self.space, points).expect("subset of a valid set")
    }

    /// Row-major `n x n` table of `‖x_i - x_j‖` over the sorted members.
    pub fn norm_table(&self) -> Vec<FieldElem> {
        let n = self.len();
        let mut table = vec![FieldElem::ZERO; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = self.space.dist(&self.points[i], &self.points[j]);
                table[i * n + j] = d;
                table[j * n + i] = d;
            }
        }
        table
    }

    /// Text form: a `q=<p>^<ell> d=<d>` header, then one point per line.
    pub fn to_text(&self) -> String {
        let f = self.field();
        let mut out = format!(
            "q={}^{} d={}\n",
            f.characteristic(),
            f.degree(),
            self.space.dim()
        );
        for x in &self.points {
            let _ = writeln!(out, "{}", self.space.render(x));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PointSet> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header line".into()))?;
        let (mut p, mut ell, mut dim) = (None, None, None);
        for token in header.split_whitespace() {
            if let Some(v) = token.strip_prefix("q=") {
                let (a, b) = v
                    .split_once('^')
                    .ok_or_else(|| Error::Parse(format!("expected q=<p>^<ell>, got {token:?}")))?;
                p = a.parse::<u64>().ok();
                ell = b.parse::<u32>().ok();
            } else if let Some(v) = token.strip_prefix("d=") {
                dim = v.parse::<usize>().ok();
            }
        }
        let (Some(p), Some(ell), Some(dim)) = (p, ell, dim) else {
            return Err(Error::Parse(format!("malformed header {header:?}")));
        };
        let field = Field::new(p, ell)?;
        let space = Space::new(&field, dim)?;
        let points = lines
            .map(|l| space.parse_point(l))
            .collect::<Result<Vec<_>>>()?;
        PointSet::new(&space, points)
    }
}

/// `Δ(E) = {‖x - y‖ : x, y ∈ E}`; contains 0 because `x = y` is allowed.
pub fn distance_set(set: &PointSet) -> Result<BTreeSet<FieldElem>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut seen = vec![false; set.field().order() as usize];
    seen[0] = true;
    for d in set.norm_table() {
        seen[d.rank() as usize] = true;
    }
    Ok(set
        .field()
        .elements()
        .filter(|a| seen[a.rank() as usize])
        .collect())
}

/// `Δ(E)/Δ(E)`, ratios with nonzero denominator.
pub fn quotient_set(set: &PointSet) -> Result<BTreeSet<FieldElem>> {
    let field = set.field();
    let distances = distance_set(set)?;
    let mut out = BTreeSet::new();
    for &den in distances.iter().filter(|d| !d.is_zero()) {
        let inv = field.inv(den)?;
        for &num in &distances {
            out.insert(field.mul(num, inv));
        }
    }
    Ok(out)
}

/// `{x ∈ F_q^d : ‖x - center‖ = radius}` by full enumeration.
pub fn sphere(space: &Space, center: &Point, radius: FieldElem) -> Result<PointSet> {
    space.check(center)?;
    space.field().check(radius)?;
    let members = space.points().filter(|x| space.dist(x, center) == radius);
    PointSet::new(space, members)
}
