//! Seeded random sampling, threshold sweeps and quotient-set checks.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edges::EdgeSet;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};
use crate::geometry::{quotient_set, PointSet, Space};
use crate::search::{
    find_congruent_tuple_translation, find_dilated_pair_bruteforce, find_dilated_tuple_scaling,
    verify_witness, Method, SearchOutcome, SearchReport, DEFAULT_NODE_GUARD,
};

/// Which finder the sweep runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    /// Translation for `r = 1`, scaling otherwise, brute force when the set
    /// is too small for either.
    #[default]
    Auto,
    Bruteforce,
    Translation,
    Scaling,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "bruteforce" => Ok(MethodChoice::Bruteforce),
            "translation" => Ok(MethodChoice::Translation),
            "scaling" => Ok(MethodChoice::Scaling),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

fn default_ell() -> u32 {
    1
}
fn default_d() -> usize {
    2
}
fn default_k() -> usize {
    1
}
fn default_edges() -> String {
    "path".into()
}
fn default_r() -> String {
    "all-squares".into()
}
fn default_guard() -> u64 {
    DEFAULT_NODE_GUARD
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub p: u64,
    #[serde(default = "default_ell")]
    pub ell: u32,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    /// `path`, `star`, `cycle`, `complete`, `triangle` or `edges:1-2,...`.
    /// A cycle runs through all `k + 1` vertices.
    #[serde(default = "default_edges")]
    pub edges: String,
    /// `all-squares`, `auto` or one field element.
    #[serde(default = "default_r")]
    pub r: String,
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default = "default_guard")]
    pub guard_nodes: u64,
    /// Fill the `micros` column with wall-clock times. Off by default so
    /// that output is reproducible byte for byte.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(p: u64, ell: u32, d: usize, k: usize) -> Self {
        ExperimentConfig {
            p,
            ell,
            d,
            k,
            edges: default_edges(),
            r: default_r(),
            sizes: Vec::new(),
            trials: 0,
            seed: 0,
            method: MethodChoice::Auto,
            guard_nodes: DEFAULT_NODE_GUARD,
            timing: false,
        }
    }

    pub fn space(&self) -> Result<Space> {
        Space::new(&Field::new(self.p, self.ell)?, self.d)
    }

    pub fn edge_set(&self) -> Result<EdgeSet> {
        edge_set(&self.edges, self.k)
    }
}

/// Parses an edge spec for `k + 1` vertices; `cycle` closes through all of them.
pub fn edge_set(spec: &str, k: usize) -> Result<EdgeSet> {
    let edges = if spec.trim() == "cycle" {
        EdgeSet::cycle(k + 1)?
    } else {
        EdgeSet::parse(spec, k)?
    };
    if edges.k() != k {
        return Err(Error::InvalidEdges(format!(
            "{spec:?} spans {} vertices, expected {}",
            edges.arity(),
            k + 1
        )));
    }
    Ok(edges)
}

/// Resolves `all-squares`, `auto` (smallest nonzero square other than 1,
/// or 1 when there is none) or a single element, checked to be a nonzero
/// square.
pub fn resolve_ratios(field: &Field, spec: &str) -> Result<Vec<FieldElem>> {
    let squares = field.squares_nonzero();
    match spec.trim() {
        "all-squares" => Ok(squares),
        "auto" => Ok(vec![squares
            .iter()
            .copied()
            .find(|&r| r != field.one())
            .unwrap_or(field.one())]),
        text => {
            let r = field.parse(text)?;
            if r.is_zero() || !field.is_square(r) {
                return Err(Error::NotASquare(field.render(r)));
            }
            Ok(vec![r])
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream index for trial `trial` at size `size`.
pub fn trial_stream(size: usize, trial: usize) -> u64 {
    splitmix(splitmix(size as u64) ^ trial as u64)
}

/// A uniformly random `size`-subset of the space: partial Fisher–Yates over
/// point ranks, driven by ChaCha8 seeded with `seed` on stream `stream`.
pub fn sample_subset(space: &Space, size: usize, seed: u64, stream: u64) -> Result<PointSet> {
    let n = space.size() as usize;
    if size == 0 || size > n {
        return Err(Error::InvalidArgument(format!(
            "sample size {size} outside 1..={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut swapped: HashMap<u32, u32> = HashMap::new();
    let mut chosen = Vec::with_capacity(size);
    for i in 0..size as u32 {
        let j = rng.gen_range(i..n as u32);
        let at_j = *swapped.get(&j).unwrap_or(&j);
        let at_i = *swapped.get(&i).unwrap_or(&i);
        swapped.insert(j, at_i);
        chosen.push(at_j);
    }
    PointSet::from_ranks(space, chosen)
}

/// `|E| ≥ 2k q^{d/2}`, compared as `|E|² ≥ 4k² q^d`.
pub fn above_threshold(size: usize, k: usize, q: u64, d: usize) -> bool {
    let lhs = (size as u128).pow(2);
    (4 * (k as u128).pow(2))
        .checked_mul((q as u128).pow(d as u32))
        .is_some_and(|rhs| lhs >= rhs)
}

/// `|E|² ≥ (k+3)² q^d`.
pub fn translation_applies(size: usize, k: usize, q: u64, d: usize) -> bool {
    (size as u128).pow(2) >= ((k as u128) + 3).pow(2) * (q as u128).pow(d as u32)
}

/// `|E|² ≥ (k+2) q^d`.
pub fn scaling_applies(size: usize, k: usize, q: u64, d: usize) -> bool {
    (size as u128).pow(2) >= ((k as u128) + 2) * (q as u128).pow(d as u32)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub q: u32,
    pub d: usize,
    pub k: usize,
    pub edges: String,
    pub r: String,
    pub size: usize,
    pub trial: usize,
    pub method: String,
    /// `true`, `false`, or `GUARD` when the node budget ran out.
    pub found: String,
    pub nodes: u64,
    pub micros: u64,
}

impl TrialRecord {
    pub fn succeeded(&self) -> bool {
        self.found == "true"
    }

    pub fn guard(&self) -> bool {
        self.found == "GUARD"
    }
}

pub const CSV_HEADER: [&str; 11] = [
    "q", "d", "k", "edges", "r", "size", "trial", "method", "found", "nodes", "micros",
];

/// Runs the chosen finder on `(E, r)`. `Auto` falls back to brute force
/// when a constructive finder does not apply or comes back empty.
pub fn run_method(
    set: &PointSet,
    r: FieldElem,
    edges: &EdgeSet,
    choice: MethodChoice,
    node_guard: u64,
) -> Result<(Method, SearchReport)> {
    let q = set.field().order() as u64;
    let d = set.space().dim();
    let k = edges.k();
    let is_one = r == set.field().one();
    let brute = || find_dilated_pair_bruteforce(set, r, edges, node_guard);
    match choice {
        MethodChoice::Bruteforce => Ok((Method::Bruteforce, brute()?)),
        MethodChoice::Translation => {
            if !is_one {
                return Err(Error::InvalidArgument("translation needs r = 1".into()));
            }
            Ok((
                Method::Translation,
                find_congruent_tuple_translation(set, k)?,
            ))
        }
        MethodChoice::Scaling => Ok((Method::Scaling, find_dilated_tuple_scaling(set, r, k)?)),
        MethodChoice::Auto => {
            let constructive = if is_one && translation_applies(set.len(), k, q, d) {
                Some((
                    Method::Translation,
                    find_congruent_tuple_translation(set, k)?,
                ))
            } else if !is_one && scaling_applies(set.len(), k, q, d) {
                Some((Method::Scaling, find_dilated_tuple_scaling(set, r, k)?))
            } else {
                None
            };
            match constructive {
                Some((m, report)) if report.witness().is_some() => Ok((m, report)),
                Some((_, report)) => {
                    let mut fallback = brute()?;
                    fallback.nodes += report.nodes;
                    Ok((Method::Bruteforce, fallback))
                }
                None => Ok((Method::Bruteforce, brute()?)),
            }
        }
    }
}

fn run_trial(
    config: &ExperimentConfig,
    space: &Space,
    edges: &EdgeSet,
    ratios: &[FieldElem],
    size: usize,
    trial: usize,
) -> Result<Vec<TrialRecord>> {
    let set = sample_subset(space, size, config.seed, trial_stream(size, trial))?;
    let field = space.field();
    let q = field.order() as u64;
    let mut rows = Vec::with_capacity(ratios.len());
    for &r in ratios {
        let start = Instant::now();
        let (method, report) = run_method(&set, r, edges, config.method, config.guard_nodes)?;
        let micros = if config.timing {
            start.elapsed().as_micros() as u64
        } else {
            0
        };
        let found = match &report.outcome {
            SearchOutcome::Found(w) => {
                if !verify_witness(space, w, edges, r) {
                    return Err(Error::Falsified(format!(
                        "{} returned an invalid witness (size {size}, trial {trial}, r {})",
                        method.name(),
                        field.render(r)
                    )));
                }
                "true"
            }
            SearchOutcome::NoWitness => {
                let exhaustive = method == Method::Bruteforce;
                let guaranteed = match method {
                    Method::Bruteforce => above_threshold(size, edges.k(), q, space.dim()),
                    Method::Translation => translation_applies(size, edges.k(), q, space.dim()),
                    Method::Scaling => scaling_applies(size, edges.k(), q, space.dim()),
                };
                if guaranteed {
                    return Err(Error::Falsified(format!(
                        "{} found nothing at size {size} (trial {trial}, r {}){}",
                        method.name(),
                        field.render(r),
                        if exhaustive {
                            " after exhaustive search"
                        } else {
                            ""
                        }
                    )));
                }
                "false"
            }
            SearchOutcome::GuardExceeded => "GUARD",
        };
        rows.push(TrialRecord {
            q: field.order(),
            d: space.dim(),
            k: edges.k(),
            edges: config.edges.clone(),
            r: field.render(r),
            size,
            trial,
            method: method.name().into(),
            found: found.into(),
            nodes: report.nodes,
            micros,
        });
    }
    Ok(rows)
}

/// Every `(size, trial, r)` row of the sweep, in that order. Aborts with
/// [`Error::Falsified`] when a guaranteed search comes back empty.
pub fn run_threshold_sweep(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let space = config.space()?;
    let edges = config.edge_set()?;
    let ratios = resolve_ratios(space.field(), &config.r)?;
    for &size in &config.sizes {
        if size == 0 || size > space.size() as usize {
            return Err(Error::InvalidArgument(format!(
                "size {size} outside 1..={}",
                space.size()
            )));
        }
    }
    let jobs: Vec<(usize, usize)> = config
        .sizes
        .iter()
        .flat_map(|&s| (0..config.trials).map(move |t| (s, t)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(size, trial)| run_trial(config, &space, &edges, &ratios, size, trial))
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Renders rows as CSV with the fixed header.
pub fn records_to_csv(records: &[TrialRecord]) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    writer
        .write_record(CSV_HEADER)
        .map_err(|e| Error::Parse(e.to_string()))?;
    for rec in records {
        writer
            .serialize(rec)
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub size: usize,
    pub rows: usize,
    pub found: usize,
    pub guard: usize,
    pub success_rate: f64,
    pub above_threshold: bool,
}

/// Per-size success rates, sizes in first-seen order.
pub fn summarize(records: &[TrialRecord]) -> Vec<SizeSummary> {
    let mut out: Vec<SizeSummary> = Vec::new();
    for rec in records {
        let idx = match out.iter().position(|s| s.size == rec.size) {
            Some(i) => i,
            None => {
                out.push(SizeSummary {
                    size: rec.size,
                    rows: 0,
                    found: 0,
                    guard: 0,
                    success_rate: 0.0,
                    above_threshold: above_threshold(rec.size, rec.k, rec.q as u64, rec.d),
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        s.rows += 1;
        s.found += rec.succeeded() as usize;
        s.guard += rec.guard() as usize;
    }
    for s in &mut out {
        s.success_rate = s.found as f64 / s.rows as f64;
    }
    out
}

/// Which half of the quotient-set statement to check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuotientPart {
    /// Even `d`, `|E| ≥ 9 q^{d/2}`: the quotient set is all of `F_q`.
    #[default]
    Full,
    /// Odd `d ≥ 3`, `|E| ≥ 6 q^{d/2}`: the quotient set contains every square.
    Squares,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientConfig {
    pub p: u64,
    #[serde(default = "default_ell")]
    pub ell: u32,
    #[serde(default = "default_d")]
    pub d: usize,
    /// Defaults to the smallest size the statement covers.
    #[serde(default)]
    pub size: Option<usize>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub part: QuotientPart,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientReport {
    pub q: u32,
    pub d: usize,
    pub size: usize,
    pub trials: usize,
    pub part: QuotientPart,
    pub passed: usize,
    /// Trials whose quotient set missed a required element.
    pub failures: Vec<usize>,
}

impl QuotientReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Smallest `n` with `n² ≥ c² q^d`.
fn min_size(c: u64, q: u64, d: usize) -> usize {
    let target = (c as u128).pow(2) * (q as u128).pow(d as u32);
    let mut n = (target as f64).sqrt() as u128;
    while n * n < target {
        n += 1;
    }
    while n > 0 && (n - 1) * (n - 1) >= target {
        n -= 1;
    }
    n as usize
}

/// Samples sets at or above the size bound and checks the quotient set of
/// their distance sets.
pub fn run_quotient_check(config: &QuotientConfig) -> Result<QuotientReport> {
    let field = Field::new(config.p, config.ell)?;
    let q = field.order() as u64;
    let d = config.d;
    let c = match config.part {
        QuotientPart::Full if d.is_multiple_of(2) && d >= 2 => 9,
        QuotientPart::Squares if d % 2 == 1 && d >= 3 => 6,
        QuotientPart::Full => {
            return Err(Error::InvalidArgument(format!(
                "d = {d} must be even and at least 2"
            )))
        }
        QuotientPart::Squares => {
            return Err(Error::InvalidArgument(format!(
                "d = {d} must be odd and at least 3"
            )))
        }
    };
    let bound = min_size(c, q, d);
    let size = config.size.unwrap_or(bound);
    if size < bound {
        return Err(Error::InvalidArgument(format!(
            "size {size} is below the bound {bound}"
        )));
    }
    let space = Space::new(&field, d)?;
    let required: BTreeSet<FieldElem> = match config.part {
        QuotientPart::Full => field.elements().collect(),
        QuotientPart::Squares => field.elements().map(|a| field.square(a)).collect(),
    };
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let set = sample_subset(&space, size, config.seed, trial_stream(size, t))?;
            Ok(quotient_set(&set)?.is_superset(&required))
        })
        .collect::<Result<Vec<bool>>>()?;
    let failures: Vec<usize> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, &ok)| !ok)
        .map(|(t, _)| t)
        .collect();
    Ok(QuotientReport {
        q: field.order(),
        d,
        size,
        trials: config.trials,
        part: config.part,
        passed: config.trials - failures.len(),
        failures,
    })
}
