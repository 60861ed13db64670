//! End-to-end acceptance run. Each criterion prints one PASS/FAIL line; the
//! process exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rayon::prelude::*;

use fqdilate::counting::{count_tuples, count_tuples_direct, verify_chain, TupleVariant};
use fqdilate::edges::EdgeSet;
use fqdilate::experiment::{
    run_quotient_check, run_threshold_sweep, sample_subset, trial_stream, ExperimentConfig,
    MethodChoice, QuotientConfig, QuotientPart,
};
use fqdilate::field::{Field, FieldElem};
use fqdilate::geometry::Space;
use fqdilate::orthogonal::{enumerate_orthogonal, enumerate_orthogonal_bruteforce};
use fqdilate::search::{
    find_congruent_tuple_translation, find_dilated_tuple_scaling, verify_witness,
    DEFAULT_NODE_GUARD,
};
use fqdilate::sharpness::{
    build_subfield_grid, build_unit_sphere, certify_all, certify_no_dilated, single_edges,
    sphere_intersection_bound, Construction,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn plane(q: u64) -> Space {
    Space::new(&Field::with_order(q).unwrap(), 2).unwrap()
}

/// Every square `r ≠ 0`.
fn squares(space: &Space) -> Vec<FieldElem> {
    space.field().squares_nonzero()
}

fn chain_inequalities() -> Outcome {
    let mut cells = Vec::new();
    for q in [5u64, 7, 9] {
        for k in [1usize, 2] {
            let shapes = [
                ("single", Some(EdgeSet::new(k, [(1, 2)]).unwrap())),
                ("path", Some(EdgeSet::path(k).unwrap())),
                ("triangle", (k >= 2).then(|| EdgeSet::complete(2).unwrap())),
            ];
            for (name, a) in shapes {
                if let Some(a) = a {
                    cells.push((q, k, name, a));
                }
            }
        }
    }
    let checks: usize = cells
        .par_iter()
        .map(|(q, k, name, a)| {
            let space = plane(*q);
            (0..25)
                .into_par_iter()
                .map(|i| {
                    let size = 4 + i % 7;
                    let set = sample_subset(&space, size, 1, trial_stream(size, i)).unwrap();
                    let mut n = 0;
                    for r in squares(&space) {
                        let report = verify_chain(&set, r, a, DEFAULT_NODE_GUARD)
                            .map_err(|e| format!("q={q} k={k} {name}: {e}"))?;
                        ensure(report.flags.core_pass(), || {
                            format!(
                                "q={q} k={k} {name} |E|={size} r={}: {:?}",
                                report.r, report.flags
                            )
                        })?;
                        n += 1;
                    }
                    Ok(n)
                })
                .sum::<Result<usize, String>>()
        })
        .sum::<Result<usize, String>>()?;
    Ok(format!(
        "{} cells, {checks} (E, r) instances, all five inequalities exact",
        cells.len()
    ))
}

fn main_theorem() -> Outcome {
    let mut cells = Vec::new();
    for q in [7u64, 11, 13] {
        for k in [1usize, 2] {
            cells.push((q, k, "path"));
            cells.push((q, k, "star"));
            if k >= 2 {
                cells.push((q, k, "cycle"));
            }
        }
        cells.push((q, 3, "cycle"));
    }
    let mut rows = 0usize;
    for &(q, k, edges) in &cells {
        let mut cfg = ExperimentConfig::new(q, 1, 2, k);
        cfg.edges = edges.into();
        cfg.sizes = vec![2 * k * q as usize];
        cfg.trials = 500;
        cfg.seed = 2;
        cfg.method = MethodChoice::Auto;
        let records = run_threshold_sweep(&cfg).map_err(|e| format!("q={q} k={k} {edges}: {e}"))?;
        let found = records.iter().filter(|r| r.succeeded()).count();
        ensure(found == records.len(), || {
            format!(
                "q={q} k={k} {edges}: {found}/{} trials found a witness",
                records.len()
            )
        })?;
        rows += records.len();
    }
    Ok(format!(
        "{} cells, {rows} (E, r) trials, every witness re-verified",
        cells.len()
    ))
}

fn constructive_guarantees() -> Outcome {
    let k = 1;
    let mut runs = 0;
    for q in [7u64, 11] {
        let space = plane(q);
        let one = space.field().one();
        let path = EdgeSet::complete(k).unwrap();
        let t_size = (k + 3) * q as usize;
        let mut s_size = 1usize;
        while (s_size * s_size) < (k + 2) * (q * q) as usize {
            s_size += 1;
        }
        for trial in 0..200 {
            let set = sample_subset(&space, t_size, 3, trial_stream(t_size, trial)).unwrap();
            let report = find_congruent_tuple_translation(&set, k).map_err(|e| e.to_string())?;
            let w = report
                .witness()
                .ok_or_else(|| format!("translation failed q={q} trial={trial}"))?;
            ensure(verify_witness(&space, w, &path, one), || {
                format!("bad translation witness q={q}")
            })?;
            let set = sample_subset(&space, s_size, 4, trial_stream(s_size, trial)).unwrap();
            for r in squares(&space).into_iter().filter(|&r| r != one) {
                let report = find_dilated_tuple_scaling(&set, r, k).map_err(|e| e.to_string())?;
                let w = report
                    .witness()
                    .ok_or_else(|| format!("scaling failed q={q} trial={trial} r={}", r.rank()))?;
                ensure(verify_witness(&space, w, &path, r), || {
                    format!("bad scaling witness q={q}")
                })?;
                runs += 1;
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} constructive searches, zero failures"))
}

fn sharpness_certificates() -> Outcome {
    let grid = build_subfield_grid(3, 1).map_err(|e| e.to_string())?;
    let mut shapes = single_edges(1).unwrap();
    shapes.extend(single_edges(2).unwrap());
    let grid_label = Construction::SubfieldGrid { p: 3, ell: 1 };
    let certs = certify_all(
        grid_label,
        &grid.set,
        &grid.admissible_r,
        &shapes,
        DEFAULT_NODE_GUARD,
    )
    .map_err(|e| e.to_string())?;
    ensure(certs.iter().all(|c| c.valid()), || {
        format!("grid certificate invalid: {certs:?}")
    })?;
    let mut total = certs.len();
    let tri = EdgeSet::complete(2).unwrap();
    for q in [7u64, 11] {
        let start = Instant::now();
        let sphere = build_unit_sphere(q).map_err(|e| e.to_string())?;
        let f = sphere.field().clone();
        let ratios: Vec<_> = f
            .squares_nonzero()
            .into_iter()
            .filter(|&r| r != f.one())
            .collect();
        let label = Construction::UnitSphere { q: q as u32 };
        let certs = certify_all(label, &sphere, &ratios, std::slice::from_ref(&tri), DEFAULT_NODE_GUARD)
            .map_err(|e| e.to_string())?;
        ensure(certs.iter().all(|c| c.valid()), || {
            format!("sphere q={q} certificate invalid: {certs:?}")
        })?;
        ensure(start.elapsed().as_secs() < 60, || {
            format!("sphere q={q} took {:?}", start.elapsed())
        })?;
        let control = certify_no_dilated(label, &sphere, f.one(), &tri, DEFAULT_NODE_GUARD)
            .map_err(|e| e.to_string())?;
        ensure(control.exhausted && control.witness_found, || {
            format!("q={q} control found nothing")
        })?;
        total += certs.len();
    }
    Ok(format!(
        "{total} certificates valid; r = 1 control finds a witness"
    ))
}

fn sphere_and_group_sizes() -> Outcome {
    for q in [7u64, 11] {
        let n = build_unit_sphere(q).map_err(|e| e.to_string())?.len();
        ensure(n as u64 == q + 1, || format!("|sphere| = {n} for q = {q}"))?;
    }
    let mut orders = Vec::new();
    for q in [3u64, 5, 7, 9, 11] {
        let f = Field::with_order(q).unwrap();
        let param: BTreeSet<Vec<FieldElem>> = enumerate_orthogonal(&f, 2)
            .unwrap()
            .iter()
            .map(|m| m.entries().to_vec())
            .collect();
        let brute: BTreeSet<Vec<FieldElem>> = enumerate_orthogonal_bruteforce(&f, 2)
            .unwrap()
            .iter()
            .map(|m| m.entries().to_vec())
            .collect();
        ensure(param == brute, || {
            format!("O_2(F_{q}) mismatch: {} vs {}", param.len(), brute.len())
        })?;
        orders.push(format!("{q}:{}", param.len()));
    }
    Ok(format!("sphere sizes q+1; |O_2| {}", orders.join(" ")))
}

fn sphere_intersections() -> Outcome {
    let mut maxima = Vec::new();
    for q in [3u64, 7, 11] {
        let report =
            sphere_intersection_bound(&Field::with_order(q).unwrap()).map_err(|e| e.to_string())?;
        ensure(report.at_most_two(), || {
            format!("q={q}: {} common points", report.max_intersection)
        })?;
        maxima.push(format!("q={q} max {}", report.max_intersection));
    }
    Ok(maxima.join(", "))
}

fn quotient_sets() -> Outcome {
    let mut done = Vec::new();
    for q in [5u64, 7] {
        let cfg = QuotientConfig {
            p: q,
            ell: 1,
            d: 2,
            size: Some(9 * q as usize),
            trials: 100,
            seed: 5,
            part: QuotientPart::Full,
        };
        let report = run_quotient_check(&cfg).map_err(|e| format!("q={q}, |E|={}: {e}", 9 * q))?;
        ensure(report.all_pass(), || {
            format!("q={q}: failed trials {:?}", report.failures)
        })?;
        done.push(format!("q={q} 100/100"));
    }
    Ok(done.join(", "))
}

fn oracle_equivalence() -> Outcome {
    let mut compared = 0;
    for i in 0..50usize {
        let q = if i % 2 == 0 { 3 } else { 5 };
        let k = 1 + (i / 2) % 2;
        let size = 1 + i % 6;
        let space = plane(q);
        let set = sample_subset(&space, size, 8, trial_stream(size, i)).unwrap();
        let f = space.field();
        let sq = f.squares_nonzero();
        let r = sq[i % sq.len()];
        let group = enumerate_orthogonal(f, 2).unwrap();
        let theta = &group[i % group.len()];
        let mut variants = vec![TupleVariant::Lambda];
        variants.extend(
            (1..=k + 1).flat_map(|a| (a + 1..=k + 1).map(move |b| TupleVariant::APair(a, b))),
        );
        for v in variants {
            let closed = count_tuples(&set, r, theta, k, &v).map_err(|e| e.to_string())?;
            let direct = count_tuples_direct(&set, r, theta, k, &v, DEFAULT_NODE_GUARD)
                .map_err(|e| e.to_string())?;
            ensure(closed == direct, || {
                format!("instance {i} {v:?}: {closed} vs {direct}")
            })?;
            compared += 1;
        }
    }
    Ok(format!(
        "50 instances, {compared} closed forms match enumeration"
    ))
}

fn scratch_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_fqdilate");
    let dir = scratch_dir();
    let config = dir.join("sweep.json");
    std::fs::write(
        &config,
        r#"{"p": 7, "k": 1, "edges": "path", "sizes": [4, 8, 14], "trials": 20, "seed": 9}"#,
    )
    .unwrap();
    let config = config.to_str().unwrap().to_string();
    let commands: Vec<(&str, Vec<String>)> = vec![
        (
            "sweep-csv",
            vec![
                "sweep",
                "--q",
                "7",
                "--sizes",
                "4,8,14,20",
                "--trials",
                "25",
                "--seed",
                "1",
                "--format",
                "csv",
            ],
        ),
        (
            "sweep-json",
            vec![
                "sweep",
                "--config",
                &config,
                "--format",
                "json",
                "--parallel",
                "3",
            ],
        ),
        (
            "verify",
            vec![
                "verify",
                "--q",
                "5",
                "--k",
                "2",
                "--edges",
                "path",
                "--r",
                "all-squares",
                "--set",
                "random:7:3",
            ],
        ),
        (
            "search",
            vec![
                "search",
                "--q",
                "7",
                "--k",
                "2",
                "--shape",
                "cycle",
                "--set",
                "random:12:4",
            ],
        ),
        (
            "sharpness-grid",
            vec![
                "sharpness",
                "--construction",
                "grid",
                "--p",
                "3",
                "--ell",
                "1",
            ],
        ),
        (
            "sharpness-sphere",
            vec!["sharpness", "--construction", "sphere", "--q", "7"],
        ),
        ("ortho", vec!["ortho", "--q", "5", "--list"]),
        (
            "quotient",
            vec!["quotient", "--q", "11", "--trials", "10", "--seed", "2"],
        ),
    ]
    .into_iter()
    .map(|(n, a)| (n, a.into_iter().map(String::from).collect()))
    .collect();
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.join(format!("{name}-{run}.out"));
            let status = Command::new(bin)
                .args(args)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| format!("{name}: {e}"))?;
            ensure(status.success(), || format!("{name} exited with {status}"))?;
            outputs.push(std::fs::read(&out).unwrap());
        }
        ensure(!outputs[0].is_empty(), || format!("{name} wrote nothing"))?;
        ensure(outputs[0] == outputs[1], || {
            format!("{name} output differs between runs")
        })?;
    }
    Ok(format!(
        "{} commands byte-identical across two runs",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("inequality chain", chain_inequalities),
        ("threshold theorem", main_theorem),
        ("constructive finders", constructive_guarantees),
        ("sharpness certificates", sharpness_certificates),
        ("sphere and group sizes", sphere_and_group_sizes),
        ("sphere intersections", sphere_intersections),
        ("quotient sets", quotient_sets),
        ("oracle equivalence", oracle_equivalence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
