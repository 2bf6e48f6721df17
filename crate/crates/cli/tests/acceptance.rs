//! One test per acceptance criterion. Each prints a single verdict line
//! straight to stderr so it shows up even when output is captured.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use signrange::density::{density, holder_check, IndexSet};
use signrange::moran::{attractor_grid_fill, synthetic_two_ratio_system, TwoRatioSystem};
use signrange::oracle::{epsilon_net_coverage, exact_range, min_prefix_discrepancy, transform_equivariance_check};
use signrange::ratio::nonsummability_profile;
use signrange::selection::{bounded_signs, combine5, greedy_target_real, pairable, tail_control};
use signrange::{
    ex42_imag_in_a, membership_in_a, Complex2, DyadicTower, Matrix2, Rational, Rect, SequenceSpec, SequenceWindow,
    Sign, SignVector,
};

fn verdict(id: u32, name: &str, ok: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let in_time = elapsed <= limit;
    let status = if ok && in_time { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "acceptance {id:>2} {name}: {status} ({detail}; {:.2}s of {}s)",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} exceeded {}s", limit.as_secs());
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn uniform_unit(rng: &mut ChaCha8Rng) -> Complex2 {
    Complex2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

fn grid_or_uniform(rng: &mut ChaCha8Rng) -> Complex2 {
    let component = |rng: &mut ChaCha8Rng| {
        if rng.random::<bool>() {
            let step = rng.random_range(1..=20) as f64 * 0.05;
            if rng.random::<bool>() {
                step
            } else {
                -step
            }
        } else {
            rng.random_range(-1.0..=1.0)
        }
    };
    Complex2::new(component(rng), component(rng))
}

#[test]
fn criterion_01_combination_step() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checked, mut violations, mut unsound) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    while checked < 100_000 {
        // adjacent terms are drawn until the pair fails the pairing test
        let mut c = [grid_or_uniform(&mut rng); 5];
        for i in 1..5 {
            loop {
                let cand = grid_or_uniform(&mut rng);
                if pairable(c[i - 1], cand).unwrap().is_none() {
                    c[i] = cand;
                    break;
                }
            }
        }
        let out = combine5(&c).unwrap();
        worst = worst.max(out.sum.max_norm());
        if out.sum.max_norm() > 2.0 {
            violations += 1;
        }
        if out.u.re.abs() > 1.0 && out.v.re.abs() > 1.0 {
            unsound += 1;
        }
        checked += 1;
    }
    verdict(
        1,
        "five-term combination bound",
        violations == 0 && unsound == 0,
        start.elapsed(),
        secs(60),
        &format!("{checked} quintuples, {violations} norm violations, {unsound} branch failures, max norm {worst:.6}"),
    );
}

fn adversarial_window(rng: &mut ChaCha8Rng, len: usize) -> SequenceWindow {
    let phase = rng.random::<bool>();
    let terms = (0..len)
        .map(|n| {
            let sa = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let p = if (n % 2 == 0) == phase { 1.0 } else { -1.0 };
            Complex2::new(sa * rng.random_range(0.5..=1.0), p * sa * rng.random_range(0.5..=1.0))
        })
        .collect();
    SequenceWindow::new(terms).unwrap()
}

#[test]
fn criterion_02_prefix_bound_five() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_long = 0.0f64;
    for case in 0..100 {
        let window = if case % 2 == 0 {
            SequenceWindow::new((0..10_000).map(|_| uniform_unit(&mut rng)).collect()).unwrap()
        } else {
            adversarial_window(&mut rng, 10_000)
        };
        worst_long = worst_long.max(bounded_signs(&window).prefix_bound);
    }
    let mut corpus_failures = 0;
    let mut worst_gap = 0.0f64;
    let mut corpus = ChaCha8Rng::seed_from_u64(0xC0_2B05);
    for case in 0..200 {
        let len = 1 + case % 14;
        let window = if case % 3 == 0 {
            SequenceWindow::new((0..len).map(|_| uniform_unit(&mut corpus)).collect()).unwrap()
        } else {
            adversarial_window(&mut corpus, len)
        };
        let achieved = bounded_signs(&window).prefix_bound;
        let (optimum, _) = min_prefix_discrepancy(&window).unwrap();
        worst_gap = worst_gap.max(achieved - optimum);
        if achieved < optimum - 1e-12 || achieved > 5.0 {
            corpus_failures += 1;
        }
    }
    verdict(
        2,
        "prefix bound 5",
        worst_long <= 5.0 && corpus_failures == 0,
        start.elapsed(),
        secs(300),
        &format!(
            "max prefix norm {worst_long:.4} over 100 windows of 10^4; {corpus_failures}/200 corpus failures, largest excess over optimum {worst_gap:.4}"
        ),
    );
}

#[test]
fn criterion_03_controlling_bound() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for n in [1_000, 10_000, 100_000] {
        let window = SequenceSpec::example41(None).window(n).unwrap();
        let report = tail_control(&window);
        let total = report.result.sum.max_norm();
        let limit = 5.0 * window.sup_norm();
        ok &= total <= limit;
        details.push(format!("N={n}: {total:.4} <= {limit:.4}"));
    }
    verdict(3, "tail-control total bound", ok, start.elapsed(), secs(60), &details.join(", "));
}

#[test]
fn criterion_04_greedy_target() {
    let start = Instant::now();
    let terms: Vec<f64> = (1..=100_000).map(|n| 1.0 / n as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut violations, mut worst) = (0, 0.0f64);
    for _ in 0..100 {
        let a = rng.random_range(-3.0..=3.0);
        let report = greedy_target_real(&terms, a).unwrap();
        violations += usize::from(report.envelope_violation.is_some());
        worst = worst.max(report.result.residual.unwrap().re.abs());
    }
    verdict(
        4,
        "greedy target residual",
        violations == 0 && worst <= 1e-4,
        start.elapsed(),
        secs(60),
        &format!("{violations} envelope violations, worst residual {worst:.3e}"),
    );
}

#[test]
fn criterion_05_transform_equivariance() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut matrices = Vec::new();
    while matrices.len() < 20 {
        let m = Matrix2::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        if m.det().abs() > 0.1 {
            matrices.push(m);
        }
    }
    let mut failures = 0;
    for _ in 0..20 {
        let window = SequenceWindow::new((0..12).map(|_| uniform_unit(&mut rng)).collect()).unwrap();
        for m in &matrices {
            failures += usize::from(!transform_equivariance_check(&window, m).unwrap());
        }
    }
    verdict(
        5,
        "linear-map equivariance of the range",
        failures == 0,
        start.elapsed(),
        secs(60),
        &format!("{failures}/400 window-matrix pairs differ"),
    );
}

fn half_contraction_system() -> TwoRatioSystem {
    synthetic_two_ratio_system(2.0, 3.0, 0.5, 12).unwrap().built
}

#[test]
fn criterion_06_two_ratio_brackets_and_covering() {
    let start = Instant::now();
    // brackets are enforced during construction; an error would panic here
    let built = half_contraction_system();
    let covered = built.covering.levels.iter().filter(|l| l.covered).count();
    let witness = built
        .covering
        .first_failure()
        .and_then(|f| f.witness)
        .map_or("none".to_string(), |w| w.to_string());
    let wider = synthetic_two_ratio_system(2.0, 3.0, 0.9, 12).unwrap().built;
    let wider_covered = wider.covering.levels.iter().filter(|l| l.covered).count();
    verdict(
        6,
        "two-ratio brackets and covering of [-5,5]^2",
        covered == 12,
        start.elapsed(),
        secs(60),
        &format!(
            "brackets pass at 12/12 levels; covering true at {covered}/12 levels for delta 0.5, first witness {witness}; delta 0.9 covers {wider_covered}/12"
        ),
    );
}

#[test]
fn criterion_07_attractor_fills_square() {
    let start = Instant::now();
    let built = half_contraction_system();
    let system = &built.system;
    let radius = 0.5f64.powi(12) * system.radius() + 0.1;
    let square = Rect::square(Complex2::ZERO, 5.0).unwrap();
    let fill = attractor_grid_fill(system, 12, &square, 0.1, radius).unwrap();
    let witness = fill.witness.map_or("none".to_string(), |w| w.to_string());
    verdict(
        7,
        "depth-12 attractor fills [-5,5]^2",
        fill.covered == fill.grid_points,
        start.elapsed(),
        secs(120),
        &format!(
            "{}/{} grid points within {radius:.4}, first uncovered {witness}",
            fill.covered, fill.grid_points
        ),
    );
}

#[test]
fn criterion_08_counterexample_structure() {
    let start = Instant::now();
    let third = membership_in_a(Rational::new(1, 3).unwrap());

    let tower = DyadicTower::new(vec![0, 1, 2], vec![0, 3, 7]).unwrap();
    let len = tower.prefix_len(2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut outside = 0;
    for _ in 0..10_000 {
        let signs = SignVector(
            (0..len)
                .map(|_| if rng.random::<bool>() { Sign::Plus } else { Sign::Minus })
                .collect(),
        );
        outside += usize::from(!ex42_imag_in_a(&tower, &signs).unwrap().in_a);
    }

    let spec = SequenceSpec::example41(None);
    let masses: Vec<f64> = [1_000, 10_000, 100_000]
        .iter()
        .map(|&n| nonsummability_profile(&spec.window(n).unwrap(), 16).unwrap().min_mass)
        .collect();
    let increasing = masses.windows(2).all(|w| w[1] > w[0]);
    verdict(
        8,
        "counterexample structure",
        !third.member && outside == 0 && increasing,
        start.elapsed(),
        secs(120),
        &format!(
            "1/3 member: {} after {} residues; {outside}/10000 two-block sign vectors outside A; min masses {:.4} {:.4} {:.4}",
            third.member, third.scanned, masses[0], masses[1], masses[2]
        ),
    );
}

#[test]
fn criterion_09_arithmetic_density() {
    let start = Instant::now();
    let horizon = 1_000_000u64;
    let mut ok = true;
    let mut details = Vec::new();
    for q in [2u64, 3, 5, 10] {
        let r = density(&IndexSet::arithmetic(q, 0).unwrap(), horizon).unwrap();
        let err = (r.upper - 1.0 / q as f64).abs().max((r.lower - 1.0 / q as f64).abs());
        ok &= err <= q as f64 / horizon as f64;
        details.push(format!("q={q}: err {err:.2e}"));
    }
    verdict(9, "density of residue classes", ok, start.elapsed(), secs(30), &details.join(", "));
}

#[test]
fn criterion_10_deletion_holder() {
    let start = Instant::now();
    let set = IndexSet::arithmetic(10, 0).unwrap();
    let r = holder_check(&set, 0.2, 10_000, 1000, 10).unwrap();
    verdict(
        10,
        "deletion-map Hölder inequality",
        r.pass && r.exact_bound_holds,
        start.elapsed(),
        secs(30),
        &format!(
            "exact bound for all k: {}; {} samples, worst ratio {:.3e}",
            r.exact_bound_holds, r.samples, r.worst_ratio
        ),
    );
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/two_ratio_n22.json")
}

#[test]
fn criterion_11_dense_range_certificate() {
    let start = Instant::now();
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(fixture()).unwrap()).unwrap();
    let terms: Vec<Complex2> = serde_json::from_value(doc["terms"].clone()).unwrap();
    let cert = &doc["certificate"];
    let r: Vec<f64> = serde_json::from_value(cert["rect"].clone()).unwrap();
    let eps = cert["eps"].as_f64().unwrap();
    let rect = Rect::new(Complex2::new(r[0], r[1]), Complex2::new(r[2], r[3])).unwrap();
    let range = exact_range(&SequenceWindow::new(terms).unwrap()).unwrap();
    let report = epsilon_net_coverage(&range, &rect, eps).unwrap();
    verdict(
        11,
        "two-ratio range covers a window at fixed eps",
        report.covered_fraction == 1.0,
        start.elapsed(),
        secs(120),
        &format!(
            "{} range points, coverage {} of {rect} at eps {eps}, worst gap {:.4}",
            range.len(),
            report.covered_fraction,
            report.worst_gap
        ),
    );
}

fn run_cli(args: &[&str], dir: &Path, threads: &str) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_signrange"))
        .args(args)
        .arg("--threads")
        .arg(threads)
        .current_dir(dir)
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap()
        .code()
        .unwrap_or(-1)
}

#[test]
fn criterion_12_cli_determinism() {
    let start = Instant::now();
    let fixture = fixture();
    let fixture = fixture.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["seq", "gen", "--family", "example41", "--count", "2000", "--out", "seq.json"],
        vec!["seq", "gen", "--family", "interleave", "--ratios", "0.5,3", "--count", "4000", "--out", "mix.json"],
        vec!["signs", "bound", "--in", "seq.json", "--out", "bound.json"],
        vec!["signs", "bound", "--in", "seq.json", "--tail", "--out", "tail.json"],
        vec!["signs", "target", "--in", "mix.json", "--target", "0.3-0.2i", "--eps", "0.05", "--depth", "8", "--out", "target.json"],
        vec!["ratio", "report", "--in", "mix.json", "--depth", "8", "--out", "ratio.json"],
        vec!["moran", "build", "--levels", "6", "--out", "system.json"],
        vec!["moran", "check", "--levels", "8", "--out", "check.json"],
        vec!["moran", "render", "--system", "system.json", "--depth", "6", "--format", "csv", "--out", "cloud.csv"],
        vec!["moran", "render", "--levels", "6", "--depth", "6", "--grid", "64", "--out", "cloud.pgm"],
        vec!["oracle", "range", "--in", fixture, "--n", "14", "--out", "range.csv"],
        vec!["oracle", "disc", "--in", fixture, "--n", "14", "--out", "disc.json"],
        vec!["oracle", "equiv", "--in", fixture, "--n", "12", "--matrix", "1,2,-0.5,1", "--out", "equiv.json"],
        vec!["oracle", "cover", "--in", fixture, "--n", "16", "--rect", "-1,-1,1,1", "--eps", "0.05", "--out", "cover.json"],
        vec!["range", "raster", "--in", fixture, "--n", "16", "--grid", "64", "--csv", "raster.csv", "--out", "raster.pgm"],
        vec!["density", "--set", "arith:7:3", "--horizon", "100000", "--out", "density.json"],
        vec!["holder", "--set", "arith:10:0", "--eps", "0.2", "--samples", "2000", "--out", "holder.json"],
        vec!["boxdim", "--in", "seq.json", "--center", "0.2+0.1i", "--radius", "0.5", "--depth", "14", "--counts", "counts.csv", "--out", "boxdim.json"],
        vec!["member", "--value", "13/50", "--out", "member.json"],
    ];
    let one = tempfile::tempdir().unwrap();
    let eight = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let mut bad_exit = Vec::new();
    for args in &runs {
        let a = run_cli(args, one.path(), "1");
        let b = run_cli(args, eight.path(), "8");
        if a != b || !(a == 0 || a == 3) {
            bad_exit.push(format!("{} {} -> {a}/{b}", args[0], args[1]));
        }
    }
    let mut files: Vec<_> = std::fs::read_dir(one.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    for name in &files {
        let a = std::fs::read(one.path().join(name)).unwrap();
        let b = std::fs::read(eight.path().join(name)).unwrap_or_default();
        if a != b {
            mismatched.push(name.to_string_lossy().into_owned());
        }
    }
    verdict(
        12,
        "byte-identical CLI artifacts at 1 and 8 threads",
        mismatched.is_empty() && bad_exit.is_empty() && files.len() >= 20,
        start.elapsed(),
        secs(300),
        &format!(
            "{} runs, {} artifacts, mismatched {:?}, unexpected exits {:?}",
            runs.len(),
            files.len(),
            mismatched,
            bad_exit
        ),
    );
}
