mod args;
mod io;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};
use signrange::density::{box_dim_estimate, density, holder_check, BallFeasibility, BoxDimReport};
use signrange::moran::{
    attractor_points, build_two_ratio_system, normal_form_matrix, synthetic_two_ratio_system,
    TwoRatioSystem,
};
use signrange::oracle::{epsilon_net_coverage, exact_range, min_prefix_discrepancy, transform_equivariance_check};
use signrange::ratio::{apply_linear_map, detect_ratios, nonsummability_profile};
use signrange::selection::{approx_target_complex, bounded_signs, greedy_target_real, tail_control};
use signrange::{
    membership_in_a, Complex2, DyadicTower, Family, MoranError, MoranSystem, RatioValue, Rational, Rect, ScaleRule,
    SequenceSpec, Sign,
};

use args::*;
use io::*;

/// `Ok(Some(_))` is a completed run whose result contradicts an expected
/// bound; it exits with status 3.
type Outcome = Result<Option<String>, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("signrange: error: invalid: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("signrange: error: io: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(finding)) => {
            eprintln!("signrange: finding: {finding}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("signrange: error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: &Command) -> Outcome {
    let config = serde_json::to_value(command).map_err(|e| CliError::Io(e.to_string()))?;
    let meta = |name: &str| Meta::new(name, config.clone());
    match command {
        Command::Seq(SeqCommand::Gen(a)) => seq_gen(a, &meta("seq gen")),
        Command::Signs(SignsCommand::Bound(a)) => signs_bound(a, &meta("signs bound")),
        Command::Signs(SignsCommand::Target(a)) => signs_target(a, &meta("signs target")),
        Command::Ratio(RatioCommand::Report(a)) => ratio_report(a, &meta("ratio report")),
        Command::Moran(MoranCommand::Build(a)) => moran_build(a, &meta("moran build")),
        Command::Moran(MoranCommand::Check(a)) => moran_check(a, &meta("moran check")),
        Command::Moran(MoranCommand::Render(a)) => moran_render(a, &meta("moran render")),
        Command::Oracle(OracleCommand::Range(a)) => oracle_range(a, &meta("oracle range")),
        Command::Oracle(OracleCommand::Disc(a)) => oracle_disc(a, &meta("oracle disc")),
        Command::Oracle(OracleCommand::Equiv(a)) => oracle_equiv(a, &meta("oracle equiv")),
        Command::Oracle(OracleCommand::Cover(a)) => oracle_cover(a, &meta("oracle cover")),
        Command::Range(RangeCommand::Raster(a)) => range_raster(a, &meta("range raster")),
        Command::Density(a) => density_cmd(a, &meta("density")),
        Command::Holder(a) => holder_cmd(a, &meta("holder")),
        Command::Boxdim(a) => boxdim_cmd(a, &meta("boxdim")),
        Command::Member(a) => member_cmd(a, &meta("member")),
    }
}

fn parse_scale(s: &str) -> Result<ScaleRule, CliError> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    let num = || arg.parse::<f64>().map_err(|_| CliError::invalid(format!("scale {s:?}")));
    Ok(match kind {
        "harmonic" => ScaleRule::Harmonic,
        "power" => ScaleRule::Power(num()?),
        "geometric" => ScaleRule::Geometric(num()?),
        _ => return Err(CliError::invalid(format!("unknown scale {s:?}"))),
    })
}

fn parse_ratio(s: &str) -> Result<RatioValue, CliError> {
    s.parse().map_err(|_| CliError::invalid(format!("ratio {s:?}")))
}

fn seq_gen(a: &SeqGenArgs, meta: &Meta) -> Outcome {
    let scale = parse_scale(&a.scale)?;
    let spec = match a.family {
        FamilyName::Example41 => SequenceSpec::example41(a.count),
        FamilyName::Example42 => {
            let tower = DyadicTower::new(a.m.clone(), a.tower_n.clone())?;
            SequenceSpec::new(Family::DyadicTower(tower), a.count)?
        }
        FamilyName::Linear => {
            let ratio = a.ratio.as_deref().ok_or_else(|| CliError::invalid("linear family needs --ratio"))?;
            SequenceSpec::new(SequenceSpec::linear_ratio(parse_ratio(ratio)?, scale, None).family, a.count)?
        }
        FamilyName::Interleave => {
            if a.ratios.is_empty() {
                return Err(CliError::invalid("interleave family needs --ratios"));
            }
            let parts = a
                .ratios
                .iter()
                .map(|r| Ok(SequenceSpec::linear_ratio(parse_ratio(r)?, scale, None)))
                .collect::<Result<Vec<_>, CliError>>()?;
            SequenceSpec::new(Family::Interleave(parts), a.count)?
        }
    };
    let window = spec
        .full_window()
        .map_err(|_| CliError::invalid("pass --count for unbounded families"))?;
    write_json(a.out.as_deref(), meta, &json!({ "spec": spec, "terms": window.terms() }))?;
    Ok(None)
}

fn signs_bound(a: &SignsBoundArgs, meta: &Meta) -> Outcome {
    let window = load_window(&a.input.input, a.input.n)?;
    let limit = 5.0 * window.sup_norm();
    if a.tail {
        let report = tail_control(&window);
        let total = report.result.sum.max_norm();
        write_json(a.out.as_deref(), meta, &report)?;
        return Ok((total > limit).then(|| format!("total {total} exceeds 5·sup = {limit}")));
    }
    let result = bounded_signs(&window);
    write_json(a.out.as_deref(), meta, &result)?;
    Ok((result.prefix_bound > limit).then(|| format!("prefix bound {} exceeds 5·sup = {limit}", result.prefix_bound)))
}

fn signs_target(a: &SignsTargetArgs, meta: &Meta) -> Outcome {
    let window = load_window(&a.input.input, a.input.n)?;
    let target = parse_complex(&a.target)?;
    if target.im == 0.0 && window.terms().iter().all(|c| c.im == 0.0) {
        let reals: Vec<f64> = window.terms().iter().map(|c| c.re).collect();
        let report = greedy_target_real(&reals, target.re)?;
        write_json(a.out.as_deref(), meta, &report)?;
        return Ok(report
            .envelope_violation
            .map(|n| format!("residual envelope violated at position {n}")));
    }
    let ratios = detect_ratios(&window, a.depth, a.threshold);
    let result = approx_target_complex(&window, &ratios, target, a.eps)?;
    write_json(a.out.as_deref(), meta, &json!({ "ratios": ratios, "result": result }))?;
    Ok(None)
}

fn ratio_report(a: &RatioReportArgs, meta: &Meta) -> Outcome {
    let window = load_window(&a.input.input, a.input.n)?;
    let reports = detect_ratios(&window, a.depth, a.threshold);
    let profile = match a.directions {
        0 => None,
        m => Some(nonsummability_profile(&window, m)?),
    };
    write_json(a.out.as_deref(), meta, &json!({ "reports": reports, "profile": profile }))?;
    Ok(None)
}

fn build_system(source: &MoranSource) -> Result<TwoRatioSystem, CliError> {
    let built = match (&source.first, &source.second) {
        (Some(first), Some(second)) => {
            let mut first = load_window(first, None)?;
            let mut second = load_window(second, None)?;
            if (source.ratio_a, source.ratio_b) != (2.0, 3.0) {
                let m = normal_form_matrix(source.ratio_a, source.ratio_b)?;
                first = apply_linear_map(&first, &m)?;
                second = apply_linear_map(&second, &m)?;
            }
            build_two_ratio_system(&first, &second, source.delta, source.levels)
        }
        _ => synthetic_two_ratio_system(source.ratio_a, source.ratio_b, source.delta, source.levels).map(|p| p.built),
    };
    built.map_err(|e| match e {
        MoranError::BracketViolation { .. } => CliError::Invalid(format!("bracket: {e}")),
        e => CliError::invalid(e),
    })
}

/// Bracket violations are findings, not usage errors.
fn bracket_finding(e: CliError) -> Outcome {
    match e {
        CliError::Invalid(m) if m.starts_with("bracket: ") => Ok(Some(m)),
        e => Err(e),
    }
}

fn moran_build(a: &MoranBuildArgs, meta: &Meta) -> Outcome {
    let built = match build_system(&a.source) {
        Ok(b) => b,
        Err(e) => return bracket_finding(e),
    };
    write_json(a.out.as_deref(), meta, &built)?;
    Ok(None)
}

fn covering_summary(built: &TwoRatioSystem) -> String {
    let levels = &built.covering.levels;
    let yes = levels.iter().filter(|l| l.covered).count();
    let no = levels.len() - yes;
    let mut parts = Vec::new();
    if yes > 0 {
        parts.push(format!("true ×{yes}"));
    }
    if no > 0 {
        parts.push(format!("false ×{no}"));
    }
    format!("covering: {}; brackets: pass", parts.join(", "))
}

fn moran_check(a: &MoranBuildArgs, meta: &Meta) -> Outcome {
    let built = match build_system(&a.source) {
        Ok(b) => b,
        Err(e) => {
            let finding = bracket_finding(e)?;
            println!("brackets: fail");
            return Ok(finding);
        }
    };
    let summary = covering_summary(&built);
    println!("{summary}");
    if let Some(out) = &a.out {
        let payload = json!({
            "summary": summary,
            "digits": built.digits,
            "covering": built.covering,
            "radius": built.system.radius(),
        });
        write_json(Some(out), meta, &payload)?;
    }
    Ok(built.covering.first_failure().map(|f| {
        let w = f.witness.unwrap_or(Complex2::ZERO);
        format!("covering fails at level {} with witness {w}", f.level)
    }))
}

fn load_system(path: &Path) -> Result<MoranSystem, CliError> {
    let value = read_json(path)?;
    let inner = value.get("system").cloned().unwrap_or(value);
    serde_json::from_value(inner).map_err(CliError::invalid)
}

fn moran_render(a: &MoranRenderArgs, meta: &Meta) -> Outcome {
    let system = match &a.system {
        Some(p) => load_system(p)?,
        None => match build_system(&a.source) {
            Ok(b) => b.system,
            Err(e) => return bracket_finding(e),
        },
    };
    let cloud = attractor_points(&system, a.depth)?;
    match a.format {
        RenderFormat::Csv => {
            let rows = cloud.points.iter().map(|p| format!("{},{}", p.re, p.im));
            write_csv(a.out.as_deref(), meta, "re,im", rows)?;
        }
        RenderFormat::Pgm => {
            if a.grid == 0 {
                return Err(CliError::invalid("--grid must be positive"));
            }
            let rect = match &a.rect {
                Some(r) => parse_rect(r)?,
                None if cloud.radius > 0.0 => Rect::square(Complex2::ZERO, cloud.radius).map_err(CliError::invalid)?,
                None => bounding_square(&cloud.points),
            };
            write_pgm(a.out.as_deref(), meta, a.grid, &raster(&cloud.points, &rect, a.grid))?;
        }
    }
    Ok(None)
}

fn oracle_range(a: &OracleArgs, meta: &Meta) -> Outcome {
    let window = load_window(&a.input.input, a.input.n)?;
    let range = exact_range(&window)?;
    let rows = range.points().iter().map(|p| format!("{},{}", p.re, p.im));
    write_csv(a.out.as_deref(), meta, "re,im", rows)?;
    Ok(None)
}

fn oracle_disc(a: &OracleArgs, meta: &Meta) -> Outcome {
    let window = load_window(&a.input.input, a.input.n)?;
    let (bound, signs) = min_prefix_discrepancy(&window)?;
    write_json(a.out.as_deref(), meta, &json!({ "bound": bound, "signs": signs.to_ints() }))?;
    Ok(None)
}

fn oracle_equiv(a: &OracleEquivArgs, meta: &Meta) -> Outcome {
    let window = load_window(&a.input.input, a.input.n)?;
    let matrix = parse_matrix(&a.matrix)?;
    let equivariant = transform_equivariance_check(&window, &matrix)?;
    write_json(a.out.as_deref(), meta, &json!({ "equivariant": equivariant }))?;
    Ok((!equivariant).then(|| "range is not equivariant under the map".to_string()))
}

fn oracle_cover(a: &OracleCoverArgs, meta: &Meta) -> Outcome {
    let window = load_window(&a.input.input, a.input.n)?;
    let rect = parse_rect(&a.rect)?;
    let range = exact_range(&window)?;
    let report = epsilon_net_coverage(&range, &rect, a.eps)?;
    write_json(a.out.as_deref(), meta, &report)?;
    Ok(None)
}

fn range_raster(a: &RangeRasterArgs, meta: &Meta) -> Outcome {
    if a.grid == 0 {
        return Err(CliError::invalid("--grid must be positive"));
    }
    let window = load_window(&a.input.input, a.input.n)?;
    let range = exact_range(&window)?;
    let rect = match &a.rect {
        Some(r) => parse_rect(r)?,
        None => bounding_square(range.points()),
    };
    write_pgm(a.out.as_deref(), meta, a.grid, &raster(range.points(), &rect, a.grid))?;
    if let Some(csv) = &a.csv {
        let rows = range.points().iter().map(|p| format!("{},{}", p.re, p.im));
        write_csv(Some(csv), meta, "re,im", rows)?;
    }
    Ok(None)
}

fn density_cmd(a: &DensityArgs, meta: &Meta) -> Outcome {
    let set = parse_set(&a.set)?;
    write_json(a.out.as_deref(), meta, &density(&set, a.horizon)?)?;
    Ok(None)
}

fn holder_cmd(a: &HolderArgs, meta: &Meta) -> Outcome {
    let set = parse_set(&a.set)?;
    let report = holder_check(&set, a.eps, a.samples, a.length, a.seed)?;
    write_json(a.out.as_deref(), meta, &report)?;
    Ok((!report.pass).then(|| format!("deletion ratio {} exceeds 1", report.worst_ratio)))
}

fn boxdim_cmd(a: &BoxdimArgs, meta: &Meta) -> Outcome {
    let report: BoxDimReport = match a.predicate {
        Predicate::All => box_dim_estimate(|_| true, a.depth),
        Predicate::FirstPlus => box_dim_estimate(|p| p[0] == Sign::Plus, a.depth),
        Predicate::EvenPlus => box_dim_estimate(|p| p.len() % 2 == 1 || p[p.len() - 1] == Sign::Plus, a.depth),
        Predicate::Ball => {
            let path = a.input.as_deref().ok_or_else(|| CliError::invalid("ball predicate needs --in"))?;
            let window = load_window(path, Some(a.depth))?;
            let ball = BallFeasibility::new(&window, parse_complex(&a.center)?, a.radius);
            box_dim_estimate(|p| ball.admits(p), a.depth)
        }
    };
    if let Some(path) = &a.counts {
        let rows = report.counts.iter().map(|(k, l)| format!("{k},{l}"));
        write_csv(Some(path), meta, "k,L_k", rows)?;
    }
    write_json(a.out.as_deref(), meta, &report)?;
    Ok(None)
}

fn member_cmd(a: &MemberArgs, meta: &Meta) -> Outcome {
    let value: Rational = a.value.parse().map_err(CliError::invalid)?;
    let membership = membership_in_a(value);
    let payload: Value = json!({ "value": value.to_string(), "membership": membership });
    write_json(a.out.as_deref(), meta, &payload)?;
    Ok(None)
}
