//! `curvesvd` — curvature estimation from local covariance spectra,
//! exact Hankel diagnostics, Frenet-frame computation, curve
//! generation, and a self-validation suite.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or input error.
//! Identical invocations produce byte-identical output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde_json::json;

use curvesvd::curve::fmt_float;
use curvesvd::frenet::{frenet_apparatus, integrate_frenet_system, FrenetApparatus};
use curvesvd::hankel::{curvature_coefficient, hankel_b, hankel_det_exact, MomentSequence};
use curvesvd::local_svd::{
    default_ladder, estimate_curvatures, estimate_curvatures_sampled, estimate_frame,
    CurvatureReport, EstimateOptions, DEFAULT_QUAD_ORDER,
};
use curvesvd::rational::{format_rational, parse_rational, rat, rational_to_f64};
use curvesvd::validation::{run_all, ValidationConfig};
use curvesvd::{builtin_curve, Curve, SampledCurve};

#[derive(Parser)]
#[command(
    name = "curvesvd",
    version,
    about = "Curvatures and Frenet frames of curves in R^n from local covariance spectra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the curvature recovery constants a_j, exact and as floats
    Coeffs {
        /// Largest index j to print
        #[arg(long, default_value_t = 5)]
        max_j: usize,
        /// Output format (default: human-readable table)
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Write output to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hankel determinants of the interleaved moment sequence, with
    /// closed-form vs elimination-oracle cross-checks
    Hankel {
        /// Largest order n to report
        #[arg(long)]
        n: usize,
        /// Moment sequence parameter alpha (rational, e.g. 2 or 5/2)
        #[arg(long, default_value = "2")]
        alpha: String,
        /// Moment sequence parameter beta (rational)
        #[arg(long, default_value = "3")]
        beta: String,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate curvatures and frames from windowed covariance spectra
    Estimate {
        /// Builtin curve spec (e.g. "helix" or "circle:a=2") or
        /// path to a CSV file of samples
        #[arg(long)]
        curve: String,
        /// Parameter values, comma-separated
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        /// Largest window radius (default 1e-2)
        #[arg(long)]
        eps: Option<f64>,
        /// Number of ladder rungs, halving from --eps (default: 4 when
        /// --eps is not given, otherwise a single window)
        #[arg(long)]
        ladder: Option<usize>,
        /// Gauss-Legendre order per half-window
        #[arg(long, default_value_t = DEFAULT_QUAD_ORDER)]
        quad_order: usize,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frenet frame, curvatures, and speed from derivative oracles
    Frenet {
        /// Builtin curve spec (CSV input has no derivatives and is not
        /// accepted here)
        #[arg(long)]
        curve: String,
        /// Parameter values, comma-separated
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the frame equations with constant curvatures and write
    /// the sampled curve as CSV
    Generate {
        /// Ambient dimension
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Constant curvatures kappa_1..kappa_{dim-1}, comma-separated
        #[arg(long, value_delimiter = ',', required = true)]
        kappa: Vec<f64>,
        /// Parameter range as "lo,hi"
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0])]
        range: Vec<f64>,
        /// Integration step
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the self-validation suite
    Validate {
        /// Skip the ladder-based numerical checks
        #[arg(long)]
        fast: bool,
        /// Corrupt the a_2 coefficient before checking (must fail)
        #[arg(long, hide = true)]
        inject_bad_a2: bool,
    },
}

/// An error carrying its process exit code.
struct CliError {
    code: u8,
    message: String,
}

impl From<curvesvd::Error> for CliError {
    fn from(e: curvesvd::Error) -> Self {
        CliError {
            code: 2,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> CliError {
    CliError { code: 2, message }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Coeffs { max_j, format, out } => cmd_coeffs(max_j, format, out),
        Command::Hankel {
            n,
            alpha,
            beta,
            format,
            out,
        } => cmd_hankel(n, &alpha, &beta, format, out),
        Command::Estimate {
            curve,
            t,
            eps,
            ladder,
            quad_order,
            format,
            out,
        } => cmd_estimate(&curve, &t, eps, ladder, quad_order, format, out),
        Command::Frenet {
            curve,
            t,
            format,
            out,
        } => cmd_frenet(&curve, &t, format, out),
        Command::Generate {
            dim,
            kappa,
            range,
            step,
            out,
        } => cmd_generate(dim, &kappa, &range, step, out),
        Command::Validate {
            fast,
            inject_bad_a2,
        } => cmd_validate(fast, inject_bad_a2),
    }
}

/// 15 significant digits — the human-table float format.
fn hfloat(x: f64) -> String {
    format!("{x:.14e}")
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => {
            let stdout = std::io::stdout();
            stdout.lock().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_coeffs(max_j: usize, format: Option<Format>, out: Option<PathBuf>) -> Result<(), CliError> {
    let rows: Vec<(usize, String, f64)> = (1..=max_j)
        .map(|j| {
            let a = curvature_coefficient(j)?;
            Ok((j, format_rational(&a), rational_to_f64(&a)))
        })
        .collect::<Result<_, curvesvd::Error>>()?;

    let text = match format {
        Some(Format::Json) => {
            let value = json!({
                "schema": 1,
                "command": "coeffs",
                "rows": rows.iter().map(|(j, exact, float)| json!({
                    "j": j, "exact": exact, "float": float,
                })).collect::<Vec<_>>(),
            });
            format!("{value:#}\n")
        }
        Some(Format::Csv) => {
            let mut s = String::from("j,exact,float\n");
            for (j, exact, float) in &rows {
                let _ = writeln!(s, "{j},{exact},{}", fmt_float(*float));
            }
            s
        }
        None => {
            let mut s = String::from("  j  a_j (exact)  a_j (float)\n");
            for (j, exact, float) in &rows {
                let _ = writeln!(s, "{j:>3}  {exact:<11}  {}", hfloat(*float));
            }
            s
        }
    };
    emit(out.as_deref(), &text)
}

fn cmd_hankel(
    n_max: usize,
    alpha: &str,
    beta: &str,
    format: Option<Format>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let alpha = parse_rational(alpha)?;
    let beta = parse_rational(beta)?;
    let seq = MomentSequence::interleaved(alpha.clone(), beta.clone())?;

    struct Row {
        n: usize,
        b: String,
        pivot: String,
        ratio_closed: Option<String>,
        ratio_det: Option<String>,
        pass: bool,
    }

    let closed = |k: usize| hankel_b(k, &alpha, &beta);
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let b = closed(n)?;
        let det = hankel_det_exact(&seq, n);
        let pivot = &b / closed(n - 1)?;
        let (ratio_closed, ratio_det, ratios_match) = if n >= 2 {
            let rc = &b * closed(n - 2)? / (closed(n - 1)? * closed(n - 1)?);
            let rd = &det * hankel_det_exact(&seq, n - 2)
                / (hankel_det_exact(&seq, n - 1) * hankel_det_exact(&seq, n - 1));
            let matches = rc == rd;
            (
                Some(format_rational(&rc)),
                Some(format_rational(&rd)),
                matches,
            )
        } else {
            (None, None, true)
        };
        rows.push(Row {
            n,
            b: format_rational(&b),
            pivot: format_rational(&pivot),
            ratio_closed,
            ratio_det,
            pass: b == det && ratios_match,
        });
    }

    let all_pass = rows.iter().all(|r| r.pass);
    let text = match format {
        Some(Format::Json) => {
            let value = json!({
                "schema": 1,
                "command": "hankel",
                "alpha": format_rational(&alpha),
                "beta": format_rational(&beta),
                "rows": rows.iter().map(|r| json!({
                    "n": r.n,
                    "determinant": r.b,
                    "pivot": r.pivot,
                    "ratio_closed_form": r.ratio_closed,
                    "ratio_determinant_oracle": r.ratio_det,
                    "pass": r.pass,
                })).collect::<Vec<_>>(),
            });
            format!("{value:#}\n")
        }
        Some(Format::Csv) => {
            let mut s =
                String::from("n,determinant,pivot,ratio_closed_form,ratio_determinant_oracle,pass\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.n,
                    r.b,
                    r.pivot,
                    r.ratio_closed.as_deref().unwrap_or(""),
                    r.ratio_det.as_deref().unwrap_or(""),
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            s
        }
        None => {
            let mut s = format!(
                "interleaved moment sequence, alpha = {}, beta = {}\n\
                 {:>3}  {:<24} {:<20} {:<16} {}\n",
                format_rational(&alpha),
                format_rational(&beta),
                "n",
                "B_n",
                "pivot",
                "ratio",
                "check"
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:>3}  {:<24} {:<20} {:<16} {}",
                    r.n,
                    r.b,
                    r.pivot,
                    r.ratio_closed.as_deref().unwrap_or("-"),
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            s
        }
    };
    emit(out.as_deref(), &text)?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError {
            code: 1,
            message: "closed form and determinant oracle disagree".into(),
        })
    }
}

/// Whether `--curve` names a CSV file rather than a builtin.
fn is_path(spec: &str) -> bool {
    spec.contains('/')
        || spec.contains('\\')
        || spec.to_ascii_lowercase().ends_with(".csv")
        || Path::new(spec).exists()
}

fn build_ladder(eps: Option<f64>, rungs: Option<usize>) -> Vec<f64> {
    match (eps, rungs) {
        (None, None) => default_ladder(),
        (Some(e), None) => vec![e],
        (e0, Some(n)) => {
            let e0 = e0.unwrap_or(1e-2);
            (0..n).map(|k| e0 * 0.5f64.powi(k as i32)).collect()
        }
    }
}

/// Angle (radians) between unit vectors, insensitive to sign.
fn alignment_angle(u: &DMatrix<f64>, e: &DMatrix<f64>, i: usize) -> f64 {
    u.column(i).dot(&e.column(i)).abs().min(1.0).acos()
}

struct PointReport {
    report: CurvatureReport,
    frame: DMatrix<f64>,
    reference: Option<FrenetApparatus>,
}

fn cmd_estimate(
    curve_spec: &str,
    ts: &[f64],
    eps: Option<f64>,
    rungs: Option<usize>,
    quad_order: usize,
    format: Option<Format>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let ladder = build_ladder(eps, rungs);
    let opts = EstimateOptions {
        ladder: ladder.clone(),
        quad_order,
        ..Default::default()
    };

    let at_t = |e: curvesvd::Error, t: f64| input_error(format!("at t = {t}: {e}"));
    let (dim, source, points) = if is_path(curve_spec) {
        let samples = SampledCurve::from_csv_file(curve_spec)?;
        let mut points = Vec::new();
        for &t in ts {
            let report =
                estimate_curvatures_sampled(&samples, t, &opts).map_err(|e| at_t(e, t))?;
            let frame = report
                .spectrum
                .eigenvectors
                .last()
                .expect("validated ladder is non-empty")
                .clone();
            points.push(PointReport {
                report,
                frame,
                reference: None,
            });
        }
        (samples.dim(), "csv", points)
    } else {
        let curve = builtin_curve(curve_spec)?;
        let mut points = Vec::new();
        for &t in ts {
            let report = estimate_curvatures(curve.as_ref(), t, &opts).map_err(|e| at_t(e, t))?;
            let smallest = *ladder.last().expect("validated ladder is non-empty");
            let frame = estimate_frame(curve.as_ref(), t, smallest, quad_order)
                .map_err(|e| at_t(e, t))?;
            let reference = frenet_apparatus(curve.as_ref(), t).ok();
            points.push(PointReport {
                report,
                frame,
                reference,
            });
        }
        (curve.dim(), "builtin", points)
    };

    let text = match format {
        Some(Format::Json) => estimate_json(curve_spec, source, dim, &ladder, quad_order, &points),
        Some(Format::Csv) => estimate_csv(dim, &points),
        None => estimate_human(curve_spec, source, dim, &ladder, &points),
    };
    emit(out.as_deref(), &text)
}

fn estimate_json(
    spec: &str,
    source: &str,
    dim: usize,
    ladder: &[f64],
    quad_order: usize,
    points: &[PointReport],
) -> String {
    let value = json!({
        "schema": 1,
        "command": "estimate",
        "curve": spec,
        "source": source,
        "dim": dim,
        "ladder": ladder,
        "quad_order": quad_order,
        "points": points.iter().map(|p| {
            let r = &p.report;
            json!({
                "t": r.t,
                "exact_path": r.exact_path,
                "curvatures": r.estimates.iter().enumerate().map(|(j, e)| json!({
                    "index": e.index,
                    "value": e.value,
                    "reliable": e.reliable,
                    "reference": p.reference.as_ref().map(|a| a.curvatures[j]),
                })).collect::<Vec<_>>(),
                "eigenvalues": r.spectrum.eigenvalues,
                "coefficients": r.spectrum.coefficients,
                "frame": (0..dim).map(|i| {
                    p.frame.column(i).iter().copied().collect::<Vec<f64>>()
                }).collect::<Vec<_>>(),
                "reference_angles": p.reference.as_ref().map(|a| {
                    (0..dim).map(|i| alignment_angle(&p.frame, &a.frame, i)).collect::<Vec<f64>>()
                }),
            })
        }).collect::<Vec<_>>(),
    });
    format!("{value:#}\n")
}

fn estimate_csv(dim: usize, points: &[PointReport]) -> String {
    let mut s = String::from("t");
    for j in 1..dim {
        let _ = write!(s, ",kappa_{j},reliable_{j}");
    }
    s.push('\n');
    for p in points {
        let _ = write!(s, "{}", fmt_float(p.report.t));
        for e in &p.report.estimates {
            match e.value {
                Some(v) => {
                    let _ = write!(s, ",{},{}", fmt_float(v), e.reliable);
                }
                None => {
                    let _ = write!(s, ",,false");
                }
            }
        }
        s.push('\n');
    }
    s
}

fn estimate_human(
    spec: &str,
    source: &str,
    dim: usize,
    ladder: &[f64],
    points: &[PointReport],
) -> String {
    let ladder_str = ladder.iter().map(|e| hfloat(*e)).collect::<Vec<_>>().join(", ");
    let mut s = format!("curve {spec} (R^{dim}, {source})\nwindow ladder: {ladder_str}\n");
    for p in points {
        let r = &p.report;
        let _ = write!(s, "\nt = {}", r.t);
        if r.exact_path {
            s.push_str("  [exact covariance path]");
        }
        s.push('\n');
        for (j, e) in r.estimates.iter().enumerate() {
            let value = match e.value {
                Some(v) => hfloat(v),
                None => "unresolved".into(),
            };
            let _ = write!(
                s,
                "  kappa_{} = {value}  {}",
                e.index,
                if e.reliable { "reliable" } else { "unreliable" }
            );
            if let Some(a) = &p.reference {
                let _ = write!(s, "  (reference {})", hfloat(a.curvatures[j]));
            }
            s.push('\n');
        }
        for i in 0..dim {
            let comps = p
                .frame
                .column(i)
                .iter()
                .map(|x| hfloat(*x))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = write!(s, "  u_{} = [{comps}]", i + 1);
            if let Some(a) = &p.reference {
                let _ = write!(
                    s,
                    "  angle to e_{} = {}",
                    i + 1,
                    hfloat(alignment_angle(&p.frame, &a.frame, i))
                );
            }
            s.push('\n');
        }
    }
    s
}

fn cmd_frenet(
    curve_spec: &str,
    ts: &[f64],
    format: Option<Format>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if is_path(curve_spec) {
        return Err(input_error(
            "the frenet command differentiates the curve and needs a builtin curve spec; \
             for CSV samples use `estimate`"
                .into(),
        ));
    }
    let curve = builtin_curve(curve_spec)?;
    let dim = curve.dim();
    let mut apparatuses = Vec::new();
    for &t in ts {
        apparatuses
            .push(frenet_apparatus(curve.as_ref(), t).map_err(|e| {
                input_error(format!("at t = {t}: {e}"))
            })?);
    }

    let text = match format {
        Some(Format::Json) => {
            let value = json!({
                "schema": 1,
                "command": "frenet",
                "curve": curve_spec,
                "dim": dim,
                "points": apparatuses.iter().map(|a| json!({
                    "t": a.t,
                    "speed": a.speed,
                    "curvatures": a.curvatures,
                    "frame": (0..dim).map(|i| {
                        a.frame.column(i).iter().copied().collect::<Vec<f64>>()
                    }).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            });
            format!("{value:#}\n")
        }
        Some(Format::Csv) => {
            let mut s = String::from("t,speed");
            for j in 1..dim {
                let _ = write!(s, ",kappa_{j}");
            }
            s.push('\n');
            for a in &apparatuses {
                let _ = write!(s, "{},{}", fmt_float(a.t), fmt_float(a.speed));
                for k in &a.curvatures {
                    let _ = write!(s, ",{}", fmt_float(*k));
                }
                s.push('\n');
            }
            s
        }
        None => {
            let mut s = format!("curve {curve_spec} (R^{dim})\n");
            for a in &apparatuses {
                let _ = writeln!(s, "\nt = {}  speed = {}", a.t, hfloat(a.speed));
                for (j, k) in a.curvatures.iter().enumerate() {
                    let _ = writeln!(s, "  kappa_{} = {}", j + 1, hfloat(*k));
                }
                for i in 0..dim {
                    let comps = a
                        .frame
                        .column(i)
                        .iter()
                        .map(|x| hfloat(*x))
                        .collect::<Vec<_>>()
                        .join(", ");
                    let _ = writeln!(s, "  e_{} = [{comps}]", i + 1);
                }
            }
            s
        }
    };
    emit(out.as_deref(), &text)
}

fn cmd_generate(
    dim: usize,
    kappas: &[f64],
    range: &[f64],
    step: f64,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let [lo, hi] = range else {
        return Err(input_error("--range takes exactly two values: lo,hi".into()));
    };
    if !(hi > lo) {
        return Err(input_error(format!(
            "--range needs lo < hi, got {lo},{hi}"
        )));
    }
    let fns: Vec<Box<dyn Fn(f64) -> f64>> = kappas
        .iter()
        .map(|&k| Box::new(move |_| k) as Box<dyn Fn(f64) -> f64>)
        .collect();
    let fn_refs: Vec<&dyn Fn(f64) -> f64> = fns.iter().map(|f| f.as_ref()).collect();
    let samples = integrate_frenet_system(
        dim,
        &fn_refs,
        &nalgebra::DVector::zeros(dim),
        &DMatrix::identity(dim, dim),
        (*lo, *hi),
        step,
    )?;
    let mut buf = Vec::new();
    samples.write_csv(&mut buf)?;
    let text = String::from_utf8(buf).expect("CSV output is ASCII");
    emit(out.as_deref(), &text)
}

fn cmd_validate(fast: bool, inject_bad_a2: bool) -> Result<(), CliError> {
    let config = ValidationConfig {
        fast,
        bad_a2: inject_bad_a2.then(|| rat(105, 5)),
    };
    let outcomes = run_all(&config);
    let mut failed = Vec::new();
    let mut text = String::new();
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(text, "{status} {} — {}", o.name, o.detail);
        if !o.passed {
            failed.push(o.name);
        }
    }
    if failed.is_empty() {
        let _ = writeln!(text, "all {} checks passed", outcomes.len());
    } else {
        let _ = writeln!(
            text,
            "{} of {} checks failed: {}",
            failed.len(),
            outcomes.len(),
            failed.join(", ")
        );
    }
    emit(None, &text)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError {
            code: 1,
            message: format!("validation failed: {}", failed.join(", ")),
        })
    }
}
