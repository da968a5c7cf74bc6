//! Command-line front end. Every command produces either a JSON document
//! (schema `hankelscope/1`, reals printed with 17 significant digits) or, for
//! eigenvalue lists, a two-column CSV.

use std::fmt::Write as _;
use std::io;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use crate::coeff_map::{p_to_q, q_to_p, QuasiCarlemanKernel};
use crate::delta_spectra::{delta_spectrum, weyl_constant, DeltaKernel};
use crate::discretization::{
    build_a_matrix, build_hankel_matrix, eigen_sym, form_identity_check, spectral_rules,
    test_function_factory, SpectrumReport,
};
use crate::polynomials::{is_nonnegative_on_reals, RealPolynomial};
use crate::transforms::LogGrid;
use crate::{Error, Result};

pub const SCHEMA: &str = "hankelscope/1";

#[derive(Debug, Parser)]
#[command(name = "hankelscope", version, about = "Spectra of Hankel operators with quasi-Carleman and delta kernels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Half-width of the log grid.
    #[arg(long = "L", default_value_t = 12.0)]
    pub half_width: f64,
    /// Number of grid nodes (power of two).
    #[arg(long = "N", default_value_t = 1024)]
    pub nodes: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<LogGrid> {
        LogGrid::new(self.half_width, self.nodes)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symbol coefficients q from kernel coefficients p.
    Pq {
        #[arg(long, value_parser = parse_coeffs)]
        p: Coeffs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Kernel coefficients p from symbol coefficients q.
    Qp {
        #[arg(long, value_parser = parse_coeffs)]
        q: Coeffs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Decide whether the Hankel operator with kernel P(ln t)/t is nonnegative.
    Positivity {
        #[arg(long, value_parser = parse_coeffs)]
        p: Coeffs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Eigenvalues of the Nyström matrix on the log grid.
    SpectrumHankel {
        #[arg(long, value_parser = parse_coeffs)]
        p: Coeffs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Eigenvalues of v Q(D) v on the frequency grid. Give either P or Q.
    SpectrumA {
        #[arg(long, value_parser = parse_coeffs, conflicts_with = "q", required_unless_present = "q")]
        p: Option<Coeffs>,
        #[arg(long, value_parser = parse_coeffs)]
        q: Option<Coeffs>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare (H f1, f2) with (A F f1, F f2) on seeded test functions.
    EquivCheck {
        #[arg(long, value_parser = parse_coeffs)]
        p: Coeffs,
        #[command(flatten)]
        grid: GridArgs,
        /// Number of test-function pairs.
        #[arg(long, default_value_t = 3)]
        pairs: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Eigenvalues of the reflected differential operator for a delta kernel.
    DeltaEigs {
        #[arg(long, value_parser = parse_coeffs)]
        h: Coeffs,
        #[arg(long, default_value_t = 1.0)]
        t0: f64,
        /// Number of collocation nodes.
        #[arg(long = "N", default_value_t = 64)]
        nodes: usize,
        /// Modes of each sign to report (at most N/4; defaults to N/4).
        #[arg(long)]
        modes: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Finite-section spectrum of the Carleman operator.
    Carleman {
        #[arg(long = "L", default_value_t = 14.0)]
        half_width: f64,
        #[arg(long = "N", default_value_t = 2048)]
        nodes: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Comma-separated finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coeffs(pub Vec<f64>);

pub fn parse_coeffs(s: &str) -> std::result::Result<Coeffs, String> {
    let values = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| format!("'{t}' is not a number"))
                .and_then(|v| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(format!("'{t}' is not finite"))
                    }
                })
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Coeffs(values))
}

/// What a command produced, before rendering.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Json(Value),
    Csv(String),
}

impl Artifact {
    pub fn render(&self) -> String {
        match self {
            Artifact::Json(v) => to_json_string(v),
            Artifact::Csv(s) => s.clone(),
        }
    }
}

/// Pretty printer that writes every float with 17 significant digits.
struct SignificantDigits<'a>(PrettyFormatter<'a>);

impl Formatter for SignificantDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn to_value(x: impl Serialize) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn envelope(command: &str, input: Value, refs: &[&str], mut body: serde_json::Map<String, Value>) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("command".into(), json!(command));
    out.insert("input".into(), input);
    out.append(&mut body);
    out.insert("paper_refs".into(), json!(refs));
    Value::Object(out)
}

fn grid_json(grid: &LogGrid) -> Value {
    json!({ "L": grid.half_width(), "N": grid.len() })
}

fn csv(rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut s = String::from("eigenvalue,residual\n");
    for (l, r) in rows {
        let _ = writeln!(s, "{l:.16e},{r:.16e}");
    }
    s
}

fn require_json(format: Format, command: &str) -> Result<()> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(Error::InvalidInput(format!(
            "--format csv is only available for eigenvalue listings, not '{command}'"
        ))),
    }
}

fn spectrum_artifact(
    command: &str,
    input: Value,
    refs: &[&str],
    report: &SpectrumReport,
    grid: &LogGrid,
    format: Format,
) -> Artifact {
    if format == Format::Csv {
        return Artifact::Csv(csv(report.eigenvalues.iter().cloned().zip(report.residuals.iter().cloned())));
    }
    let v = &report.verdicts;
    let mut body = serde_json::Map::new();
    body.insert("grid".into(), grid_json(grid));
    body.insert("assembly".into(), to_value(&report.info));
    if let Some(positive) = v.positivity {
        body.insert("positivity".into(), json!({ "verdict": positive }));
    }
    body.insert("essential_spectrum".into(), to_value(v.essential_spectrum));
    body.insert("min_eigenvalue".into(), json!(v.min_eigenvalue));
    if let Some(c) = v.empirically_consistent {
        body.insert("empirically_consistent".into(), json!(c));
    }
    body.insert("filling".into(), to_value(&v.filling));
    body.insert("residual_max".into(), json!(report.residual_max()));
    body.insert("eigenvalues".into(), json!(report.eigenvalues));
    Artifact::Json(envelope(command, input, refs, body))
}

/// Runs one command and returns its artifact.
pub fn run(command: &Command) -> Result<Artifact> {
    match command {
        Command::Pq { p, out } => {
            require_json(out.format, "pq")?;
            let p = RealPolynomial::new(p.0.clone());
            let q = p_to_q(&p)?;
            let mut body = serde_json::Map::new();
            body.insert("q_coeffs".into(), json!(q.coeffs()));
            Ok(Artifact::Json(envelope(
                "pq",
                json!({ "p": p.coeffs() }),
                &["coefficient map P -> Q via the Taylor jet of 1/Gamma(1 - z)"],
                body,
            )))
        }
        Command::Qp { q, out } => {
            require_json(out.format, "qp")?;
            let q = RealPolynomial::new(q.0.clone());
            let p = q_to_p(&q)?;
            let mut body = serde_json::Map::new();
            body.insert("p_coeffs".into(), json!(p.coeffs()));
            Ok(Artifact::Json(envelope(
                "qp",
                json!({ "q": q.coeffs() }),
                &["inverse coefficient map Q -> P by back-substitution"],
                body,
            )))
        }
        Command::Positivity { p, out } => {
            require_json(out.format, "positivity")?;
            let p = RealPolynomial::new(p.0.clone());
            let q = p_to_q(&p)?;
            let verdict = is_nonnegative_on_reals(&q)?;
            let mut body = serde_json::Map::new();
            body.insert("q_coeffs".into(), json!(q.coeffs()));
            body.insert(
                "positivity".into(),
                json!({ "verdict": verdict.nonnegative, "certificate": to_value(&verdict.certificate) }),
            );
            Ok(Artifact::Json(envelope(
                "positivity",
                json!({ "p": p.coeffs() }),
                &["H >= 0 if and only if Q(x) >= 0 for all real x"],
                body,
            )))
        }
        Command::SpectrumHankel { p, grid, out } => {
            let grid = grid.grid()?;
            let p = RealPolynomial::new(p.0.clone());
            let kernel = QuasiCarlemanKernel::new(p.clone())?;
            let report = spectral_rules(&p, eigen_sym(&build_hankel_matrix(&kernel, &grid)?)?)?;
            Ok(spectrum_artifact(
                "spectrum-hankel",
                json!({ "p": p.coeffs() }),
                &[
                    "Hankel operator (Hf)(t) = int h(t+s) f(s) ds with h(t) = P(ln t)/t",
                    "essential spectrum: R for odd K, [0, inf) for even K with p_K > 0",
                    "H >= 0 if and only if Q(x) >= 0 for all real x",
                ],
                &report,
                &grid,
                out.format,
            ))
        }
        Command::SpectrumA { p, q, grid, out } => {
            let grid = grid.grid()?;
            let (p, input) = match (p, q) {
                (Some(p), _) => {
                    let p = RealPolynomial::new(p.0.clone());
                    let input = json!({ "p": p.coeffs() });
                    (p, input)
                }
                (None, Some(q)) => {
                    let q = RealPolynomial::new(q.0.clone());
                    let input = json!({ "q": q.coeffs() });
                    (q_to_p(&q)?, input)
                }
                (None, None) => return Err(Error::InvalidInput("one of --p or --q is required".into())),
            };
            let q = p_to_q(&p)?;
            let report = spectral_rules(&p, eigen_sym(&build_a_matrix(&q, &grid)?)?)?;
            let mut artifact = spectrum_artifact(
                "spectrum-a",
                input,
                &[
                    "A = v Q(D) v with D = i d/dxi and v(xi) = sqrt(pi / cosh(pi xi))",
                    "H >= 0 if and only if Q(x) >= 0 for all real x",
                ],
                &report,
                &grid,
                out.format,
            );
            if let Artifact::Json(Value::Object(m)) = &mut artifact {
                m.insert("q_coeffs".into(), json!(q.coeffs()));
            }
            Ok(artifact)
        }
        Command::EquivCheck { p, grid, pairs, out } => {
            require_json(out.format, "equiv-check")?;
            let grid = grid.grid()?;
            let p = RealPolynomial::new(p.0.clone());
            let mut checks = Vec::new();
            let mut worst = 0.0f64;
            for i in 0..*pairs {
                let f1 = test_function_factory(2 * i, &grid);
                let f2 = test_function_factory(2 * i + 1, &grid);
                let id = form_identity_check(&p, f1.as_fn(), f2.as_fn(), &grid)?;
                worst = worst.max(id.relative_gap);
                checks.push(json!({
                    "seeds": [2 * i, 2 * i + 1],
                    "lhs": [id.lhs.re, id.lhs.im],
                    "rhs": [id.rhs.re, id.rhs.im],
                    "relative_gap": id.relative_gap,
                    "flagged": id.flagged,
                }));
            }
            let mut body = serde_json::Map::new();
            body.insert("q_coeffs".into(), json!(p_to_q(&p)?.coeffs()));
            body.insert("grid".into(), grid_json(&grid));
            body.insert("checks".into(), json!(checks));
            body.insert("max_relative_gap".into(), json!(worst));
            Ok(Artifact::Json(envelope(
                "equiv-check",
                json!({ "p": p.coeffs() }),
                &["quadratic-form identity (H f1, f2) = (A F f1, F f2)"],
                body,
            )))
        }
        Command::DeltaEigs { h, t0, nodes, modes, out } => {
            let kernel = DeltaKernel::new(h.0.clone(), *t0)?;
            let n_max = modes.unwrap_or(nodes / 4);
            let s = delta_spectrum(&kernel, *nodes, n_max)?;
            if out.format == Format::Csv {
                let rows = s
                    .negative
                    .iter()
                    .zip(&s.negative_residuals)
                    .rev()
                    .chain(s.positive.iter().zip(&s.positive_residuals))
                    .map(|(&l, &r)| (l, r));
                return Ok(Artifact::Csv(csv(rows)));
            }
            let mut eigenvalues: Vec<f64> = s.negative.iter().rev().chain(&s.positive).cloned().collect();
            eigenvalues.dedup();
            let mut body = serde_json::Map::new();
            body.insert("order".into(), json!(s.order));
            body.insert("nodes".into(), json!(s.nodes));
            body.insert("eigenvalues".into(), json!(eigenvalues));
            body.insert("positive".into(), json!(s.positive));
            body.insert("negative".into(), json!(s.negative));
            body.insert("residual_max".into(), json!(s.residual_max()));
            body.insert("clusters".into(), to_value(&s.clusters));
            body.insert("max_cluster_size".into(), json!(s.max_cluster_size));
            body.insert("multiplicity_within_bound".into(), json!(s.multiplicity_within_bound));
            if kernel.order() > 0 {
                body.insert("weyl_constant".into(), json!(weyl_constant(&kernel, &s)?));
            }
            Ok(Artifact::Json(envelope(
                "delta-eigs",
                json!({ "h": kernel.coeffs(), "t0": kernel.t0() }),
                &[
                    "reflected operator (Hf)(t) = sum (-1)^k h_k f^(k)(t0 - t) with f^(k)(0) = 0, k < K",
                    "growth law lambda_n = +-|h_K| (2 pi n / t0)^K (1 + O(1/n))",
                ],
                body,
            )))
        }
        Command::Carleman { half_width, nodes, out } => {
            let grid = LogGrid::new(*half_width, *nodes)?;
            let report = eigen_sym(&build_hankel_matrix(&QuasiCarlemanKernel::carleman(), &grid)?)?;
            if out.format == Format::Csv {
                return Ok(Artifact::Csv(csv(report.eigenvalues.iter().cloned().zip(report.residuals.iter().cloned()))));
            }
            let max = *report.eigenvalues.last().expect("nonempty grid");
            let mut body = serde_json::Map::new();
            body.insert("grid".into(), grid_json(&grid));
            body.insert("max_eigenvalue".into(), json!(max));
            body.insert("gap".into(), json!((max - std::f64::consts::PI).abs()));
            body.insert("min_eigenvalue".into(), json!(report.eigenvalues[0]));
            body.insert("residual_max".into(), json!(report.residual_max()));
            body.insert("eigenvalues".into(), json!(report.eigenvalues));
            Ok(Artifact::Json(envelope(
                "carleman",
                json!({ "p": [1.0] }),
                &["Carleman operator diagonalized with multiplier pi / cosh(pi xi), supremum pi"],
                body,
            )))
        }
    }
}

fn output_of(command: &Command) -> &OutputArgs {
    match command {
        Command::Pq { out, .. }
        | Command::Qp { out, .. }
        | Command::Positivity { out, .. }
        | Command::SpectrumHankel { out, .. }
        | Command::SpectrumA { out, .. }
        | Command::EquivCheck { out, .. }
        | Command::DeltaEigs { out, .. }
        | Command::Carleman { out, .. } => out,
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

/// Runs a parsed command line, writes the artifact and returns the exit code.
pub fn main_with(cli: Cli) -> i32 {
    let artifact = match run(&cli.command) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = artifact.render();
    match &output_of(&cli.command).output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_VALIDATION;
            }
        }
        None => print!("{text}"),
    }
    EXIT_OK
}
