use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hdc_core::boundary_chart::{
    chart_decompose, chart_reconstruct, curve_limit, invert_in_chart, DEFAULT_EPS_BREAK,
};
use hdc_core::decompositions::{cartan_kak, horospherical, iwasawa_kan, polar};
use hdc_core::documents::{
    from_json, rows_of, to_json, ChartDocument, FlagDocument, MatrixDocument,
};
use hdc_core::face_lattice::{enumerate_faces, is_fiber_element, ParabolicDescriptor};
use hdc_core::linalg::Mat;
use hdc_core::root_datum::{build_root_datum, coroot_matrix, CartanVector, NodeSet};
use hdc_core::verification::{
    b_transitivity_check, bracket_filtration_check, haar_check, inversion_diffeo_check,
    isotropy_check_all, minimality_check, Axiom, AxiomReport, Bound, Detail,
};
use hdc_core::Error;

const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
const DEFAULT_FIBER_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "hdc",
    version,
    about = "Compactification charts, faces and checks for SL(n, R)"
)]
struct Cli {
    /// Emit JSON instead of text where both are available.
    #[arg(long, global = true)]
    json: bool,

    /// Override the command's numerical tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Root datum of type A_{n-1}.
    Roots {
        #[arg(long)]
        n: usize,
    },
    /// Factor the matrix document on standard input.
    Decompose {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Comma-separated nodes, e.g. `1,3`; empty for the Borel.
        #[arg(long)]
        subset: Option<String>,
    },
    /// Chart coordinates.
    Chart {
        #[command(subcommand)]
        action: ChartAction,
    },
    /// Limit of k1 · exp(tH) · k2 as t grows.
    Limit {
        /// Matrix document for k1.
        #[arg(long)]
        k1: PathBuf,
        /// JSON array with the diagonal of H.
        #[arg(long = "H")]
        h: PathBuf,
        /// Matrix document for k2.
        #[arg(long)]
        k2: PathBuf,
    },
    /// Boundary faces of the compactification.
    Faces {
        #[arg(long)]
        n: usize,
    },
    /// Run a numerical check and exit 4 if it fails.
    Verify {
        #[arg(value_enum)]
        check: Check,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ChartAction {
    /// Matrix document on stdin to chart document.
    Decompose {
        #[arg(long, default_value_t = DEFAULT_EPS_BREAK)]
        eps_break: f64,
    },
    /// Chart document on stdin to matrix document.
    Reconstruct,
    /// Chart document on stdin to the chart document of the inverse.
    Invert,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Kak,
    Iwasawa,
    Polar,
    Horospherical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Haar,
    Inversion,
    Bnormal,
    Rank,
    Minimality,
    Brackets,
}

enum Failure {
    Validation(String),
    Numeric(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Verification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numeric(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::InvalidRank(_)
            | Error::NodeOutOfRange { .. }
            | Error::DimensionMismatch(_)
            | Error::NotTraceFree(_)
            | Error::InvalidDiagonal(_)
            | Error::NegativeComponent(_)
            | Error::WrongComponent(_)
            | Error::NegativeTau { .. }
            | Error::InvalidChart(_)
            | Error::OutsideChamber { .. }
            | Error::MismatchedSubsets
            | Error::InvalidParameter(_)
            | Error::DegenerateGrid(_)
            | Error::InvalidDocument(_) => Failure::Validation(message),
            Error::IllConditioned(_)
            | Error::ZeroMatrix
            | Error::SingularBlock(_)
            | Error::UnreliableFit { .. }
            | Error::StepTooLarge { .. } => Failure::Numeric(message),
        }
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("hdc: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Roots { n } => roots(*n, cli.json),
        Command::Decompose { mode, subset } => decompose(
            *mode,
            subset.as_deref(),
            cli.tol.unwrap_or(DEFAULT_RESIDUAL_TOL),
        ),
        Command::Chart { action } => chart(action),
        Command::Limit { k1, h, k2 } => limit(k1, h, k2, cli.tol.unwrap_or(DEFAULT_FIBER_TOL)),
        Command::Faces { n } => faces(*n, cli.json),
        Command::Verify {
            check,
            n,
            samples,
            seed,
        } => verify(*check, *n, *samples, *seed, cli.json),
    }
}

fn read_stdin() -> Result<String, Failure> {
    let mut text = String::new();
    std::io::stdin()
        .read_to_string(&mut text)
        .map_err(|e| Failure::Validation(format!("cannot read standard input: {e}")))?;
    Ok(text)
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))
}

fn check_tol(tol: f64) -> Result<f64, Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(Failure::Validation(format!("--tol {tol} must be positive")))
    }
}

fn parse_subset(n: usize, text: &str) -> Result<NodeSet, Failure> {
    let nodes = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Failure::Validation(format!("bad node {s:?} in --subset")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NodeSet::new(n, nodes)?)
}

fn roots(n: usize, as_json: bool) -> Outcome {
    let datum = build_root_datum(n)?;
    let coroots = (1..n)
        .map(|k| {
            Ok(coroot_matrix(n, k)?
                .diagonal()
                .iter()
                .copied()
                .collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>, Error>>()?;
    if as_json {
        return Ok(to_json(&json!({
            "n": n,
            "nodes": datum.nodes,
            "positive_roots": datum.positive_roots,
            "coroots": coroots,
            "sigma": datum.sigma,
        })));
    }
    let mut out = String::new();
    let _ = writeln!(out, "n = {n}");
    let _ = writeln!(out, "nodes: {:?}", datum.nodes);
    let roots: Vec<String> = datum
        .positive_roots
        .iter()
        .map(|(i, j)| format!("e{i}-e{j}"))
        .collect();
    let _ = writeln!(out, "positive roots: {}", roots.join(" "));
    for (k, c) in coroots.iter().enumerate() {
        let entries: Vec<String> = c.iter().map(|x| format!("{x:.6}")).collect();
        let _ = writeln!(out, "coroot {}: [{}]", k + 1, entries.join(", "));
    }
    let _ = write!(out, "sigma: {:?}", datum.sigma);
    Ok(out)
}

fn relative_residual(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm()
}

fn decompose(mode: Mode, subset: Option<&str>, tol: f64) -> Outcome {
    let tol = check_tol(tol)?;
    if !matches!(mode, Mode::Horospherical) && subset.is_some() {
        return Err(Failure::Validation(
            "--subset only applies to horospherical mode".into(),
        ));
    }
    if matches!(mode, Mode::Horospherical) && subset.is_none() {
        return Err(Failure::Validation(
            "horospherical mode needs --subset".into(),
        ));
    }
    let doc: MatrixDocument = from_json(&read_stdin()?)?;
    let g = doc.to_sl()?;
    let m = g.matrix();
    let (mut value, reconstructed) = match mode {
        Mode::Kak => {
            let f = cartan_kak(&g);
            let r = f.reconstruct();
            (
                json!({"mode": "kak", "k1": rows_of(&f.k1), "a": f.a, "k2": rows_of(&f.k2), "non_unique": f.non_unique}),
                r,
            )
        }
        Mode::Iwasawa => {
            let f = iwasawa_kan(&g);
            let r = f.reconstruct();
            (
                json!({"mode": "iwasawa", "k": rows_of(&f.k), "a": f.a, "n": rows_of(&f.n_upper)}),
                r,
            )
        }
        Mode::Polar => {
            let f = polar(&g)?;
            let r = f.reconstruct();
            (
                json!({"mode": "polar", "orthogonal": rows_of(&f.orthogonal), "positive": rows_of(&f.positive)}),
                r,
            )
        }
        Mode::Horospherical => {
            let s = parse_subset(g.n(), subset.unwrap_or_default())?;
            let f = horospherical(&g, &s)?;
            let r = f.reconstruct();
            (
                json!({"mode": "horospherical", "subset": s.nodes(), "k": rows_of(&f.k), "m": rows_of(&f.m), "a_s": f.a_s, "n_s": rows_of(&f.n_s)}),
                r,
            )
        }
    };
    let residual = relative_residual(&reconstructed, m);
    eprintln!("residual {residual:.3e}");
    if !(residual <= tol) {
        return Err(Failure::Numeric(format!(
            "reconstruction residual {residual:e} exceeds {tol:e}"
        )));
    }
    value["residual"] = json!(residual);
    Ok(to_json(&value))
}

fn chart(action: &ChartAction) -> Outcome {
    match action {
        ChartAction::Decompose { eps_break } => {
            let doc: MatrixDocument = from_json(&read_stdin()?)?;
            let g = doc.to_sl()?;
            let d = chart_decompose(&g, *eps_break)?;
            if !d.ambiguous.is_empty() {
                eprintln!(
                    "warning: gap ratios at {:?} lie in [eps_break, 2 eps_break)",
                    d.ambiguous
                );
            }
            Ok(to_json(&ChartDocument::from_point(&d.point)))
        }
        ChartAction::Reconstruct => {
            let doc: ChartDocument = from_json(&read_stdin()?)?;
            let p = doc.to_point()?;
            let m = chart_reconstruct(&p)?;
            let mut out = MatrixDocument::from_matrix(&m);
            if p.is_interior() {
                out.kind = Some("sl".into());
            }
            Ok(to_json(&out))
        }
        ChartAction::Invert => {
            let doc: ChartDocument = from_json(&read_stdin()?)?;
            let p = invert_in_chart(&doc.to_point()?)?;
            Ok(to_json(&ChartDocument::from_point(&p)))
        }
    }
}

fn limit(k1: &Path, h: &Path, k2: &Path, tol: f64) -> Outcome {
    let tol = check_tol(tol)?;
    let k1 = from_json::<MatrixDocument>(&read_file(k1)?)?.to_matrix()?;
    let k2 = from_json::<MatrixDocument>(&read_file(k2)?)?.to_matrix()?;
    let entries: Vec<f64> = from_json(&read_file(h)?)?;
    let h = CartanVector::new(entries)?;
    let lim = curve_limit(&k1, &h, &k2)?;
    let fiber_element = is_fiber_element(
        &lim.fiber_representative,
        &ParabolicDescriptor::of_flag(lim.right_flag.clone()),
        &ParabolicDescriptor::of_flag(lim.left_flag.clone()),
        tol,
    )?;
    Ok(to_json(&json!({
        "face": lim.face,
        "left_flag": FlagDocument::from_flag(&lim.left_flag),
        "right_flag": FlagDocument::from_flag(&lim.right_flag),
        "fiber_representative": rows_of(&lim.fiber_representative),
        "fiber_element": fiber_element,
    })))
}

fn faces(n: usize, as_json: bool) -> Outcome {
    let faces = enumerate_faces(n)?;
    if as_json {
        return Ok(to_json(&json!({"n": n, "faces": faces})));
    }
    let mut out = format!(
        "{:<16} {:>5} {:>8} {:>8} {:>8}",
        "S", "codim", "dim_flag", "dim_levi", "dim"
    );
    for f in &faces {
        let _ = write!(
            out,
            "\n{:<16} {:>5} {:>8} {:>8} {:>8}",
            format!("{:?}", f.subset.nodes()),
            f.codim,
            f.dim_flag,
            f.dim_levi,
            f.dim_face
        );
    }
    Ok(out)
}

fn summarize(report: &AxiomReport) -> String {
    let status = if report.passed { "PASS" } else { "FAIL" };
    let relation = match report.bound {
        Bound::AtMost => "at most",
        Bound::AtLeast => "at least",
    };
    let mut out = format!(
        "{:?} {status}: worst case {:.6e} (needs {relation} {:e}) over {} checks",
        report.axiom,
        report.worst_case,
        report.tolerance,
        report.details.len()
    );
    for d in report.details.iter().filter(|d| !d.passed) {
        let _ = write!(out, "\n  failed: {} = {:.6e}", d.label, d.value);
    }
    out
}

fn verify(check: Check, n: usize, samples: Option<usize>, seed: u64, as_json: bool) -> Outcome {
    if n < 2 {
        return Err(Failure::Validation(format!("--n {n} must be at least 2")));
    }
    if samples == Some(0) {
        return Err(Failure::Validation("--samples must be positive".into()));
    }
    let (report, value): (AxiomReport, Value) = match check {
        Check::Haar => {
            let s = haar_check(n, seed)?;
            let v = serde_json::to_value(&s).expect("serialisable");
            (s.report, v)
        }
        Check::Inversion => wrap(inversion_diffeo_check(n, samples.unwrap_or(500), seed)?),
        Check::Bnormal => wrap(isotropy_check_all(n, seed)?),
        Check::Rank => wrap(b_transitivity_check(n, samples.unwrap_or(100), seed)?),
        Check::Minimality => wrap(minimality_check(n, samples.unwrap_or(20), seed)?),
        Check::Brackets => {
            if n > 8 {
                return Err(Failure::Validation(format!(
                    "--n {n} exceeds 8 for brackets"
                )));
            }
            let ok = bracket_filtration_check(n);
            let detail = Detail::new(
                format!("n = {n}"),
                f64::from(u8::from(ok)),
                1.0,
                Bound::AtLeast,
            );
            wrap(AxiomReport::from_uniform(
                Axiom::Brackets,
                1.0,
                Bound::AtLeast,
                vec![detail],
            ))
        }
    };
    let mut out = if as_json {
        to_json(&value)
    } else {
        let mut text = summarize(&report);
        if let Check::Haar = check {
            for fit in value["fits"].as_array().into_iter().flatten() {
                let _ = write!(
                    text,
                    "\n  node {}: slope {:.6}, residual {:.2e}",
                    fit["parameter"],
                    fit["slope"].as_f64().unwrap_or(f64::NAN),
                    fit["max_residual"].as_f64().unwrap_or(f64::NAN)
                );
            }
        }
        text
    };
    if !report.passed {
        println!("{out}");
        out = format!("{:?} check failed", report.axiom);
        return Err(Failure::Verification(out));
    }
    Ok(out)
}

fn wrap(report: AxiomReport) -> (AxiomReport, Value) {
    let v = serde_json::to_value(&report).expect("serialisable");
    (report, v)
}
