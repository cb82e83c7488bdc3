use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use equivar::expr::parse;
use equivar::linalg::io::{parse_real_matrix, parse_vector, FormatError};
use equivar::linalg::{symmetric_eigen, JacobiOptions, LinalgError, RealMatrix};
use equivar::sign_group::{
    default_commutator_tol, group_properties_check, symmetry_via_equivariance, CheckMode,
    ConjugatedGroup, GroupElement, GroupError, SignPattern, FULL_CHECK_CAP,
};
use equivar::stencil::{analyze, format_sig, StencilError, StencilInput, StencilWarning};

const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "equivar", version, about = "Symmetry through sign-group equivariance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigendecomposition of a symmetric matrix.
    Eig(EigArgs),
    /// Elements and axiom check of the group built from a symmetric matrix.
    Group(GroupArgs),
    /// Decide symmetry of a matrix through equivariance.
    Check(CheckArgs),
    /// Four-point stencil and its convergence order.
    Stencil(StencilArgs),
    /// Run the built-in worked example.
    Demo,
}

#[derive(Args)]
struct EigArgs {
    path: PathBuf,
    /// Off-diagonal convergence tolerance.
    #[arg(long, default_value_t = JacobiOptions::default().tol)]
    tol: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GroupArgs {
    path: PathBuf,
    /// Enumerate every element.
    #[arg(long, conflicts_with = "generators")]
    full: bool,
    /// List the generators only (default).
    #[arg(long)]
    generators: bool,
    /// Largest dimension accepted for full enumeration.
    #[arg(long, default_value_t = FULL_CHECK_CAP)]
    max_n: usize,
}

#[derive(Args)]
struct CheckArgs {
    path: PathBuf,
    /// Commutator tolerance; defaults to 1e-8 * max(1, ||A||_F).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct StencilArgs {
    /// Expression in x1..xn.
    #[arg(long = "f", allow_hyphen_values = true)]
    f: String,
    #[arg(long)]
    n: usize,
    /// Expansion point, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Displacement, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    h: String,
    #[arg(long, allow_hyphen_values = true)]
    s1: String,
    #[arg(long, allow_hyphen_values = true)]
    s2: String,
    /// Step scales, comma-separated and strictly decreasing.
    #[arg(long)]
    scales: Option<String>,
    /// Also write the per-scale records as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Display) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }

    fn numerical(message: impl Display) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.to_string(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Self::input(e)
    }
}

impl From<LinalgError> for Failure {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Empty
            | LinalgError::NotSquare { .. }
            | LinalgError::NonFinite { .. }
            | LinalgError::DimensionMismatch { .. }
            | LinalgError::InvalidOptions => Self::input(e),
            _ => Self::numerical(e),
        }
    }
}

impl From<GroupError> for Failure {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::Linalg(inner) => inner.into(),
            GroupError::InvalidPattern { .. }
            | GroupError::EmptyPattern
            | GroupError::PatternLength { .. } => Self::input(e),
            _ => Self::numerical(e),
        }
    }
}

impl From<StencilError> for Failure {
    fn from(e: StencilError) -> Self {
        match e {
            StencilError::Linalg(inner) => inner.into(),
            StencilError::Group(inner) => inner.into(),
            StencilError::DimensionMismatch { .. }
            | StencilError::ZeroDisplacement
            | StencilError::InvalidScales => Self::input(e),
            StencilError::AllBelowNoiseFloor { ref warnings, .. } => {
                let mut message = e.to_string();
                for w in warnings {
                    message.push_str(&format!("\nwarning: {w}"));
                }
                Self::numerical(message)
            }
            _ => Self::numerical(e),
        }
    }
}

fn read_matrix(path: &Path) -> Result<RealMatrix, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_real_matrix(&text)?)
}

fn row_line(row: &[f64]) -> String {
    row.iter()
        .map(|x| format!("{:>13}", format_sig(*x)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn print_matrix(m: &RealMatrix) {
    for row in m.rows() {
        println!("  {}", row_line(row));
    }
}

fn eig(args: EigArgs) -> Result<u8, Failure> {
    let a = read_matrix(&args.path)?;
    let opts = JacobiOptions {
        tol: args.tol,
        ..JacobiOptions::default()
    };
    let d = symmetric_eigen(&a, &opts)?;
    if args.json {
        let out = json!({
            "values": d.values,
            "V": d.vectors.to_rows(),
            "residual": d.residual,
        });
        println!("{out}");
    } else {
        println!("values:");
        println!("  {}", row_line(&d.values));
        println!("V (rows are eigenvectors):");
        print_matrix(&d.vectors);
        println!("residual: {}", format_sig(d.residual));
    }
    Ok(0)
}

fn print_element(e: &GroupElement) {
    println!("{}:", e.pattern);
    print_matrix(&e.matrix);
}

fn group(args: GroupArgs) -> Result<u8, Failure> {
    let a = read_matrix(&args.path)?;
    let n = a.dim();
    let cap = args.max_n.min(FULL_CHECK_CAP);
    if args.full && n > cap {
        return Err(Failure::numerical(format!(
            "full enumeration needs n <= {cap}, got n = {n}"
        )));
    }
    let g = ConjugatedGroup::of_symmetric(&a, &JacobiOptions::default())?;
    let mode = if args.full {
        for e in g.elements(cap)? {
            print_element(&e);
        }
        CheckMode::Full
    } else {
        for e in g.generators() {
            print_element(e);
        }
        CheckMode::Generators
    };
    let r = group_properties_check(&g, mode)?;
    println!("order: {}", r.order);
    println!("elements checked: {}", r.elements_checked);
    println!("max |g^2 - I|: {}", format_sig(r.involution_max_err));
    println!("max |g - g^T|: {}", format_sig(r.symmetry_max_err));
    println!("max commutator: {}", format_sig(r.commutation_max_err));
    println!("max closure error: {}", format_sig(r.closure_max_err));
    println!("closure: {}", if r.closure_ok { "ok" } else { "FAILED" });
    Ok(if r.closure_ok { 0 } else { EXIT_NUMERICAL })
}

fn check(args: CheckArgs) -> Result<u8, Failure> {
    let a = read_matrix(&args.path)?;
    let tol = args.tol.unwrap_or_else(|| default_commutator_tol(&a));
    let v = symmetry_via_equivariance(&a, tol)?;
    println!("symmetric: {}", v.verdict);
    println!("V:");
    print_matrix(&v.v);
    println!("max commutator: {} (tol {})", format_sig(v.max_commutator), format_sig(tol));
    Ok(if v.verdict { 0 } else { EXIT_NEGATIVE })
}

fn pattern(text: &str) -> Result<SignPattern, Failure> {
    text.parse::<SignPattern>().map_err(Failure::input)
}

fn stencil(args: StencilArgs) -> Result<u8, Failure> {
    let f = parse(&args.f, args.n).map_err(Failure::input)?;
    let xbar = parse_vector(&args.x)?;
    let h = parse_vector(&args.h)?;
    let mut input = StencilInput::new(f, xbar, h, pattern(&args.s1)?, pattern(&args.s2)?);
    if let Some(scales) = &args.scales {
        input.scales = parse_vector(scales)?;
    }
    let report = analyze(&input)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", report.to_table());
    match report.fitted_order {
        Some(p) => println!("fitted order: {}", format_sig(p)),
        None => println!("fitted order: n/a"),
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, report.to_csv())
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    }
    let degenerate = report.warnings.contains(&StencilWarning::GammaPairDegenerate);
    Ok(if degenerate { EXIT_NUMERICAL } else { 0 })
}

fn demo() -> Result<u8, Failure> {
    let report = equivar::demo::run()?;
    print!("{}", report.render());
    Ok(if report.all_passed() { 0 } else { EXIT_NEGATIVE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eig(a) => eig(a),
        Command::Group(a) => group(a),
        Command::Check(a) => check(a),
        Command::Stencil(a) => stencil(a),
        Command::Demo => demo(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
