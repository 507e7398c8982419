//! `simplex-fe`: tabulate multi-indices and Lagrange nodes, certify
//! unisolvence, print dual bases, transport elements, and run the Poisson
//! demo.
//!
//! Exit codes: 0 success, 1 mathematical negative (singular or degenerate),
//! 2 usage error, 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use simplex_fe::element::{
    dual_basis, make_lagrange_fe, transform_fe, unisolvence_check, FeDescriptor, FiniteElement, Mode,
};
use simplex_fe::fem::{manufactured_poly, solve_poisson, structured_mesh, ExactSolution, SineSolution, Source};
use simplex_fe::geom::vtx_ref;
use simplex_fe::mindex::table;
use simplex_fe::scalar::{format_rational, parse_rational};
use simplex_fe::{AffineMap, Error, Point, Rational, Scalar, VertexFamily};

#[derive(Parser)]
#[command(name = "simplex-fe", version, about = "Simplicial Lagrange finite elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the multi-indices of sum at most k in grsymlex order.
    Mindex(MindexArgs),
    /// Print the Lagrange nodes with their multi-indices.
    Nodes(ElementArgs),
    /// Certify that the Lagrange element is unisolvent.
    Unisolvence(ElementArgs),
    /// Print the dual basis in monomial coefficients.
    Basis(ElementArgs),
    /// Transport an element descriptor by an affine map.
    Transform(TransformArgs),
    /// Solve -Δu = f on the unit interval or square with a manufactured solution.
    Poisson(PoissonArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Float,
    Rational,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Float => Mode::Float,
            ModeArg::Rational => Mode::Rational,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Manufactured {
    /// u = Π x_i (1 - x_i)
    Poly,
    /// u = Π sin(π x_i)
    Sine,
}

#[derive(Args)]
struct MindexArgs {
    #[arg(short = 'd')]
    d: usize,
    #[arg(short = 'k')]
    k: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ElementArgs {
    #[arg(short = 'd')]
    d: usize,
    #[arg(short = 'k')]
    k: usize,
    /// Vertex family JSON `{"d": .., "vertices": [[..], ..]}`; defaults to the reference simplex.
    #[arg(long, value_name = "FILE")]
    vertices: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "float")]
    mode: ModeArg,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Relative pivot threshold below which a float matrix counts as singular.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
}

#[derive(Args)]
struct TransformArgs {
    /// Element descriptor JSON.
    #[arg(long, value_name = "FILE")]
    fe: PathBuf,
    /// Affine map JSON `{"matrix": [[..], ..], "offset": [..]}`.
    #[arg(long, value_name = "FILE")]
    map: PathBuf,
    #[arg(long, value_enum, default_value = "float")]
    mode: ModeArg,
}

#[derive(Args)]
struct PoissonArgs {
    #[arg(short = 'd')]
    d: usize,
    #[arg(short = 'k')]
    k: usize,
    #[arg(short = 'n')]
    n: usize,
    #[arg(long, value_enum, default_value = "poly")]
    manufactured: Manufactured,
    /// Worker threads for assembly; results do not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
    /// Also write the nodal solution as CSV.
    #[arg(long, value_name = "FILE")]
    solution: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Singular | Error::DegenerateVertices | Error::NotVanishingOnFace { .. } => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mindex(a) => cmd_mindex(&a),
        Command::Nodes(a) => with_mode(&a, cmd_nodes::<f64>, cmd_nodes::<Rational>),
        Command::Unisolvence(a) => with_mode(&a, cmd_unisolvence::<f64>, cmd_unisolvence::<Rational>),
        Command::Basis(a) => with_mode(&a, cmd_basis::<f64>, cmd_basis::<Rational>),
        Command::Transform(a) => match a.mode {
            ModeArg::Float => cmd_transform::<f64>(&a),
            ModeArg::Rational => cmd_transform::<Rational>(&a),
        },
        Command::Poisson(a) => cmd_poisson(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn with_mode(a: &ElementArgs, float: fn(&ElementArgs) -> CliResult, exact: fn(&ElementArgs) -> CliResult) -> CliResult {
    match a.mode {
        ModeArg::Float => float(a),
        ModeArg::Rational => exact(a),
    }
}

fn text<T: Scalar>(x: &T) -> String {
    if T::EXACT {
        format_rational(&x.to_rational())
    } else {
        x.to_f64().to_string()
    }
}

fn value<T: Scalar>(x: &T) -> Value {
    if T::EXACT {
        Value::String(format_rational(&x.to_rational()))
    } else {
        json!(x.to_f64())
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values always serialize"));
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

// Numbers are read as decimal literals, so `0.1` is exactly 1/10 in rational
// mode; strings may hold fractions such as "1/3".
fn json_scalar<T: Scalar>(v: &Value) -> Result<T, Failure> {
    let r = match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        _ => None,
    };
    r.map(|r| T::from_rational(&r)).ok_or_else(|| Failure::usage(format!("not a number: {v}")))
}

fn load_vertices<T: Scalar>(path: Option<&Path>, d: usize) -> Result<VertexFamily<T>, Failure> {
    let Some(path) = path else { return Ok(vtx_ref(d)) };
    let doc: Value =
        serde_json::from_str(&read_file(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    if let Some(fd) = doc.get("d") {
        if fd.as_u64() != Some(d as u64) {
            return Err(Failure::usage(format!("vertex file has d = {fd}, expected {d}")));
        }
    }
    let rows = doc
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| Failure::usage("vertex file needs a \"vertices\" array"))?;
    let mut pts = Vec::with_capacity(rows.len());
    for row in rows {
        let coords = row.as_array().ok_or_else(|| Failure::usage("each vertex must be an array"))?;
        pts.push(Point(coords.iter().map(json_scalar).collect::<Result<_, _>>()?));
    }
    VertexFamily::new(d, pts).map_err(|e| Failure::usage(e.to_string()))
}

fn build_element<T: Scalar>(a: &ElementArgs) -> Result<FiniteElement<T>, Failure> {
    let vtx = load_vertices::<T>(a.vertices.as_deref(), a.d)?;
    Ok(make_lagrange_fe(a.d, a.k, &vtx, None)?)
}

fn check_tol(tol: Option<f64>) -> CliResult {
    match tol {
        Some(t) if !(t.is_finite() && t >= 0.0) => {
            Err(Failure::usage(format!("--tol must be a nonnegative number, got {t}")))
        }
        _ => Ok(()),
    }
}

fn cmd_mindex(a: &MindexArgs) -> CliResult {
    let t = table(a.d, a.k);
    match a.format {
        Format::Csv => {
            let mut out = Vec::new();
            t.write_csv(&mut out)?;
            print!("{}", String::from_utf8_lossy(&out));
        }
        Format::Json => print_json(&json!({ "d": a.d, "k": a.k, "rows": t.rows() })),
    }
    Ok(())
}

fn cmd_nodes<T: Scalar>(a: &ElementArgs) -> CliResult {
    check_tol(a.tol)?;
    let fe = build_element::<T>(a)?;
    let nodes = fe.nodes();
    let alphas = table(a.d, a.k);
    match a.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut header = vec!["index".to_string()];
            header.extend((0..a.d).map(|j| format!("alpha_{j}")));
            header.extend((0..a.d).map(|j| format!("x_{j}")));
            println!("{}", header.join(","));
            for (i, (node, alpha)) in nodes.iter().zip(alphas.rows()).enumerate() {
                let mut row = vec![i.to_string()];
                row.extend(alpha.entries().iter().map(ToString::to_string));
                row.extend(node.iter().map(text));
                println!("{}", row.join(","));
            }
        }
        Format::Json => {
            let rows: Vec<Value> = nodes
                .iter()
                .zip(alphas.rows())
                .enumerate()
                .map(|(i, (node, alpha))| {
                    json!({ "index": i, "alpha": alpha, "x": node.iter().map(value).collect::<Vec<_>>() })
                })
                .collect();
            print_json(&json!({ "d": a.d, "k": a.k, "nodes": rows }));
        }
    }
    Ok(())
}

fn cmd_unisolvence<T: Scalar>(a: &ElementArgs) -> CliResult {
    check_tol(a.tol)?;
    let fe = build_element::<T>(a)?;
    let mut report = unisolvence_check(&fe, a.mode.into())?;
    if let (Some(tol), ModeArg::Float) = (a.tol, a.mode) {
        let v: simplex_fe::linalg::Matrix = fe.unisolvence_matrix()?.map(Scalar::to_f64);
        if fe.ndof() > 0 && v.lu()?.min_pivot_ratio() <= tol {
            report.singular = true;
            report.condition_estimate = f64::INFINITY;
        }
    }
    match a.format.unwrap_or(Format::Json) {
        Format::Json => {
            print_json(&serde_json::to_value(&report).map_err(|e| Failure::usage(e.to_string()))?);
        }
        Format::Csv => {
            println!("singular,det,condition_estimate");
            println!("{},{},{}", report.singular, report.det, report.condition_estimate);
        }
    }
    if report.singular {
        return Err(Failure { code: 1, message: "unisolvence matrix is singular".into() });
    }
    Ok(())
}

fn cmd_basis<T: Scalar>(a: &ElementArgs) -> CliResult {
    check_tol(a.tol)?;
    let fe = build_element::<T>(a)?;
    let theta = dual_basis(&fe)?;
    let monomials = table(a.d, a.k);
    match a.format.unwrap_or(Format::Json) {
        Format::Json => {
            let basis: Vec<Value> = theta
                .iter()
                .map(|t| json!({ "d": a.d, "k": a.k, "coeffs": t.coeffs().iter().map(value).collect::<Vec<_>>() }))
                .collect();
            print_json(&json!({ "d": a.d, "k": a.k, "monomials": monomials.rows(), "basis": basis }));
        }
        Format::Csv => {
            let mut header = vec!["index".to_string()];
            header.extend(
                monomials.rows().iter().map(|m| m.entries().iter().fold("c".to_string(), |s, e| format!("{s}_{e}"))),
            );
            println!("{}", header.join(","));
            for (i, t) in theta.iter().enumerate() {
                let mut row = vec![i.to_string()];
                row.extend(t.coeffs().iter().map(text));
                println!("{}", row.join(","));
            }
        }
    }
    Ok(())
}

fn cmd_transform<T: Scalar>(a: &TransformArgs) -> CliResult {
    let desc: FeDescriptor =
        serde_json::from_str(&read_file(&a.fe)?).map_err(|e| Failure::usage(format!("{}: {e}", a.fe.display())))?;
    let map: AffineMap =
        serde_json::from_str(&read_file(&a.map)?).map_err(|e| Failure::usage(format!("{}: {e}", a.map.display())))?;
    let fe = FiniteElement::from_descriptor(&desc)?.convert::<T>();
    let moved = transform_fe(&fe, &map.convert::<T>())?;
    print_json(&serde_json::to_value(moved.descriptor()).map_err(|e| Failure::usage(e.to_string()))?);
    Ok(())
}

fn cmd_poisson(a: &PoissonArgs) -> CliResult {
    if a.k == 0 {
        return Err(Failure::usage("k = 0 is unsupported: piecewise constants are not in H1"));
    }
    if !(1..=2).contains(&a.d) {
        return Err(Failure::usage(format!("the Poisson demo runs in d = 1 or 2, got {}", a.d)));
    }
    if a.n == 0 {
        return Err(Failure::usage("n must be at least 1"));
    }
    let mesh = structured_mesh(a.d, a.n)?;
    let threads = a.threads as usize;
    let solved = match a.manufactured {
        Manufactured::Poly => {
            let (u, f) = manufactured_poly(a.d)?;
            solve_poisson(&mesh, a.k, Source::Poly(&f), Some(ExactSolution::Poly(&u)), threads)
        }
        Manufactured::Sine => {
            let s = SineSolution { d: a.d };
            let (value, gradient, source) =
                (|x: &[f64]| s.value(x), |x: &[f64]| s.gradient(x), |x: &[f64]| s.source(x));
            let exact = ExactSolution::Fn { value: &value, gradient: &gradient };
            solve_poisson(&mesh, a.k, Source::Fn(&source), Some(exact), threads)
        }
    };
    let sol = solved.map_err(|e| Failure { code: 3, message: format!("solver failure: {e}") })?;
    if let Some(path) = &a.solution {
        let file = fs::File::create(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        sol.write_csv(file)?;
    }
    let name = match a.manufactured {
        Manufactured::Poly => "poly",
        Manufactured::Sine => "sine",
    };
    print_json(&json!({
        "d": a.d,
        "k": a.k,
        "n": a.n,
        "manufactured": name,
        "n_dof": sol.n_dof,
        "l2_error": sol.l2_error,
        "h1_semi_error": sol.h1_semi_error,
    }));
    Ok(())
}
