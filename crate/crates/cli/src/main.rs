use std::path::{Path, PathBuf};
use std::process::ExitCode;

use calibra::report::{render_text, run, to_json, RunError, RunOptions};
use calibra::scenario::{parse_spec, Diagnostic};
use calibra::{Family, DIM};
use clap::{Parser, Subcommand};

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_CROSS_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "calibra", version, about = "Curvature and Einstein checks for torsionful connections on S² × T²")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and report curvature, harmonicity and the Einstein verdict.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Chart point θ,φ,x,y for pointwise quantities.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Option<[f64; DIM]>,
        /// Override the scenario tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Include wall-clock timings (makes the report non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Check a scenario file without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// List the built-in torsion families.
    Families,
}

fn parse_point(s: &str) -> Result<[f64; DIM], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != DIM {
        return Err(format!("expected θ,φ,x,y (4 comma-separated numbers), got {} values", parts.len()));
    }
    let mut out = [0.0; DIM];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|e| format!("bad coordinate {p:?}: {e}"))?;
    }
    Ok(out)
}

fn report_diagnostics(diags: &[Diagnostic]) -> ExitCode {
    for d in diags {
        eprintln!("error: {d}");
    }
    ExitCode::from(EXIT_VALIDATION)
}

fn read(path: &Path) -> Result<String, Vec<Diagnostic>> {
    std::fs::read_to_string(path).map_err(|e| {
        vec![Diagnostic { path: String::new(), message: format!("cannot read {}: {e}", path.display()), line: None, column: None }]
    })
}

fn cmd_run(scenario: &Path, out: Option<&Path>, point: Option<[f64; DIM]>, tol: Option<f64>, timing: bool) -> ExitCode {
    let mut spec = match read(scenario).and_then(|t| parse_spec(&t)) {
        Ok(s) => s,
        Err(d) => return report_diagnostics(&d),
    };
    if point.is_some() {
        spec.point = point;
    }
    if let Some(t) = tol {
        spec.tolerance = t;
    }
    let scenario = match spec.check() {
        Ok(s) => s,
        Err(d) => return report_diagnostics(&d),
    };
    let report = match run(&scenario, RunOptions { timing }) {
        Ok(r) => r,
        Err(RunError::CrossCheck { invariant, detail }) => {
            eprintln!("error: internal cross-check \"{invariant}\" failed: {detail}");
            return ExitCode::from(EXIT_CROSS_CHECK);
        }
    };
    print!("{}", render_text(&report));
    if let Some(path) = out {
        if let Err(e) = std::fs::write(path, to_json(&report)) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_IO);
        }
    }
    ExitCode::SUCCESS
}

fn cmd_validate(scenario: &Path) -> ExitCode {
    let diags = calibra::scenario::validate(scenario);
    if diags.is_empty() {
        println!("ok");
        ExitCode::SUCCESS
    } else {
        report_diagnostics(&diags)
    }
}

fn cmd_families() -> ExitCode {
    for family in Family::builtins() {
        let torsion = family.torsion::<f64>().expect("built-in family");
        let flat = if torsion.is_totally_antisymmetric() { "totally antisymmetric" } else { "not totally antisymmetric" };
        println!("{}  ({flat})", family.name());
        let comps = torsion.nonzero_components();
        if comps.is_empty() {
            println!("  T = 0");
        }
        for (i, j, k, c) in comps {
            println!("  T(e{},e{}) along e{} = {c}", i + 1, j + 1, k + 1);
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out, point, tol, timing } => cmd_run(&scenario, out.as_deref(), point, tol, timing),
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Families => cmd_families(),
    }
}
