//! `spinor-minimal`: constructions, verification suites, scans and mesh export.
//!
//! Exit codes: 0 success, 2 verification failure, 1 usage error.

mod commands;
mod parse;

use clap::{Parser, Subcommand};
use commands::{Outcome, Settings};
use spinor_minimal::par::Exec;
use spinor_minimal::report::Report;
use spinor_minimal::verify::SUITES;
use spinor_minimal::{Error, C64};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "spinor-minimal",
    version,
    about = "Minimal surfaces with embedded planar ends from spinor data",
    after_help = "SPINOR_MINIMAL_THREADS caps the number of worker threads."
)]
struct Cli {
    /// Relative rank tolerance for skew kernels.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Grid resolution N (N×N cells) for meshes.
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Radius of the disks removed around the ends (default 0.05 × min end distance).
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Seed for randomized trials.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Directory receiving <command>.json.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Also integrate the surface and write an OBJ mesh here.
    #[arg(long, global = true, value_name = "PATH")]
    mesh: Option<PathBuf>,
    /// Write a CSV of (u, X, n) samples next to each mesh.
    #[arg(long, global = true)]
    csv: bool,
    /// Disable parallel loops.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sphere with four planar ends: solve pf Ω = 0 and extract K.
    Sphere4,
    /// Sphere with six ends at σ = (σ₁, σ₂, σ₃), or a scan of the variety.
    ///
    /// Complex values starting with '-' that are not plain numbers (e.g. -i) go after `--`.
    Sphere6 {
        #[arg(value_parser = parse::complex, num_args = 3, allow_negative_numbers = true, value_name = "SIGMA")]
        sigma: Vec<C64>,
        /// Sample N points of the variety (default 10).
        #[arg(long, num_args = 0..=1, default_missing_value = "10", value_name = "N", conflicts_with = "sigma")]
        scan: Option<usize>,
    },
    /// Projective plane with three ends: the variety Γ at (c₁, c₂, c₃).
    Rp2 {
        #[arg(num_args = 3, allow_negative_numbers = true, value_name = "C")]
        c: Vec<f64>,
        /// Sample the boundary c₂ = c₃ at N values of c₁ (default 40).
        #[arg(long, num_args = 0..=1, default_missing_value = "40", value_name = "N", conflicts_with = "c")]
        boundary_scan: Option<usize>,
    },
    /// Torus with four ends at the half-periods of the lattice (ω₁, ω₃).
    ///
    /// Complex values starting with '-' that are not plain numbers (e.g. -i) go after `--`.
    Torus4 {
        #[arg(value_parser = parse::complex, default_value = "1", allow_negative_numbers = true)]
        omega1: C64,
        #[arg(value_parser = parse::complex, default_value = "i", allow_negative_numbers = true)]
        omega3: C64,
        /// Permutation (i, j, k) of 1, 2, 3.
        #[arg(long, default_value = "1,2,3")]
        choice: String,
    },
    /// Klein bottle with four ends.
    Klein4,
    /// Arf invariants of genus-g hyperelliptic spin structures.
    Arf {
        g: usize,
        /// 1-based indices of B among the 2g+1 branch points, e.g. "1,3".
        branch: Option<String>,
    },
    /// Matrix, rank and kernel of Ω for a domain spec.
    Omega {
        /// sphere:Z1,Z2,...[,inf] | twisted:A1,... | untwistedR:A1,... | pairedR:A1,...
        spec: String,
        /// Lattice half-periods ω₁,ω₃ for torus domains.
        #[arg(long, default_value = "1,i")]
        lattice: String,
    },
    /// Integrate a construction and write an OBJ mesh.
    Mesh {
        /// enneper, sphere4, torus4 or klein4.
        construction: String,
        output: PathBuf,
    },
    /// Run a verification suite, or "all".
    Verify { suite: String },
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(m) => Failure::Usage(m),
            e @ Error::DegenerateLattice => Failure::Usage(e.to_string()),
            e => Failure::Lib(e),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Lib(_) => 2,
        }
    }
}

fn report_code(report: &Report) -> u8 {
    if report.ok {
        0
    } else {
        2
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn choice(s: &str) -> Result<(usize, usize, usize), Failure> {
    let v = parse::index_list(s).map_err(Failure::Usage)?;
    match v[..] {
        [i, j, k] => Ok((i + 1, j + 1, k + 1)),
        _ => usage(format!("--choice needs three indices, got {s:?}")),
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    if !(cli.tol > 0.0) {
        return usage("--tol must be positive");
    }
    if cli.eps.is_some_and(|e| !(e > 0.0)) {
        return usage("--eps must be positive");
    }
    if cli.grid == Some(0) {
        return usage("--grid must be at least 1");
    }
    let s = Settings {
        tol: cli.tol,
        grid: cli.grid,
        eps: cli.eps,
        seed: cli.seed,
        exec: if cli.sequential { Exec::Sequential } else { Exec::default() },
        mesh: cli.mesh.clone(),
        csv: cli.csv,
    };
    let out = match &cli.command {
        Command::Sphere4 => commands::cmd_sphere4(&s)?,
        Command::Sphere6 { sigma, scan } => {
            if *scan == Some(0) {
                return usage("--scan needs at least one point");
            }
            let sigma = (sigma.len() == 3).then(|| [sigma[0], sigma[1], sigma[2]]);
            if sigma.is_none() && scan.is_none() {
                return usage("sphere6 needs σ₁ σ₂ σ₃ or --scan");
            }
            commands::cmd_sphere6(sigma, *scan, &s)?
        }
        Command::Rp2 { c, boundary_scan } => {
            let c = (c.len() == 3).then(|| [c[0], c[1], c[2]]);
            if c.is_none() && boundary_scan.is_none() || *boundary_scan == Some(0) {
                return usage("rp2 needs c₁ c₂ c₃ or --boundary-scan N with N ≥ 1");
            }
            commands::cmd_rp2(c, *boundary_scan, &s)?
        }
        Command::Torus4 { omega1, omega3, choice: ch } => commands::cmd_torus4(*omega1, *omega3, choice(ch)?, &s)?,
        Command::Klein4 => commands::cmd_klein4(&s)?,
        Command::Arf { g, branch } => {
            let b = branch.as_deref().map(parse::index_list).transpose().map_err(Failure::Usage)?;
            commands::cmd_arf(*g, b)?
        }
        Command::Omega { spec, lattice } => {
            let spec = parse::domain(spec).map_err(Failure::Usage)?;
            let l = parse::complex_list(lattice).map_err(Failure::Usage)?;
            if l.len() != 2 {
                return usage("--lattice needs ω₁,ω₃");
            }
            commands::cmd_omega(&spec, (l[0], l[1]), &s)?
        }
        Command::Mesh { construction, output } => commands::cmd_mesh(construction, output, &s)?,
        Command::Verify { suite } => {
            if suite != "all" && !SUITES.contains(&suite.as_str()) {
                return usage(format!("unknown suite {suite:?}; expected all or one of {}", SUITES.join(", ")));
            }
            commands::cmd_verify(suite, &s)?
        }
    };
    Ok(out)
}

fn file_stem(command: &str) -> String {
    command.split_whitespace().collect::<Vec<_>>().join("-")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Outcome { report, text }) => {
            if let Some(dir) = &cli.out {
                let path = dir.join(format!("{}.json", file_stem(&report.command)));
                if let Err(e) =
                    std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, report.to_json() + "\n"))
                {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            let body = if cli.json { report.to_json() + "\n" } else { text.unwrap_or_default() + &report.to_text() };
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = stdout.write_all(body.as_bytes()).and_then(|_| stdout.flush()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: cannot write output: {e}");
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(report_code(&report))
        }
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Lib(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let mut rep = Report::new("t");
        rep.below("small", 0.1, 1.0);
        assert_eq!(report_code(&rep), 0);
        rep.below("large", 2.0, 1.0);
        assert_eq!(report_code(&rep), 2);
        assert_eq!(Failure::from(Error::InvalidInput("x".into())).code(), 1);
        assert_eq!(Failure::from(Error::DegenerateLattice).code(), 1);
        assert_eq!(Failure::from(Error::NoConvergence("x".into())).code(), 2);
        assert_eq!(Failure::from(Error::Verification("x".into())).code(), 2);
    }
}
