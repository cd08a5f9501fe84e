//! Command-line front end: construct spaces and elements from JSON, compute
//! norm certificates, estimate cb norms, emit the diagonal witness family
//! and run the verification suite.
//!
//! All results go to stdout as JSON; diagnostics go to stderr.  Exit codes:
//! 0 ok, 2 parse error, 3 semantic error, 4 check failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pqnorm::engines::{self, EngineOpts};
use pqnorm::verify::{self, Profile};
use pqnorm::{io, Error};

const EXIT_PARSE: u8 = 2;
const EXIT_SEMANTIC: u8 = 3;
const EXIT_CHECK_FAILURE: u8 = 4;

#[derive(Parser)]
#[command(name = "pqnorm", version, about = "Proto-quantum norm certificates at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Seed for all randomized searches.
    #[arg(long, global = true, default_value_t = 0, env = "PQNORM_SEED")]
    seed: u64,
    /// Search budget (restarts / iterations).
    #[arg(long, global = true, default_value_t = 200, env = "PQNORM_BUDGET")]
    budget: u32,
    /// Maximum amplification level explored by sup-type searches.
    #[arg(long = "level-cap", global = true, default_value_t = 4, env = "PQNORM_LEVEL_CAP")]
    level_cap: usize,
    /// Relative acceptance tolerance for optimizer-backed results.
    #[arg(long, global = true, env = "PQNORM_TOL")]
    tol: Option<f64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true, env = "PQNORM_OUT")]
    out: Option<PathBuf>,
}

impl CommonOpts {
    fn engine_opts(&self) -> EngineOpts {
        EngineOpts {
            seed: self.seed,
            budget: self.budget.max(1),
            level_cap: self.level_cap.max(1),
            tol: self.tol.unwrap_or(1e-3),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Norm certificate for an amplified element (ambient + terms JSON).
    Norm {
        /// Element file, or inline JSON.
        #[arg(long = "in")]
        input: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Certified lower estimate of the cb norm of an operator descriptor.
    Cbnorm {
        /// Operator file, or inline JSON.
        #[arg(long = "in")]
        input: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Build a pop/pr tensor space descriptor from two factor descriptors.
    Tensor {
        /// "pop" or "pr".
        #[arg(long, default_value = "pop")]
        kind: String,
        /// Left factor: quantized-space JSON (pop) or base-space JSON (pr).
        #[arg(long)]
        left: String,
        /// Right factor: quantized-space JSON.
        #[arg(long)]
        right: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Emit the diagonal witness family and its pop/op comparison report.
    Vn {
        #[arg(long)]
        n: usize,
        /// Optional split 1 <= m < n for the triangle-failure comparison.
        #[arg(long)]
        m: Option<usize>,
        /// Directory for the element files.
        #[arg(long, default_value = ".")]
        dir: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the verification suite; exit 0 iff every check passes.
    Verify {
        #[arg(long, default_value = "quick", env = "PQNORM_PROFILE")]
        profile: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn read_input(arg: &str) -> Result<String, Error> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    fs::read_to_string(arg).map_err(|e| Error::Input(format!("cannot read {arg}: {e}")))
}

fn emit(common: &CommonOpts, value: &serde_json::Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match &common.out {
        Some(path) => fs::write(path, text.as_bytes())
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Json(_) => EXIT_PARSE,
        _ => EXIT_SEMANTIC,
    }
}

fn cmd_norm(input: &str, common: &CommonOpts) -> Result<u8, Error> {
    let elem = io::parse_element(&read_input(input)?)?;
    let cert = engines::pq_norm(&elem, &common.engine_opts())?;
    emit(common, &serde_json::to_value(&cert)?)?;
    Ok(0)
}

fn cmd_cbnorm(input: &str, common: &CommonOpts) -> Result<u8, Error> {
    let op = io::parse_operator(&read_input(input)?)?;
    let opts = common.engine_opts();
    let est = engines::cb_norm_estimate(&op, opts.level_cap, &opts)?;
    let value = json!({
        "lower": est.lower,
        "level_profile": est.profile,
        "witness": est.witness,
        "seed": opts.seed,
        "budget": opts.budget,
    });
    emit(common, &value)?;
    Ok(0)
}

fn cmd_tensor(kind: &str, left: &str, right: &str, common: &CommonOpts) -> Result<u8, Error> {
    let right_space = io::parse_space(&read_input(right)?)?;
    let space = match kind {
        "pop" => {
            let left_space = io::parse_space(&read_input(left)?)?;
            pqnorm::PQSpace::pop_tensor(left_space, right_space)
        }
        "pr" => {
            let left_base: pqnorm::BaseSpace = serde_json::from_str(&read_input(left)?)?;
            left_base.validate()?;
            pqnorm::PQSpace::pr_tensor(left_base, right_space)
        }
        other => {
            return Err(Error::Input(format!("unknown tensor kind {other:?} (want pop or pr)")))
        }
    };
    space.validate()?;
    emit(common, &serde_json::to_value(&space)?)?;
    Ok(0)
}

fn cmd_vn(n: usize, m: Option<usize>, dir: &PathBuf, common: &CommonOpts) -> Result<u8, Error> {
    if n == 0 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    if let Some(m) = m {
        if m == 0 || m >= n {
            return Err(Error::Input(format!("need 1 <= m < n, got m={m}, n={n}")));
        }
    }
    let opts = common.engine_opts();
    let (vn, refs) = engines::vn_family(n)?;
    fs::create_dir_all(dir).map_err(|e| Error::Input(format!("cannot create {}: {e}", dir.display())))?;

    let mut files = Vec::new();
    let vn_path = dir.join(format!("vn{n}_pop.json"));
    fs::write(&vn_path, io::to_json_pretty(&vn))
        .map_err(|e| Error::Input(format!("cannot write {}: {e}", vn_path.display())))?;
    files.push(vn_path.display().to_string());

    let pop = engines::pq_norm(&vn, &opts)?;
    let (op_ub, _) = engines::op_upper(&vn, &opts)?;
    let mut report = json!({
        "n": n,
        "reference": {"pop": refs.pop, "op": refs.op},
        "pop_certificate": {"lower": pop.lower, "upper": pop.upper},
        "op_witness": op_ub,
        "gap_absent": (refs.op - refs.pop).abs() < 1e-12,
        "files": files,
    });

    if let Some(m) = m {
        let (vm, vm_refs) = engines::vn_family(m)?;
        let diff = engines::vn_difference(n, m)?;
        let vm_path = dir.join(format!("vn{m}_pop.json"));
        fs::write(&vm_path, io::to_json_pretty(&vm))
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", vm_path.display())))?;
        let diff_path = dir.join(format!("vn{n}_minus_vn{m}_pop.json"));
        fs::write(&diff_path, io::to_json_pretty(&diff))
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", diff_path.display())))?;

        let op_m = engines::op_upper(&vm, &opts)?.0;
        let op_diff = engines::op_upper(&diff, &opts)?.0;
        let triangle = json!({
            "m_squared": vm_refs.op,
            "difference_squared": op_diff,
            "n_squared": refs.op,
            "op_m_witness": op_m,
            "sum": op_m + op_diff,
            "triangle_inequality_holds": op_m + op_diff >= op_ub - 1e-9,
            "line": format!("{} + {} < {} : op-norm triangle inequality fails", op_m, op_diff, op_ub),
        });
        let obj = report.as_object_mut().unwrap();
        obj.insert("m".into(), json!(m));
        obj.insert("triangle".into(), triangle);
        obj.insert(
            "files".into(),
            json!([
                dir.join(format!("vn{n}_pop.json")).display().to_string(),
                vm_path.display().to_string(),
                diff_path.display().to_string(),
            ]),
        );
    }

    emit(common, &report)?;
    Ok(0)
}

fn cmd_verify(profile: &str, common: &CommonOpts) -> Result<u8, Error> {
    let profile = match profile {
        "quick" => Profile::Quick,
        "full" => Profile::Full,
        other => return Err(Error::Input(format!("unknown profile {other:?} (want quick or full)"))),
    };
    let report = verify::run_all(common.seed, profile, common.tol)?;
    let all_pass = report.all_pass;
    emit(common, &serde_json::to_value(&report)?)?;
    Ok(if all_pass { 0 } else { EXIT_CHECK_FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Norm { input, common } => cmd_norm(input, common),
        Command::Cbnorm { input, common } => cmd_cbnorm(input, common),
        Command::Tensor { kind, left, right, common } => cmd_tensor(kind, left, right, common),
        Command::Vn { n, m, dir, common } => cmd_vn(*n, *m, dir, common),
        Command::Verify { profile, common } => cmd_verify(profile, common),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
