use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use mckayv::harness::{parse_checks, run, DataSet, EllSel, VerificationJob};
use mckayv::{Family, GroupSpec};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, ValueEnum)]
enum Group {
    Sp6,
    Sp4,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Verifies character counts, blocks and local-global maps of Sp6(q) and Sp4(q), q = 2^a.
#[derive(Parser)]
#[command(name = "verify", version)]
struct Args {
    #[arg(long, value_enum)]
    group: Group,
    /// A power of two.
    #[arg(long)]
    q: u64,
    /// An odd prime dividing |G|, or "all".
    #[arg(long, default_value = "all")]
    ell: String,
    /// Comma-separated subset of tables,mass,blocks,mckay,coverage,equivariance,bawc, or "all".
    #[arg(long, default_value = "all")]
    checks: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Directory holding the data tables; the embedded copies are used when absent.
    #[arg(long, env = "MCKAYV_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn main() -> Result<ExitCode> {
    let a = Args::parse();
    let family = match a.group {
        Group::Sp6 => Family::Sp6,
        Group::Sp4 => Family::Sp4,
    };
    let group = GroupSpec::from_q(family, a.q).with_context(|| format!("q = {} is not a power of two", a.q))?;
    let ell: EllSel = a.ell.parse()?;
    let checks = parse_checks(&a.checks)?;
    let ds = match &a.data_dir {
        Some(d) => DataSet::load(d, family)?,
        None => DataSet::embedded(family),
    };
    let report = run(&VerificationJob { group, ell, checks }, &ds, a.jobs)?;
    let out = match a.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json() + "\n",
    };
    if let Err(e) = std::io::stdout().write_all(out.as_bytes()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(e.into());
        }
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}
