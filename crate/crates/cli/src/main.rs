use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qvir_core::classical::XiFunction;
use qvir_core::modes::BracketConfig;
use qvir_core::quantum::{check_label, Triplet};
use qvir_core::report::CSV_COLUMNS;
use qvir_core::scalar::DEFAULT_FLOAT_BITS;
use qvir_core::suite;
use qvir_core::{build_structure_constants, Mode, ParamSet, StructureConstants, VerificationReport};

#[derive(Parser, Debug)]
#[command(name = "qvir", version, about = "Verify central extensions of q-deformed Virasoro algebras")]
struct Cli {
    #[command(flatten)]
    cfg: RunConfig,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Deformation parameter q, as a fraction ("3/10") or decimal.
    #[arg(long, global = true, default_value = "3/10")]
    q: String,
    /// Elliptic parameter p.
    #[arg(long, global = true, default_value = "3/5")]
    p: String,
    /// Arithmetic; `auto` is exact unless q or p is written as a decimal.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    /// Float precision in bits.
    #[arg(long, global = true, default_value_t = DEFAULT_FLOAT_BITS)]
    precision: usize,
    /// Product truncation order N_prod; defaults to the smallest order with
    /// omitted-factor bound below 1e-40.
    #[arg(long, global = true)]
    prod_trunc: Option<u32>,
    /// Largest coefficient index L_max.
    #[arg(long, global = true, default_value_t = 48)]
    series_order: i64,
    /// Family label k.
    #[arg(long, global = true)]
    k: Option<u32>,
    /// Index window of the selected suite (suite-specific default).
    #[arg(long, global = true)]
    window: Option<i64>,
    /// Directory for report.json (and report.csv with --format csv).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Auto,
    Exact,
    Float,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump ĉ^(k), f⁰, f¹, f, α, β, ℰ, ℰ′, ℰ″.
    Coeffs,
    #[command(subcommand)]
    Classical(ClassicalCmd),
    #[command(subcommand)]
    Modes(ModesCmd),
    #[command(subcommand)]
    Quantum(QuantumCmd),
    /// Every suite with default windows.
    All,
}

#[derive(Subcommand, Debug)]
enum ClassicalCmd {
    /// Forced zeros of h_{0,M}.
    Scan {
        #[arg(long, default_value_t = -4)]
        m_lo: i64,
        #[arg(long, default_value_t = 4)]
        m_hi: i64,
    },
    /// Bracket-factor identity and ξ-ansatz residuals.
    Verify,
}

#[derive(Subcommand, Debug)]
enum ModesCmd {
    /// Centrality and the s-bracket.
    Verify {
        #[arg(long, default_value_t = 8)]
        l_cut: i64,
        #[arg(long, default_value_t = 20)]
        central_cut: i64,
    },
}

#[derive(Subcommand, Debug)]
enum QuantumCmd {
    /// S1 + S2 on all even triplets in the window.
    Verify,
    /// Residue breakdowns for the sampled triplets.
    Residues,
    /// λ recovery for M = 4, 6, 8.
    Nullspace,
    /// Shifted sectors s = ±2, ±4.
    Shifted,
}

impl RunConfig {
    fn mode(&self) -> anyhow::Result<Mode> {
        let decimal = |s: &str| s.contains(['.', 'e', 'E']);
        let exact = match self.mode {
            ModeArg::Exact => true,
            ModeArg::Float => false,
            ModeArg::Auto => !decimal(&self.q) && !decimal(&self.p),
        };
        Ok(if exact { Mode::Exact } else { Mode::float(self.precision)? })
    }

    fn params(&self) -> anyhow::Result<ParamSet> {
        let mode = self.mode()?;
        let q = mode.parse(&self.q)?;
        let p = mode.parse(&self.p)?;
        let ps = match self.prod_trunc {
            Some(n) => ParamSet::new(q, p, n, self.series_order)?,
            None => ParamSet::auto(q, p, self.series_order)?,
        };
        Ok(ps)
    }

    fn structure(&self) -> anyhow::Result<StructureConstants> {
        Ok(build_structure_constants(&self.params()?)?)
    }

    fn window(&self, default: i64) -> i64 {
        self.window.unwrap_or(default)
    }
}

/// ξ functions checked by `classical verify`: three generic ones and `δ_{n,0}`.
fn sample_xis(mode: Mode) -> Vec<XiFunction> {
    let gen = |a: i64, b: i64| {
        XiFunction::new(
            (-12..=12)
                .step_by(2)
                .map(|n: i64| (n, mode.ratio(a * n + b, n * n + 3)))
                .collect::<BTreeMap<_, _>>(),
        )
    };
    vec![gen(1, 2), gen(-3, 7), gen(5, -1), XiFunction::delta(mode.one())]
}

fn classical_scan(cfg: &RunConfig, q: &qvir_core::Scalar, k: u32, m_lo: i64, m_hi: i64) -> anyhow::Result<VerificationReport> {
    Ok(suite::classical_scan(k, q, m_lo, m_hi, cfg.window(8))?)
}

fn classical_verify(cfg: &RunConfig, q: &qvir_core::Scalar) -> anyhow::Result<VerificationReport> {
    Ok(suite::classical_verify(q, &sample_xis(q.mode()), cfg.window(8))?)
}

fn modes_verify(cfg: &RunConfig, q: &qvir_core::Scalar, l_cut: i64, central_cut: i64) -> anyhow::Result<VerificationReport> {
    let bc = BracketConfig::new(l_cut, central_cut, cfg.window(8))?;
    Ok(suite::modes_verify(q, &bc, 4, &[-2, 0, 2], 6)?)
}

fn residue_triplets() -> Vec<Triplet> {
    suite::RESIDUE_TRIPLETS.iter().map(|&(n, m, r)| Triplet::new(n, m, r)).collect()
}

fn run(cli: &Cli) -> anyhow::Result<VerificationReport> {
    let cfg = &cli.cfg;
    let rep = match &cli.cmd {
        Command::Coeffs => suite::coeffs(&cfg.structure()?, cfg.k.unwrap_or(0))?,
        Command::Classical(c) => {
            let ps = cfg.params()?;
            match c {
                ClassicalCmd::Scan { m_lo, m_hi } => classical_scan(cfg, &ps.q, cfg.k.unwrap_or(1), *m_lo, *m_hi)?,
                ClassicalCmd::Verify => {
                    if cfg.k.unwrap_or(0) != 0 {
                        bail!("the ξ ansatz solves the k = 0 family only");
                    }
                    classical_verify(cfg, &ps.q)?
                }
            }
        }
        Command::Modes(ModesCmd::Verify { l_cut, central_cut }) => {
            modes_verify(cfg, &cfg.params()?.q, *l_cut, *central_cut)?
        }
        Command::Quantum(c) => {
            check_label(cfg.k.unwrap_or(0))?;
            let sc = cfg.structure()?;
            match c {
                QuantumCmd::Verify => suite::quantum_verify(&sc, 0, cfg.window(8))?,
                QuantumCmd::Residues => suite::quantum_residues(&sc, &residue_triplets())?,
                QuantumCmd::Nullspace => suite::quantum_nullspace(&sc, &[4, 6, 8])?,
                QuantumCmd::Shifted => suite::quantum_shifted(&sc, &[-4, -2, 2, 4], cfg.window(5))?,
            }
        }
        Command::All => {
            if cfg.window.is_some() {
                bail!("`all` uses the default windows of each suite; drop --window");
            }
            check_label(cfg.k.unwrap_or(0))?;
            let sc = cfg.structure()?;
            let q = sc.params.q.clone();
            let mut rep = suite::coeffs(&sc, 0)?;
            rep.merge(classical_scan(cfg, &q, 0, -4, 4)?);
            rep.merge(classical_scan(cfg, &q, 1, -4, 4)?);
            rep.merge(classical_verify(cfg, &q)?);
            rep.merge(modes_verify(cfg, &q, 8, 20)?);
            rep.merge(suite::quantum_verify(&sc, 0, 8)?);
            rep.merge(suite::quantum_residues(&sc, &residue_triplets())?);
            rep.merge(suite::quantum_nullspace(&sc, &[4, 6, 8])?);
            rep.merge(suite::quantum_shifted(&sc, &[-4, -2, 2, 4], 5)?);
            rep
        }
    };
    Ok(rep)
}

fn csv_text(rep: &VerificationReport) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in &rep.rows {
        w.write_record(r.csv_record())?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn emit(cli: &Cli, rep: &VerificationReport) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(&rep.to_json())? + "\n";
    let body = match cli.cfg.format {
        Format::Json => json.clone(),
        Format::Csv => csv_text(rep)?,
        Format::Text => rep.to_text(),
    };
    match &cli.cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(dir.join("report.json"), &json)?;
            if cli.cfg.format == Format::Csv {
                fs::write(dir.join("report.csv"), &body)?;
            }
            print!("{}", rep.to_text());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rep = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&cli, &rep) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let failing: Vec<_> = rep.failing().collect();
    if failing.is_empty() {
        eprintln!("{} checks passed", rep.rows.len());
        ExitCode::SUCCESS
    } else {
        eprintln!("{} of {} checks failed:", failing.len(), rep.rows.len());
        for r in failing {
            eprintln!("  {}/{} {:?} residual={} tol={}", r.suite, r.check, r.index, r.residual_approx, r.tolerance);
        }
        ExitCode::from(1)
    }
}
