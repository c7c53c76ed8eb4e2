//! Argument parsing and subcommand dispatch.
//!
//! Exit codes: 0 success, 1 a config assertion failed, 2 invalid input or a
//! numerical error.

use crate::config::Config;
use crate::experiments::{beta_exponents, check_assertions, run_experiment};
use crate::fit::fit_exponent;
use crate::output::{Report, Table};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use triperiod_core::asympt::{calibration, h_main_term, l_kernel_approx, regime, remainder_budget_ii};
use triperiod_core::betacore::{std_beta, std_beta_main};
use triperiod_core::corput::{oscillatory_integral, vdc_bound};
use triperiod_core::func::Compact;
use triperiod_core::repn::{make_test_vector, RepParams, SpectralParam, TestKind};
use triperiod_core::spectral::{self, io as spec_io, ParsevalMode, WeightModel};
use triperiod_core::trilinear::{h_form_detailed, l_kernel};

/// Environment variable overriding the worker-pool size.
pub const THREADS_ENV: &str = "TRIPERIOD_THREADS";

#[derive(Parser, Debug)]
#[command(name = "triperiod", version, about = "Oracle-vs-asymptotics experiments for model trilinear functionals")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Print a JSON document instead of text.
    #[arg(long)]
    json: bool,
    /// Also write the table to this CSV file.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
struct RepArgs {
    /// Imaginary part of τ.
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    tau: f64,
    /// Imaginary part of τ′.
    #[arg(long, default_value_t = 0.7, allow_hyphen_values = true)]
    tau_prime: f64,
}

impl RepArgs {
    fn params(self) -> RepParams {
        RepParams::new(self.tau, self.tau_prime)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Plain,
    Tilde,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Model {
    Uniform,
    HeavyTail,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    Kernel,
    Ii,
    Fg,
    Airy,
    Decay,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Directory for `<experiment>.csv` and `<experiment>.json`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        o: OutArgs,
    },
    /// One evaluation of the reduced kernel l_λ(c) against its main term.
    Kernel {
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        rep: RepArgs,
        #[command(flatten)]
        o: OutArgs,
    },
    /// H_λ(w) for λ = it and the plain or tilde vector of K-type n.
    Hform {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: i64,
        #[arg(long, value_enum, default_value = "plain")]
        kind: Kind,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        rep: RepArgs,
        #[command(flatten)]
        o: OutArgs,
    },
    /// Standard Beta integral with a bump amplitude against its main term.
    Beta {
        #[arg(long)]
        t: f64,
        /// Bump radius, at most 1/2.
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        rep: RepArgs,
        #[command(flatten)]
        o: OutArgs,
    },
    /// Van der Corput bound for phase s·x^p and unit amplitude on [lo, hi].
    Vdc {
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[command(flatten)]
        o: OutArgs,
    },
    /// Synthetic spectra.
    Spectrum {
        #[command(subcommand)]
        cmd: SpectrumCmd,
    },
    /// Log-log fit of two CSV columns.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[command(flatten)]
        o: OutArgs,
    },
    /// Recompute a calibration grid and its frozen constant.
    Calibrate {
        #[arg(long, value_enum)]
        which: Which,
        #[command(flatten)]
        o: OutArgs,
    },
}

#[derive(Subcommand, Debug)]
enum SpectrumCmd {
    /// Generate a spectrum and write CSV plus JSON sidecar.
    Gen {
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "uniform")]
        model: Model,
        /// Spectrum CSV path; the sidecar goes next to it.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        rep: RepArgs,
        #[command(flatten)]
        o: OutArgs,
    },
    /// Dyadic decomposition of the Parseval sum for w̃_n.
    Sum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: i64,
        /// Oracle spot checks per block (at most 10); 0 for none.
        #[arg(long, default_value_t = 0)]
        spot: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        rep: RepArgs,
        #[command(flatten)]
        o: OutArgs,
    },
    /// Window mass around T against its certified bound.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        t: f64,
        /// Window factor; defaults to twice the Airy lower-bound constant b.
        #[arg(long)]
        b_window: Option<f64>,
        #[command(flatten)]
        rep: RepArgs,
        #[command(flatten)]
        o: OutArgs,
    },
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Assertion(Vec<String>),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Input(e)
    }
}

impl From<triperiod_core::Error> for Failure {
    fn from(e: triperiod_core::Error) -> Self {
        Self::Input(e.into())
    }
}

/// Pool size from [`THREADS_ENV`]; ignored if the global pool already exists.
pub fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("{THREADS_ENV} must be positive");
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Entry point shared by the binary and the tests.
pub fn main_with<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    if let Err(e) = init_threads() {
        let _ = writeln!(err, "error: {e:#}");
        return 2;
    }
    match dispatch(cli.cmd, out) {
        Ok(()) => 0,
        Err(Failure::Assertion(failed)) => {
            for f in failed {
                let _ = writeln!(err, "assertion failed: {f}");
            }
            1
        }
        Err(Failure::Input(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}

fn single(columns: &[&str], row: Vec<f64>) -> Report {
    let mut table = Table::new(columns);
    table.push(row);
    Report { table, ..Default::default() }
}

fn emit(r: &Report, o: &OutArgs, out: &mut impl Write) -> Result<(), Failure> {
    r.emit(o.json, o.csv.as_deref(), out)?;
    Ok(())
}

fn dispatch(cmd: Cmd, out: &mut impl Write) -> Result<(), Failure> {
    match cmd {
        Cmd::Run { config, out: dir, o } => run(&config, &dir, &o, out),
        Cmd::Kernel { t, c, tol, rep, o } => {
            let p = rep.params();
            let lam = SpectralParam::Principal(t);
            let q = l_kernel(&p, &lam, c, tol)?;
            let a = l_kernel_approx(&p, &lam, c)?;
            let mut r = single(
                &["t", "c", "re", "im", "err_estimate", "main_re", "main_im", "deviation", "budget"],
                vec![t, c, q.value.re, q.value.im, q.err_estimate, a.main_term.re, a.main_term.im, (q.value - a.main_term).norm(), a.remainder_budget],
            );
            r.set("converged", q.converged);
            emit(&r, &o, out)
        }
        Cmd::Hform { t, n, kind, tol, rep, o } => {
            let p = rep.params();
            let kind = match kind {
                Kind::Plain => TestKind::Plain,
                Kind::Tilde => TestKind::Tilde,
            };
            let (h, err, b) = h_form_detailed(&p, &SpectralParam::Principal(t), &make_test_vector(n, kind)?, tol)?;
            let model = match kind {
                TestKind::Plain => h_main_term(t, n)?,
                TestKind::Tilde => remainder_budget_ii(&p, t, n)?,
            };
            let mut r = single(&["t", "n", "h", "h_err", "model"], vec![t, n as f64, h, err, model]);
            r.set("model_kind", if kind == TestKind::Plain { "airy_main_term" } else { "spectral_budget" });
            r.set("regime", format!("{:?}", regime(t, n)));
            r.set("converged", b.converged);
            emit(&r, &o, out)
        }
        Cmd::Beta { t, radius, tol, rep, o } => {
            if !(radius > 0.0 && radius <= 0.5) {
                return Err(Failure::Input(anyhow::anyhow!("radius must lie in (0, 0.5]")));
            }
            let (s, sp) = beta_exponents(&rep.params());
            let phi = Compact::bump(0.0, radius);
            let lam = C::new(0.0, t);
            let q = std_beta(lam, s, sp, &phi, tol)?;
            let m = std_beta_main(lam, s, sp, &phi)?;
            let d = (q.value - m).norm();
            let r = single(&["t", "re", "im", "err_estimate", "main_re", "main_im", "remainder", "normalized"], vec![t, q.value.re, q.value.im, q.err_estimate, m.re, m.im, d, d * t.abs().powf(1.5)]);
            emit(&r, &o, out)
        }
        Cmd::Vdc { s, p, lo, hi, k, o } => {
            let f = move |x: f64| s * x.powf(p);
            let one = |_: f64| C::new(1.0, 0.0);
            let bound = vdc_bound(&f, &one, (lo, hi), k)?;
            let freq = s.abs() * p.abs() * lo.abs().max(hi.abs()).powf(p - 1.0).max(lo.abs().min(hi.abs()).powf(p - 1.0));
            let q = oscillatory_integral(&f, &one, (lo, hi), freq, 1e-12)?;
            let mut r = single(&["s", "p", "lo", "hi", "k", "bound", "oracle_abs", "oracle_err"], vec![s, p, lo, hi, k as f64, bound, q.value.norm(), q.err_estimate]);
            r.set("dominates", q.value.norm() <= bound);
            emit(&r, &o, out)
        }
        Cmd::Spectrum { cmd } => spectrum(cmd, out),
        Cmd::Fit { input, x, y, o } => {
            let table = read_table(&input)?;
            let col = |name: &str| table.column(name).with_context(|| format!("no column {name:?} in {}", input.display()));
            let pairs: Vec<(f64, f64)> = col(&x)?.into_iter().zip(col(&y)?).collect();
            let f = fit_exponent(&pairs)?;
            let mut r = Report::default();
            r.set("slope", f.slope);
            r.set("intercept", f.intercept);
            r.set("r2", f.r2);
            r.set("points", pairs.len());
            emit(&r, &o, out)
        }
        Cmd::Calibrate { which, o } => {
            let (samples, current) = match which {
                Which::Kernel => (calibration::kernel_samples()?, calibration::KERNEL_C),
                Which::Ii => (calibration::ii_samples()?, calibration::II_C),
                Which::Fg => (calibration::fg_samples()?, calibration::FG_C),
                Which::Airy => (calibration::airy_samples()?, calibration::AIRY_C),
                Which::Decay => (calibration::decay_samples()?, calibration::DECAY_C3),
            };
            let mut r = Report { table: Table::new(&["t", "x", "normalized"]), ..Default::default() };
            for s in &samples {
                r.table.push(vec![s.t, s.x, s.normalized]);
            }
            r.set("freeze", calibration::freeze(&samples));
            r.set("frozen", current);
            r.set("margin", calibration::MARGIN);
            emit(&r, &o, out)
        }
    }
}

fn read_table(path: &Path) -> anyhow::Result<Table> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let columns: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let mut table = Table { columns, rows: vec![] };
    for rec in rd.records() {
        let rec = rec?;
        table.rows.push(rec.iter().map(|v| v.trim().parse::<f64>().with_context(|| format!("non-numeric cell {v:?}"))).collect::<anyhow::Result<_>>()?);
    }
    Ok(table)
}

fn run(config: &Path, dir: &Path, o: &OutArgs, out: &mut impl Write) -> Result<(), Failure> {
    let cfg = Config::load(config)?;
    let mut r = run_experiment(&cfg)?;
    let failed = check_assertions(&cfg, &r)?;
    r.set("experiment", &cfg.experiment);
    r.set("config", &cfg);
    r.set("assertions_failed", &failed);
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    r.table.write_csv(&dir.join(format!("{}.csv", cfg.experiment)))?;
    let summary = serde_json::to_string_pretty(&r.to_json()).context("serializing summary")?;
    std::fs::write(dir.join(format!("{}.json", cfg.experiment)), summary).context("writing summary")?;
    emit(&r, o, out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(failed))
    }
}

fn spectrum(cmd: SpectrumCmd, out: &mut impl Write) -> Result<(), Failure> {
    match cmd {
        SpectrumCmd::Gen { t_max, kappa, a, seed, model, out: path, rep, o } => {
            let model = match model {
                Model::Uniform => WeightModel::Uniform,
                Model::HeavyTail => WeightModel::HeavyTail,
            };
            let p = rep.params();
            let s = spectral::gen_spectrum(&p, t_max, kappa, a, seed, model)?;
            spec_io::write_spectrum(&s, &path)?;
            let audit = s.audit(p.s_cutoff());
            let mut r = Report::default();
            r.set("points", s.points.len());
            r.set("audit", &audit);
            r.set("csv", path.display().to_string());
            r.set("sidecar", spec_io::sidecar_path(&path).display().to_string());
            emit(&r, &o, out)
        }
        SpectrumCmd::Sum { input, n, spot, tol, rep, o } => {
            let s = spec_io::read_spectrum(&input)?;
            let mode = if spot == 0 { ParsevalMode::Asymptotic } else { ParsevalMode::OracleSpotCheck { per_block: spot, tol } };
            let d = spectral::parseval_sum(&s, &rep.params(), n, mode)?;
            let mut r = Report { table: Table::new(&["k", "lo", "hi", "count", "mass", "h_k", "bound", "literal_bound"]), ..Default::default() };
            for b in std::iter::once(&d.low).chain(&d.blocks) {
                r.table.push(vec![b.k as f64, b.lo, b.hi, b.count as f64, b.mass, b.h_sum, b.bound, b.literal_bound]);
            }
            r.set("grand_total", d.grand_total);
            r.set("tail_sum", d.tail_sum);
            r.set("tail_bound", d.tail_bound);
            r.set("all_within_bound", d.all_within_bound);
            r.set("spot_checks_ok", d.spot_checks_ok);
            r.set("spot_checks", d.blocks.iter().flat_map(|b| b.spot_checks.clone()).collect::<Vec<_>>());
            emit(&r, &o, out)
        }
        SpectrumCmd::Extract { input, t, b_window, rep, o } => {
            let s = spec_io::read_spectrum(&input)?;
            let e = spectral::subconvexity_extract(&s, &rep.params(), t, b_window.unwrap_or_else(spectral::default_b_window))?;
            let mut r = Report::default();
            r.set("extract", &e);
            if let Some(cb) = e.certified_bound {
                r.set("certified_over_t53", cb / t.powf(5.0 / 3.0));
            }
            emit(&r, &o, out)
        }
    }
}
