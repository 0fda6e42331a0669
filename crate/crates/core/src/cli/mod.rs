//! `photonloc` command-line interface.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on
//! configuration or input errors. `PHOTONLOC_THREADS` caps the worker pool;
//! outputs do not depend on it.

pub mod config;
pub mod report;
pub mod suites;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::convergence::{self, ConvergenceRow};
use crate::error::{Error, Result};
use crate::export::{write_density, write_vector_field, CsvMeta};
use crate::fock::{load_state, PhotonState};
use crate::lattice::{conjugate_r_grid, LatticeSpec};
use crate::polarization::{ChiGauge, Helicity};
use crate::position_operator::{
    eigen_residual, max_commutator_residual, off_axis_modes, similarity_residual, OperatorParams,
};
use crate::wavefunction::{
    density, density_biorthonormal, field_a_plus, field_b_plus, field_e_plus, maxwell_residual, one_photon_wavefunction,
    two_mode_amplitude_factor, two_mode_closed_form, two_mode_state, DensityKind,
};
pub use config::RunConfig;
pub use report::{Bound, Check, Report};

pub const THREADS_ENV: &str = "PHOTONLOC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "photonloc", version, about = "Photon position eigenkets, wave functions and their numerical checks")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gauge_m: Option<i32>,
    /// Modes per axis.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub box_l: Option<f64>,
    /// Operator FD step in units of 2π/L.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Replace every tolerance with this value.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    JsonReport,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the verification suites and emit a pass/fail report.
    Verify {
        /// Restrict to these suites (repeatable).
        #[arg(long = "suite", value_parser = clap::builder::PossibleValuesParser::new(suites::SUITES))]
        suites: Vec<String>,
    },
    /// Compare the two-mode biorthonormal density with its closed form.
    TwoMode {
        #[arg(long, default_value = "-1,0,0", value_parser = parse_mode, allow_hyphen_values = true)]
        k1: [i32; 3],
        #[arg(long, default_value = "-2,0,0", value_parser = parse_mode, allow_hyphen_values = true)]
        k2: [i32; 3],
        #[arg(long, default_value = "1", value_parser = parse_helicity, allow_hyphen_values = true)]
        lambda: Helicity,
        /// Number of sample times spread over one box transit time.
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Export a wave function or field on the conjugate grid.
    Project {
        #[arg(long, value_name = "PATH")]
        state: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, value_enum, default_value_t = FieldChoice::Psi)]
        field: FieldChoice,
    },
    /// Export a density profile on the conjugate grid.
    Density {
        #[arg(long, value_name = "PATH")]
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = DensityChoice::Lp)]
        kind: DensityChoice,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
    },
    /// Refinement study of a finite-difference residual.
    Converge {
        #[arg(long, value_enum)]
        op: ConvergeOp,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Required for `maxwell`.
        #[arg(long, value_name = "PATH")]
        state: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldChoice {
    Psi,
    A,
    E,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityChoice {
    Lp,
    Biorthonormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConvergeOp {
    Eigen,
    Commutator,
    Pryce,
    Similarity,
    Maxwell,
}

fn parse_mode(s: &str) -> std::result::Result<[i32; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated integers, got {s:?}"));
    }
    let mut out = [0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(out)
}

fn parse_helicity(s: &str) -> std::result::Result<Helicity, String> {
    let v: i64 = s.trim_start_matches('+').parse().map_err(|e| format!("{s:?}: {e}"))?;
    Helicity::from_i64(v).ok_or_else(|| format!("helicity must be +1 or -1, got {v}"))
}

/// Outcome of a subcommand before mapping to an exit code.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    CheckFailed,
}

impl CommonArgs {
    fn lattice_overridden(&self) -> bool {
        self.n.is_some() || self.box_l.is_some()
    }

    /// Config file (or defaults) with flag overrides applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.gauge_m {
            cfg.gauge_m = m;
        }
        if let Some(n) = self.n {
            cfg.lattice.n = n;
        }
        if let Some(l) = self.box_l {
            cfg.lattice.box_l = l;
        }
        if let Some(h) = self.h {
            cfg.steps.h = h;
        }
        if let Some(t) = self.tol {
            cfg.tolerances = config::Tolerances::uniform(t);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output.path = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Loads a state and checks it against an explicitly configured lattice.
fn load_matching_state(path: &Path, cfg: &RunConfig, explicit_lattice: bool) -> Result<PhotonState> {
    let state = load_state(path)?;
    if explicit_lattice && state.lattice != cfg.lattice {
        return Err(Error::StateFile {
            path: path.to_path_buf(),
            message: format!(
                "lattice: state has L = {}, N = {}, configuration has L = {}, N = {}",
                state.lattice.box_l, state.lattice.n, cfg.lattice.box_l, cfg.lattice.n
            ),
        });
    }
    Ok(state)
}

fn config_sets_lattice(path: Option<&Path>) -> Result<bool> {
    let Some(p) = path else { return Ok(false) };
    let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
    let value: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    Ok(value.contains_key("lattice"))
}

/// Executes a parsed command line, writing diagnostics to `err`.
pub fn execute(cli: &Cli, err: &mut dyn Write) -> Result<Outcome> {
    let cfg = cli.common.resolve()?;
    let explicit_lattice = cli.common.lattice_overridden() || config_sets_lattice(cli.common.config.as_deref())?;
    let out_path = cfg.output.path.clone();
    match &cli.command {
        Command::Verify { suites } => {
            let report = suites::run(&cfg, suites)?;
            let mut out = open_output(out_path.as_deref())?;
            match cli.common.format.unwrap_or(Format::JsonReport) {
                Format::JsonReport => out.write_all(report.to_json().as_bytes())?,
                Format::Csv => report.write_csv(&mut out)?,
            }
            out.flush()?;
            for c in &report.checks {
                writeln!(err, "{} {}/{}: measured {:e}", if c.pass { "PASS" } else { "FAIL" }, c.suite, c.check, c.measured)?;
            }
            Ok(match report.first_failure() {
                None => Outcome::Pass,
                Some(c) => {
                    writeln!(err, "first failing check: {}/{} measured {:e}", c.suite, c.check, c.measured)?;
                    Outcome::CheckFailed
                }
            })
        }
        Command::TwoMode { k1, k2, lambda, samples } => {
            require_csv(cli.common.format)?;
            two_mode(&cfg, *k1, *k2, *lambda, *samples, out_path.as_deref(), err)
        }
        Command::Project { state, alpha, t, field } => {
            require_csv(cli.common.format)?;
            config::check_alpha(*alpha)?;
            let s = load_matching_state(state, &cfg, explicit_lattice)?;
            let g = ChiGauge::new(cfg.gauge_m);
            let (sample, quantity) = match field {
                FieldChoice::Psi => (one_photon_wavefunction(&s, *alpha, g, *t)?, "psi"),
                FieldChoice::A => (field_a_plus(&s, g, *t)?, "A_plus"),
                FieldChoice::E => (field_e_plus(&s, g, *t)?, "E_plus"),
                FieldChoice::B => (field_b_plus(&s, g, *t)?, "B_plus"),
            };
            let meta = CsvMeta {
                quantity: quantity.into(),
                alpha: Some(sample.alpha),
                gauge_m: cfg.gauge_m,
                lattice: s.lattice,
            };
            let mut out = open_output(out_path.as_deref())?;
            write_vector_field(&mut out, &meta, &sample)?;
            out.flush()?;
            Ok(Outcome::Pass)
        }
        Command::Density { state, kind, t } => {
            require_csv(cli.common.format)?;
            let s = load_matching_state(state, &cfg, explicit_lattice)?;
            let kind = match kind {
                DensityChoice::Lp => DensityKind::LandauPeierls,
                DensityChoice::Biorthonormal => DensityKind::Biorthonormal,
            };
            let profile = density(&s, kind, ChiGauge::new(cfg.gauge_m), *t)?;
            let meta = CsvMeta {
                quantity: format!("density_{kind}"),
                alpha: None,
                gauge_m: cfg.gauge_m,
                lattice: s.lattice,
            };
            let mut out = open_output(out_path.as_deref())?;
            write_density(&mut out, &meta, &profile)?;
            out.flush()?;
            Ok(Outcome::Pass)
        }
        Command::Converge { op, levels, state } => {
            require_csv(cli.common.format)?;
            let state = match state {
                Some(p) => Some(load_matching_state(p, &cfg, explicit_lattice)?),
                None => None,
            };
            let rows = converge(&cfg, *op, *levels, state.as_ref())?;
            let mut out = open_output(out_path.as_deref())?;
            convergence::write_csv(&mut out, &rows)?;
            out.flush()?;
            Ok(Outcome::Pass)
        }
    }
}

fn require_csv(format: Option<Format>) -> Result<()> {
    match format {
        None | Some(Format::Csv) => Ok(()),
        Some(Format::JsonReport) => Err(Error::Config("json-report format applies to verify only".into())),
    }
}

fn two_mode(
    cfg: &RunConfig,
    n1: [i32; 3],
    n2: [i32; 3],
    lambda: Helicity,
    samples: usize,
    out_path: Option<&Path>,
    err: &mut dyn Write,
) -> Result<Outcome> {
    if samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    let spec = cfg.lattice;
    let (k1, k2) = (spec.mode(n1)?, spec.mode(n2)?);
    let volume = spec.volume();
    // Refuses non-collinear pairs before any sampling.
    two_mode_closed_form(&k1, &k2, &k1.k_vec, 0.0, cfg.units.c, volume)?;
    let state = two_mode_state(cfg.units, spec, n1, n2, lambda)?;
    let grid = conjugate_r_grid(&spec)?;
    let period = spec.box_l / cfg.units.c;
    let g = ChiGauge::new(cfg.gauge_m);
    let meta = CsvMeta {
        quantity: "two_mode_density".into(),
        alpha: None,
        gauge_m: cfg.gauge_m,
        lattice: spec,
    };
    let mut out = open_output(out_path)?;
    meta.write(&mut out)?;
    writeln!(out, "x,y,z,t,machinery,closed_form,difference")?;
    let (mut min, mut worst) = (f64::INFINITY, 0.0f64);
    for i in 0..samples {
        let t = period * i as f64 / samples as f64;
        let d = density_biorthonormal(&state, g, t)?;
        for (p, n) in grid.points.iter().zip(&d.values) {
            let cf = two_mode_closed_form(&k1, &k2, &p.r, t, cfg.units.c, volume)?;
            let diff = n - cf;
            min = min.min(*n);
            worst = worst.max(diff.abs());
            writeln!(out, "{:e},{:e},{:e},{:e},{:e},{:e},{:e}", p.r[0], p.r[1], p.r[2], t, n, cf, diff)?;
        }
    }
    out.flush()?;
    writeln!(err, "amplitude factor: {:.12}", two_mode_amplitude_factor(&k1, &k2))?;
    writeln!(err, "min density: {min:e} (1/V = {:e})", volume.recip())?;
    writeln!(err, "max |machinery - closed form|: {worst:e}")?;
    Ok(if worst <= 1e-12 / volume {
        Outcome::Pass
    } else {
        writeln!(err, "closed form mismatch exceeds 1e-12/V")?;
        Outcome::CheckFailed
    })
}

fn converge(cfg: &RunConfig, op: ConvergeOp, levels: usize, state: Option<&PhotonState>) -> Result<Vec<ConvergenceRow>> {
    if levels < 2 {
        return Err(Error::Config("levels must be at least 2".into()));
    }
    let spec: LatticeSpec = cfg.lattice;
    let dk = spec.dk();
    let g = ChiGauge::new(cfg.gauge_m);
    let alpha = cfg.alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h0 = cfg.steps.h_study * dk;
    let mut failure = None;
    let mut keep = |r: Result<f64>| {
        r.unwrap_or_else(|e| {
            failure.get_or_insert(e);
            f64::NAN
        })
    };
    let rows = match op {
        ConvergeOp::Eigen => {
            let modes = off_axis_modes(&spec, 0.99)?;
            let r1 = crate::numeric::RVec3::new(0.1, -0.2, 0.3) * (spec.box_l / std::f64::consts::TAU);
            let base = OperatorParams::new(alpha, g, h0);
            convergence::refinement_study(h0, 2.0, levels, |h| {
                keep(eigen_residual(&base.with_h(h), r1, Helicity::Minus, &modes, spec.volume()).map(|r| r.sup_norm))
            })
        }
        ConvergeOp::Commutator | ConvergeOp::Pryce => {
            let modes = off_axis_modes(&spec, 0.99)?;
            let f = suites::scaled_gaussian(dk);
            let mut base = OperatorParams::new(alpha, g, h0);
            if op == ConvergeOp::Pryce {
                base = base.pryce();
            }
            convergence::refinement_study(h0, 2.0, levels, |h| {
                keep(max_commutator_residual(&base.with_h(h), &f, &modes).map(|r| r.sup_norm))
            })
        }
        ConvergeOp::Similarity => {
            let modes = off_axis_modes(&spec, 0.99)?;
            let f = suites::scaled_gaussian(dk);
            let base = OperatorParams::new(0.5, g, h0);
            convergence::refinement_study(h0, 2.0, levels, |h| {
                keep(similarity_residual(&base.with_h(h), &f, &modes).map(|r| r.sup_norm))
            })
        }
        ConvergeOp::Maxwell => {
            let s = state.ok_or_else(|| Error::Config("converge --op maxwell needs --state".into()))?;
            let (dr0, dt0) = (cfg.dr(), cfg.dt());
            convergence::refinement_study(dr0, 2.0, levels, |dr| {
                keep(maxwell_residual(s, g, 0.0, dr, dt0 * dr / dr0).map(|m| {
                    m.as_array().iter().map(|x| x.1).fold(0.0, f64::max)
                }))
            })
        }
    };
    match failure {
        Some(e) => Err(e),
        None => Ok(rows),
    }
}

/// Applies `PHOTONLOC_THREADS` to the global pool; ignored if unset or invalid.
pub fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    init_threads();
    let mut err = io::stderr().lock();
    match execute(&cli, &mut err) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            ExitCode::from(2)
        }
    }
}
