//! Command-line front end: classify pairs, synthesize gains, simulate
//! arrays and run the synchronization checks, writing reproducible files.

pub mod config;
pub mod output;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use syncgain::linops::{self, care_residual, norm1};
use syncgain::simulate::{self, simulate_array, sync_metrics, ArraySpec, SimOptions, SyncSummary};
use syncgain::synthesis::{self, FeedbackGain};
use syncgain::sysclass::{self, ClassReport};
use syncgain::verify::{self, Claim1Report, CounterexampleReport, DemoOptions, SpectralVerdict, Statement};
use syncgain::{Error, Interconnection, Mat, SystemPair};

pub use config::{CommonArgs, RunConfig};
use output::{ManifestEntry, OutputDir};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_GUARANTEE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(Error::NoGuarantee(_)) => EXIT_NO_GUARANTEE,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(Error::Indeterminate(_)) => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "syncgain", version, about = "Synchronizing gains for arrays of coupled linear systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report which system classes a pair belongs to
    Classify(CommonArgs),
    /// Synthesize a synchronizing gain
    Synthesize(SynthesizeArgs),
    /// Simulate the coupled array and write its trajectory
    Simulate(CommonArgs),
    /// Run a spectral check, the Riccati sampling check, or a counterexample (e|f|g|h)
    Verify(VerifyArgs),
    /// Oscillator array showcase, ring(3) unless --graph is given
    Demo(CommonArgs),
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Treat --pair as {"A", "B"} and synthesize an input gain K
    #[arg(long)]
    pub dual: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// e, f, g, h, spectral or claim1
    pub target: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guarantee: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<SpectralVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SyncSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claim1: Option<Claim1Report>,
    pub warnings: Vec<String>,
    pub manifest: Vec<ManifestEntry>,
}

impl RunReport {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            classification: None,
            branch: None,
            guarantee: None,
            gain: None,
            verdict: None,
            simulation: None,
            counterexample: None,
            claim1: None,
            warnings: Vec::new(),
            manifest: Vec::new(),
        }
    }

    fn set_gain(&mut self, gain: &FeedbackGain) -> Result<(), CliError> {
        self.branch = Some(gain.branch.as_str().to_string());
        self.guarantee = Some(gain.guarantee().as_str().to_string());
        self.gain = Some(serde_json::to_value(gain)?);
        Ok(())
    }

    /// Writes `report.json` and returns the finished report.
    fn finish(mut self, out: &mut OutputDir) -> Result<Self, CliError> {
        self.manifest = out.manifest();
        out.write_json("report.json", &self)?;
        Ok(self)
    }
}

pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    match &cli.command {
        Command::Classify(a) => cmd_classify(&RunConfig::resolve(a)?),
        Command::Synthesize(a) => {
            let cfg = RunConfig::resolve(&a.common)?;
            if a.dual {
                cmd_synthesize_dual(&cfg)
            } else {
                cmd_synthesize(&cfg)
            }
        }
        Command::Simulate(a) => cmd_simulate(&RunConfig::resolve(a)?),
        Command::Verify(a) => cmd_verify(&a.target, &RunConfig::resolve(&a.common)?),
        Command::Demo(a) => cmd_demo(&RunConfig::resolve(a)?),
    }
}

fn classify(cfg: &RunConfig, pair: &SystemPair) -> Result<ClassReport, CliError> {
    let eps = cfg.synthesis_options().eps_eig_for(pair.a());
    Ok(sysclass::classify(pair, eps)?)
}

fn synthesize(cfg: &RunConfig, pair: &SystemPair) -> Result<FeedbackGain, CliError> {
    let gain = synthesis::synth_auto(pair, cfg.delta, &cfg.synthesis_options())?;
    if let Some(rows) = &gain.diagnostics.p {
        if gain.branch == synthesis::Branch::RiccatiDelta {
            let p = linops::from_rows(rows)?;
            let res = norm1(&care_residual(pair.c(), pair.a(), &p));
            if res > cfg.tol.care * (1.0 + norm1(&p)) {
                return Err(Error::Numerical(format!(
                    "Riccati residual {res:e} exceeds tol-care {:e}",
                    cfg.tol.care
                ))
                .into());
            }
        }
    }
    Ok(gain)
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let pair = cfg.pair()?;
    let mut out = OutputDir::create(&cfg.out)?;
    let report = classify(cfg, &pair)?;
    out.write_json("classify.json", &report)?;
    let mut run = RunReport::new("classify");
    run.classification = Some(report);
    run.finish(&mut out)
}

pub fn cmd_synthesize(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let pair = cfg.pair()?;
    let mut run = RunReport::new("synthesize");
    run.classification = Some(classify(cfg, &pair)?);
    let gain = synthesize(cfg, &pair)?;
    let mut out = OutputDir::create(&cfg.out)?;
    out.write_json("gain.json", &gain)?;
    run.set_gain(&gain)?;
    run.finish(&mut out)
}

pub fn cmd_synthesize_dual(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let (a, b) = cfg.dual_pair()?;
    let dual = synthesis::dualize(&a, &b, cfg.delta, &cfg.synthesis_options())?;
    let mut out = OutputDir::create(&cfg.out)?;
    out.write_json("dual_gain.json", &dual)?;
    let mut run = RunReport::new("synthesize");
    run.branch = Some(dual.primal.branch.as_str().to_string());
    run.guarantee = Some(dual.primal.guarantee().as_str().to_string());
    run.gain = Some(serde_json::to_value(&dual)?);
    run.finish(&mut out)
}

/// Gain from `--gain`, or synthesized for the pair.
pub fn resolve_gain(cfg: &RunConfig, pair: &SystemPair) -> Result<FeedbackGain, CliError> {
    match cfg.gain()? {
        Some(g) => {
            if g.l.shape() != (pair.n(), pair.m()) {
                return Err(CliError::Usage(format!(
                    "gain is {}x{}, expected {}x{}",
                    g.l.nrows(),
                    g.l.ncols(),
                    pair.n(),
                    pair.m()
                )));
            }
            Ok(g)
        }
        None => synthesize(cfg, pair),
    }
}

/// The array spec a config describes, with `M = L C`.
pub fn array_spec(cfg: &RunConfig, pair: &SystemPair, gain: &FeedbackGain, gamma: Interconnection) -> Result<ArraySpec, CliError> {
    let m = &gain.l * pair.c();
    let x0 = cfg.x0(pair.n() * gamma.p())?;
    Ok(ArraySpec::new(pair.a().clone(), m, gamma, x0)?)
}

fn simulate_into(
    cfg: &RunConfig,
    spec: &ArraySpec,
    default_t_end: Option<f64>,
    run: &mut RunReport,
    out: &mut OutputDir,
) -> Result<(), CliError> {
    let t_end = cfg.t_end.or(default_t_end).unwrap_or_else(|| simulate::default_t_end(&spec.gamma));
    let opts = SimOptions {
        eps_int: cfg.tol.int,
        rk4_check: true,
    };
    let traj = simulate_array(spec, t_end, cfg.steps, &opts)?;
    let summary = sync_metrics(&traj, 1e-6);
    let mut csv = Vec::new();
    simulate::write_csv(&traj, &mut csv)?;
    out.write("trajectory.csv", &csv)?;
    out.write_json("summary.json", &summary)?;
    run.warnings.extend(traj.warnings.iter().cloned());
    run.simulation = Some(summary);
    Ok(())
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let pair = cfg.pair()?;
    let gamma = cfg.graph()?;
    let gain = resolve_gain(cfg, &pair)?;
    let spec = array_spec(cfg, &pair, &gain, gamma)?;
    let mut run = RunReport::new("simulate");
    run.set_gain(&gain)?;
    run.verdict = Some(verify::spectral_sync_test(&spec.a, &spec.m, &spec.gamma, 0.0)?);
    let mut out = OutputDir::create(&cfg.out)?;
    simulate_into(cfg, &spec, None, &mut run, &mut out)?;
    run.finish(&mut out)
}

pub fn cmd_verify(target: &str, cfg: &RunConfig) -> Result<RunReport, CliError> {
    let mut run = RunReport::new("verify");
    match target.trim().to_ascii_lowercase().as_str() {
        "spectral" => {
            let pair = cfg.pair()?;
            let gamma = cfg.graph()?;
            let gain = resolve_gain(cfg, &pair)?;
            let verdict = verify::spectral_sync_test(pair.a(), &(&gain.l * pair.c()), &gamma, 0.0)?;
            let mut out = OutputDir::create(&cfg.out)?;
            out.write_json("verify_spectral.json", &verdict)?;
            run.set_gain(&gain)?;
            run.verdict = Some(verdict);
            run.finish(&mut out)
        }
        "claim1" => {
            let pair = cfg.pair()?;
            let rep = verify::claim1_check(pair.c(), pair.a(), &verify::DEFAULT_SIGMAS, &verify::DEFAULT_OMEGAS)?;
            let mut out = OutputDir::create(&cfg.out)?;
            out.write_json("verify_claim1.json", &rep)?;
            run.claim1 = Some(rep);
            run.finish(&mut out)
        }
        other => {
            let id: Statement = other
                .parse()
                .map_err(|_| CliError::Usage(format!("unknown verify target '{other}', expected e, f, g, h, spectral or claim1")))?;
            let mut opts = DemoOptions {
                sim: SimOptions {
                    eps_int: cfg.tol.int,
                    rk4_check: true,
                },
                ..Default::default()
            };
            if id == Statement::F {
                opts.f_gain = cfg.gain()?.map(|g| g.l);
            }
            let rep = verify::demo_statement(id, &opts)?;
            let mut out = OutputDir::create(&cfg.out)?;
            out.write_json(&format!("verify_{id}.json"), &rep)?;
            let mut csv = Vec::new();
            simulate::write_csv(&rep.trajectory, &mut csv)?;
            out.write(&format!("verify_{id}.csv"), &csv)?;
            run.verdict = Some(rep.verdict.clone());
            run.simulation = Some(rep.simulation.clone());
            run.counterexample = Some(rep);
            run.finish(&mut out)
        }
    }
}

/// Horizon of the oscillator showcase, long enough for ring(3) to reach
/// the 1e-6 decay threshold.
pub const DEMO_T_END: f64 = 50.0;

fn oscillator_pair() -> SystemPair {
    SystemPair::new(
        Mat::from_row_slice(1, 2, &[0.0, 1.0]),
        Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
    )
    .expect("valid oscillator pair")
}

pub fn cmd_demo(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let pair = match cfg.pair {
        Some(_) => cfg.pair()?,
        None => oscillator_pair(),
    };
    let gamma = match cfg.graph {
        Some(_) => cfg.graph()?,
        None => Interconnection::ring(3)?,
    };
    let mut run = RunReport::new("demo");
    run.classification = Some(classify(cfg, &pair)?);
    let gain = synthesize(cfg, &pair)?;
    let spec = array_spec(cfg, &pair, &gain, gamma)?;
    run.set_gain(&gain)?;
    run.verdict = Some(verify::spectral_sync_test(&spec.a, &spec.m, &spec.gamma, 0.0)?);
    let mut out = OutputDir::create(&cfg.out)?;
    out.write_json("gain.json", &gain)?;
    simulate_into(cfg, &spec, Some(DEMO_T_END), &mut run, &mut out)?;
    run.finish(&mut out)
}
