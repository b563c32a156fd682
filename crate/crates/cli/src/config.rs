//! Run configuration: a JSON file merged with command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use serde_json::Value;
use syncgain::interconnect::GraphInput;
use syncgain::simulate::Vector;
use syncgain::synthesis::{FeedbackGain, SynthesisOptions};
use syncgain::sysclass::PairInput;
use syncgain::{Interconnection, Mat, SystemPair};

use crate::CliError;

pub const DEFAULT_STEPS: usize = 1000;

/// Flags shared by every subcommand. Each overrides the matching field of
/// `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// System pair {"C": [[..]], "A": [[..]]}, inline or a file path
    #[arg(long)]
    pub pair: Option<String>,
    /// Interconnection: inline JSON, a file path, or ring:<p>
    #[arg(long)]
    pub graph: Option<String>,
    /// Gain JSON as written by `synthesize`, inline or a file path
    #[arg(long)]
    pub gain: Option<String>,
    /// Initial stacked state as a JSON array; random from --seed if absent
    #[arg(long)]
    pub x0: Option<String>,
    /// Spectral margin; enables the Riccati branch
    #[arg(long)]
    pub delta: Option<f64>,
    /// Simulation horizon; defaults to 20/|Re λ2|
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Number of grid intervals [default: 1000]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the random initial state [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Imaginary-axis tolerance [default: 1e-8 (1 + ||A||_1)]
    #[arg(long = "tol-eig")]
    pub tol_eig: Option<f64>,
    /// Gram limit residual tolerance [default: 1e-8]
    #[arg(long = "tol-gram")]
    pub tol_gram: Option<f64>,
    /// Riccati residual tolerance [default: 1e-8]
    #[arg(long = "tol-care")]
    pub tol_care: Option<f64>,
    /// RK4 cross-check tolerance [default: 1e-6]
    #[arg(long = "tol-int")]
    pub tol_int: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTolerances {
    eig: Option<f64>,
    gram: Option<f64>,
    care: Option<f64>,
    int: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    pair: Option<Value>,
    graph: Option<Value>,
    gain: Option<Value>,
    x0: Option<Vec<f64>>,
    delta: Option<f64>,
    t_end: Option<f64>,
    steps: Option<usize>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    #[serde(default)]
    tol: FileTolerances,
}

/// Where a JSON document comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Inline(Value),
    File(PathBuf),
    Ring(usize),
}

impl Source {
    fn from_arg(text: &str, base: Option<&Path>) -> Result<Self, CliError> {
        let t = text.trim();
        if let Some(p) = t.strip_prefix("ring:") {
            let p = p
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad ring size in '{t}'")))?;
            return Ok(Source::Ring(p));
        }
        if t.starts_with('{') || t.starts_with('[') {
            let v = serde_json::from_str(t)
                .map_err(|e| CliError::Usage(format!("inline JSON: {e}")))?;
            return Ok(Source::Inline(v));
        }
        let path = PathBuf::from(t);
        Ok(Source::File(match base {
            Some(b) if path.is_relative() => b.join(path),
            _ => path,
        }))
    }

    fn from_value(v: Value, base: Option<&Path>) -> Result<Self, CliError> {
        match v {
            Value::String(s) => Self::from_arg(&s, base),
            other => Ok(Source::Inline(other)),
        }
    }

    fn json(&self) -> Result<Value, CliError> {
        match self {
            Source::Inline(v) => Ok(v.clone()),
            Source::File(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
            }
            Source::Ring(_) => Err(CliError::Usage("ring:<p> is only valid for --graph".into())),
        }
    }
}

fn parse<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Usage(format!("malformed {what}: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub eig: Option<f64>,
    pub gram: f64,
    pub care: f64,
    pub int: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig: None,
            gram: 1e-8,
            care: 1e-8,
            int: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pair: Option<Source>,
    pub graph: Option<Source>,
    pub gain: Option<Source>,
    pub x0: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub t_end: Option<f64>,
    pub steps: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub tol: Tolerances,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let (file, base) = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                let cfg: FileConfig = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
                (cfg, path.parent().map(Path::to_path_buf))
            }
            None => (FileConfig::default(), None),
        };
        let base = base.as_deref();
        let pick = |arg: &Option<String>, val: Option<Value>| -> Result<Option<Source>, CliError> {
            match (arg, val) {
                (Some(a), _) => Source::from_arg(a, None).map(Some),
                (None, Some(v)) => Source::from_value(v, base).map(Some),
                (None, None) => Ok(None),
            }
        };
        let x0 = match &args.x0 {
            Some(text) => Some(
                serde_json::from_str::<Vec<f64>>(text)
                    .map_err(|e| CliError::Usage(format!("--x0: {e}")))?,
            ),
            None => file.x0,
        };
        let tol = Tolerances {
            eig: args.tol_eig.or(file.tol.eig),
            gram: args.tol_gram.or(file.tol.gram).unwrap_or(Tolerances::default().gram),
            care: args.tol_care.or(file.tol.care).unwrap_or(Tolerances::default().care),
            int: args.tol_int.or(file.tol.int).unwrap_or(Tolerances::default().int),
        };
        let cfg = RunConfig {
            pair: pick(&args.pair, file.pair)?,
            graph: pick(&args.graph, file.graph)?,
            gain: pick(&args.gain, file.gain)?,
            x0,
            delta: args.delta.or(file.delta),
            t_end: args.t_end.or(file.t_end),
            steps: args.steps.or(file.steps).unwrap_or(DEFAULT_STEPS),
            out: args
                .out
                .clone()
                .or_else(|| file.out.map(|o| base.map(|b| b.join(&o)).unwrap_or(o)))
                .unwrap_or_else(|| PathBuf::from("syncgain-out")),
            seed: args.seed.or(file.seed).unwrap_or(0),
            tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::Usage(format!("{name} must be positive, got {v}")))
            }
        };
        if let Some(e) = self.tol.eig {
            positive("tol-eig", e)?;
        }
        positive("tol-gram", self.tol.gram)?;
        positive("tol-care", self.tol.care)?;
        positive("tol-int", self.tol.int)?;
        if let Some(d) = self.delta {
            positive("delta", d)?;
        }
        if let Some(t) = self.t_end {
            positive("t-end", t)?;
        }
        if self.steps < 2 {
            return Err(CliError::Usage("steps must be at least 2".into()));
        }
        Ok(())
    }

    pub fn synthesis_options(&self) -> SynthesisOptions {
        SynthesisOptions {
            eps_eig: self.tol.eig,
            eps_gram: self.tol.gram,
        }
    }

    pub fn pair(&self) -> Result<SystemPair, CliError> {
        let src = self
            .pair
            .as_ref()
            .ok_or_else(|| CliError::Usage("a system pair is required (--pair)".into()))?;
        let input: PairInput = parse(src.json()?, "pair")?;
        Ok(input.build()?)
    }

    /// `(A, B)` for the input-coupled dual problem.
    pub fn dual_pair(&self) -> Result<(Mat, Mat), CliError> {
        #[derive(Deserialize)]
        struct DualInput {
            #[serde(rename = "A")]
            a: Vec<Vec<f64>>,
            #[serde(rename = "B")]
            b: Vec<Vec<f64>>,
        }
        let src = self
            .pair
            .as_ref()
            .ok_or_else(|| CliError::Usage("an {\"A\", \"B\"} pair is required (--pair)".into()))?;
        let input: DualInput = parse(src.json()?, "dual pair")?;
        Ok((
            syncgain::linops::from_rows(&input.a)?,
            syncgain::linops::from_rows(&input.b)?,
        ))
    }

    pub fn graph(&self) -> Result<Interconnection, CliError> {
        match self.graph.as_ref() {
            None => Err(CliError::Usage("an interconnection is required (--graph)".into())),
            Some(Source::Ring(p)) => Ok(Interconnection::ring(*p)?),
            Some(src) => {
                let input: GraphInput = parse(src.json()?, "graph")?;
                Ok(input.build()?)
            }
        }
    }

    pub fn gain(&self) -> Result<Option<FeedbackGain>, CliError> {
        match self.gain.as_ref() {
            None => Ok(None),
            Some(src) => parse(src.json()?, "gain").map(Some),
        }
    }

    /// The configured initial state, or a seeded uniform draw from `[-1, 1]`.
    pub fn x0(&self, len: usize) -> Result<Vector, CliError> {
        match &self.x0 {
            Some(v) if v.len() == len => Ok(Vector::from_vec(v.clone())),
            Some(v) => Err(CliError::Usage(format!(
                "x0 has length {}, expected {len}",
                v.len()
            ))),
            None => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
                Ok(Vector::from_fn(len, |_, _| rng.gen_range(-1.0..=1.0)))
            }
        }
    }
}
