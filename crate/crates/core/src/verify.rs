//! Spectral synchronization test, Riccati-gain sampling checks and
//! constructive counterexamples.
//!
//! An array `x' = (I_p ⊗ A + Γ ⊗ M) x` over a connected `Γ` synchronizes
//! iff `A + λ M` is Hurwitz for every nonzero eigenvalue `λ` of `Γ`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interconnect::{default_eps_zero, Interconnection};
use crate::linops::{self, real_embedding, Mat};
use crate::simulate::{
    self, log_linear_slope, simulate_array, sync_metrics, ArraySpec, ArrayTrajectory, SimOptions,
    SyncSummary, Vector,
};
use crate::synthesis::{self, SynthesisOptions};
use crate::sysclass::SystemPair;

pub const DEFAULT_SIGMAS: [f64; 4] = [1.0, 2.0, 5.0, 10.0];
pub const DEFAULT_OMEGAS: [f64; 7] = [0.0, 1.0, -1.0, 5.0, -5.0, 10.0, -10.0];
pub const DEFAULT_P_MAX: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRecord {
    pub lambda: Complex64,
    pub abscissa: f64,
    pub hurwitz: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralVerdict {
    pub records: Vec<SpectralRecord>,
    /// Every nonzero-eigenvalue block is Hurwitz.
    pub overall: bool,
    /// Smallest `|abscissa|` over the tested blocks; infinite when none.
    pub margin: f64,
    /// Some block lies within the requested margin of the imaginary axis.
    pub indeterminate: bool,
}

/// Spectral abscissa of the complex matrix `re + j im`.
pub fn complex_abscissa(re: &Mat, im: &Mat) -> Result<f64> {
    linops::abscissa(&real_embedding(re, im))
}

/// Tests `A + λ M` for each eigenvalue `λ` of `Γ` with `|λ| > eps_zero`.
/// A block counts as Hurwitz when its abscissa is below `-margin`.
pub fn spectral_sync_test(
    a: &Mat,
    m: &Mat,
    gamma: &Interconnection,
    margin: f64,
) -> Result<SpectralVerdict> {
    linops::check_square(a, "A")?;
    if m.shape() != a.shape() {
        return Err(Error::Dimension(format!(
            "M is {}x{} but A is {}x{}",
            m.nrows(),
            m.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let eps_zero = default_eps_zero(gamma.gamma());
    let mut records = Vec::new();
    for lambda in gamma.eigenvalues()? {
        if lambda.norm() <= eps_zero {
            continue;
        }
        let abscissa = complex_abscissa(&(a + m * lambda.re), &(m * lambda.im))?;
        records.push(SpectralRecord {
            lambda,
            abscissa,
            hurwitz: abscissa < -margin,
        });
    }
    let closest = records
        .iter()
        .map(|r| r.abscissa.abs())
        .fold(f64::INFINITY, f64::min);
    Ok(SpectralVerdict {
        overall: records.iter().all(|r| r.hurwitz),
        margin: closest,
        indeterminate: closest <= margin,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingHit {
    pub p: usize,
    pub lambda: Complex64,
    pub abscissa: f64,
}

/// Smallest `p <= p_max` for which `L` fails to synchronize the array over
/// the directed ring of `p` nodes.
pub fn ring_instability_search(c: &Mat, a: &Mat, l: &Mat, p_max: usize) -> Result<Option<RingHit>> {
    let pair = SystemPair::new(c.clone(), a.clone())?;
    if l.shape() != (pair.n(), pair.m()) {
        return Err(Error::Dimension(format!(
            "L is {}x{}, expected {}x{}",
            l.nrows(),
            l.ncols(),
            pair.n(),
            pair.m()
        )));
    }
    if p_max < 2 {
        return Err(Error::Validation("p_max must be at least 2".into()));
    }
    let m = l * c;
    for p in 2..=p_max {
        let verdict = spectral_sync_test(a, &m, &Interconnection::ring(p)?, 0.0)?;
        if !verdict.overall {
            let worst = verdict
                .records
                .iter()
                .max_by(|x, y| x.abscissa.total_cmp(&y.abscissa))
                .expect("a failing verdict has a record");
            return Ok(Some(RingHit {
                p,
                lambda: worst.lambda,
                abscissa: worst.abscissa,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim1Report {
    pub all_hurwitz: bool,
    pub worst_abscissa: f64,
    pub samples: usize,
}

/// Samples the abscissa of `A - (σ + jω) P C^T C` with `P` the stabilizing
/// Riccati solution. Every `σ` must be at least 1.
pub fn claim1_check(c: &Mat, a: &Mat, sigmas: &[f64], omegas: &[f64]) -> Result<Claim1Report> {
    if sigmas.is_empty() {
        return Err(Error::Precondition("at least one sigma sample is required".into()));
    }
    if let Some(s) = sigmas.iter().find(|s| !(**s >= 1.0)) {
        return Err(Error::Precondition(format!("sigma must be at least 1, got {s}")));
    }
    let pair = SystemPair::new(c.clone(), a.clone())?;
    let p = linops::solve_care(pair.c(), pair.a())?;
    let k = &p * c.transpose() * c;
    let omegas: &[f64] = if omegas.is_empty() { &[0.0] } else { omegas };
    let mut worst = f64::NEG_INFINITY;
    for &s in sigmas {
        for &w in omegas {
            worst = worst.max(complex_abscissa(&(a - &k * s), &(-&k * w))?);
        }
    }
    Ok(Claim1Report {
        all_hurwitz: worst < 0.0,
        worst_abscissa: worst,
        samples: sigmas.len() * omegas.len(),
    })
}

/// Eigenvalue of largest real part of a real matrix and the real part of a
/// matching eigenvector, normalized to unit length.
pub fn dominant_mode(m: &Mat) -> Result<(Complex64, Vector)> {
    linops::check_square(m, "matrix")?;
    let n = m.nrows();
    let s = linops::eig(m)?
        .eigenvalues
        .into_iter()
        .max_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
        .ok_or_else(|| Error::Dimension("empty matrix".into()))?;
    let shifted = m - Mat::identity(n, n) * s.re;
    let emb = real_embedding(&shifted, &(-Mat::identity(n, n) * s.im));
    let dec = linops::svd(&emb)?;
    let v = dec.v.column(2 * n - 1).into_owned();
    let re = v.rows(0, n).into_owned();
    let im = v.rows(n, n).into_owned();
    let x = if re.norm() >= im.norm() { re } else { im };
    Ok((s, &x / x.norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statement {
    E,
    F,
    G,
    H,
}

impl FromStr for Statement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "e" => Ok(Statement::E),
            "f" => Ok(Statement::F),
            "g" => Ok(Statement::G),
            "h" => Ok(Statement::H),
            other => Err(Error::Validation(format!(
                "unknown statement '{other}', expected one of e, f, g, h"
            ))),
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Statement::E => "e",
            Statement::F => "f",
            Statement::G => "g",
            Statement::H => "h",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// States that never move and never meet.
    ConstantStates { states: Vec<f64> },
    /// First ring on which some coupled block is unstable.
    MinimalRing { p: usize, lambda: Complex64, abscissa: f64 },
    /// Measured growth rate of `|x_1 - x_2|` next to its closed form.
    Divergence { measured: f64, predicted: f64 },
    /// Every sampled gain leaves the states frozen apart.
    NoGain { gains: Vec<f64>, sync_errors: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub statement: Statement,
    pub pair: SystemPair,
    #[serde(serialize_with = "ser_rows")]
    pub gain: Mat,
    pub gamma: Interconnection,
    pub witness: Witness,
    pub verdict: SpectralVerdict,
    pub simulation: SyncSummary,
    /// Whether the witness shows a failure to synchronize.
    pub confirmed: bool,
    #[serde(skip)]
    pub trajectory: ArrayTrajectory,
}

fn ser_rows<S: serde::Serializer>(m: &Mat, s: S) -> std::result::Result<S::Ok, S::Error> {
    linops::to_rows(m).serialize(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOptions {
    /// Gain for statement f; defaults to `(2, 1)^T`.
    pub f_gain: Option<Mat>,
    pub p_max: usize,
    pub f_horizon: f64,
    pub g_epsilon: f64,
    pub g_gain: f64,
    pub h_gains: Vec<f64>,
    pub sim: SimOptions,
}

impl Default for DemoOptions {
    fn default() -> Self {
        Self {
            f_gain: None,
            p_max: DEFAULT_P_MAX,
            f_horizon: 50.0,
            g_epsilon: 0.1,
            g_gain: 1.0,
            h_gains: vec![-10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0],
            sim: SimOptions::default(),
        }
    }
}

fn scalar(v: f64) -> Mat {
    Mat::from_element(1, 1, v)
}

/// Builds and runs the construction behind one of the negative statements.
pub fn demo_statement(id: Statement, opts: &DemoOptions) -> Result<CounterexampleReport> {
    match id {
        Statement::E => demo_e(opts),
        Statement::F => demo_f(opts),
        Statement::G => demo_g(opts),
        Statement::H => demo_h(opts),
    }
}

// Neutrally stable, full-state pair: no gain helps without any coupling.
fn demo_e(opts: &DemoOptions) -> Result<CounterexampleReport> {
    let pair = SystemPair::new(scalar(1.0), scalar(0.0))?;
    let gain = synthesis::synth_auto(&pair, None, &SynthesisOptions::default())?.l;
    let gamma = Interconnection::from_weighted_edges(2, &[])?;
    let m = &gain * pair.c();
    let spec = ArraySpec::new(pair.a().clone(), m.clone(), gamma.clone(), Vector::from_vec(vec![1.0, 2.0]))?;
    let traj = simulate_array(&spec, 20.0, 200, &opts.sim)?;
    let simulation = sync_metrics(&traj, 1e-6);
    let constant = traj.states.iter().all(|x| (x - &spec.x0).norm() == 0.0);
    let verdict = spectral_sync_test(pair.a(), &m, &gamma, 0.0)?;
    Ok(CounterexampleReport {
        statement: Statement::E,
        confirmed: constant && !simulation.decayed,
        witness: Witness::ConstantStates {
            states: traj.states.last().expect("non-empty").iter().copied().collect(),
        },
        pair,
        gain,
        gamma,
        verdict,
        simulation,
        trajectory: traj,
    })
}

// Double integrator with position output: every fixed gain fails on a long
// enough directed ring.
fn demo_f(opts: &DemoOptions) -> Result<CounterexampleReport> {
    let pair = SystemPair::new(
        Mat::from_row_slice(1, 2, &[1.0, 0.0]),
        Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
    )?;
    let gain = opts
        .f_gain
        .clone()
        .unwrap_or_else(|| Mat::from_column_slice(2, 1, &[2.0, 1.0]));
    let hit = ring_instability_search(pair.c(), pair.a(), &gain, opts.p_max)?.ok_or_else(|| {
        Error::Numerical(format!("no unstable ring found up to p = {}", opts.p_max))
    })?;
    let gamma = Interconnection::ring(hit.p)?;
    let m = &gain * pair.c();
    let probe = ArraySpec::new(pair.a().clone(), m.clone(), gamma.clone(), Vector::zeros(2 * hit.p))?;
    let (_, x0) = dominant_mode(&simulate::build_closed_loop(&probe)?)?;
    let spec = ArraySpec { x0, ..probe };
    let traj = simulate_array(&spec, opts.f_horizon, 500, &opts.sim)?;
    let simulation = sync_metrics(&traj, 1e-6);
    let verdict = spectral_sync_test(pair.a(), &m, &gamma, 0.0)?;
    Ok(CounterexampleReport {
        statement: Statement::F,
        confirmed: !verdict.overall && simulation.final_sync_error >= simulation.initial_sync_error,
        witness: Witness::MinimalRing {
            p: hit.p,
            lambda: hit.lambda,
            abscissa: hit.abscissa,
        },
        pair,
        gain,
        gamma,
        verdict,
        simulation,
        trajectory: traj,
    })
}

// Unstable scalar with a weak one-way link: the difference grows at
// 1 - epsilon L.
fn demo_g(opts: &DemoOptions) -> Result<CounterexampleReport> {
    let (eps, l) = (opts.g_epsilon, opts.g_gain);
    let pair = SystemPair::new(scalar(1.0), scalar(1.0))?;
    let gain = scalar(l);
    let gamma = Interconnection::from_weighted_edges(2, &[(1, 2, eps)])?;
    let m = &gain * pair.c();
    let spec = ArraySpec::new(pair.a().clone(), m.clone(), gamma.clone(), Vector::from_vec(vec![1.0, 0.0]))?;
    let traj = simulate_array(&spec, 5.0, 100, &opts.sim)?;
    let simulation = sync_metrics(&traj, 1e-6);
    let measured = log_linear_slope(&traj.times, &traj.sync_error)
        .ok_or_else(|| Error::Numerical("no positive sync error to fit".into()))?;
    let predicted = 1.0 - eps * l;
    let verdict = spectral_sync_test(pair.a(), &m, &gamma, 0.0)?;
    Ok(CounterexampleReport {
        statement: Statement::G,
        confirmed: predicted > 0.0 && measured > 0.0,
        witness: Witness::Divergence { measured, predicted },
        pair,
        gain,
        gamma,
        verdict,
        simulation,
        trajectory: traj,
    })
}

// The pair (0, 0): the output carries nothing, so the gain never acts.
fn demo_h(opts: &DemoOptions) -> Result<CounterexampleReport> {
    let pair = SystemPair::new(scalar(0.0), scalar(0.0))?;
    let gamma = Interconnection::ring(2)?;
    let x0 = Vector::from_vec(vec![1.0, 2.0]);
    let gains = if opts.h_gains.is_empty() { vec![1.0] } else { opts.h_gains.clone() };
    let mut sync_errors = Vec::with_capacity(gains.len());
    let mut last = None;
    for &l in &gains {
        let gain = scalar(l);
        let m = &gain * pair.c();
        let spec = ArraySpec::new(pair.a().clone(), m.clone(), gamma.clone(), x0.clone())?;
        let traj = simulate_array(&spec, 20.0, 100, &opts.sim)?;
        sync_errors.push(*traj.sync_error.last().expect("non-empty"));
        last = Some((gain, m, traj));
    }
    let (gain, m, traj) = last.expect("at least one gain");
    let simulation = sync_metrics(&traj, 1e-6);
    let verdict = spectral_sync_test(pair.a(), &m, &gamma, 0.0)?;
    let initial = (x0[0] - x0[1]).abs();
    Ok(CounterexampleReport {
        statement: Statement::H,
        confirmed: sync_errors.iter().all(|e| *e == initial),
        witness: Witness::NoGain { gains, sync_errors },
        pair,
        gain,
        gamma,
        verdict,
        simulation,
        trajectory: traj,
    })
}
