//! Synchronizing gain synthesis.
//!
//! Four constructions are available, each valid for a different class of
//! pairs and guaranteeing synchronization over a different set of
//! interconnections:
//!
//! | branch           | pairs          | gain                          | guarantee  |
//! |------------------|----------------|-------------------------------|------------|
//! | `hurwitz_zero`   | `A_H`          | `L = 0`                       | `G>=0`     |
//! | `algorithm1`     | `A_N ∩ O_P`    | `L = U P^{-1} (C U)^T`        | `G>0`      |
//! | `fullstate_pinv` | `A_J ∩ O_F`    | `L = (C^T C)^{-1} C^T`        | `G>0`      |
//! | `riccati_delta`  | `O_P`          | `L = max(1, 1/delta) P C^T`   | `G>=delta` |

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{self, norm1, split_center_stable, Mat};
use crate::sysclass::{self, ClassReport, SystemPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    HurwitzZero,
    Algorithm1,
    FullstatePinv,
    RiccatiDelta,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::HurwitzZero => "hurwitz_zero",
            Branch::Algorithm1 => "algorithm1",
            Branch::FullstatePinv => "fullstate_pinv",
            Branch::RiccatiDelta => "riccati_delta",
        }
    }

    pub fn guarantee(&self) -> Guarantee {
        match self {
            Branch::HurwitzZero => Guarantee::AllInterconnections,
            Branch::Algorithm1 | Branch::FullstatePinv => Guarantee::Connected,
            Branch::RiccatiDelta => Guarantee::ConnectedDelta,
        }
    }
}

/// Set of interconnections over which a gain is guaranteed to synchronize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Guarantee {
    #[serde(rename = "G>=0")]
    AllInterconnections,
    #[serde(rename = "G>0")]
    Connected,
    #[serde(rename = "G>=delta")]
    ConnectedDelta,
}

impl Guarantee {
    pub fn as_str(&self) -> &'static str {
        match self {
            Guarantee::AllInterconnections => "G>=0",
            Guarantee::Connected => "G>0",
            Guarantee::ConnectedDelta => "G>=delta",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n2: Option<usize>,
    /// Gram matrix (algorithm1) or Riccati solution (riccati_delta).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<Vec<Vec<f64>>>,
    /// Orthonormal center basis used by algorithm1.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub u: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gram_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub care_residual: Option<f64>,
    /// `||L C - I||` for the full-state branch.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lc_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eps_eig: Option<f64>,
}

/// An `n x m` gain with the branch that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackGain {
    pub l: Mat,
    pub branch: Branch,
    pub delta: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl FeedbackGain {
    pub fn guarantee(&self) -> Guarantee {
        self.branch.guarantee()
    }
}

/// JSON form of a gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainOutput {
    #[serde(rename = "L")]
    pub l: Vec<Vec<f64>>,
    pub branch: Branch,
    pub guarantee: Guarantee,
    pub delta: Option<f64>,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

impl Serialize for FeedbackGain {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        GainOutput {
            l: linops::to_rows(&self.l),
            branch: self.branch,
            guarantee: self.guarantee(),
            delta: self.delta,
            diagnostics: self.diagnostics.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FeedbackGain {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let out = GainOutput::deserialize(de)?;
        let l = linops::from_rows(&out.l).map_err(serde::de::Error::custom)?;
        Ok(FeedbackGain {
            l,
            branch: out.branch,
            delta: out.delta,
            diagnostics: out.diagnostics,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    /// Imaginary-axis tolerance; `None` uses `1e-8 (1 + ||A||_1)`.
    pub eps_eig: Option<f64>,
    pub eps_gram: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            eps_eig: None,
            eps_gram: 1e-8,
        }
    }
}

impl SynthesisOptions {
    pub fn eps_eig_for(&self, a: &Mat) -> f64 {
        self.eps_eig.unwrap_or_else(|| linops::default_eps_eig(a))
    }
}

/// The averaging limit `P = lim t^{-1} ∫_0^t e^{F^T s} e^{F s} ds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeutralGram {
    pub p: Mat,
    /// `||P F + F^T P||_F`
    pub residual: f64,
    /// Dimension of the kernel of `X -> F^T X + X F`.
    pub kernel_dim: usize,
}

/// Gram limit of a neutrally stable `F` whose eigenvalues all lie on the
/// imaginary axis.
///
/// With `K(X) = F^T X + X F`, the integrand is `e^{K s}(I)`, so the time
/// average is the spectral projection of `I` onto `ker K` along `range K`.
/// Both kernels come from one SVD of the Kronecker form of `K`; the
/// kernel dimension is fixed by counting eigenvalue pairs with
/// `lambda_i + lambda_j = 0`.
pub fn neutral_gram(f: &Mat, eps_gram: f64) -> Result<NeutralGram> {
    linops::check_square(f, "F")?;
    linops::check_finite(f, "F")?;
    let n = f.nrows();
    let eps_eig = linops::default_eps_eig(f);
    let spec = linops::eig(f)?;
    if let Some(z) = spec.eigenvalues.iter().find(|z| z.re.abs() > eps_eig) {
        return Err(Error::Precondition(format!(
            "F has eigenvalue {z} off the imaginary axis"
        )));
    }
    if !sysclass::is_neutrally_stable(f, eps_eig)? {
        return Err(Error::Precondition(
            "F has a non-trivial Jordan block on the imaginary axis".into(),
        ));
    }

    let pair_tol = sysclass::cluster_tolerance(f, eps_eig);
    let kernel_dim = spec
        .eigenvalues
        .iter()
        .map(|a| {
            spec.eigenvalues
                .iter()
                .filter(|b| (*a + **b).norm() <= pair_tol)
                .count()
        })
        .sum::<usize>();

    let id = Mat::identity(n, n);
    let ft = f.transpose();
    let k = id.kronecker(&ft) + ft.kronecker(&id);
    let nn = n * n;
    let dec = linops::svd(&k)?;
    // ascending order: the kernel sits at the tail of the decomposition
    let order: Vec<usize> = (0..nn).rev().collect();
    let smax = dec.s.first().copied().unwrap_or(0.0).max(1.0);
    let kernel_sv = dec.s[order[kernel_dim - 1]];
    let next_sv = order.get(kernel_dim).map(|&i| dec.s[i]).unwrap_or(smax);
    if kernel_sv > 1e-6 * smax || next_sv < 1e3 * kernel_sv.max(f64::EPSILON * smax) {
        return Err(Error::Numerical(format!(
            "Lyapunov operator kernel is not well separated (sigma_k = {kernel_sv:e}, sigma_k+1 = {next_sv:e})"
        )));
    }
    let mut right = Mat::zeros(nn, kernel_dim);
    let mut left = Mat::zeros(nn, kernel_dim);
    for (dst, &src) in order.iter().take(kernel_dim).enumerate() {
        right.set_column(dst, &dec.v.column(src));
        left.set_column(dst, &dec.u.column(src));
    }
    let vec_id = DVector::from_column_slice(id.as_slice());
    let coeff = (left.transpose() * &right)
        .lu()
        .solve(&(left.transpose() * vec_id))
        .ok_or_else(|| Error::Numerical("kernel projector is singular".into()))?;
    let vec_p = right * coeff;
    let p = Mat::from_column_slice(n, n, vec_p.as_slice());
    let p = (&p + p.transpose()) * 0.5;

    let residual = (&p * f + f.transpose() * &p).norm();
    if residual > eps_gram * p.norm().max(1.0) {
        return Err(Error::Convergence(format!(
            "Gram residual {residual:e} exceeds tolerance {eps_gram:e}"
        )));
    }
    if p.clone().cholesky().is_none() {
        return Err(Error::Numerical("Gram limit is not positive definite".into()));
    }
    Ok(NeutralGram {
        p,
        residual,
        kernel_dim,
    })
}

fn classify(pair: &SystemPair, opts: &SynthesisOptions) -> Result<(ClassReport, f64)> {
    let eps = opts.eps_eig_for(pair.a());
    Ok((sysclass::classify(pair, eps)?, eps))
}

/// `L = 0` for Hurwitz `A`.
pub fn synth_hurwitz(pair: &SystemPair) -> Result<FeedbackGain> {
    let (report, eps) = classify(pair, &SynthesisOptions::default())?;
    if !report.in_ah {
        return Err(Error::Precondition("A is not Hurwitz".into()));
    }
    Ok(FeedbackGain {
        l: Mat::zeros(pair.n(), pair.m()),
        branch: Branch::HurwitzZero,
        delta: None,
        diagnostics: Diagnostics {
            eps_eig: Some(eps),
            ..Default::default()
        },
    })
}

/// Gain for neutrally stable, detectable pairs: split off the center
/// subspace `U`, take the Gram limit `P` of the center block `F`, and set
/// `L = U P^{-1} (C U)^T`. `L = 0` when `A` has no imaginary-axis
/// eigenvalue.
pub fn synth_algorithm1(pair: &SystemPair, opts: &SynthesisOptions) -> Result<FeedbackGain> {
    let (report, eps) = classify(pair, opts)?;
    if !report.in_an {
        return Err(Error::Precondition("A is not neutrally stable".into()));
    }
    if !report.in_op {
        return Err(Error::Precondition("(C, A) is not detectable".into()));
    }
    let split = split_center_stable(pair.a(), eps)?;
    let mut diagnostics = Diagnostics {
        n1: Some(split.n1()),
        n2: Some(split.n2()),
        split_residual: Some(split.residual),
        eps_eig: Some(eps),
        ..Default::default()
    };
    if split.n1() == 0 {
        return Ok(FeedbackGain {
            l: Mat::zeros(pair.n(), pair.m()),
            branch: Branch::Algorithm1,
            delta: None,
            diagnostics,
        });
    }
    let gram = neutral_gram(&split.f, opts.eps_gram)?;
    let cu = pair.c() * &split.u;
    let chol = gram
        .p
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("Gram limit is not positive definite".into()))?;
    let l = &split.u * chol.solve(&cu.transpose());
    diagnostics.p = Some(linops::to_rows(&gram.p));
    diagnostics.u = Some(linops::to_rows(&split.u));
    diagnostics.gram_residual = Some(gram.residual);
    Ok(FeedbackGain {
        l,
        branch: Branch::Algorithm1,
        delta: None,
        diagnostics,
    })
}

/// `L = (C^T C)^{-1} C^T` for full-column-rank `C` and `A` without
/// eigenvalues in the open right half-plane.
pub fn synth_fullstate(pair: &SystemPair) -> Result<FeedbackGain> {
    synth_fullstate_with(pair, &SynthesisOptions::default())
}

fn synth_fullstate_with(pair: &SystemPair, opts: &SynthesisOptions) -> Result<FeedbackGain> {
    let (report, eps) = classify(pair, opts)?;
    if !report.in_of {
        return Err(Error::Precondition(format!(
            "C is not full column rank (rank {} < {})",
            report.evidence.rank_c,
            pair.n()
        )));
    }
    if !report.in_aj {
        return Err(Error::Precondition(
            "A has an eigenvalue with positive real part".into(),
        ));
    }
    let c = pair.c();
    let ctc = c.transpose() * c;
    let chol = ctc
        .cholesky()
        .ok_or_else(|| Error::Numerical("C^T C is not positive definite".into()))?;
    let l = chol.solve(&c.transpose());
    let n = pair.n();
    let defect = (&l * c - Mat::identity(n, n)).norm();
    Ok(FeedbackGain {
        l,
        branch: Branch::FullstatePinv,
        delta: None,
        diagnostics: Diagnostics {
            lc_defect: Some(defect),
            eps_eig: Some(eps),
            ..Default::default()
        },
    })
}

/// `L = max(1, 1/delta) P C^T` with `P` the stabilizing solution of
/// `A P + P A^T + I - P C^T C P = 0`.
pub fn synth_riccati(pair: &SystemPair, delta: f64) -> Result<FeedbackGain> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Validation(format!("delta must be positive, got {delta}")));
    }
    let p = linops::solve_care(pair.c(), pair.a())?;
    let gain = 1f64.max(1.0 / delta);
    let l = &p * pair.c().transpose() * gain;
    let residual = norm1(&linops::care_residual(pair.c(), pair.a(), &p));
    Ok(FeedbackGain {
        l,
        branch: Branch::RiccatiDelta,
        delta: Some(delta),
        diagnostics: Diagnostics {
            p: Some(linops::to_rows(&p)),
            care_residual: Some(residual),
            ..Default::default()
        },
    })
}

/// Picks the construction with the largest guaranteed interconnection set.
pub fn synth_auto(
    pair: &SystemPair,
    delta: Option<f64>,
    opts: &SynthesisOptions,
) -> Result<FeedbackGain> {
    let (report, _) = classify(pair, opts)?;
    if report.in_ah {
        return synth_hurwitz(pair);
    }
    if report.in_an && report.in_op {
        return synth_algorithm1(pair, opts);
    }
    if report.in_aj && report.in_of {
        return synth_fullstate_with(pair, opts);
    }
    if report.in_op {
        if let Some(d) = delta {
            return synth_riccati(pair, d);
        }
        return Err(Error::NoGuarantee(format!(
            "pair is in {:?}: detectable but neither neutrally stable nor full-state; \
             a gain exists only for G>=delta, supply delta",
            report.set_names()
        )));
    }
    Err(Error::NoGuarantee(format!(
        "pair is in {:?}: not detectable, so no gain synchronizes even over G>=delta",
        report.set_names()
    )))
}

/// Input-coupling gain for `x_i' = A x_i + B u_i`, `u_i = K z_i`, obtained
/// as the transpose of an output gain for `(B^T, A^T)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualGain {
    #[serde(serialize_with = "ser_rows")]
    pub k: Mat,
    pub primal: FeedbackGain,
}

fn ser_rows<S: serde::Serializer>(m: &Mat, s: S) -> std::result::Result<S::Ok, S::Error> {
    linops::to_rows(m).serialize(s)
}

pub fn dualize(
    a: &Mat,
    b: &Mat,
    delta: Option<f64>,
    opts: &SynthesisOptions,
) -> Result<DualGain> {
    let pair = SystemPair::dual_of(a, b)?;
    let primal = synth_auto(&pair, delta, opts)?;
    Ok(DualGain {
        k: primal.l.transpose(),
        primal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(c: &[f64], m: usize, a: &[f64]) -> SystemPair {
        let n = (a.len() as f64).sqrt() as usize;
        SystemPair::new(Mat::from_row_slice(m, n, c), Mat::from_row_slice(n, n, a)).unwrap()
    }

    fn close(a: &Mat, b: &[f64], tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol) && a.len() == b.len()
    }

    #[test]
    fn gram_zero() {
        let g = neutral_gram(&Mat::zeros(1, 1), 1e-8).unwrap();
        assert!((g.p[(0, 0)] - 1.0).abs() < 1e-14);
        assert_eq!(g.kernel_dim, 1);
    }

    #[test]
    fn gram_rotation() {
        let f = Mat::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]);
        let g = neutral_gram(&f, 1e-8).unwrap();
        assert!((g.p - Mat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn gram_scaled_rotation() {
        // T R T^{-1} with T = diag(1, 2). The average of R^T T^2 R over a
        // period is (tr T^2 / 2) I, so P = 2.5 T^{-2}.
        let f = Mat::from_row_slice(2, 2, &[0.0, 0.5, -2.0, 0.0]);
        let g = neutral_gram(&f, 1e-8).unwrap();
        assert!(close(&g.p, &[2.5, 0.0, 0.0, 0.625], 1e-12));
        assert!(g.residual < 1e-12);
    }

    #[test]
    fn gram_rejects_off_axis_and_jordan() {
        assert!(matches!(
            neutral_gram(&Mat::from_element(1, 1, -1.0), 1e-8),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            neutral_gram(&Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]), 1e-8),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn hurwitz_branch() {
        let g = synth_hurwitz(&pair(&[1.0], 1, &[-1.0])).unwrap();
        assert_eq!(g.l, Mat::zeros(1, 1));
        let g = synth_hurwitz(&pair(&[1.0, 0.0, 0.0, 1.0], 2, &[-1.0, 0.0, 0.0, -1.0])).unwrap();
        assert_eq!(g.l, Mat::zeros(2, 2));
        let g = synth_hurwitz(&pair(&[1.0, 0.0], 1, &[-1.0, 0.0, 0.0, -2.0])).unwrap();
        assert_eq!(g.l, Mat::zeros(2, 1));
        assert!(synth_hurwitz(&pair(&[1.0], 1, &[0.0])).is_err());
    }

    #[test]
    fn algorithm1_oscillator() {
        let p = pair(&[0.0, 1.0], 1, &[0.0, 1.0, -1.0, 0.0]);
        let g = synth_algorithm1(&p, &SynthesisOptions::default()).unwrap();
        assert!(close(&g.l, &[0.0, 1.0], 1e-12));
        let lc = &g.l * p.c();
        assert!(close(&lc, &[0.0, 0.0, 0.0, 1.0], 1e-12));
    }

    #[test]
    fn algorithm1_integrator() {
        let g = synth_algorithm1(&pair(&[1.0], 1, &[0.0]), &SynthesisOptions::default()).unwrap();
        assert!((g.l[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn algorithm1_hurwitz_shortcut() {
        let g = synth_algorithm1(
            &pair(&[1.0, 0.0], 1, &[-1.0, 0.0, 0.0, -2.0]),
            &SynthesisOptions::default(),
        )
        .unwrap();
        assert_eq!(g.l, Mat::zeros(2, 1));
        assert_eq!(g.diagnostics.n1, Some(0));
    }

    #[test]
    fn algorithm1_preconditions() {
        let opts = SynthesisOptions::default();
        assert!(synth_algorithm1(&pair(&[1.0, 0.0], 1, &[0.0, 1.0, 0.0, 0.0]), &opts).is_err());
        assert!(synth_algorithm1(&pair(&[0.0], 1, &[0.0]), &opts).is_err());
    }

    #[test]
    fn fullstate_examples() {
        let id = pair(&[1.0, 0.0, 0.0, 1.0], 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(close(&synth_fullstate(&id).unwrap().l, &[1.0, 0.0, 0.0, 1.0], 1e-14));
        let tall = SystemPair::new(Mat::from_row_slice(2, 1, &[1.0, 1.0]), Mat::zeros(1, 1)).unwrap();
        assert!(close(&synth_fullstate(&tall).unwrap().l, &[0.5, 0.5], 1e-14));
        let wide = pair(&[1.0, 0.0], 1, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(synth_fullstate(&wide), Err(Error::Precondition(_))));
    }

    #[test]
    fn riccati_examples() {
        let g = synth_riccati(&pair(&[1.0], 1, &[0.0]), 1.0).unwrap();
        assert!((g.l[(0, 0)] - 1.0).abs() < 1e-12);
        let g = synth_riccati(&pair(&[1.0], 1, &[0.0]), 0.5).unwrap();
        assert!((g.l[(0, 0)] - 2.0).abs() < 1e-12);
        let g = synth_riccati(&pair(&[1.0], 1, &[1.0]), 1.0).unwrap();
        assert!((g.l[(0, 0)] - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!(matches!(
            synth_riccati(&pair(&[1.0], 1, &[0.0]), 0.0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn auto_dispatch() {
        let opts = SynthesisOptions::default();
        let dint = pair(&[1.0, 0.0], 1, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(synth_auto(&dint, None, &opts), Err(Error::NoGuarantee(_))));
        let g = synth_auto(&dint, Some(1.0), &opts).unwrap();
        assert_eq!(g.branch, Branch::RiccatiDelta);
        assert_eq!(g.guarantee(), Guarantee::ConnectedDelta);

        let full = pair(&[1.0, 0.0, 0.0, 1.0], 2, &[0.0, 1.0, 0.0, 0.0]);
        let g = synth_auto(&full, None, &opts).unwrap();
        assert_eq!(g.branch, Branch::FullstatePinv);
        assert_eq!(g.guarantee(), Guarantee::Connected);

        assert!(matches!(
            synth_auto(&pair(&[0.0], 1, &[0.0]), Some(1.0), &opts),
            Err(Error::NoGuarantee(_))
        ));
        let g = synth_auto(&pair(&[1.0], 1, &[-3.0]), None, &opts).unwrap();
        assert_eq!(g.guarantee(), Guarantee::AllInterconnections);
    }

    #[test]
    fn dual_examples() {
        let opts = SynthesisOptions::default();
        let k = dualize(&Mat::zeros(1, 1), &Mat::from_element(1, 1, 1.0), None, &opts).unwrap();
        assert!((k.k[(0, 0)] - 1.0).abs() < 1e-12);
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let b = Mat::from_row_slice(2, 1, &[0.0, 1.0]);
        let k = dualize(&a, &b, None, &opts).unwrap();
        assert!(close(&k.k, &[0.0, 1.0], 1e-12));
        assert_eq!(k.k.shape(), (1, 2));
        assert!(matches!(
            dualize(&Mat::from_element(1, 1, 1.0), &Mat::zeros(1, 1), None, &opts),
            Err(Error::NoGuarantee(_))
        ));
    }

    #[test]
    fn gain_json_round_trip() {
        let g = synth_riccati(&pair(&[1.0], 1, &[1.0]), 0.3).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"guarantee\":\"G>=delta\""));
        assert!(text.contains("\"branch\":\"riccati_delta\""));
        let back: FeedbackGain = serde_json::from_str(&text).unwrap();
        assert_eq!(back.l, g.l);
    }
}
