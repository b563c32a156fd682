use serde::{Deserialize, Serialize};

use super::{check_finite, check_square, eig, norm1, range_split, solve_sylvester, Mat};
use crate::error::{Error, Result};

/// Decomposition `[U W]^{-1} A [U W] = blkdiag(F, G)` with `F` carrying the
/// imaginary-axis eigenvalues and `G` Hurwitz.
///
/// `U` has orthonormal columns; `W` has unit-norm columns. `udag` and `wdag`
/// are the row blocks of `[U W]^{-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterStableSplit {
    pub u: Mat,
    pub w: Mat,
    pub f: Mat,
    pub g: Mat,
    pub udag: Mat,
    pub wdag: Mat,
    /// Axis tolerance the split was computed with.
    pub eps_eig: f64,
    /// `||[U W]^{-1} A [U W] - blkdiag(F, G)||_1` measured after construction.
    pub residual: f64,
}

impl CenterStableSplit {
    pub fn n1(&self) -> usize {
        self.f.nrows()
    }

    pub fn n2(&self) -> usize {
        self.g.nrows()
    }

    /// `[U W] blkdiag(F, G) [Udag; Wdag]`, which should reproduce `A`.
    pub fn reassemble(&self) -> Mat {
        &self.u * &self.f * &self.udag + &self.w * &self.g * &self.wdag
    }
}

/// Matrix sign function by the scaled Newton iteration
/// `Z <- (mu Z + (mu Z)^{-1}) / 2` with determinantal scaling.
///
/// Fails if `z` is (numerically) singular or has eigenvalues close enough to
/// the imaginary axis to stall the iteration.
pub fn matrix_sign(z: &Mat) -> Result<Mat> {
    check_square(z, "sign input")?;
    let n = z.nrows();
    let mut cur = z.clone();
    let mut scaled = true;
    for _ in 0..100 {
        let lu = cur.clone().lu();
        let inv = lu
            .try_inverse()
            .ok_or_else(|| Error::Numerical("sign iteration hit a singular matrix".into()))?;
        let mu = if scaled {
            let lu = cur.clone().lu();
            let log_det: f64 = (0..n).map(|i| lu.u()[(i, i)].abs().ln()).sum();
            let mu = (-log_det / n as f64).exp();
            if mu.is_finite() && mu > 0.0 {
                mu
            } else {
                1.0
            }
        } else {
            1.0
        };
        let next = (&cur * mu + inv / mu) * 0.5;
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("sign iteration diverged".into()));
        }
        let delta = norm1(&(&next - &cur));
        let size = norm1(&next);
        cur = next;
        if delta <= 1e-2 * size {
            // Scaling only helps far from convergence.
            scaled = false;
        }
        if delta <= 1e-14 * size * (n as f64) {
            return Ok(cur);
        }
    }
    Err(Error::Numerical(
        "sign iteration did not converge (eigenvalues near the imaginary axis?)".into(),
    ))
}

/// Splits `A` into its imaginary-axis (center) and stable invariant
/// subspaces.
///
/// The center subspace is found from the spectral projector
/// `(I + sign(A + s I)) / 2` with the shift `s` half the distance from the
/// axis to the nearest stable eigenvalue. An orthonormal basis `Q = [Q1 Q2]`
/// of that subspace and its complement brings `A` to block upper-triangular
/// form, and a Sylvester solve removes the off-diagonal block.
pub fn split_center_stable(a: &Mat, eps_eig: f64) -> Result<CenterStableSplit> {
    check_square(a, "split input")?;
    check_finite(a, "split input")?;
    if !(eps_eig > 0.0) {
        return Err(Error::Validation("axis tolerance must be positive".into()));
    }
    let n = a.nrows();
    let spec = eig(a)?;
    if let Some(z) = spec.eigenvalues.iter().find(|z| z.re > eps_eig) {
        return Err(Error::Precondition(format!(
            "eigenvalue {z} has real part above the axis tolerance {eps_eig:e}"
        )));
    }
    let straddle = 100.0 * eps_eig;
    if let Some(z) = spec
        .eigenvalues
        .iter()
        .find(|z| z.re.abs() > eps_eig && z.re.abs() <= straddle)
    {
        return Err(Error::IllConditionedSplit(format!(
            "eigenvalue {z} lies within 100x the axis tolerance {eps_eig:e}"
        )));
    }
    let n1 = spec
        .eigenvalues
        .iter()
        .filter(|z| z.re.abs() <= eps_eig)
        .count();
    let n2 = n - n1;

    if n1 == n {
        return Ok(CenterStableSplit {
            u: Mat::identity(n, n),
            w: Mat::zeros(n, 0),
            f: a.clone(),
            g: Mat::zeros(0, 0),
            udag: Mat::identity(n, n),
            wdag: Mat::zeros(0, n),
            eps_eig,
            residual: 0.0,
        });
    }
    if n1 == 0 {
        return Ok(CenterStableSplit {
            u: Mat::zeros(n, 0),
            w: Mat::identity(n, n),
            f: Mat::zeros(0, 0),
            g: a.clone(),
            udag: Mat::zeros(0, n),
            wdag: Mat::identity(n, n),
            eps_eig,
            residual: 0.0,
        });
    }

    let gap = spec
        .eigenvalues
        .iter()
        .filter(|z| z.re < -eps_eig)
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);
    let shift = 0.5 * gap;
    let shifted = a + Mat::identity(n, n) * shift;
    let sign = matrix_sign(&shifted)?;
    let projector = (Mat::identity(n, n) + sign) * 0.5;

    let (q1, q2, sv) = range_split(&projector, n1)?;
    // Nonzero singular values of a projector are >= 1; the rest must vanish.
    let tail = sv.get(n1).cloned().unwrap_or(0.0);
    if sv[n1 - 1] < 0.5 || tail > 1e-6 * sv[0].max(1.0) {
        return Err(Error::IllConditionedSplit(format!(
            "center projector rank is not {n1}: singular values {sv:?}"
        )));
    }

    let t11 = q1.transpose() * a * &q1;
    let t12 = q1.transpose() * a * &q2;
    let t22 = q2.transpose() * a * &q2;

    // F Y - Y G = -T12 makes [[I, Y], [0, I]] block-diagonalize the
    // triangular form.
    let y = solve_sylvester(&t11, &t22, &(-&t12))?;
    let w_raw = &q1 * &y + &q2;
    let scales: Vec<f64> = w_raw.column_iter().map(|c| c.norm()).collect();
    let mut w = w_raw.clone();
    let mut g = t22.clone();
    let mut wdag = q2.transpose();
    for (j, &s) in scales.iter().enumerate() {
        w.column_mut(j).unscale_mut(s);
        wdag.row_mut(j).scale_mut(s);
    }
    for i in 0..n2 {
        for j in 0..n2 {
            g[(i, j)] *= scales[i] / scales[j];
        }
    }
    let udag = q1.transpose() - &y * q2.transpose();
    let f = t11;

    let mut split = CenterStableSplit {
        u: q1,
        w,
        f,
        g,
        udag,
        wdag,
        eps_eig,
        residual: 0.0,
    };
    split.residual = block_residual(a, &split);

    let tol = 1e-6 * (1.0 + norm1(a));
    if split.residual > tol {
        return Err(Error::IllConditionedSplit(format!(
            "block-diagonalization residual {:e} exceeds {tol:e}",
            split.residual
        )));
    }
    let f_spec = eig(&split.f)?;
    if f_spec.eigenvalues.iter().any(|z| z.re.abs() > eps_eig) {
        return Err(Error::IllConditionedSplit(
            "center block has eigenvalues off the axis".into(),
        ));
    }
    if eig(&split.g)?.abscissa >= -eps_eig {
        return Err(Error::IllConditionedSplit(
            "stable block is not Hurwitz".into(),
        ));
    }
    Ok(split)
}

fn block_residual(a: &Mat, s: &CenterStableSplit) -> f64 {
    let (n1, n2) = (s.n1(), s.n2());
    let n = n1 + n2;
    let mut basis = Mat::zeros(n, n);
    basis.view_mut((0, 0), (n, n1)).copy_from(&s.u);
    basis.view_mut((0, n1), (n, n2)).copy_from(&s.w);
    let mut inv = Mat::zeros(n, n);
    inv.view_mut((0, 0), (n1, n)).copy_from(&s.udag);
    inv.view_mut((n1, 0), (n2, n)).copy_from(&s.wdag);
    let mut target = Mat::zeros(n, n);
    target.view_mut((0, 0), (n1, n1)).copy_from(&s.f);
    target.view_mut((n1, n1), (n2, n2)).copy_from(&s.g);
    let inverse_defect = norm1(&(&inv * &basis - Mat::identity(n, n)));
    norm1(&(&inv * a * &basis - target)) + inverse_defect
}
