//! Dense linear-algebra kernels shared by the rest of the crate.
//!
//! Storage is `nalgebra::DMatrix<f64>`; complex quantities only appear in
//! spectra and are otherwise handled through the real embedding
//! `[[Re, -Im], [Im, Re]]`.

mod care;
mod expm;
mod split;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use care::{care_residual, solve_care, solve_lyapunov};
pub use expm::expm;
pub use split::{matrix_sign, split_center_stable, CenterStableSplit};

pub type Mat = DMatrix<f64>;

/// Default relative tolerance used to decide whether an eigenvalue sits on
/// the imaginary axis.
pub const DEFAULT_EIG_REL_TOL: f64 = 1e-8;

/// Axis tolerance `1e-8 * (1 + ||A||_1)`.
pub fn default_eps_eig(a: &Mat) -> f64 {
    DEFAULT_EIG_REL_TOL * (1.0 + norm1(a))
}

/// Eigenvalues of a square real matrix together with its spectral abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub abscissa: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Builds a matrix from nested rows, rejecting ragged or non-finite input.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Validation("matrix has no rows".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err(Error::Validation("matrix has no columns".into()));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Validation(format!(
            "ragged matrix: row {} has {} entries, expected {}",
            bad,
            rows[bad].len(),
            ncols
        )));
    }
    let m = Mat::from_fn(nrows, ncols, |i, j| rows[i][j]);
    check_finite(&m, "matrix")?;
    Ok(m)
}

/// Inverse of [`from_rows`].
pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn check_finite(m: &Mat, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Validation(format!("{what} has non-finite entries")))
    }
}

pub fn check_square(m: &Mat, what: &str) -> Result<()> {
    if m.nrows() == m.ncols() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Induced 1-norm (max absolute column sum).
pub fn norm1(m: &Mat) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value.
pub fn norm2(m: &Mat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Full singular value decomposition `M = U diag(s) V^T`, singular values
/// in nonincreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

fn to_faer(m: &Mat) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Full SVD (faer backend).
pub fn svd(m: &Mat) -> Result<Svd> {
    let (r, c) = m.shape();
    let dec = to_faer(m)
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let (fu, fv) = (dec.U(), dec.V());
    let fs = dec.S().column_vector();
    let mut order: Vec<usize> = (0..r.min(c)).collect();
    order.sort_by(|&a, &b| fs[b].total_cmp(&fs[a]));
    let mut u = Mat::from_fn(r, r, |i, j| fu[(i, j)]);
    let mut v = Mat::from_fn(c, c, |i, j| fv[(i, j)]);
    let (u0, v0) = (u.clone(), v.clone());
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u0.column(src));
        v.set_column(dst, &v0.column(src));
    }
    Ok(Svd {
        u,
        s: order.iter().map(|&k| fs[k]).collect(),
        v,
    })
}

/// Singular values in nonincreasing order. Falls back to nalgebra's
/// bidiagonal iteration if faer reports non-convergence.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s = match to_faer(m).singular_values() {
        Ok(s) => s,
        Err(_) => m.clone().singular_values().iter().copied().collect(),
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Eigenvalues of a square real matrix, sorted by decreasing real part and
/// then decreasing imaginary part.
pub fn eig(m: &Mat) -> Result<Spectrum> {
    check_square(m, "eig input")?;
    check_finite(m, "eig input")?;
    let n = m.nrows();
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let mut eigenvalues: Vec<Complex64> = fm
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("eigenvalue iteration failed: {e:?}")))?
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    // Real eigenvalues sometimes carry a roundoff-level imaginary part.
    for z in eigenvalues.iter_mut() {
        if z.im.abs() <= f64::EPSILON * (1.0 + z.re.abs()) * 4.0 {
            z.im = 0.0;
        }
    }
    sort_eigenvalues(&mut eigenvalues);
    let abscissa = eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Spectrum {
        eigenvalues,
        abscissa,
    })
}

pub(crate) fn sort_eigenvalues(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Spectral abscissa (largest real part of any eigenvalue).
pub fn abscissa(m: &Mat) -> Result<f64> {
    Ok(eig(m)?.abscissa)
}

/// True iff every eigenvalue has real part below `-margin`.
pub fn is_hurwitz(m: &Mat, margin: f64) -> Result<bool> {
    Ok(abscissa(m)? < -margin)
}

/// Real 2n x 2n embedding of the complex matrix `re + j im`. Its spectrum
/// is the union of the spectrum of `re + j im` and its conjugate.
pub fn real_embedding(re: &Mat, im: &Mat) -> Mat {
    let (r, c) = re.shape();
    let mut out = Mat::zeros(2 * r, 2 * c);
    out.view_mut((0, 0), (r, c)).copy_from(re);
    out.view_mut((r, c), (r, c)).copy_from(re);
    out.view_mut((0, c), (r, c)).copy_from(&(-im));
    out.view_mut((r, 0), (r, c)).copy_from(im);
    out
}

/// Numerical rank with singular-value cutoff `max(m, n) * sigma_max * 1e-12`.
/// Returns the rank and the cutoff used.
pub fn numerical_rank(m: &Mat) -> (usize, f64) {
    if m.is_empty() {
        return (0, 0.0);
    }
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let cutoff = (m.nrows().max(m.ncols()) as f64) * smax * 1e-12;
    (sv.iter().filter(|&&s| s > cutoff).count(), cutoff)
}

/// Solves `F Y - Y G = R` for `Y` by the Kronecker-vectorized linear system.
/// The spectra of `F` and `G` must be disjoint.
pub fn solve_sylvester(f: &Mat, g: &Mat, r: &Mat) -> Result<Mat> {
    let (n1, n2) = (f.nrows(), g.nrows());
    if r.shape() != (n1, n2) {
        return Err(Error::Dimension(format!(
            "Sylvester right-hand side is {}x{}, expected {}x{}",
            r.nrows(),
            r.ncols(),
            n1,
            n2
        )));
    }
    if n1 == 0 || n2 == 0 {
        return Ok(Mat::zeros(n1, n2));
    }
    let op = Mat::identity(n2, n2).kronecker(f) - g.transpose().kronecker(&Mat::identity(n1, n1));
    let rhs = nalgebra::DVector::from_column_slice(r.as_slice());
    let y = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("Sylvester operator is singular".into()))?;
    Ok(Mat::from_column_slice(n1, n2, y.as_slice()))
}

/// Orthonormal basis for the dominant `rank` left singular directions of `m`,
/// plus an orthonormal basis of the complement. Also returns the singular
/// values so callers can inspect the gap.
pub(crate) fn range_split(m: &Mat, rank: usize) -> Result<(Mat, Mat, Vec<f64>)> {
    let n = m.nrows();
    let dec = svd(m)?;
    let basis = dec.u.columns(0, rank).into_owned();
    let comp = dec.u.columns(rank, n - rank).into_owned();
    Ok((basis, comp, dec.s))
}
