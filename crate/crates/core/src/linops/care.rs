use nalgebra::DVector;

use super::{check_finite, check_square, eig, matrix_sign, norm1, range_split, Mat};
use crate::error::{Error, Result};

/// Solves the Lyapunov equation `A X + X A^T = Q`.
pub fn solve_lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    check_square(a, "Lyapunov matrix")?;
    let n = a.nrows();
    if q.shape() != (n, n) {
        return Err(Error::Dimension("Lyapunov right-hand side".into()));
    }
    let id = Mat::identity(n, n);
    let op = id.kronecker(a) + a.kronecker(&id);
    let x = op
        .lu()
        .solve(&DVector::from_column_slice(q.as_slice()))
        .ok_or_else(|| Error::Numerical("Lyapunov operator is singular".into()))?;
    Ok(Mat::from_column_slice(n, n, x.as_slice()))
}

/// `A P + P A^T + I - P C^T C P`.
pub fn care_residual(c: &Mat, a: &Mat, p: &Mat) -> Mat {
    let n = a.nrows();
    let ctc = c.transpose() * c;
    a * p + p * a.transpose() + Mat::identity(n, n) - p * ctc * p
}

/// Stabilizing solution of `A P + P A^T + I - P C^T C P = 0`.
///
/// The solution is read off the stable invariant subspace `[V1; V2]` of the
/// Hamiltonian `[[A^T, -C^T C], [-I, -A]]` as `P = V2 V1^{-1}`, then polished
/// with Newton (Kleinman) steps. Fails when `(C, A)` is not detectable.
pub fn solve_care(c: &Mat, a: &Mat) -> Result<Mat> {
    check_square(a, "CARE state matrix")?;
    check_finite(a, "CARE state matrix")?;
    check_finite(c, "CARE output matrix")?;
    let n = a.nrows();
    if c.ncols() != n {
        return Err(Error::Dimension(format!(
            "C has {} columns but A is {n}x{n}",
            c.ncols()
        )));
    }
    let ctc = c.transpose() * c;
    let mut h = Mat::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&a.transpose());
    h.view_mut((0, n), (n, n)).copy_from(&(-&ctc));
    h.view_mut((n, 0), (n, n)).copy_from(&(-Mat::identity(n, n)));
    h.view_mut((n, n), (n, n)).copy_from(&(-a));

    let no_solution = |why: &str| {
        Error::NoStabilizingSolution(format!("{why}; is (C, A) detectable?"))
    };

    let sign = matrix_sign(&h).map_err(|_| no_solution("Hamiltonian has imaginary-axis eigenvalues"))?;
    let stable_proj = (Mat::identity(2 * n, 2 * n) - sign) * 0.5;
    let (basis, _, sv) = range_split(&stable_proj, n)?;
    if sv[n - 1] < 0.5 || sv.get(n).cloned().unwrap_or(0.0) > 1e-6 * sv[0].max(1.0) {
        return Err(no_solution("stable subspace has the wrong dimension"));
    }
    let v1 = basis.rows(0, n).into_owned();
    let v2 = basis.rows(n, n).into_owned();
    let (v1_rank, _) = super::numerical_rank(&v1);
    if v1_rank < n {
        return Err(no_solution("stable subspace is not a graph over the first block"));
    }
    // P V1 = V2  <=>  V1^T P^T = V2^T
    let pt = v1
        .transpose()
        .lu()
        .solve(&v2.transpose())
        .ok_or_else(|| no_solution("V1 is singular"))?;
    let mut p = pt.transpose();
    p = (&p + p.transpose()) * 0.5;

    let mut res = norm1(&care_residual(c, a, &p));
    for _ in 0..8 {
        if res <= 1e-13 * (1.0 + norm1(&p)) {
            break;
        }
        let closed = a - &p * &ctc;
        let rhs = -(Mat::identity(n, n) + &p * &ctc * &p);
        let next = match solve_lyapunov(&closed, &rhs) {
            Ok(x) => (&x + x.transpose()) * 0.5,
            Err(_) => break,
        };
        let next_res = norm1(&care_residual(c, a, &next));
        if !(next_res < res) {
            break;
        }
        p = next;
        res = next_res;
    }

    let pn = norm1(&p);
    let scale = 1.0 + 2.0 * pn * norm1(a) + pn * pn * norm1(&ctc);
    if !(res <= 1e-8 * scale) {
        return Err(Error::Numerical(format!(
            "Riccati residual {res:e} is large relative to {scale:e}"
        )));
    }
    if p.clone().cholesky().is_none() {
        return Err(no_solution("Riccati solution is not positive definite"));
    }
    if eig(&(a - &p * &ctc))?.abscissa >= 0.0 {
        return Err(no_solution("A - P C^T C is not Hurwitz"));
    }
    Ok(p)
}
