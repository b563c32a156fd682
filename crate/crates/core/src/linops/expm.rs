use super::{check_finite, check_square, norm1, Mat};
use crate::error::{Error, Result};

// Degree-13 diagonal Padé coefficients.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which the degree-13 approximant is accurate to unit
// roundoff without scaling.
const THETA13: f64 = 5.371920351148152;

/// `e^{M t}` by scaling and squaring with a degree-13 Padé approximant.
///
/// `t = 0` returns the identity exactly.
pub fn expm(m: &Mat, t: f64) -> Result<Mat> {
    check_square(m, "expm input")?;
    check_finite(m, "expm input")?;
    if !t.is_finite() {
        return Err(Error::Validation("expm time must be finite".into()));
    }
    let n = m.nrows();
    if t == 0.0 {
        return Ok(Mat::identity(n, n));
    }
    let a = m * t;
    let norm = norm1(&a);
    if norm == 0.0 {
        return Ok(Mat::identity(n, n));
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    if s > 1000 {
        return Err(Error::Numerical(format!(
            "expm argument norm {norm:e} is too large"
        )));
    }
    let a = a / 2f64.powi(s);

    let id = Mat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];

    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or_else(|| Error::Numerical("Padé denominator is singular".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().all(|x| x.is_finite()) {
        Ok(r)
    } else {
        Err(Error::Numerical("matrix exponential overflowed".into()))
    }
}
