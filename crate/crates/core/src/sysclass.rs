//! Classification of a pair `(C, A)` into the sets
//!
//! * `A_H`: `A` Hurwitz
//! * `A_N`: `A` neutrally stable
//! * `A_J`: `A` has no eigenvalue with positive real part
//! * `O_F`: `C` has full column rank
//! * `O_P`: `(C, A)` detectable
//!
//! All decisions are made with explicit tolerances that are reported back in
//! the evidence. Eigenvalues close to the tolerance boundary make the
//! classification fail loudly rather than guess.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{self, norm1, numerical_rank, real_embedding, Mat};

/// The pair `(C, A)`: `C` is `m x n`, `A` is `n x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPair {
    c: Mat,
    a: Mat,
}

/// JSON form `{"A": [[...]], "C": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairInput {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
}

impl SystemPair {
    pub fn new(c: Mat, a: Mat) -> Result<Self> {
        linops::check_square(&a, "A")?;
        linops::check_finite(&a, "A")?;
        linops::check_finite(&c, "C")?;
        if c.ncols() != a.ncols() {
            return Err(Error::Dimension(format!(
                "C has {} columns but A is {}x{}",
                c.ncols(),
                a.nrows(),
                a.ncols()
            )));
        }
        if c.nrows() == 0 {
            return Err(Error::Dimension("C has no rows".into()));
        }
        Ok(Self { c, a })
    }

    pub fn c(&self) -> &Mat {
        &self.c
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    /// State dimension `n`.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Output dimension `m`.
    pub fn m(&self) -> usize {
        self.c.nrows()
    }

    /// `(B^T, A^T)` for an input pair `(A, B)`.
    pub fn dual_of(a: &Mat, b: &Mat) -> Result<Self> {
        Self::new(b.transpose(), a.transpose())
    }

    pub fn to_input(&self) -> PairInput {
        PairInput {
            a: linops::to_rows(&self.a),
            c: linops::to_rows(&self.c),
        }
    }
}

impl PairInput {
    pub fn build(&self) -> Result<SystemPair> {
        SystemPair::new(linops::from_rows(&self.c)?, linops::from_rows(&self.a)?)
    }
}

impl Serialize for SystemPair {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_input().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SystemPair {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        PairInput::deserialize(de)?
            .build()
            .map_err(serde::de::Error::custom)
    }
}

/// A group of numerically coincident eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    pub center: Complex64,
    pub algebraic: usize,
    /// Number of small singular values of `A - center I`.
    pub geometric: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbhRecord {
    pub lambda: Complex64,
    /// Complex rank of `[A - lambda I; C]`.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps_eig: f64,
    pub cluster_tol: f64,
    pub rank_cutoff_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub eigenvalues: Vec<Complex64>,
    pub clusters: Vec<EigenCluster>,
    pub pbh: Vec<PbhRecord>,
    pub rank_c: usize,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub in_ah: bool,
    pub in_an: bool,
    pub in_aj: bool,
    pub in_of: bool,
    pub in_op: bool,
    pub evidence: Evidence,
}

impl ClassReport {
    /// Short names of the sets the pair belongs to, e.g. `["A_J", "O_P"]`.
    pub fn set_names(&self) -> Vec<&'static str> {
        let flags = [
            (self.in_ah, "A_H"),
            (self.in_an, "A_N"),
            (self.in_aj, "A_J"),
            (self.in_of, "O_F"),
            (self.in_op, "O_P"),
        ];
        flags.iter().filter(|(f, _)| *f).map(|(_, n)| *n).collect()
    }
}

/// Eigenvalues within this distance of each other are merged before
/// multiplicities are counted. A perturbed Jordan block of size `k` spreads
/// its eigenvalue by roughly `eps^(1/k)`, so the radius is deliberately
/// wider than the axis tolerance.
pub fn cluster_tolerance(a: &Mat, eps_eig: f64) -> f64 {
    eps_eig.max(1e-5 * (1.0 + norm1(a)))
}

/// Single-linkage clustering of eigenvalues.
pub fn cluster_eigenvalues(a: &Mat, eigenvalues: &[Complex64], tol: f64) -> Result<Vec<EigenCluster>> {
    let n = eigenvalues.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (eigenvalues[i] - eigenvalues[j]).norm() <= tol {
                let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                if ri != rj {
                    label[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => groups[k].push(eigenvalues[i]),
            None => {
                roots.push(r);
                groups.push(vec![eigenvalues[i]]);
            }
        }
    }
    let norm_a = norm1(a);
    groups
        .into_iter()
        .map(|g| {
            let k = g.len();
            let center = g.iter().sum::<Complex64>() / k as f64;
            let radius = g.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
            let sv = shifted_singular_values(a, center);
            // Complex singular values appear twice in the real embedding.
            let threshold = ((a.nrows() as f64) * (1.0 + norm_a) * 1e-12)
                .max(1e2 * radius * (1.0 + norm_a));
            let small = sv.iter().filter(|&&s| s <= threshold).count() / 2;
            Ok(EigenCluster {
                center,
                algebraic: k,
                geometric: small,
                radius,
            })
        })
        .collect()
}

fn shifted_singular_values(a: &Mat, lambda: Complex64) -> Vec<f64> {
    let n = a.nrows();
    let re = a - Mat::identity(n, n) * lambda.re;
    let im = Mat::identity(n, n) * (-lambda.im);
    linops::singular_values(&real_embedding(&re, &im))
}

/// Complex rank of `[A - lambda I; C]` via the real embedding.
fn pbh_rank(a: &Mat, c: &Mat, lambda: Complex64) -> usize {
    let (n, m) = (a.nrows(), c.nrows());
    let mut re = Mat::zeros(n + m, n);
    re.view_mut((0, 0), (n, n))
        .copy_from(&(a - Mat::identity(n, n) * lambda.re));
    re.view_mut((n, 0), (m, n)).copy_from(c);
    let mut im = Mat::zeros(n + m, n);
    im.view_mut((0, 0), (n, n))
        .copy_from(&(Mat::identity(n, n) * (-lambda.im)));
    let (r, _) = numerical_rank(&real_embedding(&re, &im));
    r / 2
}

fn check_boundary(clusters: &[EigenCluster], eps_eig: f64) -> Result<()> {
    if let Some(c) = clusters
        .iter()
        .find(|c| c.center.re.abs() > eps_eig && c.center.re.abs() <= 100.0 * eps_eig)
    {
        return Err(Error::Indeterminate(format!(
            "eigenvalue {} is within 100x the axis tolerance {eps_eig:e}",
            c.center
        )));
    }
    Ok(())
}

/// PBH test: `rank [A - lambda I; C] = n` at every eigenvalue with
/// `Re(lambda) >= -tol`.
pub fn is_detectable(pair: &SystemPair, tol: f64) -> Result<bool> {
    let spec = linops::eig(pair.a())?;
    let clusters = cluster_eigenvalues(
        pair.a(),
        &spec.eigenvalues,
        cluster_tolerance(pair.a(), tol),
    )?;
    Ok(clusters
        .iter()
        .filter(|c| c.center.re >= -tol)
        .all(|c| pbh_rank(pair.a(), pair.c(), c.center) == pair.n()))
}

/// No eigenvalue with `Re > eps_eig`, and every eigenvalue with
/// `|Re| <= eps_eig` is semisimple.
pub fn is_neutrally_stable(a: &Mat, eps_eig: f64) -> Result<bool> {
    linops::check_square(a, "A")?;
    let spec = linops::eig(a)?;
    let clusters = cluster_eigenvalues(a, &spec.eigenvalues, cluster_tolerance(a, eps_eig))?;
    check_boundary(&clusters, eps_eig)?;
    Ok(neutral_from_clusters(&clusters, eps_eig))
}

fn neutral_from_clusters(clusters: &[EigenCluster], eps_eig: f64) -> bool {
    clusters.iter().all(|c| c.center.re <= eps_eig)
        && clusters
            .iter()
            .filter(|c| c.center.re.abs() <= eps_eig)
            .all(|c| c.geometric == c.algebraic)
}

pub fn classify(pair: &SystemPair, tol: f64) -> Result<ClassReport> {
    if !(tol > 0.0) {
        return Err(Error::Validation("classification tolerance must be positive".into()));
    }
    let a = pair.a();
    let spec = linops::eig(a)?;
    let cluster_tol = cluster_tolerance(a, tol);
    let clusters = cluster_eigenvalues(a, &spec.eigenvalues, cluster_tol)?;
    check_boundary(&clusters, tol)?;

    let in_aj = clusters.iter().all(|c| c.center.re <= tol);
    let in_ah = clusters.iter().all(|c| c.center.re < -tol);
    let in_an = neutral_from_clusters(&clusters, tol);

    let pbh: Vec<PbhRecord> = clusters
        .iter()
        .filter(|c| c.center.re >= -tol)
        .map(|c| PbhRecord {
            lambda: c.center,
            rank: pbh_rank(a, pair.c(), c.center),
        })
        .collect();
    let (rank_c, rank_cutoff_c) = numerical_rank(pair.c());
    let in_of = rank_c == pair.n();
    let in_op = in_of || pbh.iter().all(|r| r.rank == pair.n());

    Ok(ClassReport {
        in_ah,
        in_an,
        in_aj,
        in_of,
        in_op,
        evidence: Evidence {
            eigenvalues: spec.eigenvalues,
            clusters,
            pbh,
            rank_c,
            tolerances: Tolerances {
                eps_eig: tol,
                cluster_tol,
                rank_cutoff_c,
            },
        },
    })
}
