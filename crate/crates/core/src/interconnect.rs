//! Interconnection matrices `Gamma` and their directed graphs.
//!
//! An interconnection has nonnegative off-diagonal weights and each diagonal
//! entry equal to the negated sum of the off-diagonals in its row, so
//! `Gamma * 1 = 0`. Edge `(i, j)` is present iff `gamma_ij > 0`.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{self, norm1, Mat};

/// A validated `p x p` interconnection matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Interconnection {
    gamma: Mat,
}

/// Directed graph of an interconnection; node indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphView {
    pub nodes: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSpectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Real part of a nonzero eigenvalue closest to the imaginary axis.
    /// `None` for a single node, which has no nonzero eigenvalue.
    pub lambda2_re: Option<f64>,
    /// Left null vector normalized so that its entries sum to one.
    pub r: Vec<f64>,
    /// Magnitude below which an eigenvalue was treated as zero.
    pub eps_zero: f64,
}

impl GammaSpectrum {
    pub fn nonzero_eigenvalues(&self) -> impl Iterator<Item = &Complex64> {
        self.eigenvalues.iter().filter(move |z| z.norm() > self.eps_zero)
    }
}

/// Membership in the nested sets `G>=delta ⊂ G>0 ⊂ G>=0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub in_g_ge0: bool,
    pub in_g_gt0: bool,
    pub in_g_ge_delta: bool,
}

/// JSON graph description: either 1-based weighted edges or a full matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphInput {
    Edges {
        p: usize,
        edges: Vec<(usize, usize, f64)>,
    },
    Matrix {
        gamma: Vec<Vec<f64>>,
    },
}

impl GraphInput {
    pub fn build(&self) -> Result<Interconnection> {
        match self {
            GraphInput::Edges { p, edges } => Interconnection::from_weighted_edges(*p, edges),
            GraphInput::Matrix { gamma } => Interconnection::from_matrix(&linops::from_rows(gamma)?),
        }
    }
}

/// Default tolerance for "nonzero" Gamma eigenvalues: `1e-9 (1 + ||Gamma||_1)`.
pub fn default_eps_zero(gamma: &Mat) -> f64 {
    1e-9 * (1.0 + norm1(gamma))
}

impl Interconnection {
    /// Builds `Gamma` from 1-based weighted edges `(i, j, w)`, meaning node
    /// `i` listens to node `j` with weight `w`. Repeated pairs are summed.
    pub fn from_weighted_edges(p: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if p == 0 {
            return Err(Error::Validation("an interconnection needs at least one node".into()));
        }
        let mut gamma = Mat::zeros(p, p);
        for &(i, j, w) in edges {
            if i == 0 || j == 0 || i > p || j > p {
                return Err(Error::Validation(format!(
                    "edge ({i}, {j}) out of range 1..={p}"
                )));
            }
            if i == j {
                return Err(Error::Validation(format!("self-loop at node {i}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Validation(format!(
                    "edge ({i}, {j}) has non-positive or non-finite weight {w}"
                )));
            }
            gamma[(i - 1, j - 1)] += w;
        }
        Ok(Self::with_off_diagonals(gamma))
    }

    /// Validates a full matrix. Off-diagonals must be nonnegative and each
    /// row must sum to zero (relative tolerance 1e-12); the stored diagonal
    /// is recomputed from the off-diagonals.
    pub fn from_matrix(gamma: &Mat) -> Result<Self> {
        linops::check_square(gamma, "interconnection")?;
        linops::check_finite(gamma, "interconnection")?;
        let p = gamma.nrows();
        for i in 0..p {
            let mut off = 0.0;
            for j in 0..p {
                if i != j {
                    let g = gamma[(i, j)];
                    if g < 0.0 {
                        return Err(Error::Validation(format!(
                            "negative off-diagonal gamma[{}][{}] = {g}",
                            i + 1,
                            j + 1
                        )));
                    }
                    off += g;
                }
            }
            let diag = gamma[(i, i)];
            if (diag + off).abs() > 1e-12 * (1.0 + off) {
                return Err(Error::Validation(format!(
                    "row {} does not sum to zero (diagonal {diag}, off-diagonal sum {off})",
                    i + 1
                )));
            }
        }
        Ok(Self::with_off_diagonals(gamma.clone()))
    }

    /// The directed ring with `-1` on the diagonal, `+1` on the
    /// superdiagonal and `+1` in the bottom-left corner.
    pub fn ring(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::Validation(format!("ring needs p >= 2, got {p}")));
        }
        let edges: Vec<_> = (1..=p).map(|i| (i, i % p + 1, 1.0)).collect();
        Self::from_weighted_edges(p, &edges)
    }

    fn with_off_diagonals(mut gamma: Mat) -> Self {
        let p = gamma.nrows();
        for i in 0..p {
            gamma[(i, i)] = 0.0;
            let s: f64 = gamma.row(i).iter().sum();
            gamma[(i, i)] = -s;
        }
        Self { gamma }
    }

    pub fn p(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn gamma(&self) -> &Mat {
        &self.gamma
    }

    /// `r * Gamma` for `r > 0`.
    pub fn scaled(&self, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Validation(format!("scale must be positive, got {r}")));
        }
        Ok(Self::with_off_diagonals(&self.gamma * r))
    }

    pub fn graph(&self) -> GraphView {
        let p = self.p();
        let mut edges = Vec::new();
        for i in 0..p {
            for j in 0..p {
                if i != j && self.gamma[(i, j)] > 0.0 {
                    edges.push((i, j, self.gamma[(i, j)]));
                }
            }
        }
        GraphView { nodes: p, edges }
    }

    /// Nodes to which every other node has a directed path.
    pub fn roots(&self) -> Vec<usize> {
        let p = self.p();
        (0..p)
            .filter(|&k| self.reaching(k).len() == p)
            .collect()
    }

    /// Set of nodes with a directed path to `target` (including itself).
    fn reaching(&self, target: usize) -> BTreeSet<usize> {
        let p = self.p();
        let mut seen = BTreeSet::from([target]);
        let mut stack = vec![target];
        while let Some(j) = stack.pop() {
            for i in 0..p {
                if i != j && self.gamma[(i, j)] > 0.0 && seen.insert(i) {
                    stack.push(i);
                }
            }
        }
        seen
    }

    /// True iff some node is reachable from every other node.
    pub fn is_connected(&self) -> bool {
        let p = self.p();
        (0..p).any(|k| self.reaching(k).len() == p)
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        Ok(linops::eig(&self.gamma)?.eigenvalues)
    }

    /// Spectrum, `Re(lambda_2)` and the normalized left null vector `r`.
    ///
    /// Errors with [`Error::DegenerateSpectrum`] unless zero is a simple
    /// eigenvalue, i.e. unless the graph is connected.
    pub fn spectrum(&self) -> Result<GammaSpectrum> {
        self.spectrum_with_tol(default_eps_zero(&self.gamma))
    }

    pub fn spectrum_with_tol(&self, eps_zero: f64) -> Result<GammaSpectrum> {
        let p = self.p();
        let eigenvalues = self.eigenvalues()?;
        let zeros = eigenvalues.iter().filter(|z| z.norm() <= eps_zero).count();
        if zeros != 1 {
            return Err(Error::DegenerateSpectrum(format!(
                "zero eigenvalue has multiplicity {zeros} (graph is not connected)"
            )));
        }
        let lambda2_re = eigenvalues
            .iter()
            .filter(|z| z.norm() > eps_zero)
            .map(|z| z.re)
            .fold(None, |acc: Option<f64>, re| Some(acc.map_or(re, |a| a.max(re))));

        // [Gamma^T; 1^T] r = [0; 1]
        let mut sys = DMatrix::zeros(p + 1, p);
        sys.view_mut((0, 0), (p, p)).copy_from(&self.gamma.transpose());
        sys.row_mut(p).fill(1.0);
        let mut rhs = DVector::zeros(p + 1);
        rhs[p] = 1.0;
        let dec = linops::svd(&sys)?;
        let cutoff = dec.s.first().copied().unwrap_or(0.0) * 1e-13;
        let mut r = DVector::zeros(p);
        for (k, &sk) in dec.s.iter().enumerate().filter(|(_, &sk)| sk > cutoff) {
            r += dec.v.column(k) * (dec.u.column(k).dot(&rhs) / sk);
        }
        let sum: f64 = r.iter().sum();
        let r: Vec<f64> = r.iter().map(|v| v / sum).collect();
        Ok(GammaSpectrum {
            eigenvalues,
            lambda2_re,
            r,
            eps_zero,
        })
    }

    pub fn membership(&self, delta: f64) -> Result<Membership> {
        if !(delta >= 0.0) {
            return Err(Error::Validation(format!("delta must be >= 0, got {delta}")));
        }
        let connected = self.is_connected();
        let in_g_ge_delta = connected
            && match self.spectrum()?.lambda2_re {
                Some(re) => re.abs() >= delta,
                None => false,
            };
        Ok(Membership {
            in_g_ge0: true,
            in_g_gt0: connected,
            in_g_ge_delta,
        })
    }
}

impl Serialize for Interconnection {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        GraphInput::Matrix {
            gamma: linops::to_rows(&self.gamma),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Interconnection {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let input = GraphInput::deserialize(de)?;
        input.build().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fig1_g1() -> Interconnection {
        Interconnection::from_weighted_edges(3, &[(1, 2, 1.0), (2, 3, 1.0), (3, 2, 1.0)]).unwrap()
    }

    fn fig1_g2() -> Interconnection {
        Interconnection::from_weighted_edges(3, &[(2, 1, 1.0), (2, 3, 1.0)]).unwrap()
    }

    #[test]
    fn fig1_graphs() {
        let g1 = fig1_g1();
        assert_eq!(
            g1.gamma(),
            &Mat::from_row_slice(3, 3, &[-1.0, 1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 1.0, -1.0])
        );
        assert!(g1.is_connected());
        assert_eq!(g1.roots(), vec![1, 2]);
        assert!(!fig1_g2().is_connected());
    }

    #[test]
    fn empty_edges_give_zero() {
        let g = Interconnection::from_weighted_edges(2, &[]).unwrap();
        assert_eq!(g.gamma(), &Mat::zeros(2, 2));
        assert!(!g.is_connected());
        let m = g.membership(1.0).unwrap();
        assert_eq!((m.in_g_ge0, m.in_g_gt0, m.in_g_ge_delta), (true, false, false));
        assert!(matches!(g.spectrum(), Err(Error::DegenerateSpectrum(_))));
    }

    #[test]
    fn one_way_pair() {
        let g = Interconnection::from_weighted_edges(2, &[(1, 2, 0.1)]).unwrap();
        assert_eq!(g.gamma(), &Mat::from_row_slice(2, 2, &[-0.1, 0.1, 0.0, 0.0]));
        let s = g.spectrum().unwrap();
        assert!((s.lambda2_re.unwrap() + 0.1).abs() < 1e-14);
        assert!(s.r[0].abs() < 1e-14 && (s.r[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn edge_validation() {
        assert!(Interconnection::from_weighted_edges(2, &[(1, 1, 1.0)]).is_err());
        assert!(Interconnection::from_weighted_edges(2, &[(1, 3, 1.0)]).is_err());
        assert!(Interconnection::from_weighted_edges(2, &[(0, 1, 1.0)]).is_err());
        assert!(Interconnection::from_weighted_edges(2, &[(1, 2, -1.0)]).is_err());
        assert!(Interconnection::from_weighted_edges(2, &[(1, 2, 0.0)]).is_err());
    }

    #[test]
    fn multi_edges_sum() {
        let g = Interconnection::from_weighted_edges(2, &[(1, 2, 0.25), (1, 2, 0.5)]).unwrap();
        assert_eq!(g.gamma()[(0, 1)], 0.75);
        assert_eq!(g.gamma()[(0, 0)], -0.75);
    }

    #[test]
    fn matrix_validation() {
        let ok = Mat::from_row_slice(2, 2, &[-1.0, 1.0, 2.0, -2.0]);
        assert!(Interconnection::from_matrix(&ok).is_ok());
        let neg = Mat::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 0.0]);
        assert!(Interconnection::from_matrix(&neg).is_err());
        let unbalanced = Mat::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, 0.0]);
        assert!(Interconnection::from_matrix(&unbalanced).is_err());
    }

    #[test]
    fn ring_two_and_three() {
        assert_eq!(
            Interconnection::ring(2).unwrap().gamma(),
            &Mat::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0])
        );
        assert!(Interconnection::ring(1).is_err());
        let s = Interconnection::ring(3).unwrap().spectrum().unwrap();
        assert!((s.lambda2_re.unwrap() + 1.5).abs() < 1e-12);
        for r in &s.r {
            assert!((r - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_eigenvector() {
        let p = 7;
        let g = Interconnection::ring(p).unwrap();
        let lam = Complex64::from_polar(1.0, 2.0 * PI / p as f64) - 1.0;
        let v: Vec<Complex64> = (1..=p).map(|k| (lam + 1.0).powi(k as i32)).collect();
        for i in 0..p {
            let gv: Complex64 = (0..p).map(|j| v[j] * g.gamma()[(i, j)]).sum();
            assert!((gv - lam * v[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn symmetric_pair_spectrum() {
        let g = Interconnection::ring(2).unwrap();
        let s = g.spectrum().unwrap();
        assert!((s.eigenvalues[1].re + 2.0).abs() < 1e-12);
        assert!((s.r[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn ring_membership() {
        let g = Interconnection::ring(3).unwrap();
        let m1 = g.membership(1.0).unwrap();
        assert!(m1.in_g_ge0 && m1.in_g_gt0 && m1.in_g_ge_delta);
        let m2 = g.membership(2.0).unwrap();
        assert!(m2.in_g_ge0 && m2.in_g_gt0 && !m2.in_g_ge_delta);
    }

    #[test]
    fn json_inputs() {
        let e: Interconnection =
            serde_json::from_str(r#"{"p": 2, "edges": [[1, 2, 0.5]]}"#).unwrap();
        assert_eq!(e.gamma()[(0, 0)], -0.5);
        let m: Interconnection =
            serde_json::from_str(r#"{"gamma": [[-1, 1], [1, -1]]}"#).unwrap();
        assert_eq!(m, Interconnection::ring(2).unwrap());
        assert!(serde_json::from_str::<Interconnection>(r#"{"gamma": [[1, -1], [0, 0]]}"#).is_err());
    }
}
