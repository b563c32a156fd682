//! Random generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use syncgain::{Interconnection, Mat};

pub use rand::SeedableRng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut Rng8) -> f64 {
    // Box-Muller; keeps the generators free of extra distribution crates
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn gauss_mat(rng: &mut Rng8, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| gauss(rng))
}

pub fn weight(rng: &mut Rng8, wmax: f64) -> f64 {
    // uniform on (0, wmax]
    wmax * (1.0 - rng.gen::<f64>())
}

/// Random connected digraph: a random spanning tree in which every node
/// listens to one earlier node, plus extra edges with probability `extra`.
pub fn connected_graph(rng: &mut Rng8, p: usize, wmax: f64, extra: f64) -> Interconnection {
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..p {
        let j = rng.gen_range(0..k);
        edges.push((order[k] + 1, order[j] + 1, weight(rng, wmax)));
    }
    for i in 0..p {
        for j in 0..p {
            if i != j && rng.gen::<f64>() < extra {
                edges.push((i + 1, j + 1, weight(rng, wmax)));
            }
        }
    }
    let g = Interconnection::from_weighted_edges(p, &edges).unwrap();
    assert!(g.is_connected());
    g
}

pub fn rotation(w: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[0.0, w, -w, 0.0])
}

/// Block-diagonal matrix from square blocks.
pub fn block_diag(blocks: &[Mat]) -> Mat {
    let n = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = Mat::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        m.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    m
}

/// Well-conditioned random similarity: `I + 0.4 G` with `cond <= 10`.
pub fn similarity(rng: &mut Rng8, n: usize) -> (Mat, Mat) {
    loop {
        let t = Mat::identity(n, n) + gauss_mat(rng, n, n) * 0.4;
        let sv = t.clone().svd(false, false).singular_values;
        if sv.min() > 0.0 && sv.max() / sv.min() <= 10.0 {
            let inv = t.clone().try_inverse().unwrap();
            return (t, inv);
        }
    }
}

/// Frequencies in `[0.2, 3]` pairwise more than `gap` apart.
pub fn separated_frequencies(rng: &mut Rng8, k: usize, gap: f64) -> Vec<f64> {
    loop {
        let mut w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..3.0)).collect();
        w.sort_by(f64::total_cmp);
        if w.windows(2).all(|x| x[1] - x[0] > gap) {
            return w;
        }
    }
}

/// Neutrally stable `F` of size `n` with every eigenvalue on the imaginary
/// axis: at most one zero eigenvalue plus rotation blocks, distinct
/// eigenvalues more than `gap` apart, hidden behind a random similarity.
pub fn neutral_center(rng: &mut Rng8, n: usize, gap: f64) -> Mat {
    let k = n / 2;
    let mut blocks: Vec<Mat> = separated_frequencies(rng, k, gap)
        .into_iter()
        .map(rotation)
        .collect();
    if n % 2 == 1 {
        blocks.push(Mat::zeros(1, 1));
    }
    let d = block_diag(&blocks);
    let (t, ti) = similarity(rng, n);
    t * d * ti
}

/// Hurwitz matrix with eigenvalues of real part in `[-2, -0.3]`.
pub fn hurwitz(rng: &mut Rng8, n: usize) -> Mat {
    let mut blocks = Vec::new();
    let mut left = n;
    while left > 0 {
        let re = -rng.gen_range(0.3..2.0);
        if left >= 2 && rng.gen_bool(0.5) {
            blocks.push(rotation(rng.gen_range(0.2..2.0)) + Mat::identity(2, 2) * re);
            left -= 2;
        } else {
            blocks.push(Mat::from_element(1, 1, re));
            left -= 1;
        }
    }
    let (t, ti) = similarity(rng, n);
    t * block_diag(&blocks) * ti
}

/// Neutrally stable `A` of size `n` whose center part has dimension `n1`
/// and stable part `n - n1`.
pub fn neutral_with_stable(rng: &mut Rng8, n: usize, n1: usize) -> Mat {
    let mut blocks = Vec::new();
    if n1 > 0 {
        blocks.push(neutral_center(rng, n1, 0.1));
    }
    if n > n1 {
        blocks.push(hurwitz(rng, n - n1));
    }
    let (t, ti) = similarity(rng, n);
    t * block_diag(&blocks) * ti
}

/// Independent oracle for the averaging limit of `e^{F^T s} e^{F s}`: a
/// `sin^4` windowed average over `[0, horizon]`, composite 8-point
/// Gauss-Legendre on panels of width `h`, and exponentials from a Taylor
/// series (no Padé, no eigen-decomposition).
pub fn gram_oracle(f: &Mat, horizon: f64, h: f64) -> Mat {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let n = f.nrows();
    let mut nodes = Vec::new();
    for i in 0..4 {
        nodes.push((0.5 * (1.0 - X[i]), 0.5 * W[i]));
        nodes.push((0.5 * (1.0 + X[i]), 0.5 * W[i]));
    }
    let node_exp: Vec<Mat> = nodes.iter().map(|(c, _)| taylor_expm(f, c * h)).collect();
    let step = taylor_expm(f, h);
    let panels = (horizon / h).round() as usize;
    let mut e = Mat::identity(n, n);
    let mut acc = Mat::zeros(n, n);
    let mut wsum = 0.0;
    for k in 0..panels {
        let t0 = k as f64 * h;
        for ((c, w), en) in nodes.iter().zip(node_exp.iter()) {
            let t = t0 + c * h;
            let win = (std::f64::consts::PI * t / horizon).sin().powi(4) * w;
            let x = en * &e;
            acc += x.transpose() * x * win;
            wsum += win;
        }
        e = &step * e;
    }
    acc / wsum
}

/// Plain Taylor series of `e^{F t}` with enough terms for `||F t|| <= 4`.
pub fn taylor_expm(f: &Mat, t: f64) -> Mat {
    let n = f.nrows();
    let ft = f * t;
    let mut term = Mat::identity(n, n);
    let mut sum = term.clone();
    for k in 1..60 {
        term = &term * &ft / k as f64;
        sum += &term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

pub fn random_x0(rng: &mut Rng8, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.gen_range(-1.0..=1.0))
}

/// `[C; C A; ...; C A^{n-1}]`.
pub fn observability_matrix(c: &Mat, a: &Mat) -> Mat {
    let n = a.nrows();
    let m = c.nrows();
    let mut o = Mat::zeros(m * n, n);
    let mut blk = c.clone();
    for k in 0..n {
        o.view_mut((k * m, 0), (m, n)).copy_from(&blk);
        blk = &blk * a;
    }
    o
}
