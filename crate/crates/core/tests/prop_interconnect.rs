mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use syncgain::linops::expm;
use syncgain::{Interconnection, Mat};

use common::*;

fn edges(seed: u64, p: usize) -> Vec<(usize, usize, f64)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for i in 1..=p {
        for j in 1..=p {
            if i != j && r.gen_bool(0.3) {
                out.push((i, j, weight(&mut r, 3.0)));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rows_sum_to_zero(seed in any::<u64>(), p in 1usize..=10) {
        let g = Interconnection::from_weighted_edges(p, &edges(seed, p)).unwrap();
        let gamma = g.gamma();
        for i in 0..p {
            let off: f64 = (0..p).filter(|&j| j != i).map(|j| gamma[(i, j)]).sum();
            prop_assert_eq!(gamma[(i, i)], -off);
            prop_assert!((0..p).filter(|&j| j != i).all(|j| gamma[(i, j)] >= 0.0));
        }
    }

    #[test]
    fn connected_spectrum_and_limit(seed in any::<u64>(), p in 2usize..=10) {
        let mut r = rng(seed);
        let g = connected_graph(&mut r, p, 2.0, 0.15);
        let s = g.spectrum().unwrap();
        let zeros = s.eigenvalues.iter().filter(|z| z.norm() <= s.eps_zero).count();
        prop_assert_eq!(zeros, 1);
        prop_assert!(s.nonzero_eigenvalues().all(|z| z.re < 0.0));
        let l2 = s.lambda2_re.unwrap();
        let e = expm(g.gamma(), 200.0 / l2.abs()).unwrap();
        let r_row = Mat::from_row_slice(1, p, &s.r);
        let limit = Mat::from_element(p, 1, 1.0) * r_row;
        prop_assert!((e - limit).norm() <= 1e-6, "limit gap");
        prop_assert!((s.r.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn membership_scales(seed in any::<u64>(), p in 2usize..=8, scale in 0.01f64..100.0, connect in any::<bool>()) {
        let g = if connect {
            connected_graph(&mut rng(seed), p, 2.0, 0.1)
        } else {
            Interconnection::from_weighted_edges(p, &edges(seed, p)).unwrap()
        };
        let base = g.membership(0.0).unwrap().in_g_gt0;
        prop_assert_eq!(g.scaled(scale).unwrap().membership(0.0).unwrap().in_g_gt0, base);
    }

    #[test]
    fn ring_spectrum(p in 2usize..=64) {
        let g = Interconnection::ring(p).unwrap();
        let mut got = g.eigenvalues().unwrap();
        for k in 0..p {
            let th = std::f64::consts::TAU * k as f64 / p as f64;
            let want = Complex64::new(th.cos() - 1.0, th.sin());
            let (idx, d) = got
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (*z - want).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            prop_assert!(d <= 1e-8, "k = {}: distance {}", k, d);
            got.swap_remove(idx);
        }
    }
}
