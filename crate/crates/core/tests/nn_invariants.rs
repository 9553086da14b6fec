mod common;

use common::{gru, random_instance, rng};
use imdd_eq::nn::{Architecture, GruReadout, GruVariant, Network, NoTally};
use proptest::prelude::*;

fn instance(kind: usize, seed: u64) -> (Network, Vec<f64>) {
    let mut r = rng(seed);
    match kind {
        0 => random_instance(None, 0, &mut r),
        1 => random_instance(Some(gru(GruVariant::Verbatim, GruReadout::FinalState)), 1, &mut r),
        2 => random_instance(Some(gru(GruVariant::Standard, GruReadout::PerStepMean)), 1, &mut r),
        _ => random_instance(None, 2, &mut r),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parameter_count_closed_forms(kind in 0usize..4, seed in 0u64..1000) {
        let (net, _) = instance(kind, seed);
        let (m, n, h) = (net.steps(), net.features(), net.n_hidden());
        let expected = match net.arch() {
            Architecture::Fnn => h * m * n + 2 * h,
            Architecture::Gru { .. } => 3 * (h * n + h * h + h) + h + 1,
            Architecture::Cnn { n_w } => h * n_w * n + h + h * (m - n_w + 1) + 1,
        };
        prop_assert_eq!(net.n_params(), expected);
        let summed: usize = net.tensors().iter().map(|t| t.rows * t.cols).sum();
        prop_assert_eq!(summed, expected);
    }

    /// Reordering the slices of the input together with the matching weight
    /// columns leaves the output unchanged.
    #[test]
    fn slice_permutation_is_neutral(kind in 0usize..4, seed in 0u64..1000, rot in 1usize..4) {
        let (net, x) = instance(kind, seed);
        let n = net.features();
        let perm: Vec<usize> = (0..n).map(|f| (f + rot) % n).collect();
        let xp: Vec<f64> = (0..x.len()).map(|i| x[i - i % n + perm[i % n]]).collect();
        let mut permuted = net.clone();
        let tensors = net.tensors().to_vec();
        for t in tensors.iter().filter(|t| ["W_h", "W_r", "W_s", "w"].contains(&t.name)) {
            for r in 0..t.rows {
                for c in 0..t.cols {
                    let src = c - c % n + perm[c % n];
                    permuted.params_mut()[t.offset + r * t.cols + c] = net.params()[t.offset + r * t.cols + src];
                }
            }
        }
        let a = net.forward(&x, &mut NoTally).unwrap();
        let b = permuted.forward(&xp, &mut NoTally).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
    }
}
