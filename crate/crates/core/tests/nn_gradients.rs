mod common;

use common::{gradient_error, gru, oracle_forward, rng, smooth_instance};
use imdd_eq::nn::{Architecture, GruReadout, GruVariant, NoTally};

const INSTANCES: usize = 25;

fn check(label: &str, arch: Option<Architecture>, kind: usize, seed: u64) {
    let mut r = rng(seed);
    for i in 0..INSTANCES {
        let (net, x) = smooth_instance(arch, kind, &mut r);
        let err = gradient_error(&net, &x);
        assert!(err < 1e-4, "{label} instance {i}: relative error {err:e}");
    }
}

#[test]
fn fnn_gradients() {
    check("fnn", None, 0, 11);
}

#[test]
fn gru_verbatim_final_state_gradients() {
    check("gru", Some(gru(GruVariant::Verbatim, GruReadout::FinalState)), 1, 12);
}

#[test]
fn gru_standard_final_state_gradients() {
    check("gru+", Some(gru(GruVariant::Standard, GruReadout::FinalState)), 1, 13);
}

#[test]
fn gru_per_step_mean_gradients() {
    check("gru mean", Some(gru(GruVariant::Verbatim, GruReadout::PerStepMean)), 1, 14);
    check("gru+ mean", Some(gru(GruVariant::Standard, GruReadout::PerStepMean)), 1, 15);
}

#[test]
fn cnn_gradients() {
    check("cnn", None, 2, 16);
}

#[test]
fn forward_matches_nested_loops() {
    let mut r = rng(17);
    let archs = [
        None,
        Some(gru(GruVariant::Verbatim, GruReadout::FinalState)),
        Some(gru(GruVariant::Standard, GruReadout::FinalState)),
        Some(gru(GruVariant::Verbatim, GruReadout::PerStepMean)),
        Some(gru(GruVariant::Standard, GruReadout::PerStepMean)),
        None,
    ];
    for (kind, arch) in archs.into_iter().enumerate() {
        for _ in 0..50 {
            let (net, x) = common::random_instance(arch, kind.min(2), &mut r);
            let got = net.forward(&x, &mut NoTally).unwrap();
            let want = oracle_forward(&net, &x);
            assert!((got - want).abs() < 1e-12, "{:?}: {got} vs {want}", net.arch());
        }
    }
}
