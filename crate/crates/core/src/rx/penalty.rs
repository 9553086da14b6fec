//! Required SNR at a BER threshold and the derived SNR penalty.

use serde::{Deserialize, Serialize};

/// Pre-FEC BER limit of the KP4 Reed-Solomon code.
pub const KP4_BER: f64 = 2.24e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "snr_db", rename_all = "snake_case")]
pub enum RequiredSnr {
    Reached(f64),
    /// Every point of the curve is above the threshold.
    NoReach,
    /// Already below the threshold at the lowest SNR of the grid.
    BelowGrid,
}

impl RequiredSnr {
    pub fn value(self) -> Option<f64> {
        match self {
            RequiredSnr::Reached(v) => Some(v),
            _ => None,
        }
    }
}

/// SNR where `log10(BER)` crosses `log10(threshold)`, linearly interpolated
/// between the grid points around the last downward crossing.
///
/// BER values must be positive; callers flooring zero-error points should do
/// so before calling.
pub fn required_snr(curve: &[(f64, f64)], threshold: f64) -> RequiredSnr {
    let mut pts: Vec<(f64, f64)> = curve.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let Some(last_above) = pts.iter().rposition(|&(_, b)| b > threshold) else {
        return match pts.first() {
            Some(&(s, b)) if b == threshold => RequiredSnr::Reached(s),
            _ => RequiredSnr::BelowGrid,
        };
    };
    let Some(&(s1, b1)) = pts.get(last_above + 1) else {
        return RequiredSnr::NoReach;
    };
    if b1 == threshold {
        return RequiredSnr::Reached(s1);
    }
    let (s0, b0) = pts[last_above];
    let t = (threshold.log10() - b0.log10()) / (b1.log10() - b0.log10());
    RequiredSnr::Reached(s0 + t * (s1 - s0))
}

/// Required SNR at the KP4 limit minus the reference requirement.
pub fn snr_penalty_at_kp4(curve: &[(f64, f64)], reference_required_snr: f64) -> RequiredSnr {
    match required_snr(curve, KP4_BER) {
        RequiredSnr::Reached(v) => RequiredSnr::Reached(v - reference_required_snr),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_grid_crossing() {
        let c = [(9.0, 1e-3), (10.0, KP4_BER), (11.0, 1e-5)];
        assert_eq!(required_snr(&c, KP4_BER), RequiredSnr::Reached(10.0));
        assert_eq!(snr_penalty_at_kp4(&c, 7.5), RequiredSnr::Reached(2.5));
    }

    #[test]
    fn hand_interpolation() {
        let c = [(9.0, 1e-3), (11.0, 5e-5)];
        let expected = 9.0 + 2.0 * (1e-3f64.log10() - 2.24e-4f64.log10()) / (1e-3f64.log10() - 5e-5f64.log10());
        let got = required_snr(&c, KP4_BER).value().unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 10.0).abs() < 0.05);
    }

    #[test]
    fn unreachable_and_unbracketed() {
        assert_eq!(required_snr(&[(5.0, 0.1), (10.0, 1e-3)], KP4_BER), RequiredSnr::NoReach);
        assert_eq!(required_snr(&[(5.0, 1e-6), (10.0, 1e-9)], KP4_BER), RequiredSnr::BelowGrid);
        assert_eq!(required_snr(&[], KP4_BER), RequiredSnr::BelowGrid);
        assert_eq!(snr_penalty_at_kp4(&[(1.0, 0.5)], 3.0), RequiredSnr::NoReach);
    }

    #[test]
    fn unsorted_input_is_sorted() {
        let c = [(11.0, 5e-5), (9.0, 1e-3)];
        assert!(required_snr(&c, KP4_BER).value().is_some());
    }

    proptest! {
        /// Curves that are exactly log-linear cross at a known SNR.
        #[test]
        fn synthetic_log_linear_curves(
            s_req in 3.0f64..25.0,
            slope in 0.2f64..2.0,
            offset in 0.0f64..1.0,
        ) {
            let ber = |s: f64| 10f64.powf(KP4_BER.log10() - slope * (s - s_req));
            let grid: Vec<(f64, f64)> = (0..40).map(|i| {
                let s = i as f64 + offset;
                (s, ber(s))
            }).collect();
            let got = required_snr(&grid, KP4_BER).value().unwrap();
            prop_assert!((got - s_req).abs() < 0.01);
        }
    }
}
