//! IRS state and effective-channel composition.
//!
//! The IRS applies a per-element complex weight `phi_m * exp(j*theta_m)` with
//! amplitude `phi_m` in [0, 1] and phase `theta_m` stored canonically in
//! [0, 2*pi). The receiver sees the direct path plus the single-bounce
//! reflection:
//!
//! `h_eff = direct + sum_m phi_m * exp(j*theta_m) * incident_m * outgoing_m`

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};

/// Wraps an angle into the canonical interval [0, 2*pi).
pub fn canonical_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Amplitudes and phase shifts of the `M` reflecting elements.
///
/// `M = 0` represents "no IRS". Fields are kept private so the amplitude
/// bounds and phase canonicalization cannot be bypassed.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
}

impl PhaseProfile {
    /// Builds a profile, validating amplitudes and canonicalizing phases.
    pub fn new(amplitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(Error::DimensionMismatch {
                expected: amplitudes.len(),
                got: phases.len(),
            });
        }
        if amplitudes.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
            return Err(Error::InvalidArgument {
                name: "amplitudes",
                reason: "every amplitude must lie in [0, 1]".into(),
            });
        }
        if phases.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "phases",
                reason: "phases must be finite".into(),
            });
        }
        let phases = phases.into_iter().map(canonical_phase).collect();
        Ok(Self { amplitudes, phases })
    }

    /// Unit-amplitude profile (lossless reflection) with the given phases.
    pub fn unit(phases: Vec<f64>) -> Result<Self> {
        let amplitudes = vec![1.0; phases.len()];
        Self::new(amplitudes, phases)
    }

    /// The empty profile (no IRS).
    pub fn empty() -> Self {
        Self {
            amplitudes: Vec::new(),
            phases: Vec::new(),
        }
    }

    /// All amplitudes zero: reflection disabled, only the direct path remains.
    pub fn zero_reflection(m: usize) -> Self {
        Self {
            amplitudes: vec![0.0; m],
            phases: vec![0.0; m],
        }
    }

    /// Unit amplitudes with phases drawn uniformly on [0, 2*pi).
    pub fn random_uniform<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let phases = (0..m).map(|_| rng.gen::<f64>() * TAU).collect();
        Self::unit(phases).expect("uniform draws are valid phases")
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// The complex weight `phi_m * exp(j*theta_m)` of element `m`.
    pub fn element(&self, m: usize) -> Complex64 {
        Complex64::from_polar(self.amplitudes[m], self.phases[m])
    }
}

/// Which receiver an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    User,
    Eve(usize),
}

/// Per-element cascaded coefficients `a_m = g_ui[m] * g_i*[m]` toward the
/// given receiver, so the effective channel becomes
/// `direct + sum_m phi_m * exp(j*theta_m) * a_m`.
pub fn cascade_coefficients(
    realization: &ChannelRealization,
    receiver: Receiver,
) -> Result<Vec<Complex64>> {
    let outgoing = match receiver {
        Receiver::User => &realization.g_iu,
        Receiver::Eve(k) => realization.g_ie.get(k).ok_or(Error::EveIndexOutOfRange {
            index: k,
            count: realization.k_eves(),
        })?,
    };
    debug_assert_eq!(realization.g_ui.len(), outgoing.len());
    Ok(realization
        .g_ui
        .iter()
        .zip(outgoing)
        .map(|(ui, out)| ui * out)
        .collect())
}

/// Direct coefficient toward the given receiver.
pub fn direct_coefficient(
    realization: &ChannelRealization,
    receiver: Receiver,
) -> Result<Complex64> {
    match receiver {
        Receiver::User => Ok(realization.h_du),
        Receiver::Eve(k) => realization
            .h_de
            .get(k)
            .copied()
            .ok_or(Error::EveIndexOutOfRange {
                index: k,
                count: realization.k_eves(),
            }),
    }
}

/// Scalar effective channel from explicit incident/outgoing vectors.
pub fn effective_channel(
    direct: Complex64,
    incident: &[Complex64],
    outgoing: &[Complex64],
    profile: &PhaseProfile,
) -> Result<Complex64> {
    if incident.len() != profile.len() {
        return Err(Error::DimensionMismatch {
            expected: profile.len(),
            got: incident.len(),
        });
    }
    if outgoing.len() != profile.len() {
        return Err(Error::DimensionMismatch {
            expected: profile.len(),
            got: outgoing.len(),
        });
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for (m, (inc, out)) in incident.iter().zip(outgoing).enumerate() {
        sum += profile.element(m) * inc * out;
    }
    Ok(direct + sum)
}

/// Scalar effective channel from precomputed cascaded coefficients.
pub fn effective_from_cascade(
    direct: Complex64,
    cascade: &[Complex64],
    profile: &PhaseProfile,
) -> Result<Complex64> {
    if cascade.len() != profile.len() {
        return Err(Error::DimensionMismatch {
            expected: profile.len(),
            got: cascade.len(),
        });
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for (m, a) in cascade.iter().enumerate() {
        sum += profile.element(m) * a;
    }
    Ok(direct + sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::channel::{complex_normal, draw_realization, FadingParams, Position3D, Topology};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn no_irs_returns_direct() {
        let profile = PhaseProfile::empty();
        let d = c(0.3, -0.7);
        assert_eq!(effective_channel(d, &[], &[], &profile).unwrap(), d);
    }

    #[test]
    fn single_element_pi_rotation_negates() {
        let profile = PhaseProfile::new(vec![1.0], vec![std::f64::consts::PI]).unwrap();
        let h = effective_channel(c(0.0, 0.0), &[c(1.0, 0.0)], &[c(1.0, 0.0)], &profile).unwrap();
        assert!((h - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn matches_independent_sum_loop() {
        // Oracle: a separately coded evaluation that accumulates in reverse
        // element order via from_polar on explicit products.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = 3;
            let direct = complex_normal(&mut rng);
            let incident: Vec<_> = (0..m).map(|_| complex_normal(&mut rng)).collect();
            let outgoing: Vec<_> = (0..m).map(|_| complex_normal(&mut rng)).collect();
            let profile = PhaseProfile::random_uniform(m, &mut rng);

            let got = effective_channel(direct, &incident, &outgoing, &profile).unwrap();

            let mut expect = direct;
            for i in (0..m).rev() {
                let weight =
                    Complex64::new(0.0, profile.phases()[i]).exp() * profile.amplitudes()[i];
                expect += weight * (incident[i] * outgoing[i]);
            }
            assert!((got - expect).norm() <= 1e-12 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn cascade_consistency_with_three_argument_form() {
        let topo = Topology {
            uav: Position3D::new(0.0, 0.0, 80.0),
            irs: Position3D::new(12.0, 8.0, 12.0),
            user: Position3D::new(10.0, 0.0, 0.0),
            eves: vec![Position3D::new(-5.0, 0.0, 0.0)],
        };
        let params = FadingParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..100 {
            let r = draw_realization(&topo, &params, 5, &mut rng).unwrap();
            let profile = PhaseProfile::random_uniform(5, &mut rng);
            let recv = if i % 2 == 0 {
                Receiver::User
            } else {
                Receiver::Eve(0)
            };
            let outgoing = match recv {
                Receiver::User => &r.g_iu,
                Receiver::Eve(k) => &r.g_ie[k],
            };
            let direct = direct_coefficient(&r, recv).unwrap();
            let a = effective_channel(direct, &r.g_ui, outgoing, &profile).unwrap();
            let cascade = cascade_coefficients(&r, recv).unwrap();
            let b = effective_from_cascade(direct, &cascade, &profile).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-12));
        }
    }

    #[test]
    fn zero_product_annihilates_cascade() {
        let r = ChannelRealization {
            h_du: c(1.0, 0.0),
            h_de: vec![c(0.5, 0.0)],
            g_ui: vec![c(2.0, 0.0), c(0.0, 0.0)],
            g_iu: vec![c(0.0, 0.0), c(0.0, 3.0)],
            g_ie: vec![vec![c(1.0, 0.0), c(1.0, 0.0)]],
        };
        let a = cascade_coefficients(&r, Receiver::User).unwrap();
        assert_eq!(a, vec![c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn eve_index_out_of_range() {
        let r = ChannelRealization {
            h_du: c(1.0, 0.0),
            h_de: vec![c(0.5, 0.0)],
            g_ui: vec![],
            g_iu: vec![],
            g_ie: vec![vec![]],
        };
        assert!(matches!(
            cascade_coefficients(&r, Receiver::Eve(1)),
            Err(Error::EveIndexOutOfRange { index: 1, count: 1 })
        ));
        // without elements, cascades are empty for every receiver
        assert!(cascade_coefficients(&r, Receiver::User).unwrap().is_empty());
        assert!(cascade_coefficients(&r, Receiver::Eve(0))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let profile = PhaseProfile::unit(vec![0.0, 0.0]).unwrap();
        let err = effective_channel(
            c(0.0, 0.0),
            &[c(1.0, 0.0)],
            &[c(1.0, 0.0), c(1.0, 0.0)],
            &profile,
        );
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn amplitude_bounds_enforced() {
        assert!(PhaseProfile::new(vec![1.1], vec![0.0]).is_err());
        assert!(PhaseProfile::new(vec![-0.1], vec![0.0]).is_err());
        assert!(PhaseProfile::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn phases_canonicalized_to_half_open_interval() {
        let p = PhaseProfile::unit(vec![TAU, -1.0, 3.0 * TAU + 0.25]).unwrap();
        assert_eq!(p.phases()[0], 0.0);
        assert!((p.phases()[1] - (TAU - 1.0)).abs() < 1e-15);
        assert!(p.phases().iter().all(|&t| (0.0..TAU).contains(&t)));
    }

    #[test]
    fn period_shift_is_exact_for_representable_angles() {
        // 0.5 is an exact multiple of ulp(TAU), so theta + TAU is an exact
        // float and canonicalization must give back theta bit-for-bit.
        for theta in [0.0, 0.5, 1.25, 2.75, 5.5] {
            let shifted = PhaseProfile::unit(vec![theta + TAU]).unwrap();
            let plain = PhaseProfile::unit(vec![theta]).unwrap();
            assert_eq!(shifted.phases()[0].to_bits(), plain.phases()[0].to_bits());

            let inc = [c(0.4, 0.2)];
            let out = [c(-0.3, 0.9)];
            let a = effective_channel(c(0.1, 0.1), &inc, &out, &shifted).unwrap();
            let b = effective_channel(c(0.1, 0.1), &inc, &out, &plain).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn zero_amplitude_reduces_to_direct_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let m = 4;
            let direct = complex_normal(&mut rng);
            let cascade: Vec<_> = (0..m).map(|_| complex_normal(&mut rng)).collect();
            let h = effective_from_cascade(direct, &cascade, &PhaseProfile::zero_reflection(m))
                .unwrap();
            assert_eq!(h, direct);
        }
    }

    #[test]
    fn aligned_phases_attain_triangle_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let m = 6;
            let direct = complex_normal(&mut rng);
            let cascade: Vec<_> = (0..m).map(|_| complex_normal(&mut rng)).collect();
            let phases: Vec<f64> = cascade.iter().map(|a| direct.arg() - a.arg()).collect();
            let profile = PhaseProfile::unit(phases).unwrap();
            let h = effective_from_cascade(direct, &cascade, &profile).unwrap();
            let bound = direct.norm() + cascade.iter().map(|a| a.norm()).sum::<f64>();
            assert!(h.norm() <= bound + 1e-12);
            assert!((h.norm() - bound).abs() < 1e-9, "bound not attained");
        }
    }

    proptest! {
        #[test]
        fn triangle_inequality_holds(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = (seed % 7) as usize;
            let direct = complex_normal(&mut rng);
            let cascade: Vec<_> = (0..m).map(|_| complex_normal(&mut rng)).collect();
            let profile = PhaseProfile::random_uniform(m, &mut rng);
            let h = effective_from_cascade(direct, &cascade, &profile).unwrap();
            let bound: f64 = direct.norm()
                + cascade.iter().zip(profile.amplitudes()).map(|(a, phi)| phi * a.norm()).sum::<f64>();
            prop_assert!(h.norm() <= bound * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn phase_periodicity_within_float_rounding(theta in 0.0..TAU, k in 1i32..4) {
            let shifted = canonical_phase(theta + k as f64 * TAU);
            // One rounding step of (theta + k*TAU) bounds the discrepancy.
            prop_assert!((shifted - theta).abs() < 1e-12);
        }
    }
}
