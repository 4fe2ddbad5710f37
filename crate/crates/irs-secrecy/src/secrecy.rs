//! Achievable rates and secrecy capacity against the strongest eavesdropper.
//!
//! With a single transmitter there is no interference term, so the per-link
//! SNR is `power * |h_eff|^2 / sigma^2` and the rate is the Shannon capacity
//! `log2(1 + SNR)`. The eavesdroppers do not collude: secrecy binds against
//! the single best one, clamped at zero.

use num_complex::Complex64;

use crate::channel::{ChannelRealization, FadingParams};
use crate::error::{positive, Error, Result};
use crate::irs::{self, PhaseProfile, Receiver};

/// Everything one evaluation of the secrecy objective produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyOutcome {
    /// Transmit power in Watts.
    pub power: f64,
    /// IRS state the evaluation used.
    pub profile: PhaseProfile,
    /// Legitimate-link rate in bits/s/Hz.
    pub rate_user: f64,
    /// Per-eavesdropper rates in bits/s/Hz.
    pub rate_eves: Vec<f64>,
    /// `max(0, rate_user - max_k rate_eves[k])`.
    pub secrecy_capacity: f64,
    /// Index of the strongest eavesdropper (ties go to the lowest index).
    pub active_eve: usize,
}

impl SecrecyOutcome {
    /// Rate of the strongest eavesdropper.
    pub fn max_eve_rate(&self) -> f64 {
        self.rate_eves[self.active_eve]
    }
}

/// Shannon rate `log2(1 + power * |h_eff|^2 / noise_variance)` in bits/s/Hz.
pub fn rate(h_eff: Complex64, power: f64, noise_variance: f64) -> Result<f64> {
    if power < 0.0 || !power.is_finite() {
        return Err(Error::InvalidArgument {
            name: "power",
            reason: format!("must be finite and >= 0, got {power}"),
        });
    }
    if !positive(noise_variance) {
        return Err(Error::InvalidArgument {
            name: "noise_variance",
            reason: format!("must be > 0, got {noise_variance}"),
        });
    }
    Ok((1.0 + power * h_eff.norm_sqr() / noise_variance).log2())
}

/// Index of the largest rate; ties resolve to the lowest index.
pub(crate) fn argmax_rate(rates: &[f64]) -> usize {
    let mut best = 0;
    for (k, &r) in rates.iter().enumerate().skip(1) {
        if r > rates[best] {
            best = k;
        }
    }
    best
}

/// Evaluates the secrecy capacity of one realization at a given IRS state
/// and transmit power.
pub fn secrecy_capacity(
    realization: &ChannelRealization,
    profile: &PhaseProfile,
    power: f64,
    params: &FadingParams,
) -> Result<SecrecyOutcome> {
    if profile.len() != realization.m_elements() {
        return Err(Error::DimensionMismatch {
            expected: realization.m_elements(),
            got: profile.len(),
        });
    }

    let cascade_user = irs::cascade_coefficients(realization, Receiver::User)?;
    let h_user = irs::effective_from_cascade(realization.h_du, &cascade_user, profile)?;
    let rate_user = rate(h_user, power, params.noise_variance)?;

    let mut rate_eves = Vec::with_capacity(realization.k_eves());
    for k in 0..realization.k_eves() {
        let cascade = irs::cascade_coefficients(realization, Receiver::Eve(k))?;
        let h_eve = irs::effective_from_cascade(realization.h_de[k], &cascade, profile)?;
        rate_eves.push(rate(h_eve, power, params.noise_variance)?);
    }

    let active_eve = argmax_rate(&rate_eves);
    let secrecy = (rate_user - rate_eves[active_eve]).max(0.0);

    Ok(SecrecyOutcome {
        power,
        profile: profile.clone(),
        rate_user,
        rate_eves,
        secrecy_capacity: secrecy,
        active_eve,
    })
}
