//! Link geometry, large-scale path loss, and Rayleigh small-scale fading.
//!
//! Every link in the UAV/IRS/vehicle topology is modeled as the product of a
//! deterministic distance-dependent gain and an i.i.d. circularly-symmetric
//! complex Gaussian draw with zero mean and unit variance (Rayleigh envelope).
//! Amplitudes compose multiplicatively: `coefficient = sqrt(gain) * s`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// A node location in meters; `z` is height above the road plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Euclidean distance to `other` in meters.
    pub fn distance(&self, other: &Position3D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Node placement for one scenario: UAV transmitter, IRS, legitimate user,
/// and `K >= 1` non-colluding eavesdroppers.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub uav: Position3D,
    pub irs: Position3D,
    pub user: Position3D,
    pub eves: Vec<Position3D>,
}

impl Topology {
    pub fn k_eves(&self) -> usize {
        self.eves.len()
    }

    /// Checks the geometric invariants: heights are nonnegative, the UAV is
    /// airborne, at least one eavesdropper exists, and every link used for
    /// path loss has strictly positive length.
    pub fn validate(&self) -> Result<()> {
        if self.uav.z <= 0.0 {
            return Err(Error::invalid_config(
                "topology.uav",
                "UAV height must be > 0",
            ));
        }
        for (name, p) in [("irs", &self.irs), ("user", &self.user)] {
            if p.z < 0.0 {
                return Err(Error::invalid_config(
                    &format!("topology.{name}"),
                    "height must be >= 0",
                ));
            }
        }
        if self.eves.is_empty() {
            return Err(Error::invalid_config(
                "topology.eves",
                "need at least one eavesdropper",
            ));
        }
        if self.eves.iter().any(|e| e.z < 0.0) {
            return Err(Error::invalid_config(
                "topology.eves",
                "height must be >= 0",
            ));
        }
        // Links actually used: UAV->{user, eves, IRS} and IRS->{user, eves}.
        let mut links = vec![
            (self.uav, self.user),
            (self.uav, self.irs),
            (self.irs, self.user),
        ];
        for e in &self.eves {
            links.push((self.uav, *e));
            links.push((self.irs, *e));
        }
        if links.iter().any(|(a, b)| a.distance(b) == 0.0) {
            return Err(Error::DegenerateGeometry);
        }
        Ok(())
    }
}

/// Large-scale and noise parameters shared by all links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FadingParams {
    /// Path-loss exponent alpha.
    pub pathloss_exponent: f64,
    /// Receiver noise variance sigma^2 in Watts.
    pub noise_variance: f64,
    /// Path-loss value at 1 m distance.
    pub reference_gain: f64,
}

impl Default for FadingParams {
    fn default() -> Self {
        Self {
            pathloss_exponent: 3.0,
            noise_variance: 0.01,
            reference_gain: 1.0,
        }
    }
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        if !positive(self.pathloss_exponent) {
            return Err(Error::invalid_config(
                "fading.pathloss_exponent",
                "must be > 0",
            ));
        }
        if !positive(self.noise_variance) {
            return Err(Error::invalid_config(
                "fading.noise_variance",
                "must be > 0",
            ));
        }
        if !positive(self.reference_gain) {
            return Err(Error::invalid_config(
                "fading.reference_gain",
                "must be > 0",
            ));
        }
        Ok(())
    }
}

/// Distance-dependent power gain: `reference_gain * d^(-alpha)`.
///
/// Strictly positive and strictly decreasing in distance.
pub fn path_loss(a: &Position3D, b: &Position3D, params: &FadingParams) -> Result<f64> {
    let d = a.distance(b);
    if d == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    Ok(params.reference_gain * d.powf(-params.pathloss_exponent))
}

/// One small-scale fading draw for every link of the topology.
///
/// Field naming follows the link direction: `h_*` are direct UAV links,
/// `g_ui` is UAV->IRS per element, `g_iu`/`g_ie` are IRS->user and
/// IRS->eve per element.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_du: Complex64,
    pub h_de: Vec<Complex64>,
    pub g_ui: Vec<Complex64>,
    pub g_iu: Vec<Complex64>,
    pub g_ie: Vec<Vec<Complex64>>,
}

impl ChannelRealization {
    pub fn m_elements(&self) -> usize {
        self.g_ui.len()
    }

    pub fn k_eves(&self) -> usize {
        self.h_de.len()
    }

    /// The same realization with the IRS removed (all element vectors empty).
    pub fn without_irs(&self) -> ChannelRealization {
        ChannelRealization {
            h_du: self.h_du,
            h_de: self.h_de.clone(),
            g_ui: Vec::new(),
            g_iu: Vec::new(),
            g_ie: vec![Vec::new(); self.h_de.len()],
        }
    }

    pub fn is_finite(&self) -> bool {
        let ok = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        ok(&self.h_du)
            && self.h_de.iter().all(ok)
            && self.g_ui.iter().all(ok)
            && self.g_iu.iter().all(ok)
            && self.g_ie.iter().flatten().all(ok)
    }
}

/// Circularly-symmetric complex normal with zero mean and unit variance:
/// real and imaginary parts are independent N(0, 1/2).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn faded<R: Rng + ?Sized>(gain: f64, rng: &mut R) -> Complex64 {
    gain.sqrt() * complex_normal(rng)
}

/// Draws one independent Rayleigh block-fading realization for the whole
/// topology. `m_elements = 0` means no IRS: the element vectors stay empty
/// and only the direct coefficients are populated.
///
/// Draw order is fixed (direct links first, then per-element vectors) so a
/// given rng state always yields the same realization.
pub fn draw_realization<R: Rng + ?Sized>(
    topology: &Topology,
    params: &FadingParams,
    m_elements: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let h_du = faded(path_loss(&topology.uav, &topology.user, params)?, rng);
    let mut h_de = Vec::with_capacity(topology.eves.len());
    for eve in &topology.eves {
        h_de.push(faded(path_loss(&topology.uav, eve, params)?, rng));
    }

    let mut g_ui = Vec::with_capacity(m_elements);
    let mut g_iu = Vec::with_capacity(m_elements);
    let mut g_ie = vec![Vec::with_capacity(m_elements); topology.eves.len()];
    if m_elements > 0 {
        let pl_ui = path_loss(&topology.uav, &topology.irs, params)?;
        let pl_iu = path_loss(&topology.irs, &topology.user, params)?;
        for _ in 0..m_elements {
            g_ui.push(faded(pl_ui, rng));
        }
        for _ in 0..m_elements {
            g_iu.push(faded(pl_iu, rng));
        }
        for (k, eve) in topology.eves.iter().enumerate() {
            let pl_ie = path_loss(&topology.irs, eve, params)?;
            for _ in 0..m_elements {
                g_ie[k].push(faded(pl_ie, rng));
            }
        }
    }

    Ok(ChannelRealization {
        h_du,
        h_de,
        g_ui,
        g_iu,
        g_ie,
    })
}
