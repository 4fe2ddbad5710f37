//! Scenario configuration: defaults, TOML loading, validation.
//!
//! Unset fields fall back to the reference operating point: 3 W transmit
//! power, 10 reflecting elements, 8 eavesdroppers, path-loss exponent 3,
//! UAV at 80 m, noise variance 0.01, 10000 trials. Eavesdroppers are placed
//! uniformly on a road segment per trial unless `topology.eves` pins fixed
//! positions.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{FadingParams, Position3D, Topology};
use crate::error::{positive, Error, Result};
use crate::optimizer::OptimizerConfig;

/// Road segment the per-trial eavesdropper positions are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EveRoad {
    pub x_min: f64,
    pub x_max: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for EveRoad {
    fn default() -> Self {
        Self {
            x_min: -50.0,
            x_max: 50.0,
            y: 0.0,
            z: 0.0,
        }
    }
}

/// Node placement. Fixed `eves` override the per-trial road placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologySpec {
    pub uav: Position3D,
    pub irs: Position3D,
    pub user: Position3D,
    /// Fixed eavesdropper positions; length must equal `k_eves` when set.
    pub eves: Option<Vec<Position3D>>,
    pub eve_road: EveRoad,
}

impl Default for TopologySpec {
    fn default() -> Self {
        Self {
            uav: Position3D::new(0.0, 0.0, 80.0),
            // Roadside building near the user, so the cascaded link carries
            // enough weight relative to the direct one for the IRS to matter.
            irs: Position3D::new(12.0, 8.0, 12.0),
            user: Position3D::new(10.0, 0.0, 0.0),
            eves: None,
            eve_road: EveRoad::default(),
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub topology: TopologySpec,
    pub fading: FadingParams,
    pub m_elements: usize,
    pub k_eves: usize,
    pub power_max: f64,
    pub optimizer: OptimizerConfig,
    pub master_seed: u64,
    pub trials: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            topology: TopologySpec::default(),
            fading: FadingParams::default(),
            m_elements: 10,
            k_eves: 8,
            power_max: 3.0,
            optimizer: OptimizerConfig::default(),
            master_seed: 1,
            trials: 10_000,
        }
    }
}

impl ScenarioConfig {
    /// Parses a TOML scenario file and validates it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.fading.validate()?;
        if !positive(self.power_max) {
            return Err(Error::invalid_config("power_max", "must be > 0"));
        }
        if self.k_eves < 1 {
            return Err(Error::invalid_config("k_eves", "must be >= 1"));
        }
        if self.trials < 1 {
            return Err(Error::invalid_config("trials", "must be >= 1"));
        }
        self.optimizer_config().validate()?;

        let road = &self.topology.eve_road;
        if road.x_min.is_nan() || road.x_max.is_nan() || road.x_min > road.x_max {
            return Err(Error::invalid_config(
                "topology.eve_road",
                "x_min must be <= x_max",
            ));
        }
        if road.z < 0.0 {
            return Err(Error::invalid_config(
                "topology.eve_road.z",
                "height must be >= 0",
            ));
        }
        if let Some(eves) = &self.topology.eves {
            if eves.len() != self.k_eves {
                return Err(Error::invalid_config(
                    "topology.eves",
                    format!(
                        "{} fixed positions but k_eves = {}",
                        eves.len(),
                        self.k_eves
                    ),
                ));
            }
        }
        // Static part of the geometry; per-trial eve draws are re-checked
        // by run_trial. Use road endpoints as stand-in eves.
        let probe = Topology {
            uav: self.topology.uav,
            irs: self.topology.irs,
            user: self.topology.user,
            eves: self.topology.eves.clone().unwrap_or_else(|| {
                vec![
                    Position3D::new(road.x_min, road.y, road.z),
                    Position3D::new(road.x_max, road.y, road.z),
                ]
            }),
        };
        probe.validate()
    }

    /// The optimizer settings with the scenario's power cap filled in.
    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            power_max: self.power_max,
            ..self.optimizer
        }
    }

    /// Concrete node positions for one trial. Fixed eves pass through;
    /// otherwise `k_eves` road positions are drawn from the geometry stream.
    pub fn materialize_topology<R: Rng + ?Sized>(&self, rng: &mut R) -> Topology {
        let eves = match &self.topology.eves {
            Some(fixed) => fixed.clone(),
            None => {
                let road = &self.topology.eve_road;
                (0..self.k_eves)
                    .map(|_| {
                        let x = if road.x_min == road.x_max {
                            road.x_min
                        } else {
                            rng.gen_range(road.x_min..=road.x_max)
                        };
                        Position3D::new(x, road.y, road.z)
                    })
                    .collect()
            }
        };
        Topology {
            uav: self.topology.uav,
            irs: self.topology.irs,
            user: self.topology.user,
            eves,
        }
    }
}
