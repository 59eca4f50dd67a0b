//! Scenario generation: radio constants, panel geometry, entity placement,
//! and safety-circle sampling for one simulation snapshot.
//!
//! A scenario is a pure function of (config, seed). All randomness flows
//! through one seeded stream in a documented draw order, so identical inputs
//! reproduce bit-identical scenarios on every platform.

use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)]
use num_traits::Float;

use core::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::geom::Vec3;
use crate::rng;
use crate::units::dbm_to_watts;

pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

// ---- configuration -------------------------------------------------------

/// Geometric and radio configuration for one snapshot. Every field has a
/// default matching the reference parameter set, so an empty config file is a
/// complete, runnable description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub radio: RadioConfig,
    pub bs: BsConfig,
    pub ues: UeConfig,
    pub scatterers: ScattererConfig,
    pub ris: RisConfig,
    pub safety_circle: CircleConfig,
    pub placement: PlacementConfig,
    /// Element pattern model; `isotropic` disables the panel pattern and is
    /// intended for geometry-only diagnostics.
    pub pattern: PatternModel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            radio: RadioConfig::default(),
            bs: BsConfig::default(),
            ues: UeConfig::default(),
            scatterers: ScattererConfig::default(),
            ris: RisConfig::default(),
            safety_circle: CircleConfig::default(),
            placement: PlacementConfig::default(),
            pattern: PatternModel::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub max_transmit_power_w: f64,
    /// Exposure limit on received power at the safety circle, in dBm;
    /// converted once to watts when the scenario is built.
    pub emf_threshold_dbm: f64,
    /// Receiver noise figure in dB, used when `noise_power_w` is not given.
    pub noise_figure_db: f64,
    /// Explicit noise power in watts; overrides the thermal-noise formula.
    pub noise_power_w: Option<f64>,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 3.5e9,
            bandwidth_hz: 1.0e8,
            max_transmit_power_w: 200.0,
            emf_threshold_dbm: 52.0,
            noise_figure_db: 9.0,
            noise_power_w: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BsConfig {
    /// Panel columns (horizontal element count per polarization row).
    pub columns: usize,
    /// Same-polarization elements per column (vertical count).
    pub rows: usize,
    /// Polarizations per position: 2 for the cross-polarized panel, 1 allowed
    /// for degenerate test arrays.
    pub polarizations: usize,
    pub height_m: f64,
    /// Electrical pre-tilt angle in degrees applied by the column weights.
    /// 90 means zero phase progression (all weights equal), which maximizes
    /// the excitation gain and with it the exposure pressure on the safety
    /// circle; larger values trade gain for partial cancellation.
    pub pre_tilt_deg: f64,
}

impl Default for BsConfig {
    fn default() -> Self {
        Self {
            columns: 8,
            rows: 8,
            polarizations: 2,
            height_m: 25.0,
            pre_tilt_deg: 90.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UeConfig {
    pub count: usize,
    pub antennas: usize,
    /// Spatial layers allocated to each UE; at most `antennas`.
    pub layers: usize,
    pub height_m: f64,
}

impl Default for UeConfig {
    fn default() -> Self {
        Self {
            count: 4,
            antennas: 4,
            layers: 2,
            height_m: 1.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScattererConfig {
    pub count: usize,
    pub height_m: f64,
}

impl Default for ScattererConfig {
    fn default() -> Self {
        Self {
            count: 3,
            height_m: 1.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RisConfig {
    pub count: usize,
    pub elements: usize,
    pub height_m: f64,
    pub assignment: RisAssignment,
}

impl Default for RisConfig {
    fn default() -> Self {
        Self {
            count: 3,
            elements: 4,
            height_m: 1.5,
            assignment: RisAssignment::RoundRobin,
        }
    }
}

/// Which UE each surface is steered toward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RisAssignment {
    /// Surface z serves UE (z mod L).
    RoundRobin,
    /// Explicit UE index per surface.
    Explicit(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleConfig {
    pub radius_m: f64,
    pub samples: usize,
    pub sample_height_m: f64,
}

impl Default for CircleConfig {
    fn default() -> Self {
        Self {
            radius_m: 50.0,
            samples: 360,
            sample_height_m: 1.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementConfig {
    /// Outer radius of the entity placement annulus; the inner radius is the
    /// safety-circle radius.
    pub cell_radius_m: f64,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self { cell_radius_m: 250.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PatternModel {
    #[default]
    Panel,
    Isotropic,
}

impl ScenarioConfig {
    /// Schema validation with field-level messages. Geometric feasibility of
    /// the placement annulus is checked by `build_scenario`.
    pub fn validate(&self) -> Result<(), CoreError> {
        fn positive(field: &'static str, value: f64) -> Result<(), CoreError> {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(CoreError::invalid_config(field, format!("must be positive, got {value}")))
            }
        }
        fn non_negative(field: &'static str, value: f64) -> Result<(), CoreError> {
            if value.is_finite() && value >= 0.0 {
                Ok(())
            } else {
                Err(CoreError::invalid_config(field, format!("must be non-negative, got {value}")))
            }
        }

        positive("radio.carrier_frequency_hz", self.radio.carrier_frequency_hz)?;
        positive("radio.bandwidth_hz", self.radio.bandwidth_hz)?;
        positive("radio.max_transmit_power_w", self.radio.max_transmit_power_w)?;
        if !self.radio.emf_threshold_dbm.is_finite() {
            return Err(CoreError::invalid_config(
                "radio.emf_threshold_dbm",
                "must be finite",
            ));
        }
        if !self.radio.noise_figure_db.is_finite() {
            return Err(CoreError::invalid_config("radio.noise_figure_db", "must be finite"));
        }
        if let Some(n0) = self.radio.noise_power_w {
            positive("radio.noise_power_w", n0)?;
        }

        if self.bs.columns == 0 {
            return Err(CoreError::invalid_config("bs.columns", "must be at least 1"));
        }
        if self.bs.rows == 0 {
            return Err(CoreError::invalid_config("bs.rows", "must be at least 1"));
        }
        if !(1..=2).contains(&self.bs.polarizations) {
            return Err(CoreError::invalid_config("bs.polarizations", "must be 1 or 2"));
        }
        non_negative("bs.height_m", self.bs.height_m)?;
        if !(0.0..=180.0).contains(&self.bs.pre_tilt_deg) {
            return Err(CoreError::invalid_config(
                "bs.pre_tilt_deg",
                format!("must lie in [0, 180], got {}", self.bs.pre_tilt_deg),
            ));
        }

        if self.ues.count == 0 {
            return Err(CoreError::invalid_config("ues.count", "must be at least 1"));
        }
        if self.ues.antennas == 0 {
            return Err(CoreError::invalid_config("ues.antennas", "must be at least 1"));
        }
        if self.ues.layers == 0 || self.ues.layers > self.ues.antennas {
            return Err(CoreError::invalid_config(
                "ues.layers",
                format!(
                    "must lie in [1, antennas={}], got {}",
                    self.ues.antennas, self.ues.layers
                ),
            ));
        }
        non_negative("ues.height_m", self.ues.height_m)?;
        non_negative("scatterers.height_m", self.scatterers.height_m)?;

        if self.ris.count > 0 && self.ris.elements == 0 {
            return Err(CoreError::invalid_config("ris.elements", "must be at least 1"));
        }
        non_negative("ris.height_m", self.ris.height_m)?;
        if let RisAssignment::Explicit(targets) = &self.ris.assignment {
            if targets.len() != self.ris.count {
                return Err(CoreError::invalid_config(
                    "ris.assignment",
                    format!("needs {} entries, got {}", self.ris.count, targets.len()),
                ));
            }
            if let Some(bad) = targets.iter().find(|&&t| t >= self.ues.count) {
                return Err(CoreError::invalid_config(
                    "ris.assignment",
                    format!("UE index {bad} out of range (L={})", self.ues.count),
                ));
            }
        }

        positive("safety_circle.radius_m", self.safety_circle.radius_m)?;
        if self.safety_circle.samples == 0 {
            return Err(CoreError::invalid_config("safety_circle.samples", "must be at least 1"));
        }
        non_negative("safety_circle.sample_height_m", self.safety_circle.sample_height_m)?;
        positive("placement.cell_radius_m", self.placement.cell_radius_m)?;
        Ok(())
    }
}

// ---- domain types ---------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadioConstants {
    pub carrier_frequency_hz: f64,
    pub wavelength_m: f64,
    pub bandwidth_hz: f64,
    pub noise_power_w: f64,
    pub max_transmit_power_w: f64,
    pub emf_threshold_w: f64,
}

impl RadioConstants {
    pub fn from_config(cfg: &RadioConfig) -> Self {
        let noise_power_w = cfg.noise_power_w.unwrap_or_else(|| {
            // Thermal floor at -174 dBm/Hz plus bandwidth and noise figure.
            dbm_to_watts(-174.0 + 10.0 * cfg.bandwidth_hz.log10() + cfg.noise_figure_db)
        });
        Self {
            carrier_frequency_hz: cfg.carrier_frequency_hz,
            wavelength_m: SPEED_OF_LIGHT_M_PER_S / cfg.carrier_frequency_hz,
            bandwidth_hz: cfg.bandwidth_hz,
            noise_power_w,
            max_transmit_power_w: cfg.max_transmit_power_w,
            emf_threshold_w: dbm_to_watts(cfg.emf_threshold_dbm),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsArrayGeometry {
    pub columns: usize,
    pub rows: usize,
    pub polarizations: usize,
    pub spacing_h_m: f64,
    pub spacing_v_m: f64,
    /// Ground position of the mast; the panel center sits `height_m` above.
    pub ground_center: Vec3,
    pub height_m: f64,
    pub pre_tilt_deg: f64,
}

impl BsArrayGeometry {
    pub fn element_count(&self) -> usize {
        self.columns * self.rows * self.polarizations
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new(self.ground_center.x, self.ground_center.y, self.height_m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsElement {
    pub position: Vec3,
    pub slant_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ue {
    pub center: Vec3,
    pub elements: Vec<Vec3>,
    pub layer_budget: usize,
    /// Complex gain of the direct BS-to-UE path.
    pub gain: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub position: Vec3,
    pub gain: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ris {
    pub center: Vec3,
    pub elements: Vec<Vec3>,
    /// Complex gain of the BS-to-surface hop.
    pub gain: Complex64,
    /// Per-element reflection amplitude, 1/K exactly.
    pub element_amplitude: f64,
    /// Unit-magnitude reflection weights, one per element.
    pub weights: Vec<Complex64>,
    /// Index of the UE this surface is steered toward.
    pub serves_ue: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafetyCircle {
    pub center_ground: Vec3,
    pub radius_m: f64,
    pub sample_height_m: f64,
    pub samples: Vec<Vec3>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub radio: RadioConstants,
    pub bs: BsArrayGeometry,
    pub bs_elements: Vec<BsElement>,
    pub ues: Vec<Ue>,
    pub scatterers: Vec<Scatterer>,
    pub ris: Vec<Ris>,
    pub circle: SafetyCircle,
    pub pattern_model: PatternModel,
    pub seed: u64,
}

impl Scenario {
    /// Total spatial layers across all UEs.
    pub fn total_layers(&self) -> usize {
        self.ues.iter().map(|u| u.layer_budget).sum()
    }

    /// Total receive antennas across all UEs.
    pub fn total_rx_antennas(&self) -> usize {
        self.ues.iter().map(|u| u.elements.len()).sum()
    }
}

// ---- operations -----------------------------------------------------------

/// Panel element positions and slants in index order.
///
/// The index runs fastest over columns, then vertical rows, then
/// polarization, so a 1-based element index taken modulo the column count
/// recovers the horizontal coordinate used by the pre-tilt column weights.
/// Cross-polarized partners therefore occupy indices m and m + columns*rows.
pub fn bs_element_positions(geom: &BsArrayGeometry) -> Vec<BsElement> {
    let center = geom.center();
    let mut out = Vec::with_capacity(geom.element_count());
    for p in 0..geom.polarizations {
        let slant_deg = if p == 0 { 45.0 } else { -45.0 };
        for v in 0..geom.rows {
            let dz = (v as f64 - (geom.rows as f64 - 1.0) / 2.0) * geom.spacing_v_m;
            for h in 0..geom.columns {
                let dy = (h as f64 - (geom.columns as f64 - 1.0) / 2.0) * geom.spacing_h_m;
                out.push(BsElement {
                    position: center.add(Vec3::new(0.0, dy, dz)),
                    slant_deg,
                });
            }
        }
    }
    out
}

/// Observation points spaced uniformly in bearing around the circle.
pub fn sample_safety_circle(
    center_ground: Vec3,
    radius_m: f64,
    samples: usize,
    sample_height_m: f64,
) -> SafetyCircle {
    let points = (0..samples)
        .map(|k| {
            let bearing = TAU * k as f64 / samples as f64;
            Vec3::new(
                center_ground.x + radius_m * bearing.cos(),
                center_ground.y + radius_m * bearing.sin(),
                sample_height_m,
            )
        })
        .collect();
    SafetyCircle {
        center_ground,
        radius_m,
        sample_height_m,
        samples: points,
    }
}

/// Area-uniform draw from the open annulus (r_inner, r_outer], at `height_m`.
fn draw_annulus_point<R: Rng>(
    rng: &mut R,
    center: Vec3,
    r_inner: f64,
    r_outer: f64,
    height_m: f64,
) -> (Vec3, f64) {
    // 1 - random() lies in (0, 1], which keeps the radius strictly above
    // r_inner: entities never sit exactly on the safety circle.
    let u = 1.0 - rng.random::<f64>();
    let radius = (r_inner * r_inner + u * (r_outer * r_outer - r_inner * r_inner)).sqrt();
    let bearing = TAU * rng.random::<f64>();
    (
        Vec3::new(
            center.x + radius * bearing.cos(),
            center.y + radius * bearing.sin(),
            height_m,
        ),
        bearing,
    )
}

/// Element positions of a horizontal linear array centered on `center`,
/// oriented broadside to the BS (perpendicular to the bearing from the BS).
fn linear_array_elements(center: Vec3, bearing: f64, count: usize, spacing_m: f64) -> Vec<Vec3> {
    let tangent = Vec3::new(-bearing.sin(), bearing.cos(), 0.0);
    (0..count)
        .map(|i| {
            let offset = (i as f64 - (count as f64 - 1.0) / 2.0) * spacing_m;
            center.add(tangent.scale(offset))
        })
        .collect()
}

/// Builds one snapshot from configuration and seed.
///
/// Draw order, which is part of the reproducibility contract: for each UE in
/// index order, its annulus position (one radial and one bearing draw) then
/// its direct-path gain; then each scatterer the same way; then each surface.
pub fn build_scenario(config: &ScenarioConfig, seed: u64) -> Result<Scenario, CoreError> {
    config.validate()?;
    let radio = RadioConstants::from_config(&config.radio);
    let half_wavelength = 0.5 * radio.wavelength_m;

    let r_inner = config.safety_circle.radius_m;
    let r_outer = config.placement.cell_radius_m;
    if r_outer <= r_inner {
        return Err(CoreError::PlacementInfeasible(format!(
            "cell radius {r_outer} m does not exceed safety-circle radius {r_inner} m"
        )));
    }

    let bs = BsArrayGeometry {
        columns: config.bs.columns,
        rows: config.bs.rows,
        polarizations: config.bs.polarizations,
        spacing_h_m: half_wavelength,
        spacing_v_m: half_wavelength,
        ground_center: Vec3::zero(),
        height_m: config.bs.height_m,
        pre_tilt_deg: config.bs.pre_tilt_deg,
    };
    let bs_elements = bs_element_positions(&bs);
    let circle = sample_safety_circle(
        bs.ground_center,
        r_inner,
        config.safety_circle.samples,
        config.safety_circle.sample_height_m,
    );

    let mut rng = rng::stream(seed);

    let ues: Vec<Ue> = (0..config.ues.count)
        .map(|_| {
            let (center, bearing) = draw_annulus_point(
                &mut rng,
                bs.ground_center,
                r_inner,
                r_outer,
                config.ues.height_m,
            );
            let gain = rng::standard_complex_gaussian(&mut rng);
            Ue {
                center,
                elements: linear_array_elements(center, bearing, config.ues.antennas, half_wavelength),
                layer_budget: config.ues.layers,
                gain,
            }
        })
        .collect();

    let scatterers: Vec<Scatterer> = (0..config.scatterers.count)
        .map(|_| {
            let (position, _) = draw_annulus_point(
                &mut rng,
                bs.ground_center,
                r_inner,
                r_outer,
                config.scatterers.height_m,
            );
            let gain = rng::standard_complex_gaussian(&mut rng);
            Scatterer { position, gain }
        })
        .collect();

    let ris: Vec<Ris> = (0..config.ris.count)
        .map(|z| {
            let (center, bearing) = draw_annulus_point(
                &mut rng,
                bs.ground_center,
                r_inner,
                r_outer,
                config.ris.height_m,
            );
            let gain = rng::standard_complex_gaussian(&mut rng);
            let serves_ue = match &config.ris.assignment {
                RisAssignment::RoundRobin => z % config.ues.count,
                RisAssignment::Explicit(targets) => targets[z],
            };
            Ris {
                center,
                elements: linear_array_elements(center, bearing, config.ris.elements, half_wavelength),
                gain,
                element_amplitude: 1.0 / config.ris.elements as f64,
                weights: vec![Complex64::new(1.0, 0.0); config.ris.elements],
                serves_ue,
            }
        })
        .collect();

    Ok(Scenario {
        radio,
        bs,
        bs_elements,
        ues,
        scatterers,
        ris,
        circle,
        pattern_model: config.pattern,
        seed,
    })
}
