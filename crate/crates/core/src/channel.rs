//! Complex channel construction: direct, scattered, and surface-reflected
//! paths between the panel and UE arrays, plus free-space channels to
//! arbitrary observation points.
//!
//! Planar-wave paths carry no distance loss; their scale lives entirely in
//! the unit-variance complex gains, exactly as the path formulas prescribe.
//! Phases are projections of element offsets onto hop directions:
//!
//! * direct: the UE-side offset projected onto the per-element direction
//!   toward the UE center (no BS-side term);
//! * scatterer: the BS element offset projected onto the center-to-scatterer
//!   direction, plus the UE offset projected onto the scatterer-to-UE
//!   direction;
//! * surface: both the BS offset and the surface element offset projected
//!   onto the BS-to-surface direction, then the surface and UE offsets
//!   projected onto the surface-to-UE direction, with the reflection weight
//!   applied between the hops.
//!
//! Pattern gains use the first hop's departure direction: per element toward
//! the UE center for direct paths, from the array center toward the
//! scatterer or surface otherwise. Observation channels are free-space with
//! the full per-element distance and per-element departure angles.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use core::f64::consts::TAU;
use core::fmt::Write as _;

use nalgebra::{DMatrix, RowDVector};
use num_complex::Complex64;

use crate::antenna::Pattern;
use crate::error::CoreError;
use crate::geom::Vec3;
use crate::scenario::Scenario;

/// Channels of one snapshot: per-UE blocks, their row-stack, and the
/// free-space rows toward each safety-circle sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    pub scenario: Scenario,
    pub per_ue: Vec<DMatrix<Complex64>>,
    pub stacked: DMatrix<Complex64>,
    /// One row per safety-circle sample, in sample order.
    pub observation: Vec<RowDVector<Complex64>>,
}

fn wavenumber(scenario: &Scenario) -> f64 {
    TAU / scenario.radio.wavelength_m
}

/// Steers every surface at its assigned UE: each weight conjugates the
/// planar-wave phase offset of its element toward the UE center, so the K
/// reflected components co-phase there. Weights keep unit magnitude.
pub fn configure_ris_weights(scenario: &mut Scenario) {
    let k0 = wavenumber(scenario);
    let ues = scenario.ues.clone();
    for ris in &mut scenario.ris {
        let target = ues[ris.serves_ue].center;
        let dir = ris
            .center
            .unit_toward(target)
            .expect("UE center cannot coincide with a surface center");
        for (k, w) in ris.weights.iter_mut().enumerate() {
            let offset = ris.elements[k].sub(ris.center);
            *w = Complex64::from_polar(1.0, k0 * dir.dot(offset));
        }
    }
}

/// Direct-path coefficient from BS element `m` to element `n` of UE `l`.
pub fn path_gain_direct(
    scenario: &Scenario,
    pattern: &Pattern,
    m: usize,
    l: usize,
    n: usize,
) -> Complex64 {
    let el = &scenario.bs_elements[m];
    let ue = &scenario.ues[l];
    let angles = crate::geom::departure_angles(el.position, ue.center)
        .expect("UE center cannot coincide with a BS element");
    let f = pattern.field_power(angles.theta_deg, angles.phi_deg, el.slant_deg);
    let dir = el
        .position
        .unit_toward(ue.center)
        .expect("UE center cannot coincide with a BS element");
    let varsigma = dir.dot(ue.elements[n].sub(ue.center));
    ue.gain * f * Complex64::from_polar(1.0, -wavenumber(scenario) * varsigma)
}

/// Scattered-path coefficient through scatterer `s`.
pub fn path_gain_scatterer(
    scenario: &Scenario,
    pattern: &Pattern,
    m: usize,
    s: usize,
    l: usize,
    n: usize,
) -> Complex64 {
    let bs_center = scenario.bs.center();
    let el = &scenario.bs_elements[m];
    let sc = &scenario.scatterers[s];
    let ue = &scenario.ues[l];
    let angles = crate::geom::departure_angles(bs_center, sc.position)
        .expect("scatterer cannot coincide with the array center");
    let f = pattern.field_power(angles.theta_deg, angles.phi_deg, el.slant_deg);
    let dir_bs = bs_center
        .unit_toward(sc.position)
        .expect("scatterer cannot coincide with the array center");
    let delta_bs = dir_bs.dot(el.position.sub(bs_center));
    let dir_ue = sc
        .position
        .unit_toward(ue.center)
        .expect("UE center cannot coincide with a scatterer");
    let delta_ue = dir_ue.dot(ue.elements[n].sub(ue.center));
    sc.gain * f * Complex64::from_polar(1.0, -wavenumber(scenario) * (delta_bs + delta_ue))
}

/// Reflected-path coefficient through element `k` of surface `z`.
pub fn path_gain_ris(
    scenario: &Scenario,
    pattern: &Pattern,
    m: usize,
    z: usize,
    k: usize,
    l: usize,
    n: usize,
) -> Complex64 {
    let bs_center = scenario.bs.center();
    let el = &scenario.bs_elements[m];
    let ris = &scenario.ris[z];
    let ue = &scenario.ues[l];
    let k0 = wavenumber(scenario);

    let angles = crate::geom::departure_angles(bs_center, ris.center)
        .expect("surface cannot coincide with the array center");
    let f = pattern.field_power(angles.theta_deg, angles.phi_deg, el.slant_deg);

    let ris_offset = ris.elements[k].sub(ris.center);
    let dir_bs = bs_center
        .unit_toward(ris.center)
        .expect("surface cannot coincide with the array center");
    let eta_bs = dir_bs.dot(el.position.sub(bs_center).add(ris_offset));

    let dir_ue = ris
        .center
        .unit_toward(ue.center)
        .expect("UE center cannot coincide with a surface center");
    let eta_ue = dir_ue.dot(ris_offset.add(ue.elements[n].sub(ue.center)));

    ris.gain
        * (f * ris.element_amplitude)
        * Complex64::from_polar(1.0, -k0 * eta_bs)
        * ris.weights[k]
        * Complex64::from_polar(1.0, -k0 * eta_ue)
}

/// One channel entry: direct path plus every scattered and reflected path.
fn channel_entry(scenario: &Scenario, pattern: &Pattern, m: usize, l: usize, n: usize) -> Complex64 {
    let mut sum = path_gain_direct(scenario, pattern, m, l, n);
    for s in 0..scenario.scatterers.len() {
        sum += path_gain_scatterer(scenario, pattern, m, s, l, n);
    }
    for z in 0..scenario.ris.len() {
        for k in 0..scenario.ris[z].elements.len() {
            sum += path_gain_ris(scenario, pattern, m, z, k, l, n);
        }
    }
    sum
}

/// Free-space row toward observation point `q`, with the full per-element
/// distance in both the phase and the 1/d amplitude.
pub fn observation_channel(
    scenario: &Scenario,
    pattern: &Pattern,
    q: Vec3,
) -> Result<RowDVector<Complex64>, CoreError> {
    let k0 = wavenumber(scenario);
    let wavelength = scenario.radio.wavelength_m;
    let mut row = RowDVector::zeros(scenario.bs_elements.len());
    for (m, el) in scenario.bs_elements.iter().enumerate() {
        let d = q.sub(el.position).norm();
        if d == 0.0 {
            return Err(CoreError::SingularGeometry(format!(
                "observation point coincides with BS element {m}"
            )));
        }
        let angles = crate::geom::departure_angles(el.position, q).expect("nonzero distance");
        let f = pattern.field_power(angles.theta_deg, angles.phi_deg, el.slant_deg);
        row[m] = Complex64::from_polar(f * wavelength / (4.0 * core::f64::consts::PI * d), -k0 * d);
    }
    Ok(row)
}

/// Builds all channels of a snapshot. Expects surface weights to be
/// configured; the stacked matrix is the row-stack of the per-UE blocks in
/// UE order, and observation rows follow the safety-circle sample order.
pub fn build_channel(scenario: &Scenario) -> Result<ChannelSet, CoreError> {
    let pattern = Pattern::for_scenario(scenario);
    let m_count = scenario.bs_elements.len();

    let per_ue: Vec<DMatrix<Complex64>> = (0..scenario.ues.len())
        .map(|l| {
            DMatrix::from_fn(scenario.ues[l].elements.len(), m_count, |n, m| {
                channel_entry(scenario, &pattern, m, l, n)
            })
        })
        .collect();

    let total_rows = scenario.total_rx_antennas();
    let mut stacked = DMatrix::zeros(total_rows, m_count);
    let mut row = 0;
    for h in &per_ue {
        stacked.rows_mut(row, h.nrows()).copy_from(h);
        row += h.nrows();
    }

    let observation = scenario
        .circle
        .samples
        .iter()
        .map(|&q| observation_channel(scenario, &pattern, q))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ChannelSet {
        scenario: scenario.clone(),
        per_ue,
        stacked,
        observation,
    })
}

// ---- regression fixture format ---------------------------------------------

impl ChannelSet {
    /// Plain-text dump of every matrix entry (real and imaginary parts with
    /// shortest round-trip formatting), used for regression fixtures.
    pub fn to_fixture_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "channelset v1");
        for (l, h) in self.per_ue.iter().enumerate() {
            let _ = writeln!(out, "ue {l} {} {}", h.nrows(), h.ncols());
            for n in 0..h.nrows() {
                for m in 0..h.ncols() {
                    let v = h[(n, m)];
                    let _ = writeln!(out, "{} {}", v.re, v.im);
                }
            }
        }
        for (k, row) in self.observation.iter().enumerate() {
            let _ = writeln!(out, "observation {k} {}", row.len());
            for m in 0..row.len() {
                let v = row[m];
                let _ = writeln!(out, "{} {}", v.re, v.im);
            }
        }
        out
    }

    /// Parses matrices written by `to_fixture_text`. The scenario is not part
    /// of the fixture; the caller supplies it.
    pub fn from_fixture_text(text: &str, scenario: Scenario) -> Result<Self, CoreError> {
        fn bad(line: &str) -> CoreError {
            CoreError::Domain(format!("malformed fixture line: {line}"))
        }
        let mut lines = text.lines();
        match lines.next() {
            Some("channelset v1") => {}
            _ => return Err(CoreError::Domain("missing fixture header".into())),
        }
        let mut per_ue = Vec::new();
        let mut observation = Vec::new();
        while let Some(line) = lines.next() {
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("ue") => {
                    let _index: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?;
                    let rows: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?;
                    let cols: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?;
                    let mut h = DMatrix::zeros(rows, cols);
                    for n in 0..rows {
                        for m in 0..cols {
                            let entry = lines.next().ok_or_else(|| bad("truncated fixture"))?;
                            let mut nums = entry.split_whitespace();
                            let re: f64 = nums.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(entry))?;
                            let im: f64 = nums.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(entry))?;
                            h[(n, m)] = Complex64::new(re, im);
                        }
                    }
                    per_ue.push(h);
                }
                Some("observation") => {
                    let _index: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?;
                    let cols: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?;
                    let mut row = RowDVector::zeros(cols);
                    for m in 0..cols {
                        let entry = lines.next().ok_or_else(|| bad("truncated fixture"))?;
                        let mut nums = entry.split_whitespace();
                        let re: f64 = nums.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(entry))?;
                        let im: f64 = nums.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(entry))?;
                        row[m] = Complex64::new(re, im);
                    }
                    observation.push(row);
                }
                Some(other) => return Err(CoreError::Domain(format!("unknown fixture record `{other}`"))),
                None => {}
            }
        }
        let total_rows: usize = per_ue.iter().map(|h| h.nrows()).sum();
        let cols = per_ue.first().map(|h| h.ncols()).unwrap_or(0);
        let mut stacked = DMatrix::zeros(total_rows, cols);
        let mut row = 0;
        for h in &per_ue {
            stacked.rows_mut(row, h.nrows()).copy_from(h);
            row += h.nrows();
        }
        Ok(ChannelSet {
            scenario,
            per_ue,
            stacked,
            observation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{
        build_scenario, BsConfig, CircleConfig, PatternModel, RisConfig, ScenarioConfig,
        ScattererConfig, UeConfig,
    };
    use approx::assert_relative_eq;

    /// Small snapshot: 2x2 cross-polarized panel (M=8), one 2-antenna UE,
    /// one scatterer, one 2-element surface.
    fn small_config() -> ScenarioConfig {
        ScenarioConfig {
            bs: BsConfig { columns: 2, rows: 2, ..Default::default() },
            ues: UeConfig { count: 1, antennas: 2, layers: 1, ..Default::default() },
            scatterers: ScattererConfig { count: 1, ..Default::default() },
            ris: RisConfig { count: 1, elements: 2, ..Default::default() },
            safety_circle: CircleConfig { samples: 4, ..Default::default() },
            ..Default::default()
        }
    }

    fn small_scenario(seed: u64) -> Scenario {
        let mut s = build_scenario(&small_config(), seed).unwrap();
        configure_ris_weights(&mut s);
        s
    }

    #[test]
    fn test_direct_gain_at_ue_center_has_zero_phase_offset() {
        let cfg = ScenarioConfig {
            ues: UeConfig { count: 1, antennas: 1, layers: 1, ..Default::default() },
            ..small_config()
        };
        let mut s = build_scenario(&cfg, 3).unwrap();
        configure_ris_weights(&mut s);
        let pattern = Pattern::for_scenario(&s);
        // A single-antenna UE has its element exactly at the center, so the
        // offset projection vanishes and the gain is the pattern times sigma.
        let g = path_gain_direct(&s, &pattern, 0, 0, 0);
        let el = &s.bs_elements[0];
        let angles = crate::geom::departure_angles(el.position, s.ues[0].center).unwrap();
        let f = pattern.field_power(angles.theta_deg, angles.phi_deg, el.slant_deg);
        assert_relative_eq!(g.re, (s.ues[0].gain * f).re, max_relative = 1e-14);
        assert_relative_eq!(g.im, (s.ues[0].gain * f).im, max_relative = 1e-14);
    }

    #[test]
    fn test_zero_gain_entities_produce_zero_paths() {
        let mut s = small_scenario(4);
        s.ues[0].gain = Complex64::new(0.0, 0.0);
        s.scatterers[0].gain = Complex64::new(0.0, 0.0);
        s.ris[0].gain = Complex64::new(0.0, 0.0);
        let pattern = Pattern::for_scenario(&s);
        assert_eq!(path_gain_direct(&s, &pattern, 1, 0, 1).norm(), 0.0);
        assert_eq!(path_gain_scatterer(&s, &pattern, 1, 0, 0, 1).norm(), 0.0);
        assert_eq!(path_gain_ris(&s, &pattern, 1, 0, 1, 0, 1).norm(), 0.0);
    }

    #[test]
    fn test_scatterer_gain_from_center_element_to_center_antenna() {
        // A 1x1 single-polarization panel puts BS element 0 at the array
        // center; a single-antenna UE sits at its own center. Both
        // projections vanish and the gain reduces to pattern times beta.
        let cfg = ScenarioConfig {
            bs: BsConfig { columns: 1, rows: 1, polarizations: 1, ..Default::default() },
            ues: UeConfig { count: 1, antennas: 1, layers: 1, ..Default::default() },
            ..small_config()
        };
        let mut s = build_scenario(&cfg, 9).unwrap();
        configure_ris_weights(&mut s);
        let pattern = Pattern::for_scenario(&s);
        let g = path_gain_scatterer(&s, &pattern, 0, 0, 0, 0);
        let angles =
            crate::geom::departure_angles(s.bs.center(), s.scatterers[0].position).unwrap();
        let f = pattern.field_power(angles.theta_deg, angles.phi_deg, 45.0);
        let expected = s.scatterers[0].gain * f;
        assert_relative_eq!(g.re, expected.re, max_relative = 1e-14);
        assert_relative_eq!(g.im, expected.im, max_relative = 1e-14);
    }

    #[test]
    fn test_ris_amplitude_carries_one_over_k() {
        let cfg = ScenarioConfig {
            ris: RisConfig { count: 1, elements: 4, ..Default::default() },
            ..small_config()
        };
        let mut s = build_scenario(&cfg, 5).unwrap();
        configure_ris_weights(&mut s);
        let pattern = Pattern::for_scenario(&s);
        let g = path_gain_ris(&s, &pattern, 0, 0, 0, 0, 0);
        let angles = crate::geom::departure_angles(s.bs.center(), s.ris[0].center).unwrap();
        let f = pattern.field_power(angles.theta_deg, angles.phi_deg, 45.0);
        assert_relative_eq!(g.norm(), 0.25 * f * s.ris[0].gain.norm(), max_relative = 1e-12);
    }

    #[test]
    fn test_ris_weights_cophase_at_assigned_ue_center() {
        for seed in [1u64, 2, 3, 11] {
            let cfg = ScenarioConfig {
                ris: RisConfig { count: 1, elements: 4, ..Default::default() },
                ..small_config()
            };
            let mut s = build_scenario(&cfg, seed).unwrap();
            configure_ris_weights(&mut s);
            let ris = &s.ris[0];
            let ue_center = s.ues[ris.serves_ue].center;
            let dir = ris.center.unit_toward(ue_center).unwrap();
            let k0 = TAU / s.radio.wavelength_m;
            let mut sum = Complex64::new(0.0, 0.0);
            for (k, w) in ris.weights.iter().enumerate() {
                assert_relative_eq!(w.norm(), 1.0, max_relative = 1e-12);
                let eta = dir.dot(ris.elements[k].sub(ris.center));
                sum += Complex64::from_polar(1.0, -k0 * eta) * w;
            }
            assert_relative_eq!(sum.norm(), 4.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn test_single_element_ris_weight_is_unit() {
        let cfg = ScenarioConfig {
            ris: RisConfig { count: 1, elements: 1, ..Default::default() },
            ..small_config()
        };
        let mut s = build_scenario(&cfg, 8).unwrap();
        configure_ris_weights(&mut s);
        assert_relative_eq!(s.ris[0].weights[0].norm(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn test_build_reduces_to_direct_paths_without_multipath() {
        let cfg = ScenarioConfig {
            scatterers: ScattererConfig { count: 0, ..Default::default() },
            ris: RisConfig { count: 0, ..Default::default() },
            ..small_config()
        };
        let mut s = build_scenario(&cfg, 6).unwrap();
        configure_ris_weights(&mut s);
        let pattern = Pattern::for_scenario(&s);
        let set = build_channel(&s).unwrap();
        for n in 0..set.per_ue[0].nrows() {
            for m in 0..set.per_ue[0].ncols() {
                assert_eq!(set.per_ue[0][(n, m)], path_gain_direct(&s, &pattern, m, 0, n));
            }
        }
    }

    #[test]
    fn test_doubling_all_gains_doubles_every_entry() {
        let s = small_scenario(12);
        let mut doubled = s.clone();
        for ue in &mut doubled.ues {
            ue.gain *= 2.0;
        }
        for sc in &mut doubled.scatterers {
            sc.gain *= 2.0;
        }
        for r in &mut doubled.ris {
            r.gain *= 2.0;
        }
        let a = build_channel(&s).unwrap();
        let b = build_channel(&doubled).unwrap();
        for (ha, hb) in a.per_ue.iter().zip(&b.per_ue) {
            for (ea, eb) in ha.iter().zip(hb.iter()) {
                assert_eq!(*eb, *ea * 2.0);
            }
        }
    }

    #[test]
    fn test_removing_scatterer_subtracts_its_path_matrix() {
        let cfg = ScenarioConfig {
            scatterers: ScattererConfig { count: 2, ..Default::default() },
            ..small_config()
        };
        let mut with = build_scenario(&cfg, 13).unwrap();
        configure_ris_weights(&mut with);
        let mut without = with.clone();
        let removed = without.scatterers.pop().unwrap();
        let pattern = Pattern::for_scenario(&with);

        let full = build_channel(&with).unwrap();
        let reduced = build_channel(&without).unwrap();
        let s_index = with.scatterers.len() - 1;
        assert_eq!(with.scatterers[s_index].position, removed.position);

        for n in 0..full.per_ue[0].nrows() {
            for m in 0..full.per_ue[0].ncols() {
                let diff = full.per_ue[0][(n, m)] - reduced.per_ue[0][(n, m)];
                let path = path_gain_scatterer(&with, &pattern, m, s_index, 0, n);
                assert_relative_eq!(diff.re, path.re, max_relative = 1e-9, epsilon = 1e-12);
                assert_relative_eq!(diff.im, path.im, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn test_stacked_matrix_is_row_stack_in_ue_order() {
        let cfg = ScenarioConfig {
            ues: UeConfig { count: 2, antennas: 2, layers: 1, ..Default::default() },
            ..small_config()
        };
        let mut s = build_scenario(&cfg, 14).unwrap();
        configure_ris_weights(&mut s);
        let set = build_channel(&s).unwrap();
        assert_eq!(set.stacked.nrows(), 4);
        for l in 0..2 {
            for n in 0..2 {
                for m in 0..set.stacked.ncols() {
                    assert_eq!(set.stacked[(2 * l + n, m)], set.per_ue[l][(n, m)]);
                }
            }
        }
    }

    #[test]
    fn test_observation_magnitude_at_50_m_isotropic() {
        let mut s = small_scenario(2);
        s.pattern_model = PatternModel::Isotropic;
        let pattern = Pattern::for_scenario(&s);
        let el = s.bs_elements[0].position;
        let q = el.add(Vec3::new(50.0, 0.0, 0.0));
        let row = observation_channel(&s, &pattern, q).unwrap();
        let expected = s.radio.wavelength_m / (4.0 * core::f64::consts::PI * 50.0);
        assert_relative_eq!(row[0].norm(), expected, max_relative = 1e-12);
        assert!((row[0].norm() - 1.364e-4).abs() < 2e-7);
    }

    #[test]
    fn test_observation_inverse_distance_law() {
        let mut s = small_scenario(2);
        s.pattern_model = PatternModel::Isotropic;
        let pattern = Pattern::for_scenario(&s);
        let el = s.bs_elements[3].position;
        let near = observation_channel(&s, &pattern, el.add(Vec3::new(40.0, 0.0, 0.0))).unwrap();
        let far = observation_channel(&s, &pattern, el.add(Vec3::new(80.0, 0.0, 0.0))).unwrap();
        assert_relative_eq!(near[3].norm(), 2.0 * far[3].norm(), max_relative = 1e-12);
    }

    #[test]
    fn test_observation_phase_periodic_in_wavelength() {
        let mut s = small_scenario(2);
        s.pattern_model = PatternModel::Isotropic;
        let pattern = Pattern::for_scenario(&s);
        let el = s.bs_elements[0].position;
        let d = 60.0;
        let a = observation_channel(&s, &pattern, el.add(Vec3::new(d, 0.0, 0.0))).unwrap();
        let b = observation_channel(
            &s,
            &pattern,
            el.add(Vec3::new(d + s.radio.wavelength_m, 0.0, 0.0)),
        )
        .unwrap();
        let delta = (a[0].arg() - b[0].arg()).rem_euclid(TAU);
        assert!(delta < 1e-9 || (TAU - delta) < 1e-9, "phase delta {delta}");
    }

    #[test]
    fn test_observation_rejects_coincident_point() {
        let s = small_scenario(2);
        let pattern = Pattern::for_scenario(&s);
        let q = s.bs_elements[0].position;
        assert!(matches!(
            observation_channel(&s, &pattern, q),
            Err(CoreError::SingularGeometry(_))
        ));
    }

    /// Rotates every position in the scene about the BS vertical axis.
    fn rotate_scene(s: &mut Scenario, angle_rad: f64) {
        let axis = s.bs.ground_center;
        let rot = |p: Vec3| axis.add(p.sub(axis).rotated_z(angle_rad));
        for e in &mut s.bs_elements {
            e.position = rot(e.position);
        }
        for ue in &mut s.ues {
            ue.center = rot(ue.center);
            for e in &mut ue.elements {
                *e = rot(*e);
            }
        }
        for sc in &mut s.scatterers {
            sc.position = rot(sc.position);
        }
        for r in &mut s.ris {
            r.center = rot(r.center);
            for e in &mut r.elements {
                *e = rot(*e);
            }
        }
        for q in &mut s.circle.samples {
            *q = rot(*q);
        }
    }

    #[test]
    fn test_observation_norm_invariant_under_scene_rotation_when_isotropic() {
        let mut s = small_scenario(21);
        s.pattern_model = PatternModel::Isotropic;
        let pattern = Pattern::for_scenario(&s);
        let q = Vec3::new(50.0, 10.0, 1.5);
        let base = observation_channel(&s, &pattern, q).unwrap().norm();
        for angle in [0.3f64, 1.7, 4.4] {
            let mut rotated = s.clone();
            rotate_scene(&mut rotated, angle);
            let rq = s
                .bs
                .ground_center
                .add(q.sub(s.bs.ground_center).rotated_z(angle));
            let norm = observation_channel(&rotated, &pattern, rq).unwrap().norm();
            assert_relative_eq!(norm, base, max_relative = 1e-12);
        }
    }

    #[test]
    fn test_fixture_text_roundtrip_is_exact() {
        let s = small_scenario(17);
        let set = build_channel(&s).unwrap();
        let text = set.to_fixture_text();
        let parsed = ChannelSet::from_fixture_text(&text, s).unwrap();
        assert_eq!(parsed.per_ue, set.per_ue);
        assert_eq!(parsed.stacked, set.stacked);
        assert_eq!(parsed.observation, set.observation);
    }

    #[test]
    fn test_fixture_rejects_garbage() {
        let s = small_scenario(17);
        assert!(ChannelSet::from_fixture_text("not a fixture", s.clone()).is_err());
        assert!(ChannelSet::from_fixture_text("channelset v1\nue 0 1 1\nbroken", s).is_err());
    }
}
