//! Brute-force oracle for the channel builder: every formula is recomputed
//! here from scratch with plain arrays and explicit loops — no code shared
//! with the library beyond the scenario data itself — and the resulting
//! matrices must match entry for entry.

use nalgebra::DMatrix;
use num_complex::Complex64;
use risbeam_core::channel::{build_channel, configure_ris_weights};
use risbeam_core::scenario::{
    build_scenario, BsConfig, CircleConfig, PatternModel, RisConfig, Scenario, ScenarioConfig,
    ScattererConfig, UeConfig,
};

const TAU: f64 = core::f64::consts::TAU;

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

fn v3(v: risbeam_core::geom::Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Zenith/azimuth (degrees) of the direction from `from` to `to`.
fn angles(from: [f64; 3], to: [f64; 3]) -> (f64, f64) {
    let d = sub(to, from);
    let r = norm(d);
    let theta = (d[2] / r).clamp(-1.0, 1.0).acos().to_degrees();
    let phi = d[1].atan2(d[0]).to_degrees();
    (theta, phi)
}

/// Element pattern with the panel excitation, written out longhand.
fn field_power(scenario: &Scenario, theta_deg: f64, phi_deg: f64, slant_deg: f64) -> f64 {
    if scenario.pattern_model == PatternModel::Isotropic {
        return 1.0;
    }
    let a_az = -(12.0 * (phi_deg / 65.0).powi(2)).min(30.0);
    let a_el = -(12.0 * ((theta_deg - 90.0) / 65.0).powi(2)).min(30.0);
    let a_3d = 8.0 - (-(a_el + a_az)).min(30.0);

    let m_total = scenario.bs_elements.len();
    let n_h = scenario.bs.columns as f64;
    let d_v = scenario.bs.spacing_v_m;
    let k0 = TAU / scenario.radio.wavelength_m;
    let cos_tilt = scenario.bs.pre_tilt_deg.to_radians().cos();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 1..=m_total {
        let phase = -k0 * ((m % scenario.bs.columns) as f64 - 1.0) * d_v * cos_tilt;
        acc += Complex64::from_polar(1.0 / n_h.sqrt(), phase);
    }
    let excitation_db = 10.0 * acc.norm_sqr().log10();

    let zeta = slant_deg.to_radians();
    10f64.powf((a_3d + excitation_db) / 10.0) * zeta.sin() * zeta.sin()
}

/// One channel entry, rebuilt with the quadruple loop over paths.
fn oracle_entry(scenario: &Scenario, m: usize, l: usize, n: usize) -> Complex64 {
    let k0 = TAU / scenario.radio.wavelength_m;
    let bs_center = v3(scenario.bs.center());
    let el = v3(scenario.bs_elements[m].position);
    let slant = scenario.bs_elements[m].slant_deg;
    let ue_center = v3(scenario.ues[l].center);
    let ue_el = v3(scenario.ues[l].elements[n]);

    // Direct path: per-element angle and direction toward the UE center,
    // UE-side offset projection only.
    let (theta, phi) = angles(el, ue_center);
    let f_direct = field_power(scenario, theta, phi, slant);
    let varsigma = dot(unit(sub(ue_center, el)), sub(ue_el, ue_center));
    let mut h =
        scenario.ues[l].gain * f_direct * Complex64::from_polar(1.0, -k0 * varsigma);

    // Scattered paths: center-anchored BS-side projection, then the UE-side
    // projection along the scatterer-to-UE direction.
    for sc in &scenario.scatterers {
        let p = v3(sc.position);
        let (theta, phi) = angles(bs_center, p);
        let f = field_power(scenario, theta, phi, slant);
        let delta_bs = dot(unit(sub(p, bs_center)), sub(el, bs_center));
        let delta_ue = dot(unit(sub(ue_center, p)), sub(ue_el, ue_center));
        h += sc.gain * f * Complex64::from_polar(1.0, -k0 * (delta_bs + delta_ue));
    }

    // Reflected paths: both hops carry the surface element offset, with the
    // programmed weight applied between them.
    for ris in &scenario.ris {
        let r0 = v3(ris.center);
        let (theta, phi) = angles(bs_center, r0);
        let f = field_power(scenario, theta, phi, slant);
        let dir_in = unit(sub(r0, bs_center));
        let dir_out = unit(sub(ue_center, r0));
        for (k, w) in ris.weights.iter().enumerate() {
            let rk = sub(v3(ris.elements[k]), r0);
            let eta_in = dot(dir_in, add(sub(el, bs_center), rk));
            let eta_out = dot(dir_out, add(rk, sub(ue_el, ue_center)));
            h += ris.gain
                * (f * ris.element_amplitude)
                * Complex64::from_polar(1.0, -k0 * eta_in)
                * w
                * Complex64::from_polar(1.0, -k0 * eta_out);
        }
    }
    h
}

/// Free-space observation row, rebuilt independently.
fn oracle_observation(scenario: &Scenario, q: [f64; 3]) -> Vec<Complex64> {
    let k0 = TAU / scenario.radio.wavelength_m;
    let lam = scenario.radio.wavelength_m;
    scenario
        .bs_elements
        .iter()
        .map(|el| {
            let e = v3(el.position);
            let d = norm(sub(q, e));
            let (theta, phi) = angles(e, q);
            let f = field_power(scenario, theta, phi, el.slant_deg);
            Complex64::from_polar(f * lam / (4.0 * core::f64::consts::PI * d), -k0 * d)
        })
        .collect()
}

fn term_count(s: &Scenario) -> usize {
    let m = s.bs_elements.len();
    let n_t: usize = s.ues.iter().map(|u| u.elements.len()).sum();
    let paths =
        1 + s.scatterers.len() + s.ris.iter().map(|r| r.elements.len()).sum::<usize>();
    m * n_t * paths
}

fn check_scenario(config: &ScenarioConfig, seed: u64) {
    let mut scenario = build_scenario(config, seed).unwrap();
    configure_ris_weights(&mut scenario);
    assert!(
        term_count(&scenario) <= 10_000,
        "oracle instance too large: {} terms",
        term_count(&scenario)
    );
    let set = build_channel(&scenario).unwrap();

    for (l, h) in set.per_ue.iter().enumerate() {
        let oracle = DMatrix::from_fn(h.nrows(), h.ncols(), |n, m| oracle_entry(&scenario, m, l, n));
        let diff = (h - &oracle).norm() / oracle.norm();
        assert!(
            diff <= 1e-10,
            "seed {seed}, UE {l}: relative deviation {diff:e}"
        );
    }

    for (k, row) in set.observation.iter().enumerate() {
        let q = v3(scenario.circle.samples[k]);
        let oracle = oracle_observation(&scenario, q);
        for (m, expected) in oracle.iter().enumerate() {
            let diff = (row[m] - expected).norm();
            assert!(
                diff <= 1e-12 * expected.norm().max(1.0),
                "seed {seed}, sample {k}, element {m}: deviation {diff:e}"
            );
        }
    }
}

#[test]
fn test_minimal_multipath_instance_matches_oracle() {
    // 4 BS elements, one 2-antenna UE, one scatterer, one 2-element
    // surface: 4·2·(1+1+2) = 32 terms.
    let config = ScenarioConfig {
        bs: BsConfig {
            columns: 2,
            rows: 1,
            ..Default::default()
        },
        ues: UeConfig {
            count: 1,
            antennas: 2,
            layers: 1,
            ..Default::default()
        },
        scatterers: ScattererConfig {
            count: 1,
            ..Default::default()
        },
        ris: RisConfig {
            count: 1,
            elements: 2,
            ..Default::default()
        },
        safety_circle: CircleConfig {
            samples: 8,
            ..Default::default()
        },
        ..Default::default()
    };
    for seed in [1, 2, 3, 5, 8, 13] {
        check_scenario(&config, seed);
    }
}

#[test]
fn test_larger_instances_match_oracle() {
    let config = ScenarioConfig {
        bs: BsConfig {
            columns: 4,
            rows: 2,
            ..Default::default()
        },
        ues: UeConfig {
            count: 2,
            antennas: 2,
            layers: 1,
            ..Default::default()
        },
        scatterers: ScattererConfig {
            count: 3,
            ..Default::default()
        },
        ris: RisConfig {
            count: 2,
            elements: 4,
            ..Default::default()
        },
        safety_circle: CircleConfig {
            samples: 12,
            ..Default::default()
        },
        ..Default::default()
    };
    for seed in [21, 34, 55] {
        check_scenario(&config, seed);
    }
}

#[test]
fn test_isotropic_instance_matches_oracle() {
    let config = ScenarioConfig {
        bs: BsConfig {
            columns: 2,
            rows: 2,
            ..Default::default()
        },
        ues: UeConfig {
            count: 2,
            antennas: 2,
            layers: 1,
            ..Default::default()
        },
        scatterers: ScattererConfig {
            count: 1,
            ..Default::default()
        },
        ris: RisConfig {
            count: 1,
            elements: 3,
            ..Default::default()
        },
        safety_circle: CircleConfig {
            samples: 6,
            ..Default::default()
        },
        pattern: PatternModel::Isotropic,
        ..Default::default()
    };
    for seed in [89, 144] {
        check_scenario(&config, seed);
    }
}
