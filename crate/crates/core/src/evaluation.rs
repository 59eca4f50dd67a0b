//! Snapshot evaluation and the Monte Carlo protocol: runs all four
//! allocation schemes on one channel realization, renders received-power
//! and exceedance grids, and aggregates per-user-count statistics over
//! seeded independent samples.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::allocators::{
    dual_gd_allocation, enhance_allocation, reduce_allocation, waterfill, DualGdConfig,
    EmfContext, PowerAllocation, Scheme,
};
use crate::antenna::Pattern;
use crate::channel::{build_channel, configure_ris_weights, observation_channel, ChannelSet};
use crate::error::CoreError;
use crate::geom::Vec3;
use crate::precoder::{
    capacity_bps, compose_beamformer, select_layers, sinr_per_layer_db, svd_per_user,
    total_transmit_power_w, PrecoderState,
};
use crate::rng::derive_seed;
use crate::scenario::{build_scenario, SafetyCircle, Scenario, ScenarioConfig};
use crate::units::watts_to_dbm;

/// Stream tag separating the dual-GD multiplier initialization from the
/// scenario draws of the same snapshot seed.
const DUAL_GD_STREAM: u64 = 1;

/// Top-level simulation configuration: scenario, solver, and heatmap grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: ScenarioConfig,
    pub dual_gd: DualGdConfig,
    pub heatmap: GridSpec,
}

/// Square ground grid, inclusive of both endpoints on each axis, sampled at
/// a fixed height.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Half-width: the grid covers [-extent_m, extent_m] on both axes.
    pub extent_m: f64,
    /// Points per axis (including both endpoints).
    pub resolution: usize,
    pub height_m: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            extent_m: 250.0,
            resolution: 200,
            height_m: 1.5,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.extent_m > 0.0) {
            return Err(CoreError::InvalidConfig {
                field: "heatmap.extent_m",
                message: alloc::format!("{} must be positive", self.extent_m),
            });
        }
        if self.resolution < 2 {
            return Err(CoreError::InvalidConfig {
                field: "heatmap.resolution",
                message: alloc::format!("{} must be at least 2", self.resolution),
            });
        }
        if !self.height_m.is_finite() {
            return Err(CoreError::InvalidConfig {
                field: "heatmap.height_m",
                message: "must be finite".into(),
            });
        }
        Ok(())
    }

    /// Axis sample coordinates, `resolution` points from -extent to +extent
    /// with both endpoints included. The interpolation form keeps both
    /// endpoints exact (i/(n-1) is exactly 1.0 at the last point).
    pub fn axis(&self) -> Vec<f64> {
        let n = self.resolution;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                -self.extent_m + 2.0 * self.extent_m * t
            })
            .collect()
    }
}

/// Received power over the grid, one layer per scheme. Cells are row-major
/// with x fastest: `index = iy * resolution + ix`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub height_m: f64,
    pub layers: Vec<(Scheme, Vec<f64>)>,
}

/// Exceedance flags over the same grid: 1 when a cell's power is above the
/// limit while outside the safety circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub layers: Vec<(Scheme, Vec<u8>)>,
}

/// Received power of every scheme's beamformer at each grid cell.
pub fn power_heatmap(
    scenario: &Scenario,
    beamformers: &[(Scheme, DMatrix<Complex64>)],
    grid: &GridSpec,
) -> Result<HeatmapGrid, CoreError> {
    grid.validate()?;
    let pattern = Pattern::for_scenario(scenario);
    let xs = grid.axis();
    let ys = grid.axis();
    let mut layers: Vec<(Scheme, Vec<f64>)> = beamformers
        .iter()
        .map(|(s, _)| (*s, Vec::with_capacity(xs.len() * ys.len())))
        .collect();
    for &y in &ys {
        for &x in &xs {
            let q = Vec3::new(x, y, grid.height_m);
            let row = observation_channel(scenario, &pattern, q)?;
            for ((_, b), (_, cells)) in beamformers.iter().zip(layers.iter_mut()) {
                cells.push(crate::precoder::received_power_w(&row, b));
            }
        }
    }
    Ok(HeatmapGrid {
        xs,
        ys,
        height_m: grid.height_m,
        layers,
    })
}

/// Flags cells whose power exceeds the limit outside the safety circle.
pub fn exceedance_map(grid: &HeatmapGrid, emf_threshold_w: f64, circle: &SafetyCircle) -> ExceedanceMap {
    let layers = grid
        .layers
        .iter()
        .map(|(scheme, cells)| {
            let mut flags = Vec::with_capacity(cells.len());
            for (idx, &p) in cells.iter().enumerate() {
                let x = grid.xs[idx % grid.xs.len()];
                let y = grid.ys[idx / grid.xs.len()];
                let dx = x - circle.center_ground.x;
                let dy = y - circle.center_ground.y;
                let outside = (dx * dx + dy * dy).sqrt() > circle.radius_m;
                flags.push(u8::from(outside && p > emf_threshold_w));
            }
            (*scheme, flags)
        })
        .collect();
    ExceedanceMap {
        xs: grid.xs.clone(),
        ys: grid.ys.clone(),
        layers,
    }
}

/// One scheme's outcome on one snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub allocation: PowerAllocation,
    pub capacity_bps: f64,
    /// 100·(C_ref − C)/C_ref; 0 for the reference itself.
    pub capacity_loss_pct: f64,
    /// Per selected layer, dB; None marks a zero-power layer.
    pub sinr_db: Vec<Option<f64>>,
    /// Sum of the finite per-layer SINR values (dB-domain sum).
    pub total_sinr_db: f64,
    pub total_transmit_power_w: f64,
    pub max_sampled_power_w: f64,
    pub max_sample_index: usize,
}

/// Dual-GD non-convergence record: the run finished, the scheme's result is
/// simply absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualGdFailure {
    pub iterations: usize,
    pub max_violation_w: f64,
}

/// Serializable summary of one snapshot evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotReport {
    pub seed: u64,
    pub scenario: Scenario,
    pub schemes: Vec<SchemeResult>,
    pub dual_gd_failure: Option<DualGdFailure>,
}

impl SnapshotReport {
    pub fn scheme(&self, scheme: Scheme) -> Option<&SchemeResult> {
        self.schemes.iter().find(|r| r.scheme == scheme)
    }
}

/// Full snapshot evaluation: the report plus the channels and precoder
/// state needed to render grids for the same snapshot.
#[derive(Clone, Debug)]
pub struct SnapshotEvaluation {
    pub report: SnapshotReport,
    pub channels: ChannelSet,
    pub state: PrecoderState,
}

impl SnapshotEvaluation {
    /// Beamformers of every scheme present in the report, in report order.
    pub fn beamformers(&self) -> Vec<(Scheme, DMatrix<Complex64>)> {
        self.report
            .schemes
            .iter()
            .map(|r| (r.scheme, compose_beamformer(&self.state, &r.allocation)))
            .collect()
    }
}

fn scheme_result(
    state: &PrecoderState,
    ctx: &EmfContext,
    scenario: &Scenario,
    allocation: PowerAllocation,
    reference_capacity_bps: Option<f64>,
) -> SchemeResult {
    let radio = &scenario.radio;
    let capacity = capacity_bps(state, &allocation, radio.bandwidth_hz, radio.noise_power_w);
    let capacity_loss_pct = match reference_capacity_bps {
        Some(c_ref) if c_ref > 0.0 => 100.0 * (c_ref - capacity) / c_ref,
        _ => 0.0,
    };
    let sinr = sinr_per_layer_db(state, &allocation, radio.noise_power_w);
    let sinr_db: Vec<Option<f64>> = sinr.iter().map(|s| s.is_finite().then_some(*s)).collect();
    let total_sinr_db = sinr_db.iter().flatten().sum();
    let (max_sample_index, max_sampled_power_w) = ctx.max_received_power_w(&allocation.powers_w);
    let total = total_transmit_power_w(state, &allocation.powers_w);
    SchemeResult {
        scheme: allocation.scheme,
        allocation,
        capacity_bps: capacity,
        capacity_loss_pct,
        sinr_db,
        total_sinr_db,
        total_transmit_power_w: total,
        max_sampled_power_w,
        max_sample_index,
    }
}

/// Runs the full pipeline on one seeded snapshot: scenario draw, surface
/// steering, channels, zero-forcing state, then all four allocation
/// schemes. A dual-GD iteration-cap failure is recorded in the report
/// rather than failing the evaluation; every other error propagates.
pub fn evaluate_snapshot(config: &SimConfig, seed: u64) -> Result<SnapshotEvaluation, CoreError> {
    let mut scenario = build_scenario(&config.scenario, seed)?;
    configure_ris_weights(&mut scenario);
    let channels = build_channel(&scenario)?;

    let users = channels
        .per_ue
        .iter()
        .map(svd_per_user)
        .collect::<Result<Vec<_>, _>>()?;
    let layers: Vec<usize> = scenario.ues.iter().map(|u| u.layer_budget).collect();
    let state = select_layers(users, &layers)?;

    let radio = &scenario.radio;
    let ctx = EmfContext::new(
        &state,
        &channels.observation,
        radio.emf_threshold_w,
        radio.max_transmit_power_w,
    );

    let reference = waterfill(
        &state.lambda,
        &state.g,
        radio.max_transmit_power_w,
        radio.noise_power_w,
    );
    let reduced = reduce_allocation(&reference, &ctx);
    let enhanced = enhance_allocation(&reference, &ctx)?;
    let dual = dual_gd_allocation(
        &state.lambda,
        radio.noise_power_w,
        &ctx,
        &config.dual_gd,
        derive_seed(seed, &[DUAL_GD_STREAM]),
    );

    let reference_result = scheme_result(&state, &ctx, &scenario, reference, None);
    let c_ref = Some(reference_result.capacity_bps);
    let mut schemes = alloc::vec![
        reference_result,
        scheme_result(&state, &ctx, &scenario, reduced, c_ref),
        scheme_result(&state, &ctx, &scenario, enhanced, c_ref),
    ];
    let mut dual_gd_failure = None;
    match dual {
        Ok(allocation) => schemes.push(scheme_result(&state, &ctx, &scenario, allocation, c_ref)),
        Err(CoreError::ConvergenceFailure {
            iterations,
            max_violation_w,
            ..
        }) => {
            dual_gd_failure = Some(DualGdFailure {
                iterations,
                max_violation_w,
            });
        }
        Err(other) => return Err(other),
    }

    Ok(SnapshotEvaluation {
        report: SnapshotReport {
            seed,
            scenario,
            schemes,
            dual_gd_failure,
        },
        channels,
        state,
    })
}

// ---- Monte Carlo protocol ---------------------------------------------------

/// One scheme's scalar outcomes within one Monte Carlo sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeSample {
    pub scheme: Scheme,
    pub total_transmit_power_w: f64,
    pub capacity_bps: f64,
    pub capacity_loss_pct: f64,
    pub max_sampled_power_w: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Why a Monte Carlo sample produced no usable scheme comparison. Failed
/// samples stay in the report but are excluded from every mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleFailure {
    /// The snapshot never reached the allocation stage (for example, the
    /// selected layers were too close to linearly dependent for zero
    /// forcing); no scheme results exist.
    Snapshot { message: alloc::string::String },
    /// The snapshot evaluated but dual GD hit its iteration cap; the other
    /// three schemes' results are retained for reference.
    DualGd {
        iterations: usize,
        max_violation_w: f64,
    },
}

/// One Monte Carlo sample: evaluated scheme outcomes, or a recorded failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub user_count: usize,
    pub sample_index: usize,
    pub seed: u64,
    pub schemes: Vec<SchemeSample>,
    pub failure: Option<SampleFailure>,
}

impl SampleRecord {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Per-(user count, scheme) aggregate over the retained samples. Means are
/// `None` when every sample of that user count failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub user_count: usize,
    pub scheme: Scheme,
    pub mean_transmit_power_w: Option<f64>,
    pub mean_capacity_bps: Option<f64>,
    pub mean_capacity_loss_pct: Option<f64>,
    /// Samples included in the means.
    pub samples_included: usize,
    /// Samples excluded because of a recorded failure; exclusion is paired —
    /// a failed sample is dropped from every scheme's mean.
    pub samples_excluded: usize,
}

/// Monte Carlo outcome: aggregates plus every per-sample row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub base_seed: u64,
    pub samples_per_user_count: usize,
    pub user_counts: Vec<usize>,
    pub rows: Vec<AggregateRow>,
    pub samples: Vec<SampleRecord>,
}

/// Seed of one Monte Carlo sample, derived from the base seed and the
/// sample coordinates so samples are independent and order-free.
pub fn sample_seed(base_seed: u64, user_count: usize, sample_index: usize) -> u64 {
    derive_seed(base_seed, &[user_count as u64, sample_index as u64])
}

/// Evaluates one Monte Carlo sample: the configured scenario with its user
/// count overridden, heatmaps skipped. Never errors — a sample that cannot
/// be evaluated comes back with its failure recorded.
pub fn run_sample(
    config: &SimConfig,
    user_count: usize,
    sample_index: usize,
    base_seed: u64,
) -> SampleRecord {
    let mut sample_config = config.clone();
    sample_config.scenario.ues.count = user_count;
    let seed = sample_seed(base_seed, user_count, sample_index);
    let (schemes, failure) = match evaluate_snapshot(&sample_config, seed) {
        Ok(evaluation) => {
            let report = evaluation.report;
            let schemes = report
                .schemes
                .iter()
                .map(|r| SchemeSample {
                    scheme: r.scheme,
                    total_transmit_power_w: r.total_transmit_power_w,
                    capacity_bps: r.capacity_bps,
                    capacity_loss_pct: r.capacity_loss_pct,
                    max_sampled_power_w: r.max_sampled_power_w,
                    iterations: r.allocation.iterations,
                    converged: r.allocation.converged,
                })
                .collect();
            let failure = report.dual_gd_failure.map(|f| SampleFailure::DualGd {
                iterations: f.iterations,
                max_violation_w: f.max_violation_w,
            });
            (schemes, failure)
        }
        Err(err) => (
            Vec::new(),
            Some(SampleFailure::Snapshot {
                message: alloc::format!("{err}"),
            }),
        ),
    };
    SampleRecord {
        user_count,
        sample_index,
        seed,
        schemes,
        failure,
    }
}

/// Order-independent aggregation: records are sorted by (user count, sample
/// index) before the means are accumulated, and samples with a recorded
/// failure are excluded from every scheme's mean.
pub fn aggregate(
    records: &[SampleRecord],
    base_seed: u64,
    samples_per_user_count: usize,
    user_counts: &[usize],
) -> MonteCarloReport {
    let mut samples: Vec<SampleRecord> = records.to_vec();
    samples.sort_by_key(|r| (r.user_count, r.sample_index));

    let mut rows = Vec::new();
    for &l in user_counts {
        let of_l: Vec<&SampleRecord> = samples.iter().filter(|r| r.user_count == l).collect();
        let excluded = of_l.iter().filter(|r| r.failed()).count();
        let included: Vec<&&SampleRecord> = of_l.iter().filter(|r| !r.failed()).collect();
        for scheme in Scheme::ALL {
            let mut power = 0.0;
            let mut capacity = 0.0;
            let mut loss = 0.0;
            let mut n = 0usize;
            for record in &included {
                if let Some(s) = record.schemes.iter().find(|s| s.scheme == scheme) {
                    power += s.total_transmit_power_w;
                    capacity += s.capacity_bps;
                    loss += s.capacity_loss_pct;
                    n += 1;
                }
            }
            let mean = |acc: f64| (n > 0).then(|| acc / n as f64);
            rows.push(AggregateRow {
                user_count: l,
                scheme,
                mean_transmit_power_w: mean(power),
                mean_capacity_bps: mean(capacity),
                mean_capacity_loss_pct: mean(loss),
                samples_included: n,
                samples_excluded: excluded,
            });
        }
    }

    MonteCarloReport {
        base_seed,
        samples_per_user_count,
        user_counts: user_counts.to_vec(),
        rows,
        samples,
    }
}

/// Sequential Monte Carlo run over every (user count, sample) pair. The
/// configuration is validated once up front; per-sample evaluation failures
/// are recorded in the report, never raised.
pub fn monte_carlo(
    config: &SimConfig,
    user_counts: &[usize],
    samples_per_user_count: usize,
    base_seed: u64,
) -> Result<MonteCarloReport, CoreError> {
    if samples_per_user_count == 0 {
        return Err(CoreError::InvalidConfig {
            field: "samples",
            message: "at least one sample per user count is required".into(),
        });
    }
    if user_counts.is_empty() || user_counts.contains(&0) {
        return Err(CoreError::InvalidConfig {
            field: "user_counts",
            message: "must list at least one nonzero user count".into(),
        });
    }
    config.scenario.validate()?;
    let mut records = Vec::with_capacity(user_counts.len() * samples_per_user_count);
    for &l in user_counts {
        for idx in 0..samples_per_user_count {
            records.push(run_sample(config, l, idx, base_seed));
        }
    }
    Ok(aggregate(
        &records,
        base_seed,
        samples_per_user_count,
        user_counts,
    ))
}

/// Watts to dBm for I/O layers; watts are used everywhere internally.
pub fn cell_power_dbm(power_w: f64) -> f64 {
    if power_w > 0.0 {
        watts_to_dbm(power_w)
    } else {
        f64::NEG_INFINITY
    }
}
