//! The four layer-power allocation schemes:
//!
//! * `waterfill` — capacity-maximizing reference under the transmit-power
//!   budget alone (no exposure limit);
//! * `reduce_allocation` — uniform rescaling of the reference so the worst
//!   sampled observation point meets the exposure limit;
//! * `enhance_allocation` — greedy per-layer rescaling that repeatedly tames
//!   the dominant layer at the worst point;
//! * `dual_gd_allocation` — projected dual gradient descent on the full
//!   problem (budget plus every sampled exposure constraint).
//!
//! Powers are in watts throughout. A constraint function F_k measures
//! violation in watts: F_0 = Σ P_i g_i − P_max for the budget and
//! F_k = Σ P_i E_k[i] − EMF_th for observation point k.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::RowDVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::precoder::PrecoderState;
use crate::rng::stream;

/// Which allocation scheme produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Reference,
    Reduced,
    Enhanced,
    DualGd,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Reference,
        Scheme::Reduced,
        Scheme::Enhanced,
        Scheme::DualGd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Reference => "reference",
            Scheme::Reduced => "reduced",
            Scheme::Enhanced => "enhanced",
            Scheme::DualGd => "dual_gd",
        }
    }
}

impl core::fmt::Display for Scheme {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-layer powers produced by one scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub powers_w: Vec<f64>,
    pub scheme: Scheme,
    /// Solver rounds used (active-set re-solves, greedy steps, or dual
    /// iterations; 0 for closed-form rescaling).
    pub iterations: usize,
    pub converged: bool,
    /// Final Lagrange multipliers `[μ_0, μ_1, ..., μ_{N_Q}]`; dual GD only.
    pub multipliers: Option<Vec<f64>>,
}

/// Everything the exposure-aware schemes need about one snapshot: the
/// per-layer quadratic forms at every sampled observation point, the
/// transmit-power weights, and the limits.
#[derive(Clone, Debug, PartialEq)]
pub struct EmfContext {
    /// `observation_forms[k][i]` = |(h_{Q_k} Ṽ⁺)_i|², watts per watt.
    pub observation_forms: Vec<Vec<f64>>,
    /// Diagonal of (Ṽ Ṽ^H)⁻¹: transmit power is Σ P_i g_i.
    pub g: Vec<f64>,
    pub emf_threshold_w: f64,
    pub max_transmit_power_w: f64,
}

impl EmfContext {
    pub fn new(
        state: &PrecoderState,
        observation: &[RowDVector<Complex64>],
        emf_threshold_w: f64,
        max_transmit_power_w: f64,
    ) -> Self {
        EmfContext {
            observation_forms: observation.iter().map(|h| state.observation_form(h)).collect(),
            g: state.g.clone(),
            emf_threshold_w,
            max_transmit_power_w,
        }
    }

    /// Received power at sampled point `k` under the given layer powers.
    pub fn received_power_at(&self, k: usize, powers_w: &[f64]) -> f64 {
        dot(&self.observation_forms[k], powers_w)
    }

    /// Worst sampled point: `(k*, P_{Q_k*})`, lowest index on ties.
    pub fn max_received_power_w(&self, powers_w: &[f64]) -> (usize, f64) {
        let mut best = (0, 0.0);
        for (k, form) in self.observation_forms.iter().enumerate() {
            let p = dot(form, powers_w);
            if p > best.1 {
                best = (k, p);
            }
        }
        best
    }

    /// Total transmit power Σ P_i g_i.
    pub fn transmit_power_w(&self, powers_w: &[f64]) -> f64 {
        dot(&self.g, powers_w)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---- reference water-filling ------------------------------------------------

/// Capacity-maximizing allocation under the transmit-power budget alone.
///
/// The water level 1/μ follows from the budget equality over the active
/// set; layers whose candidate power turns negative are removed and the
/// level recomputed until every remaining candidate is nonnegative.
pub fn waterfill(lambda: &[f64], g: &[f64], max_power_w: f64, noise_w: f64) -> PowerAllocation {
    let nu = lambda.len();
    let mut active = vec![true; nu];
    let mut powers = vec![0.0; nu];
    let mut rounds = 0;

    loop {
        rounds += 1;
        let count = active.iter().filter(|a| **a).count();
        if count == 0 {
            break;
        }
        let inverse_gain: f64 = (0..nu)
            .filter(|&i| active[i])
            .map(|i| noise_w * g[i] / lambda[i])
            .sum();
        let mu = count as f64 / (max_power_w + inverse_gain);

        let mut any_negative = false;
        for i in 0..nu {
            if !active[i] {
                continue;
            }
            let candidate = 1.0 / (mu * g[i]) - noise_w / lambda[i];
            if candidate < 0.0 {
                active[i] = false;
                any_negative = true;
            } else {
                powers[i] = candidate;
            }
        }
        if !any_negative {
            break;
        }
        for p in &mut powers {
            *p = 0.0;
        }
    }

    PowerAllocation {
        powers_w: powers,
        scheme: Scheme::Reference,
        iterations: rounds,
        converged: true,
        multipliers: None,
    }
}

// ---- reduced scheme ----------------------------------------------------------

/// Scales every layer power by α = min(EMF_th / max_k P_{Q_k}, 1), so the
/// worst sampled point lands exactly on the limit whenever it was above it.
pub fn reduce_allocation(reference: &PowerAllocation, ctx: &EmfContext) -> PowerAllocation {
    let (_, max_q) = ctx.max_received_power_w(&reference.powers_w);
    let alpha = if max_q > ctx.emf_threshold_w {
        ctx.emf_threshold_w / max_q
    } else {
        1.0
    };
    PowerAllocation {
        powers_w: reference.powers_w.iter().map(|p| alpha * p).collect(),
        scheme: Scheme::Reduced,
        iterations: 0,
        converged: true,
        multipliers: None,
    }
}

// ---- enhanced scheme ----------------------------------------------------------

/// Greedy repair: find the worst sampled point, scale down only the layer
/// contributing most to it, and repeat until every point meets the limit.
/// Each step strictly shrinks one power, so termination is guaranteed; the
/// cap (10·ν·N_Q) only guards against logic errors.
pub fn enhance_allocation(
    reference: &PowerAllocation,
    ctx: &EmfContext,
) -> Result<PowerAllocation, CoreError> {
    let mut powers = reference.powers_w.clone();
    let cap = 10 * powers.len().max(1) * ctx.observation_forms.len().max(1);
    let mut steps = 0;

    loop {
        let (k_star, max_q) = ctx.max_received_power_w(&powers);
        if max_q <= ctx.emf_threshold_w {
            return Ok(PowerAllocation {
                powers_w: powers,
                scheme: Scheme::Enhanced,
                iterations: steps,
                converged: true,
                multipliers: None,
            });
        }
        if steps >= cap {
            return Err(CoreError::ConvergenceFailure {
                iterations: steps,
                max_violation_w: max_q - ctx.emf_threshold_w,
                best_feasible: None,
            });
        }
        steps += 1;

        let form = &ctx.observation_forms[k_star];
        let mut i0 = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, (&p, &e)) in powers.iter().zip(form).enumerate() {
            let contribution = p * e;
            if contribution > best {
                best = contribution;
                i0 = i;
            }
        }
        powers[i0] *= ctx.emf_threshold_w / max_q;
    }
}

// ---- dual gradient descent -----------------------------------------------------

/// Dual gradient-descent settings. Learning rates default to
/// 1e-3/P_max for the budget multiplier and 1e-3/EMF_th for the exposure
/// multipliers; both must resolve into (0, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualGdConfig {
    /// Learning rate β_0 for the budget multiplier; None = 1e-3/P_max.
    pub beta_power: Option<f64>,
    /// Learning rate β_k for exposure multipliers; None = 1e-3/EMF_th.
    pub beta_emf: Option<f64>,
    /// Convergence tolerance τ on every constraint, watts.
    pub tolerance_w: f64,
    pub max_iterations: usize,
    /// Multipliers initialize uniformly on (0, this].
    pub multiplier_init_max: f64,
    /// Per-iteration cap on relative multiplier growth. The raw gradient
    /// step from a near-zero multiplier overshoots by orders of magnitude
    /// (the violation scales like 1/μ), so each update is limited to
    /// μ·(1+limit); once multipliers reach their working scale the limit
    /// stops binding and the plain gradient step takes over.
    pub relative_step_limit: f64,
}

impl Default for DualGdConfig {
    fn default() -> Self {
        DualGdConfig {
            beta_power: None,
            beta_emf: None,
            tolerance_w: 1e-3,
            max_iterations: 200_000,
            multiplier_init_max: 1e-6,
            relative_step_limit: 0.01,
        }
    }
}

impl DualGdConfig {
    /// Resolves the learning rates against the limits and checks ranges.
    pub fn resolve(&self, ctx: &EmfContext) -> Result<(f64, f64), CoreError> {
        let beta_power = self
            .beta_power
            .unwrap_or(1e-3 / ctx.max_transmit_power_w);
        let beta_emf = self.beta_emf.unwrap_or(1e-3 / ctx.emf_threshold_w);
        for (name, beta) in [("beta_power", beta_power), ("beta_emf", beta_emf)] {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(CoreError::InvalidConfig {
                    field: "dual_gd",
                    message: format!("{name} = {beta} must lie in (0, 1)"),
                });
            }
        }
        if !(self.tolerance_w > 0.0) {
            return Err(CoreError::InvalidConfig {
                field: "dual_gd",
                message: format!("tolerance_w = {} must be positive", self.tolerance_w),
            });
        }
        if self.max_iterations == 0 {
            return Err(CoreError::InvalidConfig {
                field: "dual_gd",
                message: "max_iterations must be at least 1".into(),
            });
        }
        if !(self.multiplier_init_max > 0.0) {
            return Err(CoreError::InvalidConfig {
                field: "dual_gd",
                message: "multiplier_init_max must be positive".into(),
            });
        }
        if !(self.relative_step_limit > 0.0) {
            return Err(CoreError::InvalidConfig {
                field: "dual_gd",
                message: "relative_step_limit must be positive".into(),
            });
        }
        Ok((beta_power, beta_emf))
    }
}

/// Projected dual gradient descent over the budget and every sampled
/// exposure constraint.
///
/// Each iteration maximizes the Lagrangian in closed form,
/// P_i = max(1/(μ_0 g_i + Σ_k μ_k E_k[i]) − N0/λ_i, 0), then walks the
/// multipliers of violated constraints (F_k ≥ τ) up their gradient,
/// projected to stay nonnegative and growth-limited per
/// `relative_step_limit`. Converged when every F_k ≤ τ.
pub fn dual_gd_allocation(
    lambda: &[f64],
    noise_w: f64,
    ctx: &EmfContext,
    cfg: &DualGdConfig,
    seed: u64,
) -> Result<PowerAllocation, CoreError> {
    let (beta_power, beta_emf) = cfg.resolve(ctx)?;
    let nu = lambda.len();
    let n_q = ctx.observation_forms.len();

    let mut rng = stream(seed);
    // Uniform on (0, multiplier_init_max]: 1 − random() never yields 0.
    let mut mu: Vec<f64> = (0..1 + n_q)
        .map(|_| cfg.multiplier_init_max * (1.0 - rng.random::<f64>()))
        .collect();

    let mut powers = vec![0.0; nu];
    let mut violations = vec![0.0; 1 + n_q];
    let mut best_violation = f64::INFINITY;
    let mut best: Option<(Vec<f64>, Vec<f64>, usize)> = None;

    for it in 1..=cfg.max_iterations {
        for i in 0..nu {
            let mut denom = mu[0] * ctx.g[i];
            for (k, form) in ctx.observation_forms.iter().enumerate() {
                denom += mu[1 + k] * form[i];
            }
            let p = 1.0 / denom - noise_w / lambda[i];
            powers[i] = p.max(0.0);
            if !powers[i].is_finite() {
                return Err(CoreError::NonFiniteValue("dual GD layer power"));
            }
        }

        violations[0] = ctx.transmit_power_w(&powers) - ctx.max_transmit_power_w;
        for k in 0..n_q {
            violations[1 + k] = ctx.received_power_at(k, &powers) - ctx.emf_threshold_w;
        }
        let worst = violations.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        if worst <= cfg.tolerance_w {
            return Ok(PowerAllocation {
                powers_w: powers,
                scheme: Scheme::DualGd,
                iterations: it,
                converged: true,
                multipliers: Some(mu),
            });
        }
        if worst < best_violation {
            best_violation = worst;
            best = Some((powers.clone(), mu.clone(), it));
        }

        for (k, &violation) in violations.iter().enumerate() {
            if violation < cfg.tolerance_w {
                continue;
            }
            let beta = if k == 0 { beta_power } else { beta_emf };
            let stepped = mu[k] + beta * violation;
            mu[k] = stepped.min(mu[k] * (1.0 + cfg.relative_step_limit)).max(0.0);
            if !mu[k].is_finite() {
                return Err(CoreError::NonFiniteValue("dual GD multiplier"));
            }
        }
    }

    let best_feasible = best.and_then(|(p, m, it)| {
        (best_violation <= cfg.tolerance_w).then(|| {
            Box::new(PowerAllocation {
                powers_w: p,
                scheme: Scheme::DualGd,
                iterations: it,
                converged: false,
                multipliers: Some(m),
            })
        })
    });
    Err(CoreError::ConvergenceFailure {
        iterations: cfg.max_iterations,
        max_violation_w: best_violation,
        best_feasible,
    })
}
