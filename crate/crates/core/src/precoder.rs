//! Per-user SVD, layer selection, the zero-forcing pseudo-inverse, and the
//! metrics derived from a beamformer: transmit power, capacity, per-layer
//! SINR, and received power at observation points.
//!
//! Selected layers index the strongest singular directions of each user's
//! channel. Stacking the corresponding right-singular rows gives Ṽ (ν×M);
//! the zero-forcing right inverse Ṽ⁺ = Ṽ^H (Ṽ Ṽ^H)⁻¹ makes the effective
//! layer channels orthogonal, so each layer sees only its own power scaled
//! by its squared singular value.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;

use crate::allocators::PowerAllocation;
use crate::error::CoreError;
use crate::linalg;

/// Condition-number ceiling on Ṽ Ṽ^H before layer selection is declared
/// rank deficient.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Thin SVD of one user's channel, singular values descending.
#[derive(Clone, Debug, PartialEq)]
pub struct UserDecomposition {
    pub u: DMatrix<Complex64>,
    pub singular_values: DVector<f64>,
    /// Right-singular rows (V^H), r×M.
    pub v_h: DMatrix<Complex64>,
}

/// Identifies one selected spatial stream: `layer` indexes the user's
/// singular values in descending order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelectedLayer {
    pub user: usize,
    pub layer: usize,
}

/// Zero-forcing precoder state for one snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecoderState {
    pub users: Vec<UserDecomposition>,
    /// Selected (user, layer) pairs in user order, length ν.
    pub selected: Vec<SelectedLayer>,
    /// Squared singular value per selected layer.
    pub lambda: Vec<f64>,
    /// Stacked selected right-singular rows, ν×M.
    pub v_tilde: DMatrix<Complex64>,
    /// Right inverse Ṽ^H (Ṽ Ṽ^H)⁻¹, M×ν.
    pub v_tilde_pinv: DMatrix<Complex64>,
    /// (Ṽ Ṽ^H)⁻¹, ν×ν.
    pub gram_inverse: DMatrix<Complex64>,
    /// Diagonal of the gram inverse: per-layer transmit-power weights.
    pub g: Vec<f64>,
}

/// Thin SVD of one user's N×M channel (N ≤ M), singular values descending.
pub fn svd_per_user(h: &DMatrix<Complex64>) -> Result<UserDecomposition, CoreError> {
    if h.nrows() > h.ncols() {
        return Err(CoreError::Domain(alloc::format!(
            "channel must be wide: {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let (u, singular_values, v_h) = linalg::thin_svd_sorted(h)?;
    Ok(UserDecomposition {
        u,
        singular_values,
        v_h,
    })
}

/// Selects the `layers_per_user[l]` strongest layers of each user and builds
/// the zero-forcing state. Ties between equal singular values keep the lower
/// layer index.
pub fn select_layers(
    users: Vec<UserDecomposition>,
    layers_per_user: &[usize],
) -> Result<PrecoderState, CoreError> {
    if users.len() != layers_per_user.len() {
        return Err(CoreError::Domain(alloc::format!(
            "{} users but {} layer counts",
            users.len(),
            layers_per_user.len()
        )));
    }
    let mut selected = Vec::new();
    let mut lambda = Vec::new();
    for (l, (user, &nu)) in users.iter().zip(layers_per_user).enumerate() {
        if nu == 0 || nu > user.singular_values.len() {
            return Err(CoreError::Domain(alloc::format!(
                "user {l}: cannot select {nu} of {} layers",
                user.singular_values.len()
            )));
        }
        for j in 0..nu {
            let s = user.singular_values[j];
            if s <= 0.0 {
                return Err(CoreError::RankDeficient(alloc::format!(
                    "user {l} layer {j} has zero singular value"
                )));
            }
            selected.push(SelectedLayer { user: l, layer: j });
            lambda.push(s * s);
        }
    }

    let nu_total = selected.len();
    let m = users[0].v_h.ncols();
    let mut v_tilde = DMatrix::zeros(nu_total, m);
    for (i, sel) in selected.iter().enumerate() {
        v_tilde
            .row_mut(i)
            .copy_from(&users[sel.user].v_h.row(sel.layer));
    }

    let gram = &v_tilde * v_tilde.adjoint();
    let gram_inverse = linalg::hermitian_inverse_guarded(&gram, GRAM_CONDITION_LIMIT)?;
    let v_tilde_pinv = v_tilde.adjoint() * &gram_inverse;
    let g: Vec<f64> = (0..nu_total).map(|i| gram_inverse[(i, i)].re).collect();

    Ok(PrecoderState {
        users,
        selected,
        lambda,
        v_tilde,
        v_tilde_pinv,
        gram_inverse,
        g,
    })
}

impl PrecoderState {
    pub fn layer_count(&self) -> usize {
        self.selected.len()
    }

    /// Per-layer received-power quadratic form at one observation row:
    /// entry i is |(h_q Ṽ⁺)_i|², so the received power under powers P is
    /// Σ_i P_i · form_i.
    pub fn observation_form(&self, h_q: &RowDVector<Complex64>) -> Vec<f64> {
        let row = h_q * &self.v_tilde_pinv;
        row.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// B = Ṽ⁺ · diag(√P), the transmit beamformer (M×ν).
pub fn compose_beamformer(state: &PrecoderState, alloc: &PowerAllocation) -> DMatrix<Complex64> {
    let mut b = state.v_tilde_pinv.clone();
    for (i, &p) in alloc.powers_w.iter().enumerate() {
        let s = p.sqrt();
        for r in 0..b.nrows() {
            b[(r, i)] *= s;
        }
    }
    b
}

/// Total radiated power tr[B B^H] = Σ_i P_i g_i, in watts.
pub fn total_transmit_power_w(state: &PrecoderState, powers_w: &[f64]) -> f64 {
    powers_w
        .iter()
        .zip(&state.g)
        .map(|(p, g)| p * g)
        .sum()
}

/// Shannon sum rate ω Σ log2(1 + λ_i P_i / N0), in bits per second.
pub fn capacity_bps(
    state: &PrecoderState,
    alloc: &PowerAllocation,
    bandwidth_hz: f64,
    noise_power_w: f64,
) -> f64 {
    state
        .lambda
        .iter()
        .zip(&alloc.powers_w)
        .map(|(l, p)| (1.0 + l * p / noise_power_w).log2())
        .sum::<f64>()
        * bandwidth_hz
}

/// Per-layer post-processing SNR λ_i P_i / N0 in dB; layers with zero power
/// report negative infinity.
pub fn sinr_per_layer_db(state: &PrecoderState, alloc: &PowerAllocation, noise_power_w: f64) -> Vec<f64> {
    state
        .lambda
        .iter()
        .zip(&alloc.powers_w)
        .map(|(l, p)| {
            if *p > 0.0 {
                10.0 * (l * p / noise_power_w).log10()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect()
}

/// Received power at an observation row: squared norm of h_q · B, in watts.
pub fn received_power_w(h_q: &RowDVector<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (h_q * b).iter().map(|v| v.norm_sqr()).sum()
}

/// Received power from precomputed quadratic forms: Σ_i P_i · form_i.
pub fn received_power_from_form(powers_w: &[f64], form: &[f64]) -> f64 {
    powers_w.iter().zip(form).map(|(p, e)| p * e).sum()
}
