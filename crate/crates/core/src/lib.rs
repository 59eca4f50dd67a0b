//! Deterministic link-level models for downlink multi-user MIMO with
//! zero-forcing beamforming, passive reflecting surfaces, and
//! electromagnetic-exposure-aware power allocation.
//!
//! The crate covers one cell end to end:
//!
//! * [`scenario`] — seeded geometry: the panel array, user terminals,
//!   scatterers, reflecting surfaces, and the sampled safety circle;
//! * [`antenna`] — the element radiation pattern and the fixed electrical
//!   downtilt excitation of the panel;
//! * [`channel`] — planar-wave multipath channels per user plus free-space
//!   channels to arbitrary observation points;
//! * [`precoder`] — per-user SVD, layer selection, the zero-forcing
//!   pseudo-inverse, and the derived link metrics;
//! * [`allocators`] — the four layer-power allocation schemes (reference
//!   water-filling, reduced, enhanced, and dual gradient descent);
//! * [`evaluation`] — snapshot orchestration, received-power and exceedance
//!   grids, and the Monte Carlo protocol.
//!
//! Everything is deterministic given a seed: random draws come from
//! explicit, tagged ChaCha streams, and evaluation order never influences
//! results. The crate is `no_std`-compatible (with `alloc`); the `std`
//! feature (default) is only forwarded to dependencies.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod allocators;
pub mod antenna;
pub mod channel;
pub mod error;
pub mod evaluation;
pub mod geom;
pub mod linalg;
pub mod precoder;
pub mod rng;
pub mod scenario;
pub mod units;

pub use allocators::{
    dual_gd_allocation, enhance_allocation, reduce_allocation, waterfill, DualGdConfig,
    EmfContext, PowerAllocation, Scheme,
};
pub use channel::{build_channel, configure_ris_weights, observation_channel, ChannelSet};
pub use error::CoreError;
pub use evaluation::{
    evaluate_snapshot, exceedance_map, monte_carlo, power_heatmap, GridSpec, MonteCarloReport,
    SampleFailure, SimConfig, SnapshotEvaluation, SnapshotReport,
};
pub use precoder::{select_layers, svd_per_user, PrecoderState};
pub use scenario::{build_scenario, Scenario, ScenarioConfig};
