//! Loiter-lane reinsertion for fixed-wing UAV corridors.
//!
//! - [`geometry`]: corridor design relations and the planar layout.
//! - [`slots`]: virtual slots rotating on the loiter circle.
//! - [`guidance`]: insertion feasibility, reinsertion planning and speed commands.
//! - [`sim`]: deterministic fixed-step unicycle simulation with separation monitoring.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*F64` / `*F32`
//! aliases below name the common instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod guidance;
pub mod scalar;
pub mod sim;
pub mod slots;

pub use error::{Error, Result};
pub use geometry::{
    build_layout, loiter_radius, loiter_separation, patch_bounds, patch_length, CorridorLayout, CorridorParams,
    LoiterSizing, Path, PathPrimitive, Vec2,
};
pub use guidance::{
    assign_speeds, check_feasibility, classify_case, outgoing_speed, plan_reinsertion, Feasibility, InsertionCase,
    PatchState, PlanBranch, PlanOutcome, ReinsertionPlan, SpeedBand, SpeedCommandSet,
};
pub use scalar::Scalar;
pub use sim::{run_scenario, EventKind, Lane, Scenario, ScenarioOutcome, ScenarioRun, UavState};
pub use slots::{SlotRing, UavId};

pub type CorridorParamsF64 = CorridorParams<f64>;
pub type CorridorParamsF32 = CorridorParams<f32>;
pub type CorridorLayoutF64 = CorridorLayout<f64>;
pub type CorridorLayoutF32 = CorridorLayout<f32>;
pub type SlotRingF64 = SlotRing<f64>;
pub type SlotRingF32 = SlotRing<f32>;
pub type PatchStateF64 = PatchState<f64>;
pub type PatchStateF32 = PatchState<f32>;
pub type ReinsertionPlanF64 = ReinsertionPlan<f64>;
pub type ReinsertionPlanF32 = ReinsertionPlan<f32>;
pub type ScenarioF64 = Scenario<f64>;
pub type ScenarioF32 = Scenario<f32>;
pub type ScenarioRunF64 = ScenarioRun<f64>;
pub type ScenarioRunF32 = ScenarioRun<f32>;
