//! Reactive stepping controller, its parameterization and the trial costs.

mod cost;
mod params;
mod policy;
mod profile;

pub use cost::{
    cost_hardware, cost_nonsmooth, cost_of_transport, cost_smooth, CostId, FALL_COST_HARDWARE,
    FALL_COST_NONSMOOTH, WALK_THRESHOLD,
};
pub use params::{ControllerDims, ParamBound, ParamSpace, ReactiveParams};
pub use policy::{
    foot_placement, grf_targets, policy_step, rollout, swing_reference, ControllerMemory, ReactivePolicy,
    SWING_CLEARANCE,
};
pub use profile::SpeedProfile;
