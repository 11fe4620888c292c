//! Entropy-density sequences over scale grids, finite-size limit estimates,
//! upper/lower entropies over declared schedule families and the stepwise
//! `δ⁽⁰⁾` schedule.

mod delta0;
mod estimate;
mod schedule;
mod screening;
mod sequence;

pub use delta0::{delta0_schedule, gap_check, Delta0Schedule, Delta0Step, GapCheck};
pub use estimate::{
    estimate_limit, residual_f, tail_proxies, upper_lower_entropy, upper_lower_from_sequences, EstimateMethod,
    LimitEstimate, ScheduleProxies, UpperLowerEntropy,
};
pub use schedule::{DeltaSchedule, ScheduleStep};
pub use screening::{bump_step, strict_increase_screening, BumpCheck, ScreeningReport, SLOPE_THRESHOLD};
pub use sequence::{
    check_scales, entropy_density_sequence, geometric_scales, EntropyPoint, EntropySequence, Quantity,
};
