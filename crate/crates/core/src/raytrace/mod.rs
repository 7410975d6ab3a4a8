//! Closed-form single-pair geometry and the exact oracle tracer.

pub mod closed;
pub mod exact;

pub use closed::{
    arrival_times, deflection_chain, deflection_magnitudes, entry_from_focus, focal_locus_slope, focus_closed_form,
    focus_parallelogram, focus_triangular, hypotenuse_crossings, ArrivalTimes, Crossings, DeflectionAngles,
    DeflectionChain, Focus,
};
pub use exact::{exact_focus, trace_exact, RaySegment, Region, SpinTrace, TraceResult};
