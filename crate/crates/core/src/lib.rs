pub mod clock;
pub mod dsl;
pub mod numeric;
pub mod sim;
pub mod speech;
pub mod llm;
pub mod config;
pub mod orchestrator;
pub mod service;
pub mod wire;

pub use num_rational::Ratio;

/// Variable range over `f64`, the type used throughout the runtime.
pub type VariableRangeF64 = numeric::VariableRange<f64>;
/// Single-precision variable range.
pub type VariableRangeF32 = numeric::VariableRange<f32>;
/// Exact variable range for oracle checks.
pub type ExactVariableRange = numeric::VariableRange<Ratio<i64>>;
pub type VariableSpecF64 = dsl::VariableSpec<f64>;
pub type ExactVariableSpec = dsl::VariableSpec<Ratio<i64>>;
