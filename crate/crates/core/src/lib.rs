//! Simulation of Λ-type spin defects coupled to one mechanical mode:
//! Hilbert-space algebra, models, Lindblad dynamics, STIRAP pulse design,
//! dark-state analysis and the gate and transfer protocols built on them.

pub mod algebra;
pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod models;
pub mod protocols;
pub mod pulses;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

/// Double-precision system description.
pub type SystemSpec64 = models::SystemSpec<f64>;
/// Single-precision system description.
pub type SystemSpec32 = models::SystemSpec<f32>;
pub type DecoherenceSpec64 = models::DecoherenceSpec<f64>;
pub type DecoherenceSpec32 = models::DecoherenceSpec<f32>;
pub type CzDesign64 = pulses::CzDesign<f64>;
pub type CzDesign32 = pulses::CzDesign<f32>;
pub type StirapSchedule64 = pulses::StirapSchedule<f64>;
pub type StirapSchedule32 = pulses::StirapSchedule<f32>;
pub type IntegratorConfig64 = dynamics::IntegratorConfig<f64>;
pub type IntegratorConfig32 = dynamics::IntegratorConfig<f32>;
