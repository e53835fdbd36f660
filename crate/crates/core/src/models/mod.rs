//! Builders for power and water network models and the bundled demos.

pub mod power;
pub mod water;

pub use power::{build_power_descriptor, ieee14_demo, wssc_demo, PowerModel, PowerNetworkSpec};
pub use water::{build_water_descriptor, water_theft_demo, WaterModel, WaterNetworkSpec};
