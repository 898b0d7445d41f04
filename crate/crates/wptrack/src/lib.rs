//! WPTrack: single-target indoor tracking from one Wi-Fi link fused with
//! pressure-insole gait data, plus a physics-grounded simulator for both
//! sensor streams.

pub mod csi;
pub mod fusion;
pub mod geometry;
pub mod insole;
pub mod io;
pub mod pipeline;
pub mod real;
pub mod sim;

pub use real::Real;

/// Concrete f64 aliases for the generic core types.
pub type Point2 = geometry::Point2<f64>;
pub type Rect = geometry::Rect<f64>;
pub type Scene = geometry::Scene<f64>;
pub type TargetState = geometry::TargetState<f64>;
pub type EllipseParams = geometry::EllipseParams<f64>;
pub type PressureFrame = insole::PressureFrame<f64>;
pub type StepEvent = insole::StepEvent<f64>;
pub type InsoleCfg = insole::InsoleCfg<f64>;
pub type SensorLayout = insole::SensorLayout<f64>;
pub type StepMeasurement = fusion::StepMeasurement<f64>;
pub type FusionConfig = fusion::FusionConfig<f64>;
pub type Trajectory = fusion::Trajectory<f64>;
pub type TrackPoint = fusion::TrackPoint<f64>;
