//! Phasor-domain dynamic simulator for power-system frequency response in
//! mixed fleets of synchronous generators and grid-forming inverters.
//!
//! The network is an algebraic layer (lossless sine-law flows under stiff
//! voltage regulation) solved by Newton iteration at every integration
//! stage; devices are low-order ODE models coupled through their bus
//! angles and electric powers. On top sit the frequency metrics (sliding
//! window ROCOF, nadir, settling, aggregate inertia), singular-perturbation
//! reduced models, and a scenario layer with bundled single-device, 9-bus,
//! and 39-bus test systems.
//!
//! Everything is generic over the floating-point scalar via
//! [`scalar::Scalar`]; the `*64` aliases below are the double-precision
//! instantiations the command-line front end and the bundled data use.

pub mod device;
pub mod engine;
pub mod metrics;
pub mod net;
pub mod reduced;
pub mod scalar;
pub mod scenario;

pub use scalar::Scalar;

pub type Network64 = net::Network<f64>;
pub type Scenario64 = scenario::Scenario<f64>;
pub type TimeSeries64 = engine::TimeSeries<f64>;
pub type MetricsReport64 = metrics::MetricsReport<f64>;
