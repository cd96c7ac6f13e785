//! Quantum-inspired genetic search for wireless-sensor-network topology
//! control.
//!
//! Two searches share one generational engine:
//!
//! * `qiga2`: order-2 *linked quantum registers*. Nodes are paired at start-up;
//!   each pair owns a 2-qubit register (one gene per node) and a memory of the
//!   pair distance. Pairs that wake together are stepped toward a target
//!   connection distance.
//! * `qga`: the order-1 baseline, one independent qubit per node and fixed
//!   positions.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the working precision to `f64`, which is what the
//! [`harness`] and the `lqr-topo` binary use.

pub mod engine;
pub mod harness;
pub mod lqr;
pub mod qcore;
pub mod rng;
pub mod scalar;
pub mod wsn;

pub use engine::{Algorithm, EngineError};
pub use lqr::AdjustmentMode;
pub use rng::CounterRng;
pub use scalar::Scalar;
pub use wsn::ActivationVector;

pub type QuantumRegister = qcore::QuantumRegister<f64>;
pub type OrderMetrics = qcore::OrderMetrics<f64>;
pub type Point = wsn::Point<f64>;
pub type Node = wsn::Node<f64>;
pub type Area = wsn::Area<f64>;
pub type Scenario = wsn::Scenario<f64>;
pub type TopologyMetrics = wsn::TopologyMetrics<f64>;
pub type LinkedRegister = lqr::LinkedRegister<f64>;
pub type PairingPlan = lqr::PairingPlan<f64>;
pub type EngineConfig = engine::EngineConfig<f64>;
pub type FitnessWeights = engine::FitnessWeights<f64>;
pub type Feasibility = engine::Feasibility<f64>;
pub type Population = engine::Population<f64>;
pub type RunResult = engine::RunResult<f64>;

pub type QuantumRegister32 = qcore::QuantumRegister<f32>;
pub type Scenario32 = wsn::Scenario<f32>;
pub type EngineConfig32 = engine::EngineConfig<f32>;
pub type RunResult32 = engine::RunResult<f32>;
