//! Time-slotted simulator for dynamic UPF placement over a base-station
//! backhaul graph.
//!
//! The pipeline: parse a base-station deployment file into a single connected
//! backhaul graph with precomputed hop distances ([`topology`]), stream a
//! vehicular mobility trace into per-slot snapshots of active UEs
//! ([`mobility`]), attach UEs to base stations with a log-distance path-loss
//! model and handover hysteresis ([`association`]), run a set of UPF placement
//! algorithms per slot ([`allocation`], backed by [`clustering`]), and report
//! hop-latency percentiles and execution times ([`metrics`], [`harness`]).

pub mod allocation;
pub mod association;
pub mod clustering;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod mobility;
pub mod topology;

pub use allocation::{Algorithm, Allocation};
pub use association::{ActiveLoad, AssociationState, PathLossModel};
pub use clustering::Clustering;
pub use error::{Error, Result};
pub use harness::{EvalMode, OutputFormat, ResultsTable, SweepConfig};
pub use metrics::{AggregateMetrics, SlotMetrics};
pub use mobility::{SlotStream, TimeSlotSnapshot, UeId};
pub use topology::{BaseStation, HopMatrix, NetworkGraph};
