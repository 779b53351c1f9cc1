//! Threshold-dependent camouflaging toolchain: PLA reading, dual-rail domino
//! synthesis, camouflage insertion, candidate-space enumeration, an
//! oracle-guided attack, overhead analysis and a cell-level device model.
//!
//! The numeric analyses are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common instantiations.

pub mod attack;
pub mod camo;
pub mod cli;
pub mod device;
pub mod netlist;
pub mod overhead;
pub mod pla;
pub mod scalar;
pub mod signature;
pub mod synth;

pub use attack::{run_attack, AttackBudget, AttackMode, AttackState, AttackStatus, NetlistOracle, Oracle};
pub use camo::{
    apply_camouflage, enumerate_candidates, resolve, select_random, CamoAssignment, CamoChoice, CamoPlan,
    CandidateSpace,
};
pub use device::{
    cascade_corrected, cascade_ideal, corner_sweep, inverter_trip_point, robustness_condition, CornerGrid, Flavor,
    ProcessSpread,
};
pub use netlist::{Gate, GateId, GateKind, NetId, Netlist, NetlistBuilder, VthFlavor};
pub use overhead::{critical_path_delay, overhead_report, overhead_sweep, total_power, CellKey};
pub use pla::{parse_pla, PlaTable};
pub use scalar::Scalar;
pub use signature::{signature, SignatureMode, TruthSignature};
pub use synth::{assign_vth_flavors, check_domino_compatible, synthesize, TreeShape};

pub type CellCharacterization = overhead::CellCharacterization<f64>;
pub type CellCharacterizationF32 = overhead::CellCharacterization<f32>;
pub type OverheadReport = overhead::OverheadReport<f64>;
pub type OverheadReportF32 = overhead::OverheadReport<f32>;
pub type SweepReport = overhead::SweepReport<f64>;
pub type DeviceParams = device::DeviceParams<f64>;
pub type DeviceParamsF32 = device::DeviceParams<f32>;
pub type InverterGeometry = device::InverterGeometry<f64>;
pub type InverterGeometryF32 = device::InverterGeometry<f32>;
pub type DeviceConfig = device::DeviceConfig<f64>;
pub type WidthRange = device::WidthRange<f64>;
pub type CornerSweep = device::SweepResult<f64>;
