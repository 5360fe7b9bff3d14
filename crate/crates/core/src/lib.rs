//! Density-matrix simulator for a two-spin information heat engine.
//!
//! Two coupled spins in a magnetic field, each with its own thermal
//! reservoir, driven by resonant pulses: one spin measures the other through
//! a conditional flip and the acquired information is cashed in as work. The
//! crate evolves the 4x4 density matrix explicitly, keeps a per-step ledger
//! of work, heat and entropy flows, and checks the simulated totals against
//! the closed-form targets (swap work, Carnot work, erasure heat, quantum
//! efficiency under decoherence).
//!
//! Modules:
//! * [`qmatrix`] -- dense 2x2/4x4 complex algebra and a Jacobi eigensolver;
//! * [`spins`] -- Hamiltonians, pulses, the pulse-compiled controlled-NOT;
//! * [`thermo`] -- Gibbs states, von Neumann entropy, measurement channels;
//! * [`engine`] -- cycle protocols with full thermodynamic bookkeeping.

pub mod engine;
pub mod qmatrix;
pub mod spins;
pub mod thermo;

pub use engine::{
    CycleLedger, CycleOutcome, EngineError, EngineState, LedgerStep, RampMode, RampSchedule,
    TippedSpec,
};
pub use qmatrix::{CMatrix, Complex, DensityMatrix, MatrixError, Spin, Unitary};
pub use spins::{CnotKind, PulseSpec, SpinError, SpinParams, TwoSpinHamiltonian, WorkRecord};
pub use thermo::{EfficiencyReport, GibbsSpec, MeasurementChannel, SpinDistribution, ThermoError};
