//! Pulse-program front end for the two-spin engine simulator: the text
//! format, protocol templates, parameter sweeps, and deterministic JSON/CSV
//! serialization of the ledgers.

pub mod check;
pub mod emit;
pub mod program;
pub mod runner;
pub mod templates;

pub use emit::Format;
pub use program::{
    parse_program, serialize_program, InitState, Instruction, KetSpec, ParseError, ParseErrorKind,
    ParsedProgram, PulseProgram,
};
pub use runner::{
    run_program, run_program_with_state, run_sweep, RunError, SweepParam, SweepRow, SweepSpec,
    SweepTable,
};
pub use templates::{Template, TemplateConfig};
