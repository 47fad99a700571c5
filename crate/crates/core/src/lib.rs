//! Quantum circuit emulation toolchain modelled on a butterfly-based
//! fixed-point SIMD architecture.
//!
//! The pipeline is:
//!
//! 1. [`qasm`] parses OpenQASM 2.0 into a flat list of the twelve native gates.
//! 2. [`compiler`] encodes that list into RISC-like instruction words plus a
//!    deduplicated sine/cosine table.
//! 3. [`engine`] executes the instruction stream on a state vector, either in
//!    exact floating point or bit-accurately in fixed point ([`fixedpoint`]).
//! 4. [`metrics`] scores a fixed-point run against the floating-point one.
//!
//! [`hwmodel`] estimates datapath counts, register-file sizes and cycle
//! counts for the full-parallel and windowed architectures, and [`hostlink`]
//! implements the ASCII host/board protocol with a loopback board.

pub mod bench;
pub mod compiler;
pub mod config;
pub mod engine;
pub mod fixedpoint;
pub mod hostlink;
pub mod hwmodel;
pub mod metrics;
pub mod qasm;

pub use compiler::{compile, AngleTable, Instruction, Opcode, Program};
pub use config::{ConfigError, ExecConfig, Rounding};
pub use engine::{run, SimState, StateVector};
pub use fixedpoint::{Fixed, FixedFormat, RoundingMode};
pub use metrics::QualityReport;
pub use qasm::{parse, GateApplication, GateKind, SourceCircuit};
