//! OpenQASM 2.0 frontend.
//!
//! Parses the supported subset of OpenQASM 2.0, expands user-defined gates
//! and lowers every library gate onto the twelve native kinds. `measure` and
//! `barrier` are dropped; `creg` declarations are recorded but otherwise
//! ignored. Conditionals, `reset` and `opaque` are rejected.
//!
//! Qubits are flattened in register declaration order: index 0 of the first
//! `qreg` is flat qubit 0, the least significant qubit.

mod emit;
mod lexer;
pub mod library;
mod parser;

use std::fmt;

use thiserror::Error;

pub use emit::emit;
pub use library::lower;
pub use parser::parse;

/// The twelve native gate kinds, in opcode order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    RX,
    RY,
    RZ,
    U1,
}

impl GateKind {
    pub const ALL: [GateKind; 12] = [
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::U1,
    ];

    pub fn is_rotational(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::U1)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(library::native_name(*self, false))
    }
}

/// One native gate applied to flat qubit indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateApplication {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    /// Radians; present exactly for rotational kinds.
    pub angle: Option<f64>,
}

impl GateApplication {
    pub fn new(kind: GateKind, target: usize) -> Self {
        GateApplication { kind, target, control: None, angle: None }
    }

    pub fn controlled(kind: GateKind, control: usize, target: usize) -> Self {
        GateApplication { kind, target, control: Some(control), angle: None }
    }

    pub fn rotation(kind: GateKind, target: usize, angle: f64) -> Self {
        GateApplication { kind, target, control: None, angle: Some(angle) }
    }

    pub fn with_control(mut self, control: usize) -> Self {
        self.control = Some(control);
        self
    }

    pub fn is_valid(&self) -> bool {
        self.angle.is_some() == self.kind.is_rotational() && self.control != Some(self.target)
    }

    /// Highest qubit index touched.
    pub fn max_qubit(&self) -> usize {
        self.control.map_or(self.target, |c| c.max(self.target))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub size: usize,
}

/// A parsed and lowered circuit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceCircuit {
    pub qregs: Vec<Register>,
    pub cregs: Vec<Register>,
    pub gates: Vec<GateApplication>,
}

impl SourceCircuit {
    /// A circuit over a single register `q` of `n` qubits.
    pub fn with_qubits(n: usize) -> Self {
        SourceCircuit {
            qregs: vec![Register { name: "q".into(), size: n }],
            cregs: Vec::new(),
            gates: Vec::new(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qregs.iter().map(|r| r.size).sum()
    }

    /// Flat index of `name[index]`.
    pub fn qubit_index(&self, name: &str, index: usize) -> Option<usize> {
        let mut base = 0;
        for r in &self.qregs {
            if r.name == name {
                return (index < r.size).then_some(base + index);
            }
            base += r.size;
        }
        None
    }

    /// Inverse of [`qubit_index`](Self::qubit_index).
    pub fn qubit_name(&self, flat: usize) -> Option<(&str, usize)> {
        let mut base = 0;
        for r in &self.qregs {
            if flat < base + r.size {
                return Some((&r.name, flat - base));
            }
            base += r.size;
        }
        None
    }

    pub fn push(&mut self, gate: GateApplication) {
        self.gates.push(gate);
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QasmErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("missing `OPENQASM 2.0;` header")]
    MissingHeader,
    #[error("unsupported OpenQASM version {0}")]
    Version(String),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{gate}` expects {} parameter(s) and {} qubit(s), got {} and {}", params.0, qubits.0, params.1, qubits.1)]
    Arity { gate: String, params: (usize, usize), qubits: (usize, usize) },
    #[error("gate `{gate}` uses qubit {qubit} more than once")]
    RepeatedQubit { gate: String, qubit: usize },
    #[error("unsupported: conditional execution")]
    Conditional,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("index {index} out of range for register `{register}` of size {size}")]
    IndexOutOfRange { register: String, index: usize, size: usize },
    #[error("register size mismatch in broadcast of `{0}`")]
    BroadcastMismatch(String),
    #[error("recursive gate definition `{0}`")]
    RecursiveGate(String),
    #[error("`{0}` is already defined")]
    Redefinition(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct QasmError {
    pub line: usize,
    pub col: usize,
    pub kind: QasmErrorKind,
}

impl QasmError {
    pub fn new(line: usize, col: usize, kind: QasmErrorKind) -> Self {
        QasmError { line, col, kind }
    }
}
