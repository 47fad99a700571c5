//! State-vector execution of instruction streams.
//!
//! A gate on target `t` transforms the amplitude couples `(i, i + 2^t)` where
//! bit `t` of `i` is clear. A control qubit `k` restricts this to couples
//! whose index has bit `k` set; every other amplitude is left untouched.
//! Couples are independent, so the result does not depend on the order in
//! which they are visited.
//!
//! Kernels follow the datapath's operation classes. X, Y, Z, S and S† only
//! exchange and negate components. H, T and T† multiply by the constant
//! `1/sqrt(2)`. RX, RY, RZ and U1 take two products per output component
//! using the table's sine and cosine. In the fixed backend every product is
//! rounded on its own before the sum.

mod dense;
mod state;

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::compiler::{AngleTable, Instruction, Opcode, Program};
use crate::config::ExecConfig;
use crate::fixedpoint::{Fixed, FixedFormat};

pub use dense::{dense_oracle, dense_state, gate_matrix, OracleError, MAX_ORACLE_QUBITS};
pub use state::{read_dump, write_dump, SimState, StateVector};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("target qubit {target} out of range for {n} qubits")]
    TargetOutOfRange { target: u32, n: u32 },
    #[error("control qubit {control} out of range for {n} qubits")]
    ControlOutOfRange { control: u32, n: u32 },
    #[error("immediate {imm} out of range for a {len}-entry angle table")]
    ImmOutOfRange { imm: u32, len: usize },
    #[error("program uses {used} qubits but the architecture supports {capacity}")]
    Capacity { used: u32, capacity: u32 },
    #[error("initial state has {got} qubits, program uses {want}")]
    InitialWidth { got: u32, want: u32 },
    #[error("initial state representation does not match the configured backend")]
    InitialBackend,
    #[error("shot count must be positive")]
    ZeroShots,
    #[error("state has no probability mass to sample from")]
    Degenerate,
}

/// Scalar arithmetic for one numeric backend.
#[allow(clippy::wrong_self_convention)]
pub trait Backend {
    type Scalar: Copy + PartialEq + std::fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Scalar;
    fn from_real(&self, x: f64) -> Self::Scalar;
    fn to_real(&self, x: Self::Scalar) -> f64;
    fn add(&self, a: Self::Scalar, b: Self::Scalar) -> Self::Scalar;
    fn sub(&self, a: Self::Scalar, b: Self::Scalar) -> Self::Scalar;
    fn neg(&self, a: Self::Scalar) -> Self::Scalar;
    fn mul(&self, a: Self::Scalar, b: Self::Scalar) -> Self::Scalar;
    /// The H/T constant in this representation.
    fn inv_sqrt2(&self) -> Self::Scalar;
}

/// Native `f64` reference arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct FloatBackend;

impl Backend for FloatBackend {
    type Scalar = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn from_real(&self, x: f64) -> f64 {
        x
    }
    fn to_real(&self, x: f64) -> f64 {
        x
    }
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    fn sub(&self, a: f64, b: f64) -> f64 {
        a - b
    }
    fn neg(&self, a: f64) -> f64 {
        -a
    }
    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    fn inv_sqrt2(&self) -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Bit-accurate fixed-point arithmetic.
#[derive(Debug, Clone, Copy)]
pub struct FixedBackend {
    format: FixedFormat,
    inv_sqrt2: Fixed,
}

impl FixedBackend {
    pub fn new(format: FixedFormat) -> Self {
        // Quantized once with the active rounding mode, as a stored constant.
        let inv_sqrt2 = format.from_real(std::f64::consts::FRAC_1_SQRT_2);
        FixedBackend { format, inv_sqrt2 }
    }

    pub fn format(&self) -> FixedFormat {
        self.format
    }
}

impl Backend for FixedBackend {
    type Scalar = Fixed;

    fn zero(&self) -> Fixed {
        Fixed::ZERO
    }
    fn from_real(&self, x: f64) -> Fixed {
        self.format.from_real(x)
    }
    fn to_real(&self, x: Fixed) -> f64 {
        self.format.to_real(x)
    }
    fn add(&self, a: Fixed, b: Fixed) -> Fixed {
        self.format.add(a, b)
    }
    fn sub(&self, a: Fixed, b: Fixed) -> Fixed {
        self.format.sub(a, b)
    }
    fn neg(&self, a: Fixed) -> Fixed {
        self.format.negate(a)
    }
    fn mul(&self, a: Fixed, b: Fixed) -> Fixed {
        self.format.mul(a, b)
    }
    fn inv_sqrt2(&self) -> Fixed {
        self.inv_sqrt2
    }
}

/// The interacting couples of one gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplePlan {
    pub target: u32,
    pub control: Option<u32>,
    /// `(i, i + 2^target)` in ascending order of `i`.
    pub pairs: Vec<(usize, usize)>,
}

fn check_qubits(n: u32, target: u32, control: Option<u32>) -> Result<(), EngineError> {
    if target >= n {
        return Err(EngineError::TargetOutOfRange { target, n });
    }
    if let Some(c) = control {
        if c >= n || c == target {
            return Err(EngineError::ControlOutOfRange { control: c, n });
        }
    }
    Ok(())
}

/// Couples for a gate on `target`, optionally masked by `control`, in
/// ascending order of the lower index.
pub fn couples(n: u32, target: u32, control: Option<u32>) -> impl Iterator<Item = (usize, usize)> {
    let stride = 1usize << target;
    let low = stride - 1;
    let cmask = control.map_or(0, |c| 1usize << c);
    (0..(1usize << n) >> 1)
        .map(move |k| ((k & !low) << 1) | (k & low))
        .filter(move |i| i & cmask == cmask)
        .map(move |i| (i, i | stride))
}

pub fn select_couples(n: u32, target: u32, control: Option<u32>) -> Result<CouplePlan, EngineError> {
    check_qubits(n, target, control)?;
    Ok(CouplePlan { target, control, pairs: couples(n, target, control).collect() })
}

/// A gate resolved against the angle table, ready to apply to couples.
#[derive(Debug, Clone, Copy)]
enum Kernel<S> {
    X,
    Y,
    Z,
    S,
    Sdg,
    H(S),
    T(S),
    Tdg(S),
    RX { sin: S, cos: S },
    RY { sin: S, cos: S },
    RZ { sin: S, cos: S },
    U1 { sin: S, cos: S },
}

impl<S: Copy> Kernel<S> {
    fn resolve<B: Backend<Scalar = S>>(b: &B, instr: &Instruction, table: &AngleTable) -> Result<Self, EngineError> {
        let trig = || {
            table
                .get(instr.imm as usize)
                .map(|p| (b.from_real(p.sin), b.from_real(p.cos)))
                .ok_or(EngineError::ImmOutOfRange { imm: instr.imm, len: table.len() })
        };
        Ok(match instr.opcode {
            Opcode::X => Kernel::X,
            Opcode::Y => Kernel::Y,
            Opcode::Z => Kernel::Z,
            Opcode::S => Kernel::S,
            Opcode::Sdg => Kernel::Sdg,
            Opcode::H => Kernel::H(b.inv_sqrt2()),
            Opcode::T => Kernel::T(b.inv_sqrt2()),
            Opcode::Tdg => Kernel::Tdg(b.inv_sqrt2()),
            Opcode::RX => {
                let (sin, cos) = trig()?;
                Kernel::RX { sin, cos }
            }
            Opcode::RY => {
                let (sin, cos) = trig()?;
                Kernel::RY { sin, cos }
            }
            Opcode::RZ => {
                let (sin, cos) = trig()?;
                Kernel::RZ { sin, cos }
            }
            Opcode::U1 => {
                let (sin, cos) = trig()?;
                Kernel::U1 { sin, cos }
            }
        })
    }

    /// Transforms one couple `(a, b)`.
    fn apply<B: Backend<Scalar = S>>(&self, bk: &B, a: Complex<S>, b: Complex<S>) -> (Complex<S>, Complex<S>) {
        let c = |re, im| Complex { re, im };
        // x*p + y*q with each product rounded separately.
        let dot = |x, p, y, q| bk.add(bk.mul(x, p), bk.mul(y, q));
        let cross = |x, p, y, q| bk.sub(bk.mul(x, p), bk.mul(y, q));
        match *self {
            Kernel::X => (b, a),
            Kernel::Y => (c(b.im, bk.neg(b.re)), c(bk.neg(a.im), a.re)),
            Kernel::Z => (a, c(bk.neg(b.re), bk.neg(b.im))),
            Kernel::S => (a, c(bk.neg(b.im), b.re)),
            Kernel::Sdg => (a, c(b.im, bk.neg(b.re))),
            Kernel::H(k) => (
                c(bk.mul(k, bk.add(a.re, b.re)), bk.mul(k, bk.add(a.im, b.im))),
                c(bk.mul(k, bk.sub(a.re, b.re)), bk.mul(k, bk.sub(a.im, b.im))),
            ),
            Kernel::T(k) => (a, c(bk.mul(k, bk.sub(b.re, b.im)), bk.mul(k, bk.add(b.re, b.im)))),
            Kernel::Tdg(k) => (a, c(bk.mul(k, bk.add(b.re, b.im)), bk.mul(k, bk.sub(b.im, b.re)))),
            Kernel::RX { sin, cos } => (
                c(dot(a.re, cos, b.im, sin), cross(a.im, cos, b.re, sin)),
                c(dot(b.re, cos, a.im, sin), cross(b.im, cos, a.re, sin)),
            ),
            Kernel::RY { sin, cos } => (
                c(cross(a.re, cos, b.re, sin), cross(a.im, cos, b.im, sin)),
                c(dot(b.re, cos, a.re, sin), dot(b.im, cos, a.im, sin)),
            ),
            Kernel::RZ { sin, cos } => (
                c(dot(a.re, cos, a.im, sin), cross(a.im, cos, a.re, sin)),
                c(cross(b.re, cos, b.im, sin), dot(b.im, cos, b.re, sin)),
            ),
            Kernel::U1 { sin, cos } => (a, c(cross(b.re, cos, b.im, sin), dot(b.im, cos, b.re, sin))),
        }
    }
}

/// Applies one instruction in place.
pub fn apply_gate<B: Backend>(
    backend: &B,
    state: &mut StateVector<B::Scalar>,
    instr: &Instruction,
    table: &AngleTable,
) -> Result<(), EngineError> {
    apply_in_order(backend, state, instr, table, false)
}

fn apply_in_order<B: Backend>(
    backend: &B,
    state: &mut StateVector<B::Scalar>,
    instr: &Instruction,
    table: &AngleTable,
    reverse: bool,
) -> Result<(), EngineError> {
    let n = state.n_qubits();
    let control = instr.control_qubit();
    check_qubits(n, instr.target, control)?;
    let kernel = Kernel::resolve(backend, instr, table)?;
    let amps = state.amplitudes_mut();
    let mut step = |(i, j): (usize, usize)| {
        let (a, b) = kernel.apply(backend, amps[i], amps[j]);
        amps[i] = a;
        amps[j] = b;
    };
    if reverse {
        couples(n, instr.target, control).collect::<Vec<_>>().into_iter().rev().for_each(&mut step);
    } else {
        couples(n, instr.target, control).for_each(step);
    }
    Ok(())
}

/// Runs every instruction in order.
pub fn run_backend<B: Backend>(
    backend: &B,
    state: &mut StateVector<B::Scalar>,
    instructions: &[Instruction],
    table: &AngleTable,
) -> Result<(), EngineError> {
    instructions.iter().try_for_each(|i| apply_gate(backend, state, i, table))
}

/// Executes a compiled program with the backend selected by
/// `config.rounding`. The state spans `program.used_qubits` qubits and
/// starts at `|0...0>` unless `initial` is given.
pub fn run(program: &Program, config: &ExecConfig, initial: Option<SimState>) -> Result<SimState, EngineError> {
    if program.used_qubits > config.n_qubits {
        return Err(EngineError::Capacity { used: program.used_qubits, capacity: config.n_qubits });
    }
    let n = program.used_qubits;
    match config.fixed_format() {
        None => {
            let mut state = match initial {
                None => StateVector::basis(&FloatBackend, n, 0),
                Some(SimState::Float(s)) => s,
                Some(SimState::Fixed { .. }) => return Err(EngineError::InitialBackend),
            };
            if state.n_qubits() != n {
                return Err(EngineError::InitialWidth { got: state.n_qubits(), want: n });
            }
            run_backend(&FloatBackend, &mut state, &program.instructions, &program.table)?;
            Ok(SimState::Float(state))
        }
        Some(format) => {
            let backend = FixedBackend::new(format);
            let mut state = match initial {
                None => StateVector::basis(&backend, n, 0),
                Some(SimState::Fixed { state, format: f }) if f == format => state,
                Some(_) => return Err(EngineError::InitialBackend),
            };
            if state.n_qubits() != n {
                return Err(EngineError::InitialWidth { got: state.n_qubits(), want: n });
            }
            run_backend(&backend, &mut state, &program.instructions, &program.table)?;
            Ok(SimState::Fixed { format, state })
        }
    }
}

/// Draws `shots` samples from the state's `|c_i|^2` distribution,
/// renormalized. Deterministic for a given seed.
pub fn sample_counts(state: &SimState, shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>, EngineError> {
    if shots == 0 {
        return Err(EngineError::ZeroShots);
    }
    let probs = state.probabilities();
    let dist = WeightedIndex::new(&probs).map_err(|_| EngineError::Degenerate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        *counts.entry(dist.sample(&mut rng)).or_insert(0) += 1;
    }
    Ok(counts)
}
