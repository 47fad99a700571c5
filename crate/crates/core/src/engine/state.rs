use std::fmt::Write as _;

use num_complex::{Complex, Complex64};

use super::{Backend, FixedBackend, FloatBackend};
use crate::fixedpoint::{Fixed, FixedFormat};

/// `2^n` amplitudes; bit `q` of the index is qubit `q` (qubit 0 is the LSQ).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<S> {
    n_qubits: u32,
    amps: Vec<Complex<S>>,
}

impl<S: Copy> StateVector<S> {
    /// The basis state `|index>`.
    pub fn basis<B: Backend<Scalar = S>>(backend: &B, n_qubits: u32, index: usize) -> Self {
        let zero = Complex { re: backend.zero(), im: backend.zero() };
        let mut amps = vec![zero; 1usize << n_qubits];
        amps[index] = Complex { re: backend.from_real(1.0), im: backend.zero() };
        StateVector { n_qubits, amps }
    }

    /// Panics unless `amps.len()` is a power of two.
    pub fn from_amplitudes(amps: Vec<Complex<S>>) -> Self {
        assert!(amps.len().is_power_of_two(), "state length must be a power of two");
        StateVector { n_qubits: amps.len().trailing_zeros(), amps }
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex<S>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<S>] {
        &mut self.amps
    }
}

impl StateVector<f64> {
    /// Quantizes into a fixed-point state.
    pub fn to_fixed(&self, format: FixedFormat) -> StateVector<Fixed> {
        let amps = self
            .amps
            .iter()
            .map(|c| Complex { re: format.from_real(c.re), im: format.from_real(c.im) })
            .collect();
        StateVector { n_qubits: self.n_qubits, amps }
    }
}

/// Result of a run in whichever backend executed it.
#[derive(Debug, Clone, PartialEq)]
pub enum SimState {
    Float(StateVector<f64>),
    Fixed { format: FixedFormat, state: StateVector<Fixed> },
}

impl SimState {
    pub fn n_qubits(&self) -> u32 {
        match self {
            SimState::Float(s) => s.n_qubits(),
            SimState::Fixed { state, .. } => state.n_qubits(),
        }
    }

    /// Amplitudes as `f64` complex numbers.
    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            SimState::Float(s) => s.amplitudes().to_vec(),
            SimState::Fixed { format, state } => state
                .amplitudes()
                .iter()
                .map(|c| Complex64::new(format.to_real(c.re), format.to_real(c.im)))
                .collect(),
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.to_complex().iter().map(|c| c.norm_sqr()).collect()
    }

    /// True when any fixed-point operation saturated.
    pub fn overflowed(&self) -> bool {
        match self {
            SimState::Float(_) => false,
            SimState::Fixed { state, .. } => state.amplitudes().iter().any(|c| c.re.overflow || c.im.overflow),
        }
    }

    pub fn float_basis(n_qubits: u32) -> Self {
        SimState::Float(StateVector::basis(&FloatBackend, n_qubits, 0))
    }

    pub fn fixed_basis(format: FixedFormat, n_qubits: u32) -> Self {
        SimState::Fixed { format, state: StateVector::basis(&FixedBackend::new(format), n_qubits, 0) }
    }
}

/// State dump: one `re im` line per amplitude, index ascending. `raw`
/// writes fixed-point states as their raw integers.
pub fn write_dump(state: &SimState, raw: bool) -> String {
    let mut s = String::new();
    match (state, raw) {
        (SimState::Fixed { state, .. }, true) => {
            for c in state.amplitudes() {
                let _ = writeln!(s, "{} {}", c.re.raw, c.im.raw);
            }
        }
        _ => {
            for c in state.to_complex() {
                let _ = writeln!(s, "{:?} {:?}", c.re, c.im);
            }
        }
    }
    s
}

/// Parses a dump written with real values.
pub fn read_dump(text: &str) -> Result<Vec<Complex64>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let mut it = line.split_whitespace();
        let mut next = || -> Result<f64, String> {
            it.next()
                .ok_or_else(|| format!("line {}: expected `re im`", i + 1))?
                .parse()
                .map_err(|_| format!("line {}: bad number", i + 1))
        };
        out.push(Complex64::new(next()?, next()?));
    }
    if !out.len().is_power_of_two() {
        return Err(format!("{} amplitudes is not a power of two", out.len()));
    }
    Ok(out)
}
