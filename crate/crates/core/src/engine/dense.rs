//! Brute-force circuit unitary from per-layer tensor products.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use thiserror::Error;

use crate::qasm::{GateApplication, GateKind, SourceCircuit};

/// Largest circuit the oracle will expand (a 1024 x 1024 matrix).
pub const MAX_ORACLE_QUBITS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("dense oracle limited to {MAX_ORACLE_QUBITS} qubits, circuit has {0}")]
    TooLarge(usize),
    #[error("gate {0} needs an angle")]
    MissingAngle(GateKind),
    #[error("gate on qubit {qubit} outside a {n}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n: usize },
}

/// The 2x2 unitary of a native gate. Rotations take the source angle.
pub fn gate_matrix(kind: GateKind, angle: Option<f64>) -> Result<Matrix2<Complex64>, OracleError> {
    let r = |x: f64| Complex64::new(x, 0.0);
    let i = |x: f64| Complex64::new(0.0, x);
    let z = r(0.0);
    let one = r(1.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let theta = || angle.ok_or(OracleError::MissingAngle(kind));
    Ok(match kind {
        GateKind::X => Matrix2::new(z, one, one, z),
        GateKind::Y => Matrix2::new(z, i(-1.0), i(1.0), z),
        GateKind::Z => Matrix2::new(one, z, z, r(-1.0)),
        GateKind::H => Matrix2::new(r(h), r(h), r(h), r(-h)),
        GateKind::S => Matrix2::new(one, z, z, i(1.0)),
        GateKind::Sdg => Matrix2::new(one, z, z, i(-1.0)),
        GateKind::T => Matrix2::new(one, z, z, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
        GateKind::Tdg => Matrix2::new(one, z, z, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
        GateKind::RX => {
            let (s, c) = (theta()? / 2.0).sin_cos();
            Matrix2::new(r(c), i(-s), i(-s), r(c))
        }
        GateKind::RY => {
            let (s, c) = (theta()? / 2.0).sin_cos();
            Matrix2::new(r(c), r(-s), r(s), r(c))
        }
        GateKind::RZ => {
            let t = theta()?;
            Matrix2::new(Complex64::from_polar(1.0, -t / 2.0), z, z, Complex64::from_polar(1.0, t / 2.0))
        }
        GateKind::U1 => Matrix2::new(one, z, z, Complex64::from_polar(1.0, theta()?)),
    })
}

/// Groups gates into layers: each gate goes into the first layer after the
/// last one touching any of its qubits.
fn layers(gates: &[GateApplication], n: usize) -> Vec<Vec<&GateApplication>> {
    let mut depth = vec![0usize; n];
    let mut out: Vec<Vec<&GateApplication>> = Vec::new();
    for g in gates {
        let wires = std::iter::once(g.target).chain(g.control);
        let d = wires.clone().map(|q| depth[q]).max().unwrap_or(0);
        if out.len() <= d {
            out.push(Vec::new());
        }
        out[d].push(g);
        wires.for_each(|q| depth[q] = d + 1);
    }
    out
}

fn to_dense(m: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
}

/// Kronecker product of per-wire factors, MSQ first.
fn kron_wires(wires: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    wires
        .iter()
        .rev()
        .fold(DMatrix::identity(1, 1), |acc, w| acc.kronecker(w))
}

/// Matrix of one layer. Each controlled gate splits into a term with
/// `|0><0|` on the control and identity on the target, plus a term with
/// `|1><1|` on the control and the gate on the target.
fn layer_matrix(layer: &[&GateApplication], n: usize) -> Result<DMatrix<Complex64>, OracleError> {
    let eye = DMatrix::<Complex64>::identity(2, 2);
    let mut p0 = DMatrix::<Complex64>::zeros(2, 2);
    p0[(0, 0)] = Complex64::new(1.0, 0.0);
    let mut p1 = DMatrix::<Complex64>::zeros(2, 2);
    p1[(1, 1)] = Complex64::new(1.0, 0.0);

    let mut base = vec![eye.clone(); n];
    let mut controlled = Vec::new();
    for g in layer {
        let u = to_dense(&gate_matrix(g.kind, g.angle)?);
        match g.control {
            None => base[g.target] = u,
            Some(c) => controlled.push((c, g.target, u)),
        }
    }
    let dim = 1usize << n;
    let mut total = DMatrix::<Complex64>::zeros(dim, dim);
    for choice in 0..1usize << controlled.len() {
        let mut wires = base.clone();
        for (k, (c, t, u)) in controlled.iter().enumerate() {
            if choice >> k & 1 == 0 {
                wires[*c] = p0.clone();
            } else {
                wires[*c] = p1.clone();
                wires[*t] = u.clone();
            }
        }
        total += kron_wires(&wires);
    }
    Ok(total)
}

/// Full circuit unitary `G_L ... G_2 G_1`.
pub fn dense_oracle(circuit: &SourceCircuit) -> Result<DMatrix<Complex64>, OracleError> {
    let n = circuit.qubit_count();
    if n > MAX_ORACLE_QUBITS {
        return Err(OracleError::TooLarge(n));
    }
    if let Some(q) = circuit.gates.iter().map(|g| g.max_qubit()).find(|&q| q >= n) {
        return Err(OracleError::QubitOutOfRange { qubit: q, n });
    }
    let dim = 1usize << n;
    let mut g = DMatrix::<Complex64>::identity(dim, dim);
    for layer in layers(&circuit.gates, n) {
        g = layer_matrix(&layer, n)? * g;
    }
    Ok(g)
}

/// `dense_oracle(circuit) |0...0>`.
pub fn dense_state(circuit: &SourceCircuit) -> Result<Vec<Complex64>, OracleError> {
    Ok(dense_oracle(circuit)?.column(0).iter().copied().collect())
}
