//! Built-in gate library: the `qelib1.inc` surface lowered onto the twelve
//! native kinds.

use std::f64::consts::FRAC_PI_2;

use super::{GateApplication, GateKind, QasmErrorKind};

/// `(name, parameter count, qubit count)` for every library gate.
const SIGNATURES: &[(&str, usize, usize)] = &[
    ("U", 3, 1),
    ("CX", 0, 2),
    ("id", 0, 1),
    ("x", 0, 1),
    ("y", 0, 1),
    ("z", 0, 1),
    ("h", 0, 1),
    ("s", 0, 1),
    ("sdg", 0, 1),
    ("t", 0, 1),
    ("tdg", 0, 1),
    ("sx", 0, 1),
    ("sxdg", 0, 1),
    ("rx", 1, 1),
    ("ry", 1, 1),
    ("rz", 1, 1),
    ("u1", 1, 1),
    ("p", 1, 1),
    ("u2", 2, 1),
    ("u3", 3, 1),
    ("u", 3, 1),
    ("cx", 0, 2),
    ("cy", 0, 2),
    ("cz", 0, 2),
    ("ch", 0, 2),
    ("cs", 0, 2),
    ("csdg", 0, 2),
    ("ct", 0, 2),
    ("ctdg", 0, 2),
    ("crx", 1, 2),
    ("cry", 1, 2),
    ("crz", 1, 2),
    ("cu1", 1, 2),
    ("cp", 1, 2),
    ("cu3", 3, 2),
    ("swap", 0, 2),
    ("ccx", 0, 3),
    ("cswap", 0, 3),
];

pub fn signature(name: &str) -> Option<(usize, usize)> {
    SIGNATURES.iter().find(|(n, ..)| *n == name).map(|&(_, p, q)| (p, q))
}

/// Names that may not be redefined by user `gate` declarations.
pub fn is_builtin_primitive(name: &str) -> bool {
    name == "U" || name == "CX"
}

fn g(kind: GateKind, target: usize) -> GateApplication {
    GateApplication { kind, target, control: None, angle: None }
}

fn cg(kind: GateKind, control: usize, target: usize) -> GateApplication {
    GateApplication { kind, target, control: Some(control), angle: None }
}

fn r(kind: GateKind, target: usize, angle: f64) -> GateApplication {
    GateApplication { kind, target, control: None, angle: Some(angle) }
}

fn cr(kind: GateKind, control: usize, target: usize, angle: f64) -> GateApplication {
    GateApplication { kind, target, control: Some(control), angle: Some(angle) }
}

fn u3(theta: f64, phi: f64, lambda: f64, t: usize) -> Vec<GateApplication> {
    // RZ(phi) RY(theta) RZ(lambda) = e^{-i(phi+lambda)/2} u3(theta, phi, lambda)
    vec![r(GateKind::RZ, t, lambda), r(GateKind::RY, t, theta), r(GateKind::RZ, t, phi)]
}

fn ccx(a: usize, b: usize, c: usize) -> Vec<GateApplication> {
    use GateKind::*;
    vec![
        g(H, c),
        cg(X, b, c),
        g(Tdg, c),
        cg(X, a, c),
        g(T, c),
        cg(X, b, c),
        g(Tdg, c),
        cg(X, a, c),
        g(T, b),
        g(T, c),
        g(H, c),
        cg(X, a, b),
        g(T, a),
        g(Tdg, b),
        cg(X, a, b),
    ]
}

/// Lowers one library gate application into native gates.
///
/// Multi-gate expansions are exact up to a global phase.
pub fn lower(name: &str, params: &[f64], qubits: &[usize]) -> Result<Vec<GateApplication>, QasmErrorKind> {
    use GateKind::*;

    let (np, nq) = signature(name).ok_or_else(|| QasmErrorKind::UnknownGate(name.to_string()))?;
    if params.len() != np || qubits.len() != nq {
        return Err(QasmErrorKind::Arity {
            gate: name.to_string(),
            params: (np, params.len()),
            qubits: (nq, qubits.len()),
        });
    }
    for (i, a) in qubits.iter().enumerate() {
        if qubits[..i].contains(a) {
            return Err(QasmErrorKind::RepeatedQubit { gate: name.to_string(), qubit: *a });
        }
    }
    let p = params;
    let q = qubits;
    let out = match name {
        "id" => vec![],
        "x" => vec![g(X, q[0])],
        "y" => vec![g(Y, q[0])],
        "z" => vec![g(Z, q[0])],
        "h" => vec![g(H, q[0])],
        "s" => vec![g(S, q[0])],
        "sdg" => vec![g(Sdg, q[0])],
        "t" => vec![g(T, q[0])],
        "tdg" => vec![g(Tdg, q[0])],
        "sx" => vec![r(RX, q[0], FRAC_PI_2)],
        "sxdg" => vec![r(RX, q[0], -FRAC_PI_2)],
        "rx" => vec![r(RX, q[0], p[0])],
        "ry" => vec![r(RY, q[0], p[0])],
        "rz" => vec![r(RZ, q[0], p[0])],
        "u1" | "p" => vec![r(U1, q[0], p[0])],
        "u2" => u3(FRAC_PI_2, p[0], p[1], q[0]),
        "u3" | "u" | "U" => u3(p[0], p[1], p[2], q[0]),
        "cx" | "CX" => vec![cg(X, q[0], q[1])],
        "cy" => vec![cg(Y, q[0], q[1])],
        "cz" => vec![g(H, q[1]), cg(X, q[0], q[1]), g(H, q[1])],
        "ch" => vec![cg(H, q[0], q[1])],
        "cs" => vec![cg(S, q[0], q[1])],
        "csdg" => vec![cg(Sdg, q[0], q[1])],
        "ct" => vec![cg(T, q[0], q[1])],
        "ctdg" => vec![cg(Tdg, q[0], q[1])],
        "crx" => vec![cr(RX, q[0], q[1], p[0])],
        "cry" => vec![cr(RY, q[0], q[1], p[0])],
        "crz" => vec![cr(RZ, q[0], q[1], p[0])],
        "cu1" | "cp" => vec![cr(U1, q[0], q[1], p[0])],
        "cu3" => {
            let (theta, phi, lambda) = (p[0], p[1], p[2]);
            let (c, t) = (q[0], q[1]);
            let mut v = vec![r(U1, c, (lambda + phi) / 2.0), r(U1, t, (lambda - phi) / 2.0), cg(X, c, t)];
            v.extend(u3(-theta / 2.0, 0.0, -(phi + lambda) / 2.0, t));
            v.push(cg(X, c, t));
            v.extend(u3(theta / 2.0, phi, 0.0, t));
            v
        }
        "swap" => vec![cg(X, q[0], q[1]), cg(X, q[1], q[0]), cg(X, q[0], q[1])],
        "ccx" => ccx(q[0], q[1], q[2]),
        "cswap" => {
            let mut v = vec![cg(X, q[2], q[1])];
            v.extend(ccx(q[0], q[1], q[2]));
            v.push(cg(X, q[2], q[1]));
            v
        }
        _ => unreachable!("signature table and lowering out of sync for `{name}`"),
    };
    Ok(out)
}

/// Source text for a native gate, used by the emitter.
pub fn native_name(kind: GateKind, controlled: bool) -> &'static str {
    use GateKind::*;
    match (kind, controlled) {
        (X, false) => "x",
        (Y, false) => "y",
        (Z, false) => "z",
        (H, false) => "h",
        (S, false) => "s",
        (Sdg, false) => "sdg",
        (T, false) => "t",
        (Tdg, false) => "tdg",
        (RX, false) => "rx",
        (RY, false) => "ry",
        (RZ, false) => "rz",
        (U1, false) => "u1",
        (X, true) => "cx",
        (Y, true) => "cy",
        // Re-lowers to H.CX.H rather than a single controlled-Z.
        (Z, true) => "cz",
        (H, true) => "ch",
        (S, true) => "cs",
        (Sdg, true) => "csdg",
        (T, true) => "ct",
        (Tdg, true) => "ctdg",
        (RX, true) => "crx",
        (RY, true) => "cry",
        (RZ, true) => "crz",
        (U1, true) => "cu1",
    }
}
