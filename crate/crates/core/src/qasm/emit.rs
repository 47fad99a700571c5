use std::fmt::Write;

use super::library::native_name;
use super::SourceCircuit;

/// Writes a lowered circuit back as OpenQASM 2.0 using native gate names.
///
/// Angles are printed in shortest round-trip form, so re-parsing yields the
/// identical circuit.
pub fn emit(circuit: &SourceCircuit) -> String {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    for r in &circuit.qregs {
        let _ = writeln!(s, "qreg {}[{}];", r.name, r.size);
    }
    for r in &circuit.cregs {
        let _ = writeln!(s, "creg {}[{}];", r.name, r.size);
    }
    let name = |flat: usize| {
        let (reg, idx) = circuit.qubit_name(flat).expect("gate qubit within declared registers");
        format!("{reg}[{idx}]")
    };
    for g in &circuit.gates {
        s.push_str(native_name(g.kind, g.control.is_some()));
        if let Some(a) = g.angle {
            let _ = write!(s, "({a:?})");
        }
        s.push(' ');
        if let Some(c) = g.control {
            s.push_str(&name(c));
            s.push(',');
        }
        s.push_str(&name(g.target));
        s.push_str(";\n");
    }
    s
}
