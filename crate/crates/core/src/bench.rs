//! Benchmark circuits: the bundled fixture set and random native circuits.

use std::path::Path;

use rand::Rng;

use crate::qasm::{parse, GateApplication, GateKind, QasmError, SourceCircuit};

/// Bundled fixtures as `(name, source)`.
pub const FIXTURES: [(&str, &str); 5] = [
    ("bell", include_str!("../fixtures/bell.qasm")),
    ("ghz5", include_str!("../fixtures/ghz5.qasm")),
    ("teleport", include_str!("../fixtures/teleport.qasm")),
    ("qft4", include_str!("../fixtures/qft4.qasm")),
    ("rotation_ladder", include_str!("../fixtures/rotation_ladder.qasm")),
];

/// Parses every bundled fixture.
pub fn fixtures() -> Vec<(&'static str, SourceCircuit)> {
    FIXTURES
        .iter()
        .map(|(name, src)| (*name, parse(src).unwrap_or_else(|e| panic!("fixture {name}: {e}"))))
        .collect()
}

pub fn fixture(name: &str) -> Option<SourceCircuit> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, src)| parse(src).expect("bundled fixture parses"))
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: String, source: QasmError },
}

/// Parses every `.qasm` file in `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<(String, SourceCircuit)>, LoadError> {
    let io = |source| LoadError::Io { path: dir.display().to_string(), source };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_file(p)).collect()
}

pub fn load_file(path: &Path) -> Result<(String, SourceCircuit), LoadError> {
    let shown = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: shown.clone(), source })?;
    let circuit = parse(&src).map_err(|source| LoadError::Parse { path: shown, source })?;
    let name = path.file_stem().map_or_else(|| "circuit".into(), |s| s.to_string_lossy().into_owned());
    Ok((name, circuit))
}

/// A random circuit of `gates` native gates on `n` qubits. Half the gates
/// are controlled when `n > 1`; rotation angles are uniform in `[-pi, pi)`.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, n: usize, gates: usize) -> SourceCircuit {
    let mut c = SourceCircuit::with_qubits(n);
    for _ in 0..gates {
        let kind = GateKind::ALL[rng.random_range(0..GateKind::ALL.len())];
        let target = rng.random_range(0..n);
        let mut g = GateApplication::new(kind, target);
        if kind.is_rotational() {
            g.angle = Some(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
        }
        if n > 1 && rng.random_bool(0.5) {
            let control = (target + rng.random_range(1..n)) % n;
            g = g.with_control(control);
        }
        c.push(g);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixtures_parse() {
        let f = fixtures();
        assert_eq!(f.len(), 5);
        let bell = fixture("bell").unwrap();
        assert_eq!(bell.qubit_count(), 3);
        assert_eq!(bell.gates.len(), 3);
        assert!(fixture("nope").is_none());
    }

    #[test]
    fn random_circuits_are_valid_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        for n in 1..6 {
            let c = random_circuit(&mut a, n, 40);
            assert_eq!(c, random_circuit(&mut b, n, 40));
            assert!(c.gates.iter().all(|g| g.is_valid() && g.max_qubit() < n));
        }
    }

    #[test]
    fn load_dir_reads_sorted_qasm() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.qasm"), FIXTURES[0].1).unwrap();
        std::fs::write(dir.path().join("a.qasm"), FIXTURES[1].1).unwrap();
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let got = load_dir(dir.path()).unwrap();
        assert_eq!(got.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(), ["a", "b"]);
    }
}
