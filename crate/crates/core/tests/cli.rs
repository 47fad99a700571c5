use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qfemu");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn qfemu(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Compiles a fixture into `dir` and returns the program and table paths.
fn compile(dir: &Path, name: &str, extra: &[&str]) -> (PathBuf, PathBuf) {
    let q = fixture(&format!("{name}.qasm"));
    let mut args = vec!["compile", s(&q), "--out", s(dir)];
    args.extend_from_slice(extra);
    let o = qfemu(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (dir.join(format!("{name}.prog")), dir.join(format!("{name}.tab")))
}

fn amplitudes(dump: &str) -> Vec<(f64, f64)> {
    dump.lines()
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

#[test]
fn bell_compiles_to_three_instructions() {
    let dir = tempfile::tempdir().unwrap();
    let (prog, tab) = compile(dir.path(), "bell", &[]);
    let text = std::fs::read_to_string(prog).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "3");
    assert_eq!(lines.len(), 4);
    assert_eq!(std::fs::read_to_string(tab).unwrap(), "0\n");
}

#[test]
fn bell_runs_on_both_backends() {
    let dir = tempfile::tempdir().unwrap();
    let (prog, tab) = compile(dir.path(), "bell", &[]);
    for (backend, tol) in [("float", 1e-12), ("fixed", 1e-4)] {
        let o = qfemu(&["run", s(&prog), s(&tab), "--backend", backend]);
        assert!(o.status.success());
        for (i, (re, im)) in amplitudes(&stdout(&o)).into_iter().enumerate() {
            let want = if i == 0 || i == 7 { std::f64::consts::FRAC_1_SQRT_2 } else { 0.0 };
            assert!((re - want).abs() < tol && im.abs() < tol, "{backend} index {i}");
        }
    }
}

#[test]
fn binary_and_text_files_run_identically() {
    let dir = tempfile::tempdir().unwrap();
    let text_dir = dir.path().join("text");
    let bin_dir = dir.path().join("bin");
    let (tp, tt) = compile(&text_dir, "rotation_ladder", &[]);
    let (bp, bt) = compile(&bin_dir, "rotation_ladder", &["--format", "binary"]);
    let a = qfemu(&["run", s(&tp), s(&tt), "--raw"]);
    let b = qfemu(&["run", s(&bp), s(&bt), "--raw", "--format", "binary"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(std::fs::read_to_string(bp).unwrap().lines().nth(1).unwrap().chars().all(|c| c == '0' || c == '1'));
}

#[test]
fn missing_input_is_an_io_error() {
    let o = qfemu(&["compile", "/nonexistent/circuit.qasm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/circuit.qasm"));
}

#[test]
fn tampered_opcode_is_a_decode_error() {
    let dir = tempfile::tempdir().unwrap();
    let (prog, tab) = compile(dir.path(), "bell", &[]);
    let text = std::fs::read_to_string(&prog).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    // Default architecture: 3-bit qubit fields and an 8-bit immediate.
    let word: u64 = lines[1].parse().unwrap();
    lines[1] = (word | 0xF << 14).to_string();
    std::fs::write(&prog, lines.join("\n")).unwrap();
    let o = qfemu(&["run", s(&prog), s(&tab)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn parse_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("bad.qasm");
    std::fs::write(&q, "OPENQASM 2.0;\nqreg q[1];\nfoo q[0];\n").unwrap();
    let o = qfemu(&["compile", s(&q), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("3:1"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(qfemu(&["frobnicate"]).status.code(), Some(1));
    let q = fixture("bell.qasm");
    assert_eq!(qfemu(&["compile", s(&q), "--rounding", "sideways"]).status.code(), Some(1));
    assert_eq!(qfemu(&["compile", s(&q), "--bits", "2"]).status.code(), Some(1));
    assert_eq!(qfemu(&["--help"]).status.code(), Some(0));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("arch.cfg");
    std::fs::write(&cfg, "N = 4\ndata_bits = 12\nrounding = truncation\n").unwrap();
    let q = fixture("bell.qasm");
    let o = qfemu(&["compare", s(&q), "--config", s(&cfg), "--bits", "16"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[3..5], ["16", "truncation"]);
}

#[test]
fn compare_against_same_backend_is_perfect() {
    let q = fixture("qft4.qasm");
    let o = qfemu(&["compare", s(&q), "--reference", "fixed"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"n_gates"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()].parse::<f64>().unwrap();
    assert_eq!((col("fidelity"), col("kld"), col("mcd"), col("acd")), (1.0, 0.0, 0.0, 0.0));
}

#[test]
fn compare_reads_directories() {
    let o = qfemu(&["compare", s(&fixture("")), "--format", "text"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn sweep_emits_one_row_per_value() {
    let q = fixture("bell.qasm");
    let o = qfemu(&["sweep", s(&q), "--axis", "bits", "--range", "8..=32"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 25);

    let o = qfemu(&["sweep", s(&q), "--axis", "window", "--qubits", "3"]);
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    // datapaths halve and cycles grow with the window order
    let dp: Vec<u64> = rows.iter().map(|r| r[12].parse().unwrap()).collect();
    let cy: Vec<u64> = rows.iter().map(|r| r[14].parse().unwrap()).collect();
    assert_eq!(dp, [4, 2, 1]);
    assert!(cy.windows(2).all(|w| w[1] > w[0]));

    let o = qfemu(&["sweep", s(&q), "--axis", "rounding"]);
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn transcript_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let (prog, tab) = compile(dir.path(), "qft4", &[]);
    let tx = dir.path().join("tx");
    let o = qfemu(&["transcript", s(&prog), s(&tab), "--out", s(&tx)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let transcript = std::fs::read_to_string(tx.join("transcript.txt")).unwrap();
    assert!(transcript.starts_with('?'));
    assert_eq!(transcript.matches('!').count(), 1);

    let readback = std::fs::read_to_string(tx.join("readback.txt")).unwrap();
    let values: Vec<&str> = readback.lines().collect();
    let run = qfemu(&["run", s(&prog), s(&tab), "--raw"]);
    let dumped: Vec<String> = stdout(&run).lines().flat_map(|l| l.split(' ').map(str::to_owned).collect::<Vec<_>>()).collect();
    assert_eq!(values, dumped);

    let float = qfemu(&["transcript", s(&prog), s(&tab), "--backend", "float", "--out", s(&tx)]);
    assert_eq!(float.status.code(), Some(1));
}

#[test]
fn sampling_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let (prog, tab) = compile(dir.path(), "bell", &[]);
    let run = |seed: &str| stdout(&qfemu(&["run", s(&prog), s(&tab), "--shots", "2000", "--seed", seed]));
    let a = run("7");
    assert_eq!(a, run("7"));
    let keys: Vec<&str> = a.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(keys, ["000", "111"]);
}

#[test]
fn runtime_errors_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let (prog, tab) = compile(dir.path(), "ghz5", &[]);
    // Program declares 5 qubits; an architecture of 4 cannot hold it, and its
    // 2-bit qubit fields cannot decode the words either.
    let o = qfemu(&["run", s(&prog), s(&tab), "--qubits", "5", "--imm-bits", "8"]);
    assert!(o.status.success());
    std::fs::write(&prog, "9\n").unwrap();
    let o = qfemu(&["run", s(&prog), s(&tab)]);
    assert_eq!(o.status.code(), Some(4));
}
