//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::HashSet;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qfemu::bench::{fixture, fixtures, random_circuit};
use qfemu::compiler::{decode, encode, Instruction, NumberRepr, Opcode};
use qfemu::engine::{dense_oracle, dense_state};
use qfemu::hostlink::{encode_stream, loopback_session_chunked, Decoder, FrameLimits, HostMessage};
use qfemu::hwmodel::{estimate_resources, program_latency, LatencyModel};
use qfemu::metrics::{complex_distances, hellinger_fidelity, kld, report, KLD_EPSILON};
use qfemu::{compile, parse, run, ExecConfig, FixedFormat, Rounding, RoundingMode, SourceCircuit};

type Outcome = Result<String, String>;

fn float_config(n: u32) -> ExecConfig {
    ExecConfig { n_qubits: n.max(1), rounding: Rounding::FloatReference, ..ExecConfig::default() }
}

fn max_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run_state(c: &SourceCircuit, config: &ExecConfig) -> Vec<Complex64> {
    run(&compile(c, config).expect("compiles"), config, None).expect("runs").to_complex()
}

fn bell_amplitudes() -> Outcome {
    let bell = fixture("bell").unwrap();
    let mut worst = [0.0f64; 2];
    for (slot, (config, tol)) in [(ExecConfig::default(), 1e-4), (float_config(3), 1e-12)].into_iter().enumerate() {
        let s = run_state(&bell, &config);
        for (i, c) in s.iter().enumerate() {
            let want = if i == 0 || i == 7 { FRAC_1_SQRT_2 } else { 0.0 };
            let d = (c - Complex64::new(want, 0.0)).norm();
            worst[slot] = worst[slot].max(d);
            check(d < tol, format!("index {i}: {c} off by {d:.2e} (tol {tol:.0e})"))?;
        }
    }
    Ok(format!("max deviation fixed {:.2e}, float {:.2e}", worst[0], worst[1]))
}

fn butterfly_vs_dense() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0);
    let mut worst = 0.0f64;
    for n in 1..=5 {
        for _ in 0..500 {
            let gates = rng.random_range(0..=30);
            let c = random_circuit(&mut rng, n, gates);
            let d = max_dev(&run_state(&c, &float_config(n as u32)), &dense_state(&c).unwrap());
            worst = worst.max(d);
            check(d < 1e-12, format!("n={n}: deviation {d:.2e}"))?;
        }
    }
    Ok(format!("2500 circuits, max deviation {worst:.2e}"))
}

/// Full unitary of `U` on `target` controlled by every qubit in `controls`.
fn controlled_unitary(n: usize, controls: &[usize], target: usize, u: [[Complex64; 2]; 2]) -> DMatrix<Complex64> {
    let dim = 1 << n;
    DMatrix::from_fn(dim, dim, |row, col| {
        let active = controls.iter().all(|&c| col >> c & 1 == 1);
        let rest_equal = (row ^ col) & !(1 << target) == 0;
        match (active, rest_equal) {
            (false, _) => Complex64::new((row == col) as u8 as f64, 0.0),
            (true, true) => u[row >> target & 1][col >> target & 1],
            (true, false) => Complex64::new(0.0, 0.0),
        }
    })
}

fn permutation(n: usize, f: impl Fn(usize) -> usize) -> DMatrix<Complex64> {
    let dim = 1 << n;
    DMatrix::from_fn(dim, dim, |row, col| Complex64::new((f(col) == row) as u8 as f64, 0.0))
}

fn u3(theta: f64, phi: f64, lambda: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
    ]
}

/// Largest elementwise difference after removing a global phase.
fn phase_free_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let (idx, _) = b.iter().enumerate().fold((0, 0.0), |m, (i, z)| if z.norm() > m.1 { (i, z.norm()) } else { m });
    let phase = a.as_slice()[idx] / b.as_slice()[idx];
    let phase = phase / phase.norm();
    a.iter().zip(b.iter()).map(|(x, y)| (x - phase * y).norm()).fold(0.0, f64::max)
}

fn lowering_soundness() -> Outcome {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
    let h = FRAC_1_SQRT_2;
    let x = [[o, l], [l, o]];
    let y = [[o, c(0.0, -1.0)], [c(0.0, 1.0), o]];
    let z = [[l, o], [o, c(-1.0, 0.0)]];
    let hm = [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]];
    let t = 0.913f64;
    let (s2, c2) = (t / 2.0).sin_cos();
    let rx = [[c(c2, 0.0), c(0.0, -s2)], [c(0.0, -s2), c(c2, 0.0)]];
    let ry = [[c(c2, 0.0), c(-s2, 0.0)], [c(s2, 0.0), c(c2, 0.0)]];
    let rz = [[Complex64::from_polar(1.0, -t / 2.0), o], [o, Complex64::from_polar(1.0, t / 2.0)]];
    let u1 = [[l, o], [o, Complex64::from_polar(1.0, t)]];

    // Qubit a = 0 is the control (or first operand), b = 1, c = 2.
    let cases: Vec<(&str, usize, DMatrix<Complex64>)> = vec![
        ("cz q[0],q[1];", 2, controlled_unitary(2, &[0], 1, z)),
        ("cy q[0],q[1];", 2, controlled_unitary(2, &[0], 1, y)),
        ("ch q[0],q[1];", 2, controlled_unitary(2, &[0], 1, hm)),
        ("cx q[1],q[0];", 2, controlled_unitary(2, &[1], 0, x)),
        ("swap q[0],q[1];", 2, permutation(2, |i| (i & 1) << 1 | (i >> 1 & 1))),
        ("ccx q[0],q[1],q[2];", 3, controlled_unitary(3, &[0, 1], 2, x)),
        ("cswap q[0],q[1],q[2];", 3, permutation(3, |i| if i & 1 == 1 { (i & 1) | (i >> 2 & 1) << 1 | (i >> 1 & 1) << 2 } else { i })),
        ("u2(0.4,-1.2) q[0];", 1, controlled_unitary(1, &[], 0, u3(PI / 2.0, 0.4, -1.2))),
        ("u3(0.7,0.4,-1.2) q[0];", 1, controlled_unitary(1, &[], 0, u3(0.7, 0.4, -1.2))),
        ("crx(0.913) q[0],q[1];", 2, controlled_unitary(2, &[0], 1, rx)),
        ("cry(0.913) q[0],q[1];", 2, controlled_unitary(2, &[0], 1, ry)),
        ("crz(0.913) q[0],q[1];", 2, controlled_unitary(2, &[0], 1, rz)),
        ("cu1(0.913) q[0],q[1];", 2, controlled_unitary(2, &[0], 1, u1)),
        ("cu3(0.7,0.4,-1.2) q[0],q[1];", 2, controlled_unitary(2, &[0], 1, u3(0.7, 0.4, -1.2))),
    ];
    let mut worst = 0.0f64;
    for (stmt, n, want) in &cases {
        let src = format!("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[{n}];\n{stmt}\n");
        let circuit = parse(&src).map_err(|e| format!("{stmt} {e}"))?;
        let got = dense_oracle(&circuit).unwrap();
        let d = phase_free_distance(&got, want);
        worst = worst.max(d);
        check(d < 1e-12, format!("{stmt} differs by {d:.2e}"))?;
    }
    Ok(format!("{} decompositions, max deviation {worst:.2e}", cases.len()))
}

fn precision_trend() -> Outcome {
    let circuits = fixtures();
    let mut means = Vec::new();
    for bits in [8, 12, 16, 20, 24] {
        let config = ExecConfig { data_bits: bits, rounding: Rounding::Nearest, ..ExecConfig::default() };
        let mut total = 0.0;
        for (_, c) in &circuits {
            let fixed = run_state(c, &config);
            let reference = run_state(c, &float_config(config.n_qubits));
            total += report(&fixed, &reference).unwrap().kld;
        }
        means.push((bits, total / circuits.len() as f64));
    }
    let shown = means.iter().map(|(b, k)| format!("{b}:{k:.2e}")).collect::<Vec<_>>().join(" ");
    for w in means.windows(2) {
        check(w[1].1 <= w[0].1, format!("mean KLD rose from {} to {} bits: {shown}", w[0].0, w[1].0))?;
    }
    Ok(format!("mean KLD {shown}"))
}

fn rounding_order() -> Outcome {
    let mut lines = Vec::new();
    for bits in [8u32, 12, 16, 20, 24] {
        let mut rng = ChaCha8Rng::seed_from_u64(bits as u64);
        let base = FixedFormat::new(bits, RoundingMode::Nearest).unwrap();
        let one = 1i64 << base.frac_bits();
        // Non-negative magnitudes in [0, 1], where rounding bias accumulates.
        // Each draw (a, b) is paired with (1 - a, b): the two products have
        // complementary discarded bits, so rounding errors that do not depend
        // on the tie rule cancel and the bias comparison sees only ties.
        let operands: Vec<(i64, i64)> = (0..5_000)
            .flat_map(|_| {
                let (a, b) = (rng.random_range(0..=one), rng.random_range(0..=one));
                [(a, b), (one - a, b)]
            })
            .collect();
        let stats = |mode| {
            let f = base.with_rounding(mode);
            let (mut abs, mut signed) = (0.0, 0.0);
            for &(a, b) in &operands {
                let exact = f.to_real(f.from_raw(a)) * f.to_real(f.from_raw(b));
                let e = f.to_real(f.mul(f.from_raw(a), f.from_raw(b))) - exact;
                abs += e.abs();
                signed += e;
            }
            (abs / operands.len() as f64, (signed / operands.len() as f64).abs())
        };
        let (t_abs, _) = stats(RoundingMode::Truncation);
        let (n_abs, n_bias) = stats(RoundingMode::Nearest);
        let (_, e_bias) = stats(RoundingMode::NearestEven);
        check(t_abs >= n_abs, format!("{bits} bits: truncation |err| {t_abs:.3e} < nearest {n_abs:.3e}"))?;
        check(e_bias <= n_bias, format!("{bits} bits: nearest_even bias {e_bias:.3e} > nearest {n_bias:.3e}"))?;
        lines.push(format!("{bits}b t/n {:.2} bias n/e {n_bias:.1e}/{e_bias:.1e}", t_abs / n_abs));
    }
    Ok(lines.join("; "))
}

fn operating_point() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x20);
    let config = ExecConfig { n_qubits: 6, ..ExecConfig::default() };
    let (mut min_f, mut max_acd) = (1.0f64, 0.0f64);
    for i in 0..50 {
        let c = random_circuit(&mut rng, 6, 100);
        let r = report(&run_state(&c, &config), &run_state(&c, &float_config(6))).unwrap();
        min_f = min_f.min(r.fidelity);
        max_acd = max_acd.max(r.acd);
        check(r.fidelity >= 0.999 && r.acd < 0.01, format!("circuit {i}: {r}"))?;
    }
    Ok(format!("min fidelity {min_f:.9}, max ACD {max_acd:.2e}"))
}

fn hardware_formulas() -> Outcome {
    let model = LatencyModel::default();
    let mut checked = 0;
    for n in 1..=10u32 {
        for w in 0..n {
            for bits in [8, 20, 32] {
                let config = ExecConfig { n_qubits: n, window_order: w, data_bits: bits, ..ExecConfig::default() };
                let r = estimate_resources(&config);
                check(r.datapaths == 1 << (n - w - 1), format!("datapaths N={n} W={w}"))?;
                check(r.state_regfile_bits == (1u64 << n) * bits as u64 * 2, format!("regfile N={n}"))?;
                checked += 1;
            }
            if w + 1 < n {
                for op in Opcode::ALL {
                    let mut c = SourceCircuit::with_qubits(n as usize);
                    let mut g = qfemu::GateApplication::new(op, 0);
                    if op.is_rotational() {
                        g.angle = Some(0.5);
                    }
                    c.push(g);
                    let at = |w| {
                        let cfg = ExecConfig { n_qubits: n, window_order: w, ..ExecConfig::default() };
                        program_latency(&compile(&c, &cfg).unwrap(), &cfg, &model).compute
                    };
                    check(at(w + 1) == 2 * at(w), format!("{op} latency N={n} W={w}"))?;
                }
            }
        }
    }
    Ok(format!("{checked} configurations"))
}

fn compiler_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0);
    for _ in 0..100_000 {
        let config = ExecConfig {
            n_qubits: rng.random_range(1..=16),
            imm_bits: rng.random_range(1..=8),
            ..ExecConfig::default()
        };
        let op = Opcode::ALL[rng.random_range(0..12)];
        let target = rng.random_range(0..config.n_qubits);
        let control = if rng.random_bool(0.5) { rng.random_range(0..config.n_qubits) } else { target };
        let imm = if op.is_rotational() { rng.random_range(0..1u32 << config.imm_bits) } else { 0 };
        let i = Instruction { opcode: op, target, control, imm };
        let back = decode(encode(&i, &config).map_err(|e| e.to_string())?, &config).map_err(|e| e.to_string())?;
        check(back == i, format!("{i:?} decoded as {back:?}"))?;
    }

    // Angle sets with exact repeats, sign flips, and values that only merge
    // after quantization.
    let mut cases = 0;
    for bits in [8u32, 12, 20] {
        let config = ExecConfig { n_qubits: 3, imm_bits: 8, data_bits: bits, ..ExecConfig::default() };
        let format = config.fixed_format().unwrap();
        let step = format.lsb();
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = SourceCircuit::with_qubits(3);
            let mut keys = HashSet::new();
            for _ in 0..60 {
                let kind = [Opcode::RX, Opcode::RY, Opcode::RZ, Opcode::U1][rng.random_range(0..4)];
                let theta = match rng.random_range(0..3) {
                    0 => rng.random_range(0..6) as f64 * 0.5,
                    1 => rng.random_range(-PI..PI),
                    _ => 1.0 + rng.random_range(0.0..step * 0.01),
                };
                c.push(qfemu::GateApplication::rotation(kind, rng.random_range(0..3), theta));
                let phi = if kind == Opcode::U1 { theta } else { theta / 2.0 };
                keys.insert((format.from_real(phi.sin()).raw, format.from_real(phi.cos()).raw));
            }
            let p = compile(&c, &config).map_err(|e| e.to_string())?;
            check(p.table.repr == NumberRepr::Fixed(format), "table representation")?;
            check(p.table.len() == keys.len(), format!("table {} vs {} distinct pairs", p.table.len(), keys.len()))?;
            cases += 1;
        }
    }
    Ok(format!("100000 words, {cases} dedup circuits"))
}

fn random_message(rng: &mut ChaCha8Rng) -> HostMessage {
    match rng.random_range(0..5) {
        0 => HostMessage::AngleCount(rng.random::<u64>() >> rng.random_range(0..64)),
        1 => HostMessage::QubitCount(rng.random_range(0..64)),
        2 => HostMessage::AngleValue(rng.random::<i64>() >> rng.random_range(0..64)),
        3 => HostMessage::Instruction(rng.random::<u64>() >> rng.random_range(0..64)),
        _ => HostMessage::EndOfEmulation,
    }
}

fn protocol() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9);
    let msgs: Vec<_> = (0..10_000).map(|_| random_message(&mut rng)).collect();
    let bytes = encode_stream(&msgs, &FrameLimits::UNBOUNDED).unwrap();
    for trial in 0..20 {
        let mut d = Decoder::new();
        let mut got = Vec::new();
        let mut at = 0;
        while at < bytes.len() {
            let len = if trial == 0 { 1 } else { rng.random_range(1..=64) };
            let end = (at + len).min(bytes.len());
            got.extend(d.feed(&bytes[at..end]).map_err(|e| e.to_string())?);
            at = end;
        }
        d.finish().map_err(|e| e.to_string())?;
        check(got == msgs, format!("trial {trial}: decoded sequence differs"))?;
    }
    for name in ["bell", "qft4"] {
        let config = ExecConfig::default();
        let p = compile(&fixture(name).unwrap(), &config).unwrap();
        let direct = run(&p, &config, None).unwrap();
        for chunk in [1, 7, 4096] {
            let s = loopback_session_chunked(&p, &config, chunk).map_err(|e| e.to_string())?;
            check(s.state == direct, format!("{name}: loopback differs from direct run"))?;
        }
    }
    Ok(format!("{} bytes framed, bell and qft4 loopback bit-exact", bytes.len()))
}

fn metric_truths() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x10);
    for _ in 0..100 {
        let len = rng.random_range(1..64);
        let mut p: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        check((hellinger_fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-12, "fidelity(I,I) != 1")?;
        check(kld(&p, &p, KLD_EPSILON).unwrap() == 0.0, "kld(I,I) != 0")?;
        let a: Vec<Complex64> = (0..len).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let b: Vec<Complex64> = (0..len).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let (mcd, acd) = complex_distances(&a, &b).unwrap();
        check(acd <= mcd, format!("acd {acd} > mcd {mcd}"))?;
    }
    let f = hellinger_fidelity(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
    check((f - 0.5).abs() < 1e-12, format!("fidelity({{.5,.5}},{{1,0}}) = {f}"))?;
    let k = kld(&[1.0, 0.0], &[0.5, 0.5], KLD_EPSILON).unwrap();
    check((k - LN_2).abs() < 1e-12, format!("kld({{1,0}},{{.5,.5}}) = {k}"))?;
    Ok("closed forms exact, 100 random inputs".into())
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("bell fixture amplitudes", Duration::from_secs(1), bell_amplitudes),
        ("butterfly vs dense oracle", Duration::from_secs(60), butterfly_vs_dense),
        ("equivalence lowering soundness", Duration::from_secs(5), lowering_soundness),
        ("precision trend", Duration::from_secs(60), precision_trend),
        ("rounding mode ordering", Duration::from_secs(5), rounding_order),
        ("20-bit operating point", Duration::from_secs(60), operating_point),
        ("hardware model formulas", Duration::from_secs(1), hardware_formulas),
        ("compiler round trips", Duration::from_secs(5), compiler_round_trips),
        ("protocol framing and loopback", Duration::from_secs(5), protocol),
        ("metrics unit truths", Duration::from_secs(1), metric_truths),
    ];
    let mut failed = 0;
    for (i, (name, bound, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let (status, detail) = match outcome {
            Ok(_) if took > *bound => ("FAIL", format!("took {took:.2?}, bound {bound:?}")),
            Ok(d) => ("PASS", d),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {status} [{took:>9.2?} / {bound:?}] {name}: {detail}", i + 1);
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
