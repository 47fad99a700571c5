//! `qfemu`: compile, run, compare and sweep OpenQASM circuits on the
//! butterfly emulator model.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 compile or decode, 4 runtime.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qfemu::bench::{self, LoadError};
use qfemu::compiler::{self, CompileError, FileFormat, Program};
use qfemu::engine::{self, write_dump, EngineError};
use qfemu::hostlink::{self, HostlinkError};
use qfemu::hwmodel::{estimate_resources, program_latency, LatencyModel};
use qfemu::metrics::{self, QualityReport};
use qfemu::{ConfigError, ExecConfig, Rounding, SourceCircuit};

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Compile(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Compile(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Compile(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Io { .. } => CliError::Io(e.to_string()),
            CompileError::Config(c) => c.into(),
            _ => CliError::Compile(e.to_string()),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => CliError::Io(e.to_string()),
            LoadError::Parse { .. } => CliError::Compile(e.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<HostlinkError> for CliError {
    fn from(e: HostlinkError) -> Self {
        match e {
            HostlinkError::Compile(c) => c.into(),
            HostlinkError::NotFixed => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "qfemu", version, about = "Quantum circuit emulator toolchain: compiler, fixed-point engine, cost model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a .qasm file into program and angle-table files.
    Compile {
        qasm: PathBuf,
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, value_enum, default_value_t = WordFormat::Text)]
        format: WordFormat,
        /// Output directory; files are named after the input.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Execute compiled program and table files and dump the final state.
    Run {
        program: PathBuf,
        table: PathBuf,
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, value_enum, default_value_t = WordFormat::Text)]
        format: WordFormat,
        /// State dump path (standard output if absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write fixed-point amplitudes as raw integers.
        #[arg(long)]
        raw: bool,
        /// Sample this many measurements and print `bitstring count` lines.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare the configured backend against a reference on .qasm files or directories.
    Compare {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        arch: ArchArgs,
        /// Backend of the reference run.
        #[arg(long, value_enum, default_value_t = Backend::Float)]
        reference: Backend,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vary one parameter and report quality and cost per value.
    Sweep {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Values: `8..32`, `8..=32:4`, or a list `8,12,16` (`nearest,truncation` for rounding).
        #[arg(long)]
        range: Option<String>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a host/board session and write the byte transcript and readback.
    Transcript {
        program: PathBuf,
        table: PathBuf,
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, value_enum, default_value_t = WordFormat::Text)]
        format: WordFormat,
        /// Output directory for `transcript.txt` and `readback.txt`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Architecture settings. Flags override the config file.
#[derive(Args, Clone)]
struct ArchArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Qubit capacity N.
    #[arg(long)]
    qubits: Option<u32>,
    /// Fixed-point word width.
    #[arg(long)]
    bits: Option<u32>,
    /// truncation, nearest, nearest_even or float.
    #[arg(long)]
    rounding: Option<String>,
    /// Windowing order W.
    #[arg(long)]
    window: Option<u32>,
    /// Immediate field width Q.
    #[arg(long)]
    imm_bits: Option<u32>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Fixed,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum WordFormat {
    Text,
    Binary,
}

impl From<WordFormat> for FileFormat {
    fn from(f: WordFormat) -> Self {
        match f {
            WordFormat::Text => FileFormat::IntegerText,
            WordFormat::Binary => FileFormat::Binary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    Bits,
    Rounding,
    Window,
}

impl ArchArgs {
    fn resolve(&self) -> Result<ExecConfig> {
        let mut config = match &self.config {
            Some(p) => ExecConfig::parse(&read(p)?)?,
            None => ExecConfig::default(),
        };
        if let Some(v) = self.qubits {
            config.n_qubits = v;
        }
        if let Some(v) = self.bits {
            config.data_bits = v;
        }
        if let Some(v) = self.window {
            config.window_order = v;
        }
        if let Some(v) = self.imm_bits {
            config.imm_bits = v;
        }
        if let Some(r) = &self.rounding {
            config.rounding = r.parse()?;
        }
        match self.backend {
            Some(Backend::Float) => config.rounding = Rounding::FloatReference,
            Some(Backend::Fixed) if config.rounding == Rounding::FloatReference => {
                if self.rounding.is_some() {
                    return Err(CliError::Usage("--backend fixed conflicts with --rounding float".into()));
                }
                config.rounding = Rounding::Nearest;
            }
            _ => {}
        }
        config.validate()?;
        Ok(config)
    }

    /// Resolved config with the capacity raised to fit `circuit`.
    fn for_circuit(&self, circuit: &SourceCircuit) -> Result<ExecConfig> {
        let mut config = self.resolve()?;
        config.n_qubits = config.n_qubits.max(circuit.qubit_count().max(1) as u32);
        config.window_order = config.window_order.min(config.n_qubits - 1);
        config.validate()?;
        Ok(config)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

/// Expands directories into their `.qasm` files.
fn load_inputs(inputs: &[PathBuf]) -> Result<Vec<(String, SourceCircuit)>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            out.extend(bench::load_dir(p)?);
        } else {
            out.push(bench::load_file(p)?);
        }
    }
    Ok(out)
}

fn program_paths(out: &Path, qasm: &Path) -> (PathBuf, PathBuf) {
    let stem = qasm.file_stem().map_or_else(|| "circuit".into(), |s| s.to_string_lossy().into_owned());
    (out.join(format!("{stem}.prog")), out.join(format!("{stem}.tab")))
}

fn cmd_compile(qasm: &Path, arch: &ArchArgs, format: WordFormat, out: &Path) -> Result<()> {
    let config = arch.resolve()?;
    let (_, circuit) = bench::load_file(qasm)?;
    let program = compiler::compile(&circuit, &config)?;
    create_dir(out)?;
    let (prog, tab) = program_paths(out, qasm);
    compiler::emit_program_files(&program, &config, format.into(), &prog, &tab)?;
    println!("{}", prog.display());
    println!("{}", tab.display());
    Ok(())
}

fn load_program(program: &Path, table: &Path, config: &ExecConfig, format: WordFormat) -> Result<Program> {
    Ok(compiler::load_program_files(config, format.into(), program, table)?)
}

fn bitstring(index: usize, n: u32) -> String {
    (0..n).rev().map(|q| if index >> q & 1 == 1 { '1' } else { '0' }).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    program: &Path,
    table: &Path,
    arch: &ArchArgs,
    format: WordFormat,
    out: Option<&Path>,
    raw: bool,
    shots: Option<u64>,
    seed: u64,
) -> Result<()> {
    let config = arch.resolve()?;
    let program = load_program(program, table, &config, format)?;
    let state = engine::run(&program, &config, None)?;
    if state.overflowed() {
        eprintln!("warning: fixed-point saturation occurred");
    }
    let dump = write_dump(&state, raw);
    match shots {
        None => emit(out, &dump),
        Some(shots) => {
            if let Some(p) = out {
                write(p, dump.as_bytes())?;
            }
            let counts = engine::sample_counts(&state, shots, seed)?;
            let mut s = String::new();
            for (idx, n) in counts {
                let _ = writeln!(s, "{} {n}", bitstring(idx, state.n_qubits()));
            }
            emit(None, &s)
        }
    }
}

/// CSV text of `rows`, or the same table with aligned columns.
fn render<T: Serialize>(rows: &[T], format: ReportFormat) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    let csv_text = String::from_utf8(bytes).expect("csv output is UTF-8");
    if let ReportFormat::Csv = format {
        return Ok(csv_text);
    }
    let records: Vec<Vec<String>> = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(csv_text.as_bytes())
        .records()
        .filter_map(|r| r.ok())
        .map(|r| r.iter().map(str::to_owned).collect())
        .collect();
    let cols = records.first().map_or(0, Vec::len);
    let widths: Vec<usize> = (0..cols).map(|c| records.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut s = String::new();
    for r in &records {
        let line: Vec<String> = r.iter().zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
        let _ = writeln!(s, "{}", line.join("  ").trim_end());
    }
    Ok(s)
}

#[derive(Serialize)]
struct CompareRow<'a> {
    circuit: &'a str,
    n_qubits: usize,
    n_gates: usize,
    bits: u32,
    rounding: String,
    fidelity: f64,
    kld: f64,
    mcd: f64,
    acd: f64,
    prob_sum_model: f64,
    prob_sum_reference: f64,
}

fn quality(circuit: &SourceCircuit, model: &ExecConfig, reference: &ExecConfig) -> Result<QualityReport> {
    let a = engine::run(&compiler::compile(circuit, model)?, model, None)?;
    let b = engine::run(&compiler::compile(circuit, reference)?, reference, None)?;
    metrics::report(&a.to_complex(), &b.to_complex()).map_err(|e| CliError::Runtime(e.to_string()))
}

fn reference_config(model: &ExecConfig, backend: Backend) -> ExecConfig {
    match backend {
        Backend::Float => ExecConfig { rounding: Rounding::FloatReference, ..*model },
        Backend::Fixed if model.rounding == Rounding::FloatReference => ExecConfig { rounding: Rounding::Nearest, ..*model },
        Backend::Fixed => *model,
    }
}

fn cmd_compare(
    inputs: &[PathBuf],
    arch: &ArchArgs,
    reference: Backend,
    format: ReportFormat,
    out: Option<&Path>,
) -> Result<()> {
    let circuits = load_inputs(inputs)?;
    let mut rows = Vec::new();
    for (name, c) in &circuits {
        let model = arch.for_circuit(c)?;
        let q = quality(c, &model, &reference_config(&model, reference))?;
        rows.push(CompareRow {
            circuit: name,
            n_qubits: c.qubit_count(),
            n_gates: c.gates.len(),
            bits: model.data_bits,
            rounding: model.rounding.to_string(),
            fidelity: q.fidelity,
            kld: q.kld,
            mcd: q.mcd,
            acd: q.acd,
            prob_sum_model: q.prob_sum_model,
            prob_sum_reference: q.prob_sum_reference,
        });
    }
    emit(out, &render(&rows, format)?)
}

#[derive(Serialize)]
struct SweepRow<'a> {
    circuit: &'a str,
    n_gates: usize,
    n_qubits: u32,
    window: u32,
    bits: u32,
    rounding: String,
    fidelity: f64,
    kld: f64,
    mcd: f64,
    acd: f64,
    prob_sum_model: f64,
    prob_sum_reference: f64,
    datapaths: u64,
    state_regfile_bits: u64,
    total_cycles: u64,
}

fn parse_int_range(text: &str) -> Result<Vec<u32>> {
    let bad = || CliError::Usage(format!("bad range `{text}`"));
    let num = |s: &str| s.trim().parse::<u32>().map_err(|_| bad());
    if let Some((lo, rest)) = text.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((h, s)) => (h, num(s)?),
            None => (rest, 1),
        };
        let (hi, inclusive) = match hi.strip_prefix('=') {
            Some(h) => (num(h)?, true),
            None => (num(hi)?, false),
        };
        let lo = num(lo)?;
        if step == 0 {
            return Err(bad());
        }
        let end = if inclusive { hi.checked_add(1).ok_or_else(bad)? } else { hi };
        let v: Vec<u32> = (lo..end).step_by(step as usize).collect();
        if v.is_empty() {
            return Err(bad());
        }
        Ok(v)
    } else {
        text.split(',').map(num).collect()
    }
}

fn cmd_sweep(
    inputs: &[PathBuf],
    arch: &ArchArgs,
    axis: Axis,
    range: Option<&str>,
    format: ReportFormat,
    out: Option<&Path>,
) -> Result<()> {
    let circuits = load_inputs(inputs)?;
    let model = LatencyModel::default();
    let mut rows = Vec::new();
    for (name, c) in &circuits {
        let base = arch.for_circuit(c)?;
        let configs: Vec<ExecConfig> = match axis {
            Axis::Bits => parse_int_range(range.unwrap_or("8..=32:4"))?
                .into_iter()
                .map(|b| ExecConfig { data_bits: b, ..base })
                .collect(),
            Axis::Window => {
                let values = match range {
                    Some(r) => parse_int_range(r)?,
                    None => (0..base.n_qubits).collect(),
                };
                values.into_iter().map(|w| ExecConfig { window_order: w, ..base }).collect()
            }
            Axis::Rounding => range
                .unwrap_or("truncation,nearest,nearest_even")
                .split(',')
                .map(|r| Ok(ExecConfig { rounding: r.parse()?, ..base }))
                .collect::<Result<_>>()?,
        };
        for config in configs {
            config.validate()?;
            let program = compiler::compile(c, &config)?;
            let reference = reference_config(&config, Backend::Float);
            let res = estimate_resources(&config);
            let q = quality(c, &config, &reference)?;
            rows.push(SweepRow {
                circuit: name,
                n_gates: c.gates.len(),
                n_qubits: config.n_qubits,
                window: config.window_order,
                bits: config.data_bits,
                rounding: config.rounding.to_string(),
                fidelity: q.fidelity,
                kld: q.kld,
                mcd: q.mcd,
                acd: q.acd,
                prob_sum_model: q.prob_sum_model,
                prob_sum_reference: q.prob_sum_reference,
                datapaths: res.datapaths,
                state_regfile_bits: res.state_regfile_bits,
                total_cycles: program_latency(&program, &config, &model).total,
            });
        }
    }
    emit(out, &render(&rows, format)?)
}

fn cmd_transcript(program: &Path, table: &Path, arch: &ArchArgs, format: WordFormat, out: &Path) -> Result<()> {
    let config = arch.resolve()?;
    if config.fixed_format().is_none() {
        return Err(CliError::Usage("transcript needs a fixed-point configuration".into()));
    }
    let program = load_program(program, table, &config, format)?;
    let session = hostlink::loopback_session(&program, &config)?;
    create_dir(out)?;
    write(&out.join("transcript.txt"), &session.transcript)?;
    write(&out.join("readback.txt"), &session.readback)?;
    let direct = engine::run(&program, &config, None)?;
    if direct != session.state {
        return Err(CliError::Runtime("loopback readback differs from direct execution".into()));
    }
    println!("{}", out.join("transcript.txt").display());
    println!("{}", out.join("readback.txt").display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compile { qasm, arch, format, out } => cmd_compile(&qasm, &arch, format, &out),
        Command::Run { program, table, arch, format, out, raw, shots, seed } => {
            cmd_run(&program, &table, &arch, format, out.as_deref(), raw, shots, seed)
        }
        Command::Compare { inputs, arch, reference, format, out } => {
            cmd_compare(&inputs, &arch, reference, format, out.as_deref())
        }
        Command::Sweep { inputs, arch, axis, range, format, out } => {
            cmd_sweep(&inputs, &arch, axis, range.as_deref(), format, out.as_deref())
        }
        Command::Transcript { program, table, arch, format, out } => cmd_transcript(&program, &table, &arch, format, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfemu: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
