//! Lowered circuit to instruction stream.
//!
//! Each native gate becomes one fixed-width word laid out MSB-first as
//! `[opcode:4 | control:a | target:a | imm:Q]` with `a = ceil(log2 N)`. An
//! uncontrolled gate carries `control == target`. Rotational gates index a
//! sine/cosine table built at compile time; the table stores the values the
//! datapath consumes (`theta/2` for RX/RY/RZ, `theta` for U1), deduplicated
//! on their quantized representation.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{ConfigError, ExecConfig};
use crate::fixedpoint::{Fixed, FixedFormat};
use crate::qasm::{GateApplication, SourceCircuit};

pub use crate::qasm::GateKind as Opcode;

impl Opcode {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Opcode> {
        Opcode::ALL.get(code as usize).copied()
    }
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("qubit capacity exceeded: circuit uses {needed} qubits, architecture supports {capacity}")]
    CapacityExceeded { needed: usize, capacity: u32 },
    #[error("angle table overflow: more than 2^{imm_bits} distinct angles ({distinct} needed)")]
    AngleTableOverflow { distinct: usize, imm_bits: u32 },
    #[error("{field} value {value} does not fit in {bits} bit(s)")]
    FieldOverflow { field: &'static str, value: u64, bits: u32 },
    #[error("word {word:#x} is wider than {width} bits")]
    WordWidth { word: u64, width: u32 },
    #[error("invalid opcode {0:#06b}")]
    InvalidOpcode(u8),
    #[error("{0} gate without an angle")]
    MissingAngle(Opcode),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

/// A decoded instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub opcode: Opcode,
    pub target: u32,
    /// Equal to `target` for uncontrolled gates.
    pub control: u32,
    pub imm: u32,
}

impl Instruction {
    pub fn single(opcode: Opcode, target: u32) -> Self {
        Instruction { opcode, target, control: target, imm: 0 }
    }

    pub fn controlled(opcode: Opcode, control: u32, target: u32) -> Self {
        Instruction { opcode, target, control, imm: 0 }
    }

    pub fn with_imm(self, imm: u32) -> Self {
        Instruction { imm, ..self }
    }

    pub fn control_qubit(&self) -> Option<u32> {
        (self.control != self.target).then_some(self.control)
    }
}

/// Representation of table entries and amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumberRepr {
    Float,
    Fixed(FixedFormat),
}

impl NumberRepr {
    pub fn of(config: &ExecConfig) -> Self {
        config.fixed_format().map_or(NumberRepr::Float, NumberRepr::Fixed)
    }

    /// Rounds `x` into this representation and returns it as a real number.
    pub fn quantize(&self, x: f64) -> f64 {
        match self {
            NumberRepr::Float => x,
            NumberRepr::Fixed(f) => f.to_real(f.from_real(x)),
        }
    }

    /// Bit-exact key of a quantized value.
    fn key(&self, x: f64) -> i64 {
        match self {
            // + 0.0 folds -0.0 into 0.0
            NumberRepr::Float => (x + 0.0).to_bits() as i64,
            NumberRepr::Fixed(f) => f.from_real(x).raw,
        }
    }
}

/// Sine/cosine pair already rounded to the table representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePair {
    pub sin: f64,
    pub cos: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleTable {
    pub repr: NumberRepr,
    pub entries: Vec<AnglePair>,
}

impl AngleTable {
    pub fn new(repr: NumberRepr) -> Self {
        AngleTable { repr, entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: usize) -> Option<AnglePair> {
        self.entries.get(idx).copied()
    }

    /// Raw fixed-point integers of entry `idx`, `None` for float tables.
    pub fn raw(&self, idx: usize) -> Option<(i64, i64)> {
        match self.repr {
            NumberRepr::Fixed(f) => {
                let e = self.entries.get(idx)?;
                Some((f.from_real(e.sin).raw, f.from_real(e.cos).raw))
            }
            NumberRepr::Float => None,
        }
    }

    /// Builds a fixed-point table from raw integers.
    pub fn from_raw(format: FixedFormat, pairs: &[(i64, i64)]) -> Self {
        let entries = pairs
            .iter()
            .map(|&(s, c)| AnglePair { sin: format.to_real(Fixed::from_raw(s)), cos: format.to_real(Fixed::from_raw(c)) })
            .collect();
        AngleTable { repr: NumberRepr::Fixed(format), entries }
    }
}

/// Compiler output.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub instructions: Vec<Instruction>,
    pub table: AngleTable,
    /// Number of qubits the circuit declares.
    pub used_qubits: u32,
}

/// Angle the datapath consumes for a rotational gate.
pub fn consumed_angle(gate: &GateApplication) -> Option<f64> {
    let theta = gate.angle?;
    match gate.kind {
        Opcode::RX | Opcode::RY | Opcode::RZ => Some(theta / 2.0),
        Opcode::U1 => Some(theta),
        _ => None,
    }
}

pub fn compile(circuit: &SourceCircuit, config: &ExecConfig) -> Result<Program, CompileError> {
    config.validate()?;
    let needed = circuit.qubit_count().max(circuit.gates.iter().map(|g| g.max_qubit() + 1).max().unwrap_or(0));
    if needed > config.n_qubits as usize {
        return Err(CompileError::CapacityExceeded { needed, capacity: config.n_qubits });
    }

    let repr = NumberRepr::of(config);
    let mut table = AngleTable::new(repr);
    let mut slots: HashMap<(i64, i64), u32> = HashMap::new();
    let mut instructions = Vec::with_capacity(circuit.gates.len());

    for gate in &circuit.gates {
        let target = gate.target as u32;
        let mut instr = match gate.control {
            Some(c) => Instruction::controlled(gate.kind, c as u32, target),
            None => Instruction::single(gate.kind, target),
        };
        if gate.kind.is_rotational() {
            let phi = consumed_angle(gate).ok_or(CompileError::MissingAngle(gate.kind))?;
            let (s, c) = phi.sin_cos();
            let key = (repr.key(s), repr.key(c));
            let idx = match slots.get(&key) {
                Some(&i) => i,
                None => {
                    let i = table.entries.len() as u32;
                    table.entries.push(AnglePair { sin: repr.quantize(s), cos: repr.quantize(c) });
                    slots.insert(key, i);
                    i
                }
            };
            instr.imm = idx;
        }
        instructions.push(instr);
    }

    let capacity = 1usize << config.imm_bits;
    if table.len() > capacity {
        return Err(CompileError::AngleTableOverflow { distinct: table.len(), imm_bits: config.imm_bits });
    }
    Ok(Program { instructions, table, used_qubits: circuit.qubit_count() as u32 })
}

fn check_field(field: &'static str, value: u64, bits: u32) -> Result<(), CompileError> {
    if bits < 64 && value >> bits != 0 {
        return Err(CompileError::FieldOverflow { field, value, bits });
    }
    Ok(())
}

/// Packs an instruction into a word of [`ExecConfig::instruction_width`] bits.
pub fn encode(instr: &Instruction, config: &ExecConfig) -> Result<u64, CompileError> {
    let a = config.qubit_field_bits();
    let q = config.imm_bits;
    check_field("target", instr.target as u64, a)?;
    check_field("control", instr.control as u64, a)?;
    check_field("imm", instr.imm as u64, q)?;
    Ok(((instr.opcode.code() as u64) << (2 * a + q))
        | ((instr.control as u64) << (a + q))
        | ((instr.target as u64) << q)
        | instr.imm as u64)
}

pub fn decode(word: u64, config: &ExecConfig) -> Result<Instruction, CompileError> {
    let a = config.qubit_field_bits();
    let q = config.imm_bits;
    let width = config.instruction_width();
    if width < 64 && word >> width != 0 {
        return Err(CompileError::WordWidth { word, width });
    }
    let mask = |bits: u32| (1u64 << bits) - 1;
    let code = (word >> (2 * a + q)) as u8;
    let opcode = Opcode::from_code(code).ok_or(CompileError::InvalidOpcode(code))?;
    Ok(Instruction {
        opcode,
        control: ((word >> (a + q)) & mask(a)) as u32,
        target: ((word >> q) & mask(a)) as u32,
        imm: (word & mask(q)) as u32,
    })
}

/// On-disk encoding of program and table files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FileFormat {
    /// Fixed-width `0`/`1` strings: instruction-width words, two's-complement
    /// `data_bits` table values (64-bit IEEE patterns for float tables).
    Binary,
    /// Decimal integers (shortest round-trip decimals for float tables).
    #[default]
    IntegerText,
}

/// Program file: first line `used_qubits`, then one word per line.
pub fn write_program(program: &Program, config: &ExecConfig, format: FileFormat) -> Result<String, CompileError> {
    let width = config.instruction_width() as usize;
    let mut s = format!("{}\n", program.used_qubits);
    for instr in &program.instructions {
        let w = encode(instr, config)?;
        match format {
            FileFormat::Binary => writeln!(s, "{w:0width$b}").unwrap(),
            FileFormat::IntegerText => writeln!(s, "{w}").unwrap(),
        }
    }
    Ok(s)
}

/// Table file: first line the pair count, then `sin,cos` per line.
pub fn write_table(table: &AngleTable, format: FileFormat) -> String {
    let mut s = format!("{}\n", table.len());
    for (i, e) in table.entries.iter().enumerate() {
        match (table.repr, format) {
            (NumberRepr::Fixed(_), FileFormat::IntegerText) => {
                let (rs, rc) = table.raw(i).unwrap();
                writeln!(s, "{rs},{rc}").unwrap();
            }
            (NumberRepr::Fixed(f), FileFormat::Binary) => {
                let (rs, rc) = table.raw(i).unwrap();
                let bits = f.bits() as usize;
                let m = (1u64 << bits) - 1;
                writeln!(s, "{:0bits$b},{:0bits$b}", rs as u64 & m, rc as u64 & m).unwrap();
            }
            (NumberRepr::Float, FileFormat::IntegerText) => writeln!(s, "{:?},{:?}", e.sin, e.cos).unwrap(),
            (NumberRepr::Float, FileFormat::Binary) => {
                writeln!(s, "{:064b},{:064b}", e.sin.to_bits(), e.cos.to_bits()).unwrap()
            }
        }
    }
    s
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

fn fmt_err(line: usize, msg: impl Into<String>) -> CompileError {
    CompileError::Format { line, msg: msg.into() }
}

/// Parses a program file back into `(used_qubits, instructions)`.
pub fn read_program(text: &str, config: &ExecConfig, format: FileFormat) -> Result<(u32, Vec<Instruction>), CompileError> {
    let mut lines = content_lines(text);
    let (ln, first) = lines.next().ok_or_else(|| fmt_err(1, "empty program file"))?;
    let used: u32 = first.parse().map_err(|_| fmt_err(ln, format!("bad qubit count `{first}`")))?;
    let width = config.instruction_width() as usize;
    let mut out = Vec::new();
    for (ln, l) in lines {
        let word = match format {
            FileFormat::Binary => {
                if l.len() != width {
                    return Err(fmt_err(ln, format!("expected {width}-bit word, got {} characters", l.len())));
                }
                u64::from_str_radix(l, 2)
            }
            FileFormat::IntegerText => l.parse::<u64>(),
        }
        .map_err(|_| fmt_err(ln, format!("bad instruction word `{l}`")))?;
        out.push(decode(word, config).map_err(|e| fmt_err(ln, e.to_string()))?);
    }
    Ok((used, out))
}

/// Parses a table file written by [`write_table`] for `repr`.
pub fn read_table(text: &str, repr: NumberRepr, format: FileFormat) -> Result<AngleTable, CompileError> {
    let mut lines = content_lines(text);
    let (ln, first) = lines.next().ok_or_else(|| fmt_err(1, "empty table file"))?;
    let count: usize = first.parse().map_err(|_| fmt_err(ln, format!("bad pair count `{first}`")))?;
    let mut table = AngleTable::new(repr);
    for (ln, l) in lines {
        let (s, c) = l.split_once(',').ok_or_else(|| fmt_err(ln, "expected `sin,cos`"))?;
        let value = |t: &str| -> Result<f64, CompileError> {
            let t = t.trim();
            let bad = || fmt_err(ln, format!("bad table value `{t}`"));
            match (repr, format) {
                (NumberRepr::Fixed(f), FileFormat::IntegerText) => {
                    let raw: i64 = t.parse().map_err(|_| bad())?;
                    if raw < f.min_raw() || raw > f.max_raw() {
                        return Err(bad());
                    }
                    Ok(f.to_real(Fixed::from_raw(raw)))
                }
                (NumberRepr::Fixed(f), FileFormat::Binary) => {
                    if t.len() != f.bits() as usize {
                        return Err(bad());
                    }
                    let u = u64::from_str_radix(t, 2).map_err(|_| bad())?;
                    let shift = 64 - f.bits();
                    let raw = ((u << shift) as i64) >> shift;
                    Ok(f.to_real(Fixed::from_raw(raw)))
                }
                (NumberRepr::Float, FileFormat::IntegerText) => t.parse().map_err(|_| bad()),
                (NumberRepr::Float, FileFormat::Binary) => {
                    if t.len() != 64 {
                        return Err(bad());
                    }
                    u64::from_str_radix(t, 2).map(f64::from_bits).map_err(|_| bad())
                }
            }
        };
        table.entries.push(AnglePair { sin: value(s)?, cos: value(c)? });
    }
    if table.len() != count {
        return Err(fmt_err(1, format!("header says {count} pairs, found {}", table.len())));
    }
    Ok(table)
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> CompileError + '_ {
    move |source| CompileError::Io { path: path.to_path_buf(), source }
}

/// Writes the program and table files.
pub fn emit_program_files(
    program: &Program,
    config: &ExecConfig,
    format: FileFormat,
    program_path: &Path,
    table_path: &Path,
) -> Result<(), CompileError> {
    std::fs::write(program_path, write_program(program, config, format)?).map_err(io_error(program_path))?;
    std::fs::write(table_path, write_table(&program.table, format)).map_err(io_error(table_path))?;
    Ok(())
}

/// Reads the program and table files back.
pub fn load_program_files(
    config: &ExecConfig,
    format: FileFormat,
    program_path: &Path,
    table_path: &Path,
) -> Result<Program, CompileError> {
    let ptext = std::fs::read_to_string(program_path).map_err(io_error(program_path))?;
    let ttext = std::fs::read_to_string(table_path).map_err(io_error(table_path))?;
    let (used_qubits, instructions) = read_program(&ptext, config, format)?;
    let table = read_table(&ttext, NumberRepr::of(config), format)?;
    Ok(Program { instructions, table, used_qubits })
}
