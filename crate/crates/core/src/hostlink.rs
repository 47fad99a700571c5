//! ASCII host/board protocol.
//!
//! Host to board frames:
//!
//! | frame  | meaning                          |
//! |--------|----------------------------------|
//! | `?V#`  | number of sine/cosine pairs      |
//! | `*V#`  | number of qubits in use          |
//! | `<V#`  | one table value (`<V-#` if < 0)  |
//! | `>V#`  | one instruction word             |
//! | `!`    | end of emulation                 |
//!
//! `V` is uppercase hexadecimal without leading zeros. Negative values are
//! sent as their magnitude followed by `-`. The board answers with every
//! amplitude, index ascending, as two signed decimal lines (real, then
//! imaginary).

use std::fmt::Write as _;

use num_complex::Complex;
use thiserror::Error;

use crate::compiler::{self, AngleTable, CompileError, Program};
use crate::config::ExecConfig;
use crate::engine::{self, EngineError, FixedBackend, SimState, StateVector};
use crate::fixedpoint::{Fixed, FixedFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HostMessage {
    AngleCount(u64),
    QubitCount(u64),
    /// Raw fixed-point table value.
    AngleValue(i64),
    /// Encoded instruction word.
    Instruction(u64),
    EndOfEmulation,
}

/// Largest payloads a board accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLimits {
    pub max_angle_pairs: u64,
    pub max_qubits: u64,
    /// Width of an angle value in two's complement.
    pub value_bits: u32,
    pub word_bits: u32,
}

impl FrameLimits {
    pub const UNBOUNDED: FrameLimits =
        FrameLimits { max_angle_pairs: u64::MAX, max_qubits: u64::MAX, value_bits: 64, word_bits: 64 };

    pub fn of(config: &ExecConfig) -> Self {
        FrameLimits {
            max_angle_pairs: 1 << config.imm_bits,
            max_qubits: config.n_qubits as u64,
            value_bits: config.data_bits,
            word_bits: config.instruction_width(),
        }
    }

    fn check(&self, msg: &HostMessage) -> Result<(), PayloadOverflow> {
        let fits_signed = |v: i64, bits: u32| bits >= 64 || (-(1i64 << (bits - 1))..1i64 << (bits - 1)).contains(&v);
        let ok = match *msg {
            HostMessage::AngleCount(v) => v <= self.max_angle_pairs,
            HostMessage::QubitCount(v) => v <= self.max_qubits,
            HostMessage::AngleValue(v) => fits_signed(v, self.value_bits),
            HostMessage::Instruction(v) => self.word_bits >= 64 || v >> self.word_bits == 0,
            HostMessage::EndOfEmulation => true,
        };
        if ok {
            Ok(())
        } else {
            Err(PayloadOverflow(*msg))
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("payload of {0:?} exceeds the configured width")]
pub struct PayloadOverflow(pub HostMessage);

/// Appends the frame for `msg` without range checks.
pub fn write_frame(out: &mut String, msg: &HostMessage) {
    let _ = match *msg {
        HostMessage::AngleCount(v) => write!(out, "?{v:X}#"),
        HostMessage::QubitCount(v) => write!(out, "*{v:X}#"),
        HostMessage::AngleValue(v) if v < 0 => write!(out, "<{:X}-#", v.unsigned_abs()),
        HostMessage::AngleValue(v) => write!(out, "<{v:X}#"),
        HostMessage::Instruction(v) => write!(out, ">{v:X}#"),
        HostMessage::EndOfEmulation => write!(out, "!"),
    };
}

pub fn encode_message(msg: &HostMessage, limits: &FrameLimits) -> Result<Vec<u8>, PayloadOverflow> {
    limits.check(msg)?;
    let mut s = String::new();
    write_frame(&mut s, msg);
    Ok(s.into_bytes())
}

pub fn encode_stream(msgs: &[HostMessage], limits: &FrameLimits) -> Result<Vec<u8>, PayloadOverflow> {
    let mut s = String::new();
    for m in msgs {
        limits.check(m)?;
        write_frame(&mut s, m);
    }
    Ok(s.into_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameErrorKind {
    UnknownStart(u8),
    BadDigit(u8),
    MisplacedSign,
    EmptyValue,
    ValueOverflow,
    /// Stream ended inside a frame.
    Unterminated,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed frame at byte {offset}: {kind:?}")]
pub struct FrameError {
    pub offset: u64,
    pub kind: FrameErrorKind,
}

#[derive(Debug, Clone, Copy)]
struct Partial {
    start: u8,
    value: u64,
    digits: u32,
    negative: bool,
}

/// Incremental frame parser. Frames may be split across any number of
/// `feed` calls.
#[derive(Debug, Default)]
pub struct Decoder {
    partial: Option<Partial>,
    offset: u64,
}

impl Decoder {
    pub fn new() -> Self {
        Decoder::default()
    }

    /// Bytes consumed so far.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// Parses `bytes`, returning every frame completed by them. After an
    /// error the partial frame is dropped and parsing resumes at the next
    /// byte.
    pub fn feed(&mut self, bytes: &[u8]) -> Result<Vec<HostMessage>, FrameError> {
        let mut out = Vec::new();
        for &b in bytes {
            let at = self.offset;
            self.offset += 1;
            if let Some(m) = self.step(b).map_err(|kind| {
                self.partial = None;
                FrameError { offset: at, kind }
            })? {
                out.push(m);
            }
        }
        Ok(out)
    }

    /// Fails if the stream stopped inside a frame.
    pub fn finish(&self) -> Result<(), FrameError> {
        match self.partial {
            Some(_) => Err(FrameError { offset: self.offset, kind: FrameErrorKind::Unterminated }),
            None => Ok(()),
        }
    }

    fn step(&mut self, b: u8) -> Result<Option<HostMessage>, FrameErrorKind> {
        let Some(p) = self.partial.as_mut() else {
            return match b {
                b'!' => Ok(Some(HostMessage::EndOfEmulation)),
                b'?' | b'*' | b'<' | b'>' => {
                    self.partial = Some(Partial { start: b, value: 0, digits: 0, negative: false });
                    Ok(None)
                }
                _ => Err(FrameErrorKind::UnknownStart(b)),
            };
        };
        match b {
            b'#' => {
                if p.digits == 0 {
                    return Err(FrameErrorKind::EmptyValue);
                }
                let p = self.partial.take().expect("frame in progress");
                Ok(Some(match p.start {
                    b'?' => HostMessage::AngleCount(p.value),
                    b'*' => HostMessage::QubitCount(p.value),
                    b'>' => HostMessage::Instruction(p.value),
                    _ if p.negative => HostMessage::AngleValue(
                        0i64.checked_sub_unsigned(p.value).ok_or(FrameErrorKind::ValueOverflow)?,
                    ),
                    _ => HostMessage::AngleValue(i64::try_from(p.value).map_err(|_| FrameErrorKind::ValueOverflow)?),
                }))
            }
            b'-' if p.start == b'<' && p.digits > 0 && !p.negative => {
                p.negative = true;
                Ok(None)
            }
            b'-' => Err(FrameErrorKind::MisplacedSign),
            b'0'..=b'9' | b'A'..=b'F' => {
                if p.negative {
                    return Err(FrameErrorKind::MisplacedSign);
                }
                let d = (b as char).to_digit(16).expect("hex digit") as u64;
                if p.value >> 60 != 0 {
                    return Err(FrameErrorKind::ValueOverflow);
                }
                p.value = p.value << 4 | d;
                p.digits += 1;
                Ok(None)
            }
            _ => Err(FrameErrorKind::BadDigit(b)),
        }
    }
}

/// Decodes a complete byte stream.
pub fn decode_stream(bytes: &[u8]) -> Result<Vec<HostMessage>, FrameError> {
    let mut d = Decoder::new();
    let msgs = d.feed(bytes)?;
    d.finish()?;
    Ok(msgs)
}

/// Amplitudes as signed decimal lines, real then imaginary, index ascending.
pub fn encode_readback(state: &StateVector<Fixed>) -> Vec<u8> {
    let mut s = String::with_capacity(state.len() * 16);
    for c in state.amplitudes() {
        let _ = write!(s, "{}\n{}\n", c.re.raw, c.im.raw);
    }
    s.into_bytes()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReadbackError {
    #[error("readback line {line}: not a signed integer")]
    BadValue { line: usize },
    #[error("readback has {0} values; expected two per amplitude and a power-of-two amplitude count")]
    Shape(usize),
}

pub fn decode_readback(bytes: &[u8], format: FixedFormat) -> Result<StateVector<Fixed>, ReadbackError> {
    let text = String::from_utf8_lossy(bytes);
    let values = text
        .lines()
        .enumerate()
        .map(|(i, l)| l.trim().parse::<i64>().map_err(|_| ReadbackError::BadValue { line: i + 1 }))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() % 2 != 0 || !(values.len() / 2).is_power_of_two() {
        return Err(ReadbackError::Shape(values.len()));
    }
    let amps = values
        .chunks(2)
        .map(|p| Complex { re: format.from_raw(p[0]), im: format.from_raw(p[1]) })
        .collect();
    Ok(StateVector::from_amplitudes(amps))
}

#[derive(Debug, Error)]
pub enum HostlinkError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Payload(#[from] PayloadOverflow),
    #[error(transparent)]
    Readback(#[from] ReadbackError),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("board: {0}")]
    Compile(#[from] CompileError),
    #[error("board: {0}")]
    Engine(#[from] EngineError),
    #[error("the board only runs fixed-point configurations")]
    NotFixed,
}

/// The frame sequence that uploads and starts `program`.
pub fn session_messages(program: &Program, config: &ExecConfig) -> Result<Vec<HostMessage>, HostlinkError> {
    if config.fixed_format().is_none() {
        return Err(HostlinkError::NotFixed);
    }
    let mut msgs = vec![
        HostMessage::AngleCount(program.table.len() as u64),
        HostMessage::QubitCount(program.used_qubits as u64),
    ];
    for i in 0..program.table.len() {
        let (s, c) = program.table.raw(i).ok_or(HostlinkError::NotFixed)?;
        msgs.push(HostMessage::AngleValue(s));
        msgs.push(HostMessage::AngleValue(c));
    }
    for instr in &program.instructions {
        msgs.push(HostMessage::Instruction(compiler::encode(instr, config)?));
    }
    msgs.push(HostMessage::EndOfEmulation);
    Ok(msgs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    AngleCount,
    QubitCount,
    Values,
    Instructions,
    Done,
}

/// Engine-backed stand-in for the board side of a session.
#[derive(Debug)]
pub struct VirtualBoard {
    config: ExecConfig,
    format: FixedFormat,
    phase: Phase,
    angle_pairs: u64,
    qubits: u32,
    values: Vec<i64>,
    words: Vec<u64>,
    readback: Option<Vec<u8>>,
}

impl VirtualBoard {
    pub fn new(config: ExecConfig) -> Result<Self, HostlinkError> {
        let format = config.fixed_format().ok_or(HostlinkError::NotFixed)?;
        Ok(VirtualBoard {
            config,
            format,
            phase: Phase::AngleCount,
            angle_pairs: 0,
            qubits: 0,
            values: Vec::new(),
            words: Vec::new(),
            readback: None,
        })
    }

    fn unexpected(&self, msg: &HostMessage) -> HostlinkError {
        HostlinkError::Protocol(format!("unexpected {msg:?} while waiting for {:?}", self.phase))
    }

    pub fn receive(&mut self, msg: HostMessage) -> Result<(), HostlinkError> {
        FrameLimits::of(&self.config).check(&msg)?;
        match (self.phase, msg) {
            (Phase::AngleCount, HostMessage::AngleCount(n)) => {
                self.angle_pairs = n;
                self.phase = Phase::QubitCount;
            }
            (Phase::QubitCount, HostMessage::QubitCount(n)) => {
                self.qubits = n as u32;
                self.phase = if self.angle_pairs == 0 { Phase::Instructions } else { Phase::Values };
            }
            (Phase::Values, HostMessage::AngleValue(v)) => {
                self.values.push(v);
                if self.values.len() as u64 == 2 * self.angle_pairs {
                    self.phase = Phase::Instructions;
                }
            }
            (Phase::Instructions, HostMessage::Instruction(w)) => self.words.push(w),
            (Phase::Instructions, HostMessage::EndOfEmulation) => {
                self.readback = Some(self.execute()?);
                self.phase = Phase::Done;
            }
            _ => return Err(self.unexpected(&msg)),
        }
        Ok(())
    }

    fn execute(&self) -> Result<Vec<u8>, HostlinkError> {
        let pairs: Vec<_> = self.values.chunks(2).map(|p| (p[0], p[1])).collect();
        let table = AngleTable::from_raw(self.format, &pairs);
        let instructions = self
            .words
            .iter()
            .map(|&w| compiler::decode(w, &self.config))
            .collect::<Result<Vec<_>, _>>()?;
        let backend = FixedBackend::new(self.format);
        let mut state = StateVector::basis(&backend, self.qubits, 0);
        engine::run_backend(&backend, &mut state, &instructions, &table)?;
        Ok(encode_readback(&state))
    }

    /// Readback bytes once `!` has been received.
    pub fn readback(&self) -> Option<&[u8]> {
        self.readback.as_deref()
    }
}

/// Result of a loopback run.
#[derive(Debug, Clone)]
pub struct Session {
    /// Host to board bytes.
    pub transcript: Vec<u8>,
    /// Board to host bytes.
    pub readback: Vec<u8>,
    pub state: SimState,
}

/// Encodes the session, decodes it on a virtual board in chunks of
/// `chunk` bytes, runs it there and decodes the readback.
pub fn loopback_session_chunked(program: &Program, config: &ExecConfig, chunk: usize) -> Result<Session, HostlinkError> {
    let format = config.fixed_format().ok_or(HostlinkError::NotFixed)?;
    let transcript = encode_stream(&session_messages(program, config)?, &FrameLimits::of(config))?;
    let mut decoder = Decoder::new();
    let mut board = VirtualBoard::new(*config)?;
    for piece in transcript.chunks(chunk.max(1)) {
        for m in decoder.feed(piece)? {
            board.receive(m)?;
        }
    }
    decoder.finish()?;
    let readback = board
        .readback()
        .ok_or_else(|| HostlinkError::Protocol("session ended without `!`".into()))?
        .to_vec();
    let state = decode_readback(&readback, format)?;
    Ok(Session { transcript, readback, state: SimState::Fixed { format, state } })
}

pub fn loopback_session(program: &Program, config: &ExecConfig) -> Result<Session, HostlinkError> {
    loopback_session_chunked(program, config, 64)
}
