//! Architecture configuration shared by the compiler, the engine and the
//! hardware model.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::fixedpoint::{FixedFormat, RoundingMode};

pub const MAX_QUBITS: u32 = 24;
pub const MAX_IMM_BITS: u32 = 24;
pub const MIN_DATA_BITS: u32 = 8;
pub const MAX_DATA_BITS: u32 = 40;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Number representation used for amplitudes and the angle table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rounding {
    Truncation,
    Nearest,
    NearestEven,
    /// Native `f64` arithmetic, the reference model.
    FloatReference,
}

impl Rounding {
    pub const FIXED: [Rounding; 3] = [Rounding::Truncation, Rounding::Nearest, Rounding::NearestEven];

    pub fn fixed_mode(self) -> Option<RoundingMode> {
        match self {
            Rounding::Truncation => Some(RoundingMode::Truncation),
            Rounding::Nearest => Some(RoundingMode::Nearest),
            Rounding::NearestEven => Some(RoundingMode::NearestEven),
            Rounding::FloatReference => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rounding::Truncation => "truncation",
            Rounding::Nearest => "nearest",
            Rounding::NearestEven => "nearest_even",
            Rounding::FloatReference => "float_reference",
        }
    }
}

impl fmt::Display for Rounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rounding {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "truncation" | "trunc" => Ok(Rounding::Truncation),
            "nearest" => Ok(Rounding::Nearest),
            "nearest_even" | "even" => Ok(Rounding::NearestEven),
            "float_reference" | "float" => Ok(Rounding::FloatReference),
            _ => Err(ConfigError::BadValue { key: "rounding".into(), value: s.into() }),
        }
    }
}

/// Architecture parameters.
///
/// `n_qubits` is the capacity of the synthesized architecture, not the width
/// of a particular circuit. `cu_sharing` is carried through for reports but
/// has no functional effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecConfig {
    pub n_qubits: u32,
    pub window_order: u32,
    pub imm_bits: u32,
    pub cu_sharing: u32,
    pub data_bits: u32,
    pub rounding: Rounding,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            n_qubits: 8,
            window_order: 0,
            imm_bits: 8,
            cu_sharing: 0,
            data_bits: 20,
            rounding: Rounding::Nearest,
        }
    }
}

impl ExecConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(ConfigError::Invalid(format!("N must be in 1..={MAX_QUBITS}, got {}", self.n_qubits)));
        }
        if self.window_order > self.n_qubits - 1 {
            return Err(ConfigError::Invalid(format!(
                "W must be at most N-1 = {}, got {}",
                self.n_qubits - 1,
                self.window_order
            )));
        }
        if self.imm_bits == 0 || self.imm_bits > MAX_IMM_BITS {
            return Err(ConfigError::Invalid(format!("Q must be in 1..={MAX_IMM_BITS}, got {}", self.imm_bits)));
        }
        if !(MIN_DATA_BITS..=MAX_DATA_BITS).contains(&self.data_bits) {
            return Err(ConfigError::Invalid(format!(
                "data_bits must be in {MIN_DATA_BITS}..={MAX_DATA_BITS}, got {}",
                self.data_bits
            )));
        }
        Ok(())
    }

    /// Width of the target and control fields: `ceil(log2 N)`.
    pub fn qubit_field_bits(&self) -> u32 {
        ceil_log2(self.n_qubits)
    }

    pub fn instruction_width(&self) -> u32 {
        4 + 2 * self.qubit_field_bits() + self.imm_bits
    }

    /// Fixed-point format, or `None` for the float reference.
    pub fn fixed_format(&self) -> Option<FixedFormat> {
        self.rounding
            .fixed_mode()
            .map(|mode| FixedFormat::new(self.data_bits, mode).expect("validated data_bits"))
    }

    /// Parses flat `key = value` text. Unset keys keep their defaults.
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExecConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line: i + 1, key },
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field by key. Accepts the short symbols (`N`, `W`, `Q`, `S`)
    /// and long names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let int = |v: &str| {
            v.parse::<u32>()
                .map_err(|_| ConfigError::BadValue { key: key.to_string(), value: v.to_string() })
        };
        match key {
            "N" | "n" | "n_qubits" | "qubits" => self.n_qubits = int(value)?,
            "W" | "w" | "window_order" | "window" => self.window_order = int(value)?,
            "Q" | "q" | "imm_bits" => self.imm_bits = int(value)?,
            "S" | "s" | "cu_sharing" => self.cu_sharing = int(value)?,
            "data_bits" | "bits" | "n_bits" => self.data_bits = int(value)?,
            "rounding" => self.rounding = value.parse()?,
            _ => return Err(ConfigError::UnknownKey { line: 0, key: key.to_string() }),
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        format!(
            "N = {}\nW = {}\nQ = {}\nS = {}\ndata_bits = {}\nrounding = {}\n",
            self.n_qubits, self.window_order, self.imm_bits, self.cu_sharing, self.data_bits, self.rounding
        )
    }
}

pub fn ceil_log2(n: u32) -> u32 {
    if n <= 1 {
        0
    } else {
        32 - (n - 1).leading_zeros()
    }
}
