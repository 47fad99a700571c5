//! Two's-complement fixed point with two integer bits.
//!
//! A format of `n` total bits stores `raw` in `[-2^(n-1), 2^(n-1) - 1]` and
//! represents `raw * 2^-(n-2)`, so the range is `[-2, 2)`. Products are
//! computed exactly on `2n` bits and reduced back with the format's rounding
//! mode. Results that leave the range saturate and set a sticky overflow
//! flag that propagates through every later operation.

use thiserror::Error;

/// Post-multiplication width reduction strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundingMode {
    /// Arithmetic right shift (rounds toward negative infinity).
    Truncation,
    /// Round to nearest, ties away from zero.
    Nearest,
    /// Round to nearest, ties to an even LSB.
    NearestEven,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("fixed-point width must be in 3..=62 bits, got {0}")]
pub struct FormatError(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedFormat {
    bits: u32,
    rounding: RoundingMode,
}

/// A raw fixed-point value. The format is held by the [`FixedFormat`] that
/// produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fixed {
    pub raw: i64,
    /// Sticky: set when this value or any operand it was derived from
    /// saturated.
    pub overflow: bool,
}

impl Fixed {
    pub const ZERO: Fixed = Fixed { raw: 0, overflow: false };

    pub const fn from_raw(raw: i64) -> Fixed {
        Fixed { raw, overflow: false }
    }
}

/// Divides `wide` by `2^shift` with the given rounding. No saturation.
pub fn round_shift(wide: i128, shift: u32, mode: RoundingMode) -> i128 {
    if shift == 0 {
        return wide;
    }
    let half = 1i128 << (shift - 1);
    match mode {
        RoundingMode::Truncation => wide >> shift,
        RoundingMode::Nearest => {
            let mag = (wide.abs() + half) >> shift;
            if wide < 0 {
                -mag
            } else {
                mag
            }
        }
        RoundingMode::NearestEven => {
            let q = wide >> shift;
            let rem = wide - (q << shift);
            match rem.cmp(&half) {
                std::cmp::Ordering::Less => q,
                std::cmp::Ordering::Greater => q + 1,
                std::cmp::Ordering::Equal => q + (q & 1),
            }
        }
    }
}

impl FixedFormat {
    /// `bits` is the total width. Widths below 8 are accepted here for
    /// exhaustive testing even though architecture configs require >= 8.
    pub fn new(bits: u32, rounding: RoundingMode) -> Result<Self, FormatError> {
        if !(3..=62).contains(&bits) {
            return Err(FormatError(bits));
        }
        Ok(FixedFormat { bits, rounding })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.bits - 2
    }

    pub fn rounding(&self) -> RoundingMode {
        self.rounding
    }

    pub fn with_rounding(&self, rounding: RoundingMode) -> Self {
        FixedFormat { rounding, ..*self }
    }

    pub fn min_raw(&self) -> i64 {
        -(1i64 << (self.bits - 1))
    }

    pub fn max_raw(&self) -> i64 {
        (1i64 << (self.bits - 1)) - 1
    }

    /// Weight of one LSB.
    pub fn lsb(&self) -> f64 {
        (-(self.frac_bits() as f64)).exp2()
    }

    fn saturate(&self, wide: i128, overflow: bool) -> Fixed {
        if wide > self.max_raw() as i128 {
            Fixed { raw: self.max_raw(), overflow: true }
        } else if wide < self.min_raw() as i128 {
            Fixed { raw: self.min_raw(), overflow: true }
        } else {
            Fixed { raw: wide as i64, overflow }
        }
    }

    /// Builds a value from a raw integer, saturating out-of-range input.
    pub fn from_raw(&self, raw: i64) -> Fixed {
        self.saturate(raw as i128, false)
    }

    pub fn from_real(&self, x: f64) -> Fixed {
        if x.is_nan() {
            return Fixed { raw: 0, overflow: true };
        }
        // Exact: scaling by a power of two.
        let scaled = x * (self.frac_bits() as f64).exp2();
        let rounded = match self.rounding {
            RoundingMode::Truncation => scaled.floor(),
            RoundingMode::Nearest => scaled.round(),
            RoundingMode::NearestEven => scaled.round_ties_even(),
        };
        if rounded >= i64::MAX as f64 {
            return Fixed { raw: self.max_raw(), overflow: true };
        }
        if rounded <= i64::MIN as f64 {
            return Fixed { raw: self.min_raw(), overflow: true };
        }
        self.saturate(rounded as i128, false)
    }

    pub fn to_real(&self, v: Fixed) -> f64 {
        v.raw as f64 * self.lsb()
    }

    pub fn add(&self, a: Fixed, b: Fixed) -> Fixed {
        self.saturate(a.raw as i128 + b.raw as i128, a.overflow | b.overflow)
    }

    pub fn sub(&self, a: Fixed, b: Fixed) -> Fixed {
        self.saturate(a.raw as i128 - b.raw as i128, a.overflow | b.overflow)
    }

    pub fn negate(&self, a: Fixed) -> Fixed {
        self.saturate(-(a.raw as i128), a.overflow)
    }

    pub fn mul(&self, a: Fixed, b: Fixed) -> Fixed {
        let wide = a.raw as i128 * b.raw as i128;
        self.reduce(wide, a.overflow | b.overflow)
    }

    /// Reduces an exact `2n`-bit product (scale `2^-2(n-2)`) to `n` bits.
    pub fn round_reduce(&self, wide: i128) -> Fixed {
        self.reduce(wide, false)
    }

    fn reduce(&self, wide: i128, overflow: bool) -> Fixed {
        self.saturate(round_shift(wide, self.frac_bits(), self.rounding), overflow)
    }
}
