// SPDX-License-Identifier: Apache-2.0
//! Fixed-point values, saturating arithmetic and shift-and-add constants.
//!
//! Rounding is round-to-nearest-even everywhere except inside
//! [`apply_shift_add`], where each partial product is an arithmetic right
//! shift (floor), matching a barrel shifter. Overflow always saturates.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixedError {
    #[error("total bits must be in 2..=32, got {0}")]
    TotalBits(u32),
    #[error("fraction bits {frac} must be below total bits {total}")]
    FracBits { total: u32, frac: u32 },
}

/// Layout of a fixed-point word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawQFormat", into = "RawQFormat")]
pub struct QFormat {
    total_bits: u32,
    frac_bits: u32,
    signed: bool,
}

#[derive(Serialize, Deserialize)]
struct RawQFormat {
    total_bits: u32,
    frac_bits: u32,
    #[serde(default = "default_signed")]
    signed: bool,
}

fn default_signed() -> bool {
    true
}

impl TryFrom<RawQFormat> for QFormat {
    type Error = FixedError;

    fn try_from(r: RawQFormat) -> Result<Self, FixedError> {
        QFormat::new(r.total_bits, r.frac_bits, r.signed)
    }
}

impl From<QFormat> for RawQFormat {
    fn from(q: QFormat) -> Self {
        RawQFormat {
            total_bits: q.total_bits,
            frac_bits: q.frac_bits,
            signed: q.signed,
        }
    }
}

impl QFormat {
    pub fn new(total_bits: u32, frac_bits: u32, signed: bool) -> Result<Self, FixedError> {
        if !(2..=32).contains(&total_bits) {
            return Err(FixedError::TotalBits(total_bits));
        }
        if frac_bits >= total_bits {
            return Err(FixedError::FracBits {
                total: total_bits,
                frac: frac_bits,
            });
        }
        Ok(QFormat {
            total_bits,
            frac_bits,
            signed,
        })
    }

    /// Signed word of `bits` bits covering [-1, 1): the datapath sample format.
    pub fn data(bits: u32) -> Result<Self, FixedError> {
        QFormat::new(bits, bits.saturating_sub(1), true)
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn signed(&self) -> bool {
        self.signed
    }

    pub fn raw_min(&self) -> i64 {
        if self.signed {
            -(1i64 << (self.total_bits - 1))
        } else {
            0
        }
    }

    pub fn raw_max(&self) -> i64 {
        if self.signed {
            (1i64 << (self.total_bits - 1)) - 1
        } else {
            (1i64 << self.total_bits) - 1
        }
    }

    /// Weight of one raw step, 2^-frac_bits.
    pub fn ulp(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn min_value(&self) -> f64 {
        self.raw_min() as f64 * self.ulp()
    }

    pub fn max_value(&self) -> f64 {
        self.raw_max() as f64 * self.ulp()
    }

    pub fn saturate(&self, raw: i128) -> i64 {
        raw.clamp(self.raw_min() as i128, self.raw_max() as i128) as i64
    }

    /// Builds a value from an exact raw integer, saturating to the range.
    pub fn from_raw(&self, raw: i128) -> FixedValue {
        FixedValue {
            raw: self.saturate(raw),
            format: *self,
        }
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let int_bits = self.total_bits - self.frac_bits;
        let prefix = if self.signed { "Q" } else { "UQ" };
        write!(f, "{prefix}{int_bits}.{}", self.frac_bits)
    }
}

/// A fixed-point sample: raw integer interpreted as `raw * 2^-frac_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedValue {
    raw: i64,
    format: QFormat,
}

impl FixedValue {
    pub fn raw(&self) -> i64 {
        self.raw
    }

    pub fn format(&self) -> QFormat {
        self.format
    }

    pub fn zero(format: QFormat) -> Self {
        FixedValue { raw: 0, format }
    }

    pub fn to_real(&self) -> f64 {
        to_real(*self)
    }
}

/// Divides `v` by 2^shift, rounding to nearest with ties to even.
pub fn round_shift(v: i128, shift: u32) -> i128 {
    if shift == 0 {
        return v;
    }
    let floor = v >> shift;
    let rem = v - (floor << shift);
    let half = 1i128 << (shift - 1);
    if rem > half || (rem == half && floor & 1 == 1) {
        floor + 1
    } else {
        floor
    }
}

/// Quantizes `x` to `fmt` with round-to-nearest-even; out-of-range input saturates.
pub fn quantize(x: f64, fmt: QFormat) -> FixedValue {
    if x.is_nan() {
        return FixedValue::zero(fmt);
    }
    let scaled = (x * (fmt.frac_bits as f64).exp2()).round_ties_even();
    let raw = if scaled >= fmt.raw_max() as f64 {
        fmt.raw_max()
    } else if scaled <= fmt.raw_min() as f64 {
        fmt.raw_min()
    } else {
        scaled as i64
    };
    FixedValue { raw, format: fmt }
}

pub fn to_real(v: FixedValue) -> f64 {
    v.raw as f64 * v.format.ulp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Exact result of `a op b`, rescaled (mul) and saturated to the shared format.
///
/// Panics if the operands do not share a format.
pub fn fx_arith(a: FixedValue, b: FixedValue, op: ArithOp) -> FixedValue {
    assert_eq!(a.format, b.format, "fx_arith operands must share a format");
    let fmt = a.format;
    let exact = match op {
        ArithOp::Add => a.raw as i128 + b.raw as i128,
        ArithOp::Sub => a.raw as i128 - b.raw as i128,
        ArithOp::Mul => round_shift(a.raw as i128 * b.raw as i128, fmt.frac_bits),
    };
    fmt.from_raw(exact)
}

/// One signed power-of-two term, `sign * 2^-shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CsdTerm {
    pub negative: bool,
    pub shift: u32,
}

impl CsdTerm {
    pub fn value(&self) -> f64 {
        let v = (-(self.shift as f64)).exp2();
        if self.negative {
            -v
        } else {
            v
        }
    }
}

/// A constant as a signed sum of powers of two, the multiplierless form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftAddApprox {
    terms: Vec<CsdTerm>,
    target: f64,
}

impl ShiftAddApprox {
    /// Builds an approximation from explicit terms. Shifts must be strictly increasing.
    pub fn from_terms(terms: Vec<CsdTerm>, target: f64) -> Option<Self> {
        if terms.windows(2).all(|w| w[0].shift < w[1].shift) {
            Some(ShiftAddApprox { terms, target })
        } else {
            None
        }
    }

    /// `1 - 2^-k`, the pre-emphasis coefficient in shift-and-add form.
    pub fn one_minus_pow2(k: u32) -> Self {
        ShiftAddApprox {
            terms: vec![
                CsdTerm {
                    negative: false,
                    shift: 0,
                },
                CsdTerm {
                    negative: true,
                    shift: k,
                },
            ],
            target: 1.0 - (-(k as f64)).exp2(),
        }
    }

    pub fn terms(&self) -> &[CsdTerm] {
        &self.terms
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn value(&self) -> f64 {
        self.terms.iter().map(CsdTerm::value).sum()
    }

    pub fn error(&self) -> f64 {
        (self.target - self.value()).abs()
    }

    /// Adders needed to realize the constant (terms minus one, zero for a bare shift).
    pub fn adder_count(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }
}

/// Greedy CSD decomposition of `c`.
///
/// Each step appends the term `±2^-k` (k above the previous shift and at most
/// `max_shift`) closest to the current residual, ties going to the smaller k.
/// Stops after `max_terms`, at a zero residual, or when no term would reduce
/// the residual.
pub fn approx_csd(c: f64, max_terms: usize, max_shift: u32) -> ShiftAddApprox {
    let max_shift = max_shift.min(62);
    let mut terms: Vec<CsdTerm> = Vec::new();
    let mut residual = c;
    while terms.len() < max_terms && residual != 0.0 {
        let first = terms.last().map_or(0, |t| t.shift + 1);
        if first > max_shift {
            break;
        }
        let magnitude = residual.abs();
        let mut best: Option<(u32, f64)> = None;
        for k in first..=max_shift {
            let d = (magnitude - (-(k as f64)).exp2()).abs();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        let Some((shift, dist)) = best else { break };
        if dist >= magnitude {
            break;
        }
        let term = CsdTerm {
            negative: residual < 0.0,
            shift,
        };
        residual -= term.value();
        terms.push(term);
    }
    ShiftAddApprox { terms, target: c }
}

/// Multiplies `x` by `a` using arithmetic right shifts and a saturating sum.
pub fn apply_shift_add(x: FixedValue, a: &ShiftAddApprox) -> FixedValue {
    let sum: i128 = a
        .terms
        .iter()
        .map(|t| {
            let partial = (x.raw >> t.shift.min(63)) as i128;
            if t.negative {
                -partial
            } else {
                partial
            }
        })
        .sum();
    x.format.from_raw(sum)
}
