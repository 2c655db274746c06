//! Software-simulated floating-point formats.
//!
//! Values always live in hardware `f64` (or [`DoubleDouble`] for the quad
//! surrogate). "Computing in precision u" means the operands are already
//! representable in the format, the operation is carried out in a wider
//! format, and the result is rounded back with round-to-nearest-even. For
//! half and single, double rounding through `f64` is innocuous for the basic
//! operations because `f64` carries more than `2p + 2` significand bits.

mod dd;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dd::DoubleDouble;

use crate::error::Error;

/// A simulated floating-point format.
///
/// `Quad` is realized as double-double arithmetic (unit roundoff `2^-104`)
/// rather than IEEE binary128. `Drop` is a pseudo-format in which every
/// value rounds to zero; its unit roundoff is taken to be 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FpFormat {
    Half,
    Single,
    Double,
    Quad,
    Drop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    Div,
}

const HALF_MAX: f64 = 65504.0;
const HALF_MIN_EXP: i32 = -14;
const HALF_MANT_BITS: i32 = 10;

#[inline]
fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Round to the nearest IEEE binary16 value (ties to even), returned as f64.
#[inline]
fn round_half(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let a = x.abs();
    let biased = ((a.to_bits() >> 52) & 0x7ff) as i32;
    let e = (biased - 1023).max(HALF_MIN_EXP);
    let ulp = pow2(e - HALF_MANT_BITS);
    let r = (a / ulp).round_ties_even() * ulp;
    let r = if r > HALF_MAX { f64::INFINITY } else { r };
    r.copysign(x)
}

impl FpFormat {
    pub const ALL: [FpFormat; 5] = [
        FpFormat::Half,
        FpFormat::Single,
        FpFormat::Double,
        FpFormat::Quad,
        FpFormat::Drop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FpFormat::Half => "half",
            FpFormat::Single => "single",
            FpFormat::Double => "double",
            FpFormat::Quad => "quad",
            FpFormat::Drop => "drop",
        }
    }

    /// Storage width in bits (0 for the drop pseudo-format).
    pub fn bits(self) -> u32 {
        match self {
            FpFormat::Half => 16,
            FpFormat::Single => 32,
            FpFormat::Double => 64,
            FpFormat::Quad => 128,
            FpFormat::Drop => 0,
        }
    }

    pub fn unit_roundoff(self) -> f64 {
        match self {
            FpFormat::Half => pow2(-11),
            FpFormat::Single => pow2(-24),
            FpFormat::Double => pow2(-53),
            FpFormat::Quad => pow2(-104),
            FpFormat::Drop => 1.0,
        }
    }

    pub fn max_finite(self) -> f64 {
        match self {
            FpFormat::Half => HALF_MAX,
            FpFormat::Single => f32::MAX as f64,
            FpFormat::Double | FpFormat::Quad => f64::MAX,
            FpFormat::Drop => 0.0,
        }
    }

    pub fn min_normal(self) -> f64 {
        match self {
            FpFormat::Half => pow2(HALF_MIN_EXP),
            FpFormat::Single => f32::MIN_POSITIVE as f64,
            // double-double shares the exponent range of double
            FpFormat::Double | FpFormat::Quad => f64::MIN_POSITIVE,
            FpFormat::Drop => 0.0,
        }
    }

    /// Nearest representable value (round-to-nearest-even), overflowing to
    /// infinity past `max_finite`. Every double is exact in the quad surrogate.
    #[inline]
    pub fn round(self, x: f64) -> f64 {
        match self {
            FpFormat::Double | FpFormat::Quad => x,
            FpFormat::Single => x as f32 as f64,
            FpFormat::Half => round_half(x),
            FpFormat::Drop => 0.0,
        }
    }

    #[inline]
    pub fn add(self, a: f64, b: f64) -> f64 {
        match self {
            FpFormat::Double => a + b,
            FpFormat::Quad => DoubleDouble::sum_exact(a, b).to_f64(),
            _ => self.round(a + b),
        }
    }

    #[inline]
    pub fn sub(self, a: f64, b: f64) -> f64 {
        match self {
            FpFormat::Double => a - b,
            FpFormat::Quad => DoubleDouble::sum_exact(a, -b).to_f64(),
            _ => self.round(a - b),
        }
    }

    #[inline]
    pub fn mul(self, a: f64, b: f64) -> f64 {
        match self {
            FpFormat::Double => a * b,
            FpFormat::Quad => DoubleDouble::prod_exact(a, b).to_f64(),
            _ => self.round(a * b),
        }
    }

    #[inline]
    pub fn div(self, a: f64, b: f64) -> f64 {
        match self {
            FpFormat::Double => a / b,
            FpFormat::Quad => (DoubleDouble::from_f64(a) / DoubleDouble::from_f64(b)).to_f64(),
            _ => self.round(a / b),
        }
    }

    #[inline]
    pub fn sqrt(self, a: f64) -> f64 {
        match self {
            FpFormat::Double => a.sqrt(),
            FpFormat::Quad => DoubleDouble::from_f64(a).sqrt().to_f64(),
            _ => self.round(a.sqrt()),
        }
    }

    /// `a * b + c` with a single rounding.
    #[inline]
    pub fn fma(self, a: f64, b: f64, c: f64) -> f64 {
        match self {
            FpFormat::Double => a.mul_add(b, c),
            FpFormat::Quad => (DoubleDouble::prod_exact(a, b) + DoubleDouble::from_f64(c)).to_f64(),
            _ => self.round(a.mul_add(b, c)),
        }
    }

    /// Rounds a double-double value into this format. For the quad surrogate
    /// the value is kept as is.
    #[inline]
    pub fn round_dd(self, x: DoubleDouble) -> DoubleDouble {
        match self {
            FpFormat::Quad => x,
            FpFormat::Double => DoubleDouble::from_f64(x.to_f64()),
            // hi already carries at least 53 correct bits, and rounding hi+lo
            // through double first could double-round; resolve ties with lo.
            _ => DoubleDouble::from_f64(round_from_dd(self, x)),
        }
    }
}

fn round_from_dd(fmt: FpFormat, x: DoubleDouble) -> f64 {
    let r = fmt.round(x.hi);
    if r == x.hi || x.lo == 0.0 || !r.is_finite() {
        return r;
    }
    // x.hi is not representable; if it sits exactly on a midpoint of the
    // target grid, the sign of lo decides the direction.
    let other = if r > x.hi {
        fmt.round(x.hi - (r - x.hi))
    } else {
        fmt.round(x.hi + (x.hi - r))
    };
    let mid_gap = (r - x.hi).abs();
    let other_gap = (other - x.hi).abs();
    if mid_gap != other_gap {
        return r;
    }
    let toward_other = (other > x.hi) == (x.lo > 0.0);
    if toward_other {
        other
    } else {
        r
    }
}

impl fmt::Display for FpFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FpFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "half" | "fp16" => Ok(FpFormat::Half),
            "single" | "fp32" => Ok(FpFormat::Single),
            "double" | "fp64" => Ok(FpFormat::Double),
            "quad" | "fp128" => Ok(FpFormat::Quad),
            "drop" => Ok(FpFormat::Drop),
            other => Err(Error::Config(format!("unknown floating-point format `{other}`"))),
        }
    }
}

/// Values on which the simulated operations are defined.
pub trait Simulated: Copy {
    fn op_in(a: Self, b: Self, kind: OpKind, fmt: FpFormat) -> Self;
    fn round_to(x: Self, fmt: FpFormat) -> Self;
}

impl Simulated for f64 {
    #[inline]
    fn op_in(a: f64, b: f64, kind: OpKind, fmt: FpFormat) -> f64 {
        match kind {
            OpKind::Add => fmt.add(a, b),
            OpKind::Sub => fmt.sub(a, b),
            OpKind::Mul => fmt.mul(a, b),
            OpKind::Div => fmt.div(a, b),
        }
    }

    #[inline]
    fn round_to(x: f64, fmt: FpFormat) -> f64 {
        fmt.round(x)
    }
}

impl Simulated for DoubleDouble {
    fn op_in(a: Self, b: Self, kind: OpKind, fmt: FpFormat) -> Self {
        let exact = match kind {
            OpKind::Add => a + b,
            OpKind::Sub => a - b,
            OpKind::Mul => a * b,
            OpKind::Div => a / b,
        };
        fmt.round_dd(exact)
    }

    fn round_to(x: Self, fmt: FpFormat) -> Self {
        fmt.round_dd(x)
    }
}

/// Nearest value of `x` in `fmt`.
#[inline]
pub fn round_to<T: Simulated>(x: T, fmt: FpFormat) -> T {
    T::round_to(x, fmt)
}

/// `a (kind) b` carried out in precision `fmt`.
///
/// For `f64` arguments with `fmt = Quad` the double-double result is rounded
/// back to double on return; pass [`DoubleDouble`] values to keep it.
#[inline]
pub fn op_in<T: Simulated>(a: T, b: T, kind: OpKind, fmt: FpFormat) -> T {
    T::op_in(a, b, kind, fmt)
}

/// Fused multiply-add `a * b + c` in precision `fmt`.
#[inline]
pub fn fma_in(a: f64, b: f64, c: f64, fmt: FpFormat) -> f64 {
    fmt.fma(a, b, c)
}

#[inline]
pub fn unit_roundoff(fmt: FpFormat) -> f64 {
    fmt.unit_roundoff()
}

/// Rounds every entry of `v` to `fmt` in place.
pub fn round_slice(v: &mut [f64], fmt: FpFormat) {
    if matches!(fmt, FpFormat::Double | FpFormat::Quad) {
        return;
    }
    for x in v.iter_mut() {
        *x = fmt.round(*x);
    }
}

/// IEEE binary16 bit pattern of a value already representable in half.
pub fn half_to_bits(x: f64) -> u16 {
    let sign = if x.is_sign_negative() { 0x8000u16 } else { 0 };
    let a = x.abs();
    if a.is_nan() {
        return 0x7e00;
    }
    if a.is_infinite() {
        return sign | 0x7c00;
    }
    if a == 0.0 {
        return sign;
    }
    let biased = ((a.to_bits() >> 52) & 0x7ff) as i32 - 1023;
    if biased < HALF_MIN_EXP {
        let m = (a / pow2(HALF_MIN_EXP - HALF_MANT_BITS)) as u16;
        return sign | m;
    }
    let frac = a / pow2(biased) - 1.0;
    let m = (frac * 1024.0) as u16;
    sign | (((biased + 15) as u16) << 10) | m
}

pub fn half_from_bits(bits: u16) -> f64 {
    let sign = if bits & 0x8000 != 0 { -1.0 } else { 1.0 };
    let e = ((bits >> 10) & 0x1f) as i32;
    let m = (bits & 0x3ff) as f64;
    let mag = match e {
        0 => m * pow2(HALF_MIN_EXP - HALF_MANT_BITS),
        31 if m == 0.0 => f64::INFINITY,
        31 => f64::NAN,
        _ => (1.0 + m / 1024.0) * pow2(e - 15),
    };
    sign * mag
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_roundoffs() {
        assert_eq!(FpFormat::Half.unit_roundoff(), 2f64.powi(-11));
        assert_eq!(FpFormat::Single.unit_roundoff(), 2f64.powi(-24));
        assert_eq!(FpFormat::Double.unit_roundoff(), 2f64.powi(-53));
        let ud = FpFormat::Double.unit_roundoff();
        assert_eq!(FpFormat::Quad.unit_roundoff(), 4.0 * ud * ud);
        assert!((FpFormat::Half.unit_roundoff() - 4.9e-4).abs() < 0.05e-4);
        assert!((FpFormat::Single.unit_roundoff() - 6.0e-8).abs() < 0.05e-8);
        assert!((FpFormat::Double.unit_roundoff() - 1.1e-16).abs() < 0.05e-16);
    }

    #[test]
    fn half_rounding_examples() {
        assert_eq!(round_to(1.0, FpFormat::Half), 1.0);
        assert_eq!(round_to(70000.0, FpFormat::Half), f64::INFINITY);
        assert_eq!(round_to(-70000.0, FpFormat::Half), f64::NEG_INFINITY);
        assert_eq!(round_to(65519.0, FpFormat::Half), 65504.0);
        assert_eq!(round_to(65520.0, FpFormat::Half), f64::INFINITY);
        // smallest subnormal and the midpoint below it
        assert_eq!(round_to(2f64.powi(-24), FpFormat::Half), 2f64.powi(-24));
        assert_eq!(round_to(2f64.powi(-25), FpFormat::Half), 0.0);
        assert_eq!(round_to(1.5 * 2f64.powi(-25), FpFormat::Half), 2f64.powi(-24));
        // ties to even at 1 + ulp/2
        assert_eq!(round_to(1.0 + 2f64.powi(-11), FpFormat::Half), 1.0);
        assert_eq!(round_to(1.0 + 3.0 * 2f64.powi(-11), FpFormat::Half), 1.0 + 2f64.powi(-9));
    }

    #[test]
    fn drop_rounds_everything_to_zero() {
        for x in [1.0, -3.5, 1e300, f64::INFINITY] {
            assert_eq!(round_to(x, FpFormat::Drop), 0.0);
        }
        assert_eq!(FpFormat::Drop.bits(), 0);
    }

    #[test]
    fn op_in_examples() {
        assert_eq!(op_in(1.0, 2f64.powi(-12), OpKind::Add, FpFormat::Half), 1.0);
        assert_eq!(op_in(1.0, 1.0, OpKind::Add, FpFormat::Double), 2.0);
        let q = op_in(
            DoubleDouble::ONE,
            DoubleDouble::from_f64(2f64.powi(-60)),
            OpKind::Add,
            FpFormat::Quad,
        );
        assert_eq!((q.hi, q.lo), (1.0, 2f64.powi(-60)));
        assert_eq!(op_in(1.0, 0.0, OpKind::Div, FpFormat::Single), f64::INFINITY);
        assert!(op_in(0.0, 0.0, OpKind::Div, FpFormat::Half).is_nan());
    }

    #[test]
    fn dd_rounding_respects_low_word_on_ties() {
        // hi is the midpoint between 1 and 1 + 2^-10 in half; lo breaks the tie
        let x = DoubleDouble::from_parts(1.0 + 2f64.powi(-11), 1e-30);
        assert_eq!(FpFormat::Half.round_dd(x).hi, 1.0 + 2f64.powi(-10));
        let y = DoubleDouble::from_parts(1.0 + 2f64.powi(-11), -1e-30);
        assert_eq!(FpFormat::Half.round_dd(y).hi, 1.0);
    }

    #[test]
    fn half_bits_roundtrip() {
        for bits in 0u16..=0xffff {
            let x = half_from_bits(bits);
            if x.is_nan() {
                continue;
            }
            assert_eq!(round_half(x), x);
            assert_eq!(half_to_bits(x), bits, "bits {bits:#06x}");
        }
    }

    #[test]
    fn names_parse() {
        for f in FpFormat::ALL {
            assert_eq!(f.name().parse::<FpFormat>().unwrap(), f);
        }
        assert!("bfloat16".parse::<FpFormat>().is_err());
    }
}
