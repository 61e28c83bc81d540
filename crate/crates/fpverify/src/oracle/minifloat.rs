//! Arbitrary-precision software floating point over small formats.
//!
//! All arithmetic is computed exactly with big rationals and rounded once
//! with round-to-nearest-even; no host float is involved anywhere, so
//! results are bit-exact at every configured width. NaNs collapse to a
//! single canonical quiet NaN, matching the solver-side value model.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::typer::FPFormat;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MiniFloat {
    pub format: FPFormat,
    pub bits: u64,
}

/// Classification of an encoded value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FpClass {
    Nan,
    Inf { neg: bool },
    Zero { neg: bool },
    Finite { neg: bool, value: BigRational },
}

/// Internal rounding directions; only RNE is exposed by the operations,
/// the directed modes exist for conversion range boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dir {
    Nearest,
    Down,
    Up,
}

impl MiniFloat {
    pub fn from_bits(format: FPFormat, bits: u64) -> MiniFloat {
        let mask = ones(format.total_bits());
        MiniFloat { format, bits: bits & mask }
    }

    pub fn pos_zero(format: FPFormat) -> MiniFloat {
        MiniFloat { format, bits: 0 }
    }

    pub fn neg_zero(format: FPFormat) -> MiniFloat {
        MiniFloat { format, bits: 1 << (format.total_bits() - 1) }
    }

    pub fn zero(format: FPFormat, neg: bool) -> MiniFloat {
        if neg {
            Self::neg_zero(format)
        } else {
            Self::pos_zero(format)
        }
    }

    pub fn infinity(format: FPFormat, neg: bool) -> MiniFloat {
        let e = ones(format.ebits) << format.trailing_bits();
        let s = if neg { 1u64 << (format.total_bits() - 1) } else { 0 };
        MiniFloat { format, bits: s | e }
    }

    /// The canonical quiet NaN: sign 0, exponent all ones, leading
    /// significand bit set, rest zero.
    pub fn nan(format: FPFormat) -> MiniFloat {
        let e = ones(format.ebits) << format.trailing_bits();
        let q = 1u64 << (format.trailing_bits() - 1);
        MiniFloat { format, bits: e | q }
    }

    pub fn one(format: FPFormat) -> MiniFloat {
        from_rational(format, &BigRational::one(), false)
    }

    pub fn max_finite(format: FPFormat, neg: bool) -> MiniFloat {
        let e = (ones(format.ebits) - 1) << format.trailing_bits();
        let t = ones(format.trailing_bits());
        let s = if neg { 1u64 << (format.total_bits() - 1) } else { 0 };
        MiniFloat { format, bits: s | e | t }
    }

    pub fn sign_bit(&self) -> bool {
        (self.bits >> (self.format.total_bits() - 1)) & 1 == 1
    }

    pub fn biased_exp(&self) -> u64 {
        (self.bits >> self.format.trailing_bits()) & ones(self.format.ebits)
    }

    pub fn trailing(&self) -> u64 {
        self.bits & ones(self.format.trailing_bits())
    }

    pub fn is_nan(&self) -> bool {
        self.biased_exp() == ones(self.format.ebits) && self.trailing() != 0
    }

    pub fn is_infinite(&self) -> bool {
        self.biased_exp() == ones(self.format.ebits) && self.trailing() == 0
    }

    pub fn is_zero(&self) -> bool {
        self.biased_exp() == 0 && self.trailing() == 0
    }

    pub fn is_finite(&self) -> bool {
        self.biased_exp() != ones(self.format.ebits)
    }

    pub fn is_subnormal(&self) -> bool {
        self.biased_exp() == 0 && self.trailing() != 0
    }

    pub fn is_normal(&self) -> bool {
        let e = self.biased_exp();
        e != 0 && e != ones(self.format.ebits)
    }

    /// Sign bit set (true for -0.0 and -inf; NaN is canonical, sign 0).
    pub fn is_negative(&self) -> bool {
        self.sign_bit()
    }

    /// Exact value of a finite encoding; None for NaN and infinities.
    ///
    /// Normal numbers decode as (-1)^s * (1 + 2^(1-p) * t) * 2^(e-bias),
    /// subnormals as (-1)^s * (2^(1-p) * t) * 2^(emin).
    pub fn value(&self) -> Option<BigRational> {
        if !self.is_finite() {
            return None;
        }
        let p = self.format.sbits as i64;
        let t = BigInt::from(self.trailing());
        let e = self.biased_exp() as i64;
        let significand = if e == 0 {
            t
        } else {
            (BigInt::one() << (p - 1)) + t
        };
        let exp2 = if e == 0 { self.format.emin() } else { e - self.format.bias() } - (p - 1);
        let mag = mul_pow2(&BigRational::from_integer(significand), exp2);
        Some(if self.sign_bit() { -mag } else { mag })
    }

    pub fn classify(&self) -> FpClass {
        if self.is_nan() {
            FpClass::Nan
        } else if self.is_infinite() {
            FpClass::Inf { neg: self.sign_bit() }
        } else if self.is_zero() {
            FpClass::Zero { neg: self.sign_bit() }
        } else {
            FpClass::Finite { neg: self.sign_bit(), value: self.value().unwrap() }
        }
    }

    pub fn abs(&self) -> MiniFloat {
        if self.is_nan() {
            return MiniFloat::nan(self.format);
        }
        let sign_mask = 1u64 << (self.format.total_bits() - 1);
        MiniFloat { format: self.format, bits: self.bits & !sign_mask }
    }

    pub fn neg(&self) -> MiniFloat {
        if self.is_nan() {
            return MiniFloat::nan(self.format);
        }
        let sign_mask = 1u64 << (self.format.total_bits() - 1);
        MiniFloat { format: self.format, bits: self.bits ^ sign_mask }
    }

    pub fn copysign(&self, sign_of: &MiniFloat) -> MiniFloat {
        if self.is_nan() {
            return MiniFloat::nan(self.format);
        }
        let sign_mask = 1u64 << (self.format.total_bits() - 1);
        let s = if sign_of.sign_bit() { sign_mask } else { 0 };
        MiniFloat { format: self.format, bits: (self.bits & !sign_mask) | s }
    }

    /// Render the exact decimal value (finite encodings have power-of-two
    /// denominators, so the expansion is always finite).
    pub fn to_decimal_string(&self) -> String {
        match self.classify() {
            FpClass::Nan => "nan".into(),
            FpClass::Inf { neg } => if neg { "-inf" } else { "inf" }.into(),
            FpClass::Zero { neg } => if neg { "-0.0" } else { "0.0" }.into(),
            FpClass::Finite { neg, value } => {
                let sign = if neg { "-" } else { "" };
                let mag = value.abs();
                let numer = mag.numer().to_biguint().unwrap();
                let denom = mag.denom().to_biguint().unwrap();
                // denom = 2^k; multiply by 5^k to get a 10^k denominator
                let k = denom.bits().saturating_sub(1) as usize;
                let scaled = numer * num_traits::Pow::pow(BigUint::from(5u32), k);
                let digits = scaled.to_string();
                if k == 0 {
                    return format!("{sign}{digits}.0");
                }
                if digits.len() > k {
                    let (int_part, frac_part) = digits.split_at(digits.len() - k);
                    format!("{sign}{int_part}.{frac_part}")
                } else {
                    format!("{sign}0.{}{}", "0".repeat(k - digits.len()), digits)
                }
            }
        }
    }

    /// Hex bit-pattern, e.g. `0x3c00`.
    pub fn to_bits_string(&self) -> String {
        let width = (self.format.total_bits() as usize).div_ceil(4);
        format!("0x{:0width$x}", self.bits)
    }
}

impl std::fmt::Debug for MiniFloat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({} = {})", self.format, self.to_bits_string(), self.to_decimal_string())
    }
}

fn ones(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn mul_pow2(q: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        q * BigRational::from_integer(BigInt::one() << k)
    } else {
        q / BigRational::from_integer(BigInt::one() << (-k))
    }
}

/// Largest e such that 2^e <= m (m must be positive).
fn ilog2(m: &BigRational) -> i64 {
    debug_assert!(m.is_positive());
    let nb = m.numer().bits() as i64;
    let db = m.denom().bits() as i64;
    let mut e = nb - db;
    while cmp_pow2(m, e) == Ordering::Less {
        e -= 1;
    }
    while cmp_pow2(m, e + 1) != Ordering::Less {
        e += 1;
    }
    e
}

/// Compare m against 2^e.
fn cmp_pow2(m: &BigRational, e: i64) -> Ordering {
    // m >= 2^e  <=>  numer >= denom << e
    if e >= 0 {
        m.numer().cmp(&(m.denom() << e))
    } else {
        (m.numer() << (-e)).cmp(m.denom())
    }
}

/// Round a nonzero rational magnitude to an integer per direction.
fn round_int(m: &BigRational, dir: Dir) -> BigInt {
    let floor = m.floor().to_integer();
    let frac = m - BigRational::from_integer(floor.clone());
    match dir {
        Dir::Down => floor,
        Dir::Up => {
            if frac.is_zero() {
                floor
            } else {
                floor + 1
            }
        }
        Dir::Nearest => {
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            match frac.cmp(&half) {
                Ordering::Less => floor,
                Ordering::Greater => floor + 1,
                Ordering::Equal => {
                    if floor.is_even() {
                        floor
                    } else {
                        floor + 1
                    }
                }
            }
        }
    }
}

/// Round to nearest even with ties to even; returns the signed-zero
/// encoding `zero(sign)` when the magnitude underflows completely.
pub fn from_rational(format: FPFormat, q: &BigRational, zero_sign: bool) -> MiniFloat {
    round_rational(format, q, zero_sign, Dir::Nearest)
}

pub(crate) fn round_rational(format: FPFormat, q: &BigRational, zero_sign: bool, dir: Dir) -> MiniFloat {
    if q.is_zero() {
        return MiniFloat::zero(format, zero_sign);
    }
    let neg = q.is_negative();
    let m = q.abs();
    let p = format.sbits as i64;
    // directed rounding of a magnitude: Down/Up refer to the signed value
    let mag_dir = match (dir, neg) {
        (Dir::Nearest, _) => Dir::Nearest,
        (Dir::Down, false) | (Dir::Up, true) => Dir::Down,
        (Dir::Down, true) | (Dir::Up, false) => Dir::Up,
    };

    let e = ilog2(&m);
    let mut prelim = e.max(format.emin());
    let scaled = mul_pow2(&m, (p - 1) - prelim);
    let mut k = round_int(&scaled, mag_dir);
    if k.is_zero() {
        return MiniFloat::zero(format, neg);
    }
    if k.bits() as i64 > p {
        // rounding carried into the next binade; k is exactly 2^p
        k >>= 1;
        prelim += 1;
    }
    if prelim > format.emax() {
        return match mag_dir {
            Dir::Down => MiniFloat::max_finite(format, neg),
            _ => MiniFloat::infinity(format, neg),
        };
    }
    let k64 = k.to_u64().expect("significand fits in 64 bits");
    let sign = if neg { 1u64 << (format.total_bits() - 1) } else { 0 };
    if k64 < (1u64 << (p - 1)) {
        // subnormal (prelim == emin by construction)
        MiniFloat { format, bits: sign | k64 }
    } else {
        let biased = (prelim + format.bias()) as u64;
        let t = k64 - (1u64 << (p - 1));
        MiniFloat { format, bits: sign | (biased << format.trailing_bits()) | t }
    }
}

/// Smallest representable finite value strictly greater than `q`.
pub(crate) fn smallest_above(format: FPFormat, q: &BigRational) -> MiniFloat {
    let r = round_rational(format, q, false, Dir::Up);
    if r.is_finite() && r.value().as_ref() == Some(q) {
        next_up(&r)
    } else {
        r
    }
}

/// Largest representable finite value strictly less than `q`.
pub(crate) fn largest_below(format: FPFormat, q: &BigRational) -> MiniFloat {
    let r = round_rational(format, q, false, Dir::Down);
    if r.is_finite() && r.value().as_ref() == Some(q) {
        next_down(&r)
    } else if r.is_infinite() {
        // directed rounding clamped; q exceeds every finite value
        MiniFloat::max_finite(format, r.sign_bit())
    } else {
        r
    }
}

/// Next value toward +inf (finite, non-NaN input).
pub(crate) fn next_up(x: &MiniFloat) -> MiniFloat {
    debug_assert!(x.is_finite());
    let f = x.format;
    if x.is_zero() {
        return MiniFloat { format: f, bits: 1 }; // smallest positive subnormal
    }
    let sign_mask = 1u64 << (f.total_bits() - 1);
    let mag = x.bits & !sign_mask;
    if x.sign_bit() {
        if mag == 1 {
            MiniFloat::neg_zero(f)
        } else {
            MiniFloat { format: f, bits: sign_mask | (mag - 1) }
        }
    } else {
        MiniFloat { format: f, bits: mag + 1 } // may yield +inf
    }
}

/// Next value toward -inf (finite, non-NaN input).
pub(crate) fn next_down(x: &MiniFloat) -> MiniFloat {
    next_up(&x.neg()).neg()
}

// ------------------------------------------------------------ arithmetic

/// IEEE addition under RNE, with the special-value and zero-sign rules.
pub fn mf_add(a: &MiniFloat, b: &MiniFloat) -> MiniFloat {
    let f = a.format;
    debug_assert_eq!(a.format, b.format);
    if a.is_nan() || b.is_nan() {
        return MiniFloat::nan(f);
    }
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => {
            return if a.sign_bit() == b.sign_bit() { *a } else { MiniFloat::nan(f) };
        }
        (true, false) => return *a,
        (false, true) => return *b,
        _ => {}
    }
    let (qa, qb) = (a.value().unwrap(), b.value().unwrap());
    let q = &qa + &qb;
    if q.is_zero() {
        // exact zero sum: -0 only when both addends are -0 (RNE rule)
        let neg = a.is_zero() && b.is_zero() && a.sign_bit() && b.sign_bit();
        return MiniFloat::zero(f, neg);
    }
    from_rational(f, &q, q.is_negative())
}

pub fn mf_sub(a: &MiniFloat, b: &MiniFloat) -> MiniFloat {
    mf_add(a, &b.neg())
}

pub fn mf_mul(a: &MiniFloat, b: &MiniFloat) -> MiniFloat {
    let f = a.format;
    debug_assert_eq!(a.format, b.format);
    if a.is_nan() || b.is_nan() {
        return MiniFloat::nan(f);
    }
    let neg = a.sign_bit() ^ b.sign_bit();
    if a.is_infinite() || b.is_infinite() {
        if a.is_zero() || b.is_zero() {
            return MiniFloat::nan(f);
        }
        return MiniFloat::infinity(f, neg);
    }
    if a.is_zero() || b.is_zero() {
        return MiniFloat::zero(f, neg);
    }
    let q = a.value().unwrap() * b.value().unwrap();
    from_rational(f, &q, neg)
}

pub fn mf_div(a: &MiniFloat, b: &MiniFloat) -> MiniFloat {
    let f = a.format;
    debug_assert_eq!(a.format, b.format);
    if a.is_nan() || b.is_nan() {
        return MiniFloat::nan(f);
    }
    let neg = a.sign_bit() ^ b.sign_bit();
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => return MiniFloat::nan(f),
        (true, false) => return MiniFloat::infinity(f, neg),
        (false, true) => return MiniFloat::zero(f, neg),
        _ => {}
    }
    if b.is_zero() {
        return if a.is_zero() { MiniFloat::nan(f) } else { MiniFloat::infinity(f, neg) };
    }
    if a.is_zero() {
        return MiniFloat::zero(f, neg);
    }
    let q = a.value().unwrap() / b.value().unwrap();
    from_rational(f, &q, neg)
}

/// IEEE `remainder`: r = x - n*y with n = x/y rounded to nearest even.
/// The result is exact and carries x's sign when zero.
pub fn mf_remainder_ieee(x: &MiniFloat, y: &MiniFloat) -> MiniFloat {
    let f = x.format;
    debug_assert_eq!(x.format, y.format);
    if x.is_nan() || y.is_nan() || x.is_infinite() || y.is_zero() {
        return MiniFloat::nan(f);
    }
    if y.is_infinite() || x.is_zero() {
        return *x;
    }
    let (qx, qy) = (x.value().unwrap(), y.value().unwrap());
    let n = round_int(&(&qx / &qy), Dir::Nearest);
    let r = &qx - BigRational::from_integer(n) * &qy;
    if r.is_zero() {
        return MiniFloat::zero(f, x.sign_bit());
    }
    from_rational(f, &r, r.is_negative())
}

/// `frem` follows C `fmod`, composed from the IEEE remainder:
/// r = remainder(|x|, |y|); if r < 0 then r += |y| (RNE);
/// the result carries x's sign.
pub fn mf_rem(x: &MiniFloat, y: &MiniFloat) -> MiniFloat {
    let abs_y = y.abs();
    let mut r = mf_remainder_ieee(&x.abs(), &abs_y);
    if !r.is_nan() && r.sign_bit() && !r.is_zero() {
        r = mf_add(&r, &abs_y);
    }
    r.copysign(x)
}

// ------------------------------------------------------------ comparison

/// IEEE partial order: None when either operand is NaN; +0 equals -0.
pub fn partial_cmp_values(a: &MiniFloat, b: &MiniFloat) -> Option<Ordering> {
    if a.is_nan() || b.is_nan() {
        return None;
    }
    let rank = |m: &MiniFloat| -> i8 {
        if m.is_infinite() {
            if m.sign_bit() {
                -1
            } else {
                1
            }
        } else {
            0
        }
    };
    let (ra, rb) = (rank(a), rank(b));
    if ra != 0 || rb != 0 {
        return Some(ra.cmp(&rb).then_with(|| {
            if ra == 0 || rb == 0 {
                Ordering::Equal
            } else {
                Ordering::Equal
            }
        }));
    }
    Some(a.value().unwrap().cmp(&b.value().unwrap()))
}

pub fn mf_cmp(cc: crate::dsl::CondCode, a: &MiniFloat, b: &MiniFloat) -> bool {
    use crate::dsl::CondCode::*;
    let ord = partial_cmp_values(a, b);
    let unordered = ord.is_none();
    let rel = |want: &[Ordering]| ord.map(|o| want.contains(&o)).unwrap_or(false);
    use Ordering::*;
    match cc {
        Oeq => rel(&[Equal]),
        Ogt => rel(&[Greater]),
        Oge => rel(&[Greater, Equal]),
        Olt => rel(&[Less]),
        Ole => rel(&[Less, Equal]),
        One => rel(&[Less, Greater]),
        Ord => !unordered,
        Ueq => unordered || rel(&[Equal]),
        Ugt => unordered || rel(&[Greater]),
        Uge => unordered || rel(&[Greater, Equal]),
        Ult => unordered || rel(&[Less]),
        Ule => unordered || rel(&[Less, Equal]),
        Une => unordered || rel(&[Less, Greater]),
        Uno => unordered,
    }
}

// ----------------------------------------------------------- conversions

/// Truncate toward zero to a signed two's-complement integer of width
/// `w`; None when the value is NaN, infinite, or out of range.
pub fn mf_to_signed(x: &MiniFloat, w: u32) -> Option<u64> {
    let q = x.value()?;
    let n = round_int(&q, if q.is_negative() { Dir::Up } else { Dir::Down });
    let lo = -(BigInt::one() << (w - 1));
    let hi = (BigInt::one() << (w - 1)) - 1;
    if n < lo || n > hi {
        return None;
    }
    Some(encode_twos_complement(&n, w))
}

pub fn mf_to_unsigned(x: &MiniFloat, w: u32) -> Option<u64> {
    let q = x.value()?;
    let n = round_int(&q, if q.is_negative() { Dir::Up } else { Dir::Down });
    let hi = (BigInt::one() << w) - 1;
    if n.is_negative() || n > hi {
        return None;
    }
    Some(encode_twos_complement(&n, w))
}

/// RNE conversion from a signed two's-complement integer; None when the
/// magnitude overflows the format (the undef case).
pub fn mf_from_signed(format: FPFormat, bits: u64, w: u32) -> Option<MiniFloat> {
    let n = decode_signed(bits, w);
    let r = from_rational(format, &BigRational::from_integer(n), false);
    if r.is_infinite() {
        None
    } else {
        Some(r)
    }
}

pub fn mf_from_unsigned(format: FPFormat, bits: u64, w: u32) -> Option<MiniFloat> {
    let n = BigInt::from(bits & ones(w));
    let r = from_rational(format, &BigRational::from_integer(n), false);
    if r.is_infinite() {
        None
    } else {
        Some(r)
    }
}

/// fpext/fptrunc: re-round the value into the destination format (exact
/// for widenings).
pub fn mf_convert_format(x: &MiniFloat, dst: FPFormat) -> MiniFloat {
    match x.classify() {
        FpClass::Nan => MiniFloat::nan(dst),
        FpClass::Inf { neg } => MiniFloat::infinity(dst, neg),
        FpClass::Zero { neg } => MiniFloat::zero(dst, neg),
        FpClass::Finite { neg, value } => from_rational(dst, &value, neg),
    }
}

pub fn encode_twos_complement(n: &BigInt, w: u32) -> u64 {
    let modulus = if w >= 64 { BigInt::one() << 64 } else { BigInt::one() << w };
    let v = n.mod_floor(&modulus);
    let (_, digits) = v.to_u64_digits();
    *digits.first().unwrap_or(&0)
}

pub fn decode_signed(bits: u64, w: u32) -> BigInt {
    let bits = bits & ones(w);
    let sign_bit = 1u64 << (w - 1);
    if bits & sign_bit != 0 {
        BigInt::from(bits) - (BigInt::one() << w)
    } else {
        BigInt::from(bits)
    }
}

/// All bit patterns of a format, for exhaustive sweeps.
pub fn all_values(format: FPFormat) -> impl Iterator<Item = MiniFloat> {
    let n = 1u64 << format.total_bits();
    (0..n).map(move |b| MiniFloat::from_bits(format, b))
}

/// Parse a literal into a value of the given format.
pub fn literal_value(format: FPFormat, lit: &crate::dsl::Literal) -> MiniFloat {
    use crate::dsl::Literal;
    match lit {
        Literal::Nan => MiniFloat::nan(format),
        Literal::Inf => MiniFloat::infinity(format, false),
        Literal::NegInf => MiniFloat::infinity(format, true),
        Literal::Fp { neg, mag, .. } => {
            let q = if *neg { -mag.clone() } else { mag.clone() };
            from_rational(format, &q, *neg)
        }
        Literal::Int(n) => from_rational(format, &BigRational::from_integer(n.clone()), false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::CondCode;

    const FP8: FPFormat = FPFormat::FP8;
    const HALF: FPFormat = FPFormat::HALF;

    fn from_f64(format: FPFormat, v: f64) -> MiniFloat {
        if v.is_nan() {
            return MiniFloat::nan(format);
        }
        if v.is_infinite() {
            return MiniFloat::infinity(format, v < 0.0);
        }
        if v == 0.0 {
            return MiniFloat::zero(format, v.is_sign_negative());
        }
        let q = BigRational::from_float(v).unwrap();
        from_rational(format, &q, v < 0.0)
    }

    #[test]
    fn value_formula_half() {
        // 1.5 in half: s=0 e=01111 t=1000000000 -> 0x3e00
        let x = from_f64(HALF, 1.5);
        assert_eq!(x.bits, 0x3e00);
        assert_eq!(x.to_decimal_string(), "1.5");
        // largest half = 65504
        let m = MiniFloat::max_finite(HALF, false);
        assert_eq!(m.value().unwrap(), BigRational::from_integer(65504.into()));
    }

    #[test]
    fn subnormal_value_formula() {
        // smallest positive subnormal in half = 2^-24
        let x = MiniFloat::from_bits(HALF, 1);
        assert!(x.is_subnormal());
        assert_eq!(x.value().unwrap(), mul_pow2(&BigRational::one(), -24));
        assert!(!x.is_normal());
    }

    #[test]
    fn zero_sum_signs() {
        let pz = MiniFloat::pos_zero(FP8);
        let nz = MiniFloat::neg_zero(FP8);
        assert_eq!(mf_add(&pz, &nz), pz);
        assert_eq!(mf_add(&nz, &nz), nz);
        assert_eq!(mf_add(&nz, &pz), pz);
        // exact cancellation of nonzeros gives +0
        let one = MiniFloat::one(FP8);
        assert_eq!(mf_add(&one, &one.neg()), pz);
    }

    #[test]
    fn division_by_signed_zero() {
        let one = MiniFloat::one(HALF);
        let nz = MiniFloat::neg_zero(HALF);
        let pz = MiniFloat::pos_zero(HALF);
        assert_eq!(mf_div(&one, &nz), MiniFloat::infinity(HALF, true));
        assert_eq!(mf_div(&one, &pz), MiniFloat::infinity(HALF, false));
        assert!(mf_div(&pz, &pz).is_nan());
    }

    #[test]
    fn fp8_overflow_rounds_to_infinity() {
        let max = MiniFloat::max_finite(FP8, false);
        assert!(mf_add(&max, &max).is_infinite());
        let two = from_f64(FP8, 2.0);
        assert!(mf_mul(&max, &two).is_infinite());
    }

    #[test]
    fn remainder_and_fmod() {
        let five = from_f64(HALF, 5.0);
        let two = from_f64(HALF, 2.0);
        assert_eq!(mf_rem(&five, &two), from_f64(HALF, 1.0));
        assert_eq!(mf_rem(&five.neg(), &two), from_f64(HALF, -1.0));
        // frem by zero and of infinity are NaN
        assert!(mf_rem(&five, &MiniFloat::pos_zero(HALF)).is_nan());
        assert!(mf_rem(&five, &MiniFloat::neg_zero(HALF)).is_nan());
        assert!(mf_rem(&MiniFloat::infinity(HALF, false), &two).is_nan());
        // fmod(x, inf) = x
        assert_eq!(mf_rem(&five, &MiniFloat::infinity(HALF, true)), five);
        // sign of zero result follows x
        let four = from_f64(HALF, 4.0);
        assert_eq!(mf_rem(&four.neg(), &two), MiniFloat::neg_zero(HALF));
    }

    #[test]
    fn fmod_differs_from_remainder() {
        // remainder(5, 3) = -1 (nearest), fmod(5, 3) = 2 (toward zero)
        let five = from_f64(HALF, 5.0);
        let three = from_f64(HALF, 3.0);
        assert_eq!(mf_remainder_ieee(&five, &three), from_f64(HALF, -1.0));
        assert_eq!(mf_rem(&five, &three), from_f64(HALF, 2.0));
    }

    #[test]
    fn cmp_table_specials() {
        let nan = MiniFloat::nan(HALF);
        let one = MiniFloat::one(HALF);
        let pz = MiniFloat::pos_zero(HALF);
        let nz = MiniFloat::neg_zero(HALF);
        assert!(!mf_cmp(CondCode::Oeq, &nan, &nan));
        assert!(mf_cmp(CondCode::Une, &nan, &nan));
        assert!(mf_cmp(CondCode::Uno, &nan, &one));
        assert!(mf_cmp(CondCode::Oeq, &nz, &pz));
        assert!(mf_cmp(CondCode::Ord, &one, &pz));
        assert!(mf_cmp(CondCode::Olt, &MiniFloat::infinity(HALF, true), &one));
    }

    #[test]
    fn conversions() {
        // fptosi truncates toward zero
        let x = from_f64(HALF, -2.75);
        assert_eq!(mf_to_signed(&x, 8), Some(0xfeu64)); // -2
        assert_eq!(mf_to_signed(&MiniFloat::nan(HALF), 8), None);
        assert_eq!(mf_to_signed(&MiniFloat::infinity(HALF, false), 8), None);
        assert_eq!(mf_to_signed(&from_f64(HALF, 300.0), 8), None);
        assert_eq!(mf_to_unsigned(&from_f64(HALF, -0.5), 8), Some(0));
        assert_eq!(mf_to_unsigned(&from_f64(HALF, -1.0), 8), None);
        // sitofp exact and inexact
        assert_eq!(mf_from_signed(HALF, 3, 8).unwrap(), from_f64(HALF, 3.0));
        // -4095 is a tie between -4094 and -4096 at half; RNE picks -4096
        let v = mf_from_signed(HALF, encode_twos_complement(&BigInt::from(-4095), 16), 16).unwrap();
        assert_eq!(v, from_f64(HALF, -4096.0));
        // 2^16 overflows half -> undef
        assert_eq!(mf_from_signed(HALF, 1 << 17, 32), None);
        // widening is exact
        let h = from_f64(HALF, 1.5);
        assert_eq!(mf_convert_format(&h, FPFormat::DOUBLE), from_f64(FPFormat::DOUBLE, 1.5));
    }

    fn to_f64(x: &MiniFloat) -> f64 {
        match x.classify() {
            FpClass::Nan => f64::NAN,
            FpClass::Inf { neg } => {
                if neg {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
            FpClass::Zero { neg } => {
                if neg {
                    -0.0
                } else {
                    0.0
                }
            }
            FpClass::Finite { value, .. } => value.to_f64().unwrap(),
        }
    }

    #[test]
    fn add_mul_match_host_arithmetic_exhaustive_fp8() {
        // fp8 sums and products are exact in f64 (at most 8 significand
        // bits), so host-add + our rounding is an independent route
        for a in all_values(FP8) {
            for b in all_values(FP8) {
                let host_sum = to_f64(&a) + to_f64(&b);
                let host_prod = to_f64(&a) * to_f64(&b);
                assert_eq!(mf_add(&a, &b), from_f64(FP8, host_sum), "add {a:?} {b:?}");
                assert_eq!(mf_mul(&a, &b), from_f64(FP8, host_prod), "mul {a:?} {b:?}");
            }
        }
    }

    #[test]
    fn fabs_properties_exhaustive_fp8() {
        for x in all_values(FP8) {
            let a = x.abs();
            assert!(!a.sign_bit());
            assert_eq!(a.abs(), a);
        }
    }

    #[test]
    fn add_mul_commutative_exhaustive_fp8() {
        for a in all_values(FP8) {
            for b in all_values(FP8) {
                assert_eq!(mf_add(&a, &b), mf_add(&b, &a));
                assert_eq!(mf_mul(&a, &b), mf_mul(&b, &a));
            }
        }
    }

    #[test]
    fn totality_unary_exhaustive_fp8() {
        for a in all_values(FP8) {
            let _ = a.classify();
            let _ = a.to_decimal_string();
            let _ = mf_to_signed(&a, 8);
            let _ = mf_to_unsigned(&a, 8);
            let _ = mf_convert_format(&a, HALF);
        }
    }

    #[test]
    fn range_boundary_helpers() {
        // smallest half value above -1 is -(1 - 2^-11)
        let above = smallest_above(HALF, &BigRational::from_integer((-1).into()));
        assert!(above.value().unwrap() > BigRational::from_integer((-1).into()));
        assert_eq!(next_down(&above).value().unwrap(), BigRational::from_integer((-1).into()));
        // largest half below 2^15
        let below = largest_below(HALF, &mul_pow2(&BigRational::one(), 15));
        assert!(below.value().unwrap() < mul_pow2(&BigRational::one(), 15));
        assert!(next_up(&below).value().unwrap() >= mul_pow2(&BigRational::one(), 15));
        // bound beyond the format clamps to max finite
        let huge = largest_below(HALF, &mul_pow2(&BigRational::one(), 63));
        assert_eq!(huge, MiniFloat::max_finite(HALF, false));
    }

    #[test]
    fn canonical_nan_encoding() {
        let n = MiniFloat::nan(FP8);
        assert!(n.is_nan());
        assert!(!n.sign_bit());
        assert_eq!(n.trailing(), 1 << (FP8.trailing_bits() - 1));
        assert_eq!(n.neg(), n);
        assert_eq!(n.abs(), n);
    }
}
