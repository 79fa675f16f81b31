//! Working precision for the numerical kernels.
//!
//! Everything that has to run in both IEEE double and software extended
//! precision (kernel evaluation, eigensolver, linear solve) is written once
//! against the [`Real`] trait. `f64` implements it directly; [`ExtFloat`]
//! wraps an arbitrary-precision binary float.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::specfun;

/// Default mantissa width of the high-precision path.
pub const DEFAULT_EXTENDED_BITS: u32 = 256;

/// Arithmetic used by a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Precision {
    #[default]
    MachineDouble,
    /// Software binary floating point with the given mantissa width (≥ 64).
    Extended { mantissa_bits: u32 },
}

impl Precision {
    pub fn extended(mantissa_bits: u32) -> Result<Self, Error> {
        if mantissa_bits < 64 {
            return Err(Error::InvalidArgument(format!(
                "extended precision needs at least 64 mantissa bits, got {mantissa_bits}"
            )));
        }
        Ok(Precision::Extended { mantissa_bits })
    }

    pub fn is_extended(&self) -> bool {
        matches!(self, Precision::Extended { .. })
    }

    pub fn mantissa_bits(&self) -> u32 {
        match *self {
            Precision::MachineDouble => 53,
            Precision::Extended { mantissa_bits } => mantissa_bits,
        }
    }

    /// Unit roundoff of the working arithmetic.
    pub fn unit_roundoff(&self) -> f64 {
        2f64.powi(-(self.mantissa_bits() as i32))
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::MachineDouble => write!(f, "double"),
            Precision::Extended { mantissa_bits } => write!(f, "ext:{mantissa_bits}"),
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    /// Accepts `double` or `ext:<bits>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("double") {
            return Ok(Precision::MachineDouble);
        }
        match s.strip_prefix("ext:") {
            Some(bits) => {
                let bits: u32 = bits
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad mantissa width in {s:?}")))?;
                Precision::extended(bits)
            }
            None => Err(Error::InvalidArgument(format!(
                "precision must be `double` or `ext:<bits>`, got {s:?}"
            ))),
        }
    }
}

impl TryFrom<String> for Precision {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Precision> for String {
    fn from(p: Precision) -> Self {
        p.to_string()
    }
}

/// Real scalar usable by the precision-generic kernels.
pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    /// Whatever is needed to create new values in the same arithmetic.
    type Ctx: Copy + fmt::Debug + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn from_f64(ctx: Self::Ctx, v: f64) -> Self;
    fn pi(ctx: Self::Ctx) -> Self;
    /// Unit roundoff.
    fn epsilon(ctx: Self::Ctx) -> f64;

    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn is_zero(&self) -> bool;

    /// `sin(x)/x`, 1 at the origin.
    fn sinc(&self) -> Self;
    /// `J₁(x)/x`, 1/2 at the origin.
    fn j1_over_x(&self) -> Self;

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_f64(ctx, 0.0)
    }
    fn one(ctx: Self::Ctx) -> Self {
        Self::from_f64(ctx, 1.0)
    }
    fn same(&self, v: f64) -> Self {
        Self::from_f64(self.ctx(), v)
    }

    /// `self += a·b`.
    fn add_assign_mul(&mut self, a: &Self, b: &Self) {
        *self = self.clone() + a.clone() * b;
    }

    /// `self -= a·b`.
    fn sub_assign_mul(&mut self, a: &Self, b: &Self) {
        *self = self.clone() - a.clone() * b;
    }
}

impl Real for f64 {
    type Ctx = ();

    fn ctx(&self) {}
    fn from_f64(_: (), v: f64) -> Self {
        v
    }
    fn pi(_: ()) -> Self {
        std::f64::consts::PI
    }
    fn epsilon(_: ()) -> f64 {
        f64::EPSILON / 2.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn sinc(&self) -> Self {
        specfun::sinc_unnormalized(*self)
    }
    fn j1_over_x(&self) -> Self {
        specfun::j1_over_x_double(*self)
    }
    fn add_assign_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn sub_assign_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Software binary float with a runtime mantissa width.
#[derive(Clone)]
pub struct ExtFloat {
    value: BigFloat,
    bits: usize,
}

impl ExtFloat {
    pub fn new(bits: u32, v: f64) -> Self {
        let bits = bits as usize;
        ExtFloat {
            value: BigFloat::from_f64(v, bits),
            bits,
        }
    }

    pub fn from_i64(bits: u32, v: i64) -> Self {
        let bits = bits as usize;
        ExtFloat {
            value: BigFloat::from_i64(v, bits),
            bits,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits as u32
    }

    /// Same value re-rounded to another mantissa width.
    pub fn with_bits(&self, bits: u32) -> Self {
        let mut value = self.value.clone();
        // only fails for NaN/inf, which keep their flavour
        let _ = value.set_precision(bits as usize, RM);
        ExtFloat {
            value,
            bits: bits as usize,
        }
    }

    /// Binary exponent `e` such that the value lies in `[2^(e-1), 2^e)`.
    pub fn exponent(&self) -> Option<i64> {
        if self.value.is_zero() {
            return None;
        }
        self.value.exponent().map(|e| e as i64)
    }

    pub fn is_finite(&self) -> bool {
        !(self.value.is_nan() || self.value.is_inf())
    }

    fn wrap(&self, value: BigFloat) -> Self {
        ExtFloat {
            value,
            bits: self.bits,
        }
    }

    fn prec_with(&self, other: &Self) -> usize {
        self.bits.max(other.bits)
    }
}

impl fmt::Debug for ExtFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}[{} bits]", self.to_f64(), self.bits)
    }
}

impl PartialEq for ExtFloat {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for ExtFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

macro_rules! ext_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExtFloat {
            type Output = ExtFloat;
            fn $method(self, rhs: ExtFloat) -> ExtFloat {
                let p = self.prec_with(&rhs);
                ExtFloat {
                    value: self.value.$method(&rhs.value, p, RM),
                    bits: p,
                }
            }
        }
        impl<'a> $trait<&'a ExtFloat> for ExtFloat {
            type Output = ExtFloat;
            fn $method(self, rhs: &'a ExtFloat) -> ExtFloat {
                let p = self.prec_with(rhs);
                ExtFloat {
                    value: self.value.$method(&rhs.value, p, RM),
                    bits: p,
                }
            }
        }
        impl<'a, 'b> $trait<&'a ExtFloat> for &'b ExtFloat {
            type Output = ExtFloat;
            fn $method(self, rhs: &'a ExtFloat) -> ExtFloat {
                let p = self.prec_with(rhs);
                ExtFloat {
                    value: self.value.$method(&rhs.value, p, RM),
                    bits: p,
                }
            }
        }
    };
}

ext_binop!(Add, add);
ext_binop!(Sub, sub);
ext_binop!(Mul, mul);
ext_binop!(Div, div);

impl Neg for ExtFloat {
    type Output = ExtFloat;
    fn neg(mut self) -> ExtFloat {
        self.value.inv_sign();
        self
    }
}

impl Real for ExtFloat {
    type Ctx = u32;

    fn ctx(&self) -> u32 {
        self.bits as u32
    }
    fn from_f64(bits: u32, v: f64) -> Self {
        ExtFloat::new(bits, v)
    }
    fn pi(bits: u32) -> Self {
        let value = with_consts(|cc| cc.pi(bits as usize, RM));
        ExtFloat {
            value,
            bits: bits as usize,
        }
    }
    fn epsilon(bits: u32) -> f64 {
        2f64.powi(-(bits as i32))
    }

    fn to_f64(&self) -> f64 {
        bigfloat_to_f64(&self.value)
    }
    fn abs(&self) -> Self {
        self.wrap(self.value.abs())
    }
    fn sqrt(&self) -> Self {
        self.wrap(self.value.sqrt(self.bits, RM))
    }
    fn sin(&self) -> Self {
        let v = with_consts(|cc| self.value.sin(self.bits, RM, cc));
        self.wrap(v)
    }
    fn cos(&self) -> Self {
        let v = with_consts(|cc| self.value.cos(self.bits, RM, cc));
        self.wrap(v)
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
    fn sinc(&self) -> Self {
        specfun::sinc_ext(self)
    }
    fn j1_over_x(&self) -> Self {
        specfun::j1_over_x_ext(self)
    }
    fn add_assign_mul(&mut self, a: &Self, b: &Self) {
        let p = self.bits.max(a.bits).max(b.bits);
        self.value = self.value.add(&a.value.mul(&b.value, p, RM), p, RM);
        self.bits = p;
    }
    fn sub_assign_mul(&mut self, a: &Self, b: &Self) {
        let p = self.bits.max(a.bits).max(b.bits);
        self.value = self.value.sub(&a.value.mul(&b.value, p, RM), p, RM);
        self.bits = p;
    }
}

/// Round-to-nearest conversion using the two leading mantissa words.
fn bigfloat_to_f64(v: &BigFloat) -> f64 {
    if v.is_nan() {
        return f64::NAN;
    }
    if v.is_inf_pos() {
        return f64::INFINITY;
    }
    if v.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if v.is_zero() {
        return 0.0;
    }
    let Some((words, _, sign, exponent, _)) = v.as_raw_parts() else {
        return f64::NAN;
    };
    // words are least-significant first; value = 0.m × 2^exponent
    let n = words.len();
    let hi = words[n - 1];
    let lo = if n > 1 { words[n - 2] } else { 0 };
    let sticky = words[..n.saturating_sub(2)].iter().any(|&w| w != 0);
    // Fold the low word and sticky bits into a 64-bit value that rounds like
    // the full mantissa: keep the top 63 bits of `lo` information as a
    // fraction and merge the rest into the last bit.
    let frac = (lo >> 1) | u64::from(sticky || (lo & 1) != 0);
    let m = hi as f64 + frac as f64 * 2f64.powi(-63);
    let magnitude = scale_by_pow2(m, exponent as i64 - 64);
    match sign {
        Sign::Pos => magnitude,
        Sign::Neg => -magnitude,
    }
}

fn scale_by_pow2(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}
