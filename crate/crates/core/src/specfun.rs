//! Special functions behind the impedance kernels: `sin(x)/x` and `J₁(x)/x`.
//!
//! In double precision `J₁(x)/x` is summed from its Maclaurin series in
//! double-double arithmetic for `|x| ≤ SERIES_LIMIT` and from the Hankel
//! asymptotic expansion (modulus/phase form, with the phase reduced against
//! a double-double π) above it. Both branches keep full relative accuracy
//! next to the zeros of J₁, where the coupling kernel changes sign.
//!
//! The extended-precision variants sum the Maclaurin series with enough
//! guard bits to absorb its cancellation, at any argument.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::precision::{ExtFloat, Precision, Real};

/// Largest `|x|` handled by the Maclaurin branch in double precision.
pub const SERIES_LIMIT: f64 = 25.0;

/// Below this `|x|`, `sinc_unnormalized` uses its Taylor polynomial.
const SINC_SERIES_BELOW: f64 = 1e-4;

/// Largest `|x|` accepted by [`j1_series_oracle`].
pub const ORACLE_DOMAIN: f64 = 30.0;

/// `sin(x)/x`, with the removable singularity filled in.
pub fn sinc_unnormalized(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SINC_SERIES_BELOW {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        ax.sin() / ax
    }
}

/// `J₁(x)/x` at the requested precision, rounded to double.
pub fn j1_over_x(x: f64, prec: Precision) -> f64 {
    match prec {
        Precision::MachineDouble => j1_over_x_double(x),
        Precision::Extended { mantissa_bits } => {
            j1_over_x_ext(&ExtFloat::new(mantissa_bits, x)).to_f64()
        }
    }
}

/// `J₁(x)`, derived from [`j1_over_x`].
pub fn bessel_j1(x: f64) -> f64 {
    x * j1_over_x_double(x)
}

pub fn j1_over_x_double(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        j1_over_x_series(ax)
    } else {
        j1_over_x_asymptotic(ax)
    }
}

/// Maclaurin branch on its own, for cross-checking against the other branch.
pub fn j1_over_x_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    // J₁(x)/x = Σ (-q)^m / (2 m! (m+1)!),  q = x²/4
    let q = DoubleDouble::square(x).scale(0.25);
    let neg_q = q.neg();
    let mut term = DoubleDouble::from(0.5);
    let mut sum = term;
    let mut peak = 0.5f64;
    let mut m = 0.0f64;
    loop {
        term = term.mul(neg_q).div_f64((m + 1.0) * (m + 2.0));
        sum = sum.add(term);
        m += 1.0;
        let mag = term.hi.abs();
        peak = peak.max(mag);
        if m * m > q.hi && mag < 1e-34 * peak {
            break;
        }
    }
    sum.to_f64()
}

/// Hankel asymptotic branch on its own; accurate for `x` above about 18.
pub fn j1_over_x_asymptotic(x: f64) -> f64 {
    let x = x.abs();
    let (p, q) = hankel_pq(x);
    let modulus = p.hypot(q);
    let psi = (q / p).atan();
    // phase θ = x - 3π/4 + ψ; write θ = (n + 1/2)π + s so cos θ = -(-1)^n sin s
    let n = ((x - 0.75 * PI + psi) / PI - 0.5).round();
    let shift = DoubleDouble::mul_f64_pi(n + 1.25);
    let u = DoubleDouble::from(x).sub(shift);
    let s = u.hi + (u.lo + psi);
    let sign = if n.rem_euclid(2.0) == 0.0 { -1.0 } else { 1.0 };
    let amplitude = (2.0 / (PI * x)).sqrt() * modulus;
    sign * amplitude * s.sin() / x
}

/// The two asymptotic sums P(x), Q(x) for order 1, truncated at their
/// smallest term.
fn hankel_pq(x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (4.0 - odd * odd) / (8.0 * kf * x);
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        // sign (-1)^(k/2) for even k, (-1)^((k-1)/2) for odd k
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if mag < 1e-18 {
            break;
        }
    }
    (p, q)
}

/// `sin(x)/x` in extended precision.
pub fn sinc_ext(x: &ExtFloat) -> ExtFloat {
    if x.is_zero() {
        return ExtFloat::one(x.ctx());
    }
    x.sin() / x
}

/// `J₁(x)/x` in extended precision via the guarded Maclaurin series.
pub fn j1_over_x_ext(x: &ExtFloat) -> ExtFloat {
    let bits = x.bits();
    if x.is_zero() {
        return ExtFloat::new(bits, 0.5);
    }
    let ax = x.to_f64().abs();
    // terms peak near e^|x|; carry that many extra bits through the sum
    let guard = (ax * std::f64::consts::LOG2_E).ceil() as u32 + 32;
    let wp = bits + guard;
    let xw = x.with_bits(wp);
    let q = (xw.clone() * &xw) * ExtFloat::new(wp, 0.25);
    let neg_q = -q;
    let mut term = ExtFloat::new(wp, 0.5);
    let mut sum = term.clone();
    let mut peak_exp = term.exponent().unwrap_or(0);
    let mut m: i64 = 0;
    loop {
        let denom = ExtFloat::from_i64(wp, (m + 1) * (m + 2));
        term = term * &neg_q / &denom;
        sum = sum + &term;
        m += 1;
        let exp = match term.exponent() {
            Some(e) => e,
            None => break,
        };
        peak_exp = peak_exp.max(exp);
        if (m * m) as f64 > ax * ax / 4.0 && exp < peak_exp - wp as i64 - 4 {
            break;
        }
    }
    sum.with_bits(bits)
}

/// Partial Maclaurin sum `Σ_{m<terms} (-1)^m (x/2)^{2m+1} / (m!(m+1)!)` for
/// J₁, evaluated with enough working precision that the only error left is
/// truncation. Test oracle; valid for `|x| ≤ 30`.
pub fn j1_series_oracle(x: f64, terms: usize) -> Result<f64> {
    if !(x.abs() <= ORACLE_DOMAIN) {
        return Err(Error::Domain(format!(
            "series oracle is limited to |x| <= {ORACLE_DOMAIN}, got {x}"
        )));
    }
    if terms == 0 {
        return Err(Error::InvalidArgument("series oracle needs at least one term".into()));
    }
    let wp = 320;
    let half = ExtFloat::new(wp, x) * ExtFloat::new(wp, 0.5);
    let neg_q = -(half.clone() * &half);
    let mut term = half;
    let mut sum = term.clone();
    for m in 0..terms as i64 - 1 {
        term = term * &neg_q / ExtFloat::from_i64(wp, (m + 1) * (m + 2));
        sum = sum + &term;
    }
    Ok(sum.to_f64())
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

impl From<f64> for DoubleDouble {
    fn from(hi: f64) -> Self {
        DoubleDouble { hi, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl DoubleDouble {
    fn square(x: f64) -> Self {
        let (hi, lo) = two_prod(x, x);
        DoubleDouble { hi, lo }
    }

    /// `c·π` for an exactly representable `c`.
    fn mul_f64_pi(c: f64) -> Self {
        let (hi, lo) = two_prod(c, PI);
        let (hi, lo) = quick_two_sum(hi, lo + c * PI_LO);
        DoubleDouble { hi, lo }
    }

    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    /// Multiply by a power of two.
    fn scale(self, s: f64) -> Self {
        DoubleDouble {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }

    fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }

    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p, pe) = two_prod(q1, b);
        let (s, e) = two_sum(self.hi, -p);
        let r = (s + (e - pe + self.lo)) / b;
        let (hi, lo) = quick_two_sum(q1, r);
        DoubleDouble { hi, lo }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const J1_ZERO_1: f64 = 3.831_705_970_207_512_3;

    #[test]
    fn sinc_values() {
        assert_eq!(sinc_unnormalized(0.0), 1.0);
        assert!(sinc_unnormalized(PI).abs() < 1e-15);
        assert!((sinc_unnormalized(PI / 2.0) - 2.0 / PI).abs() < 1e-16);
        assert!((sinc_unnormalized(0.7) - sinc_unnormalized(-0.7)).abs() == 0.0);
    }

    #[test]
    fn sinc_series_matches_direct_at_switch() {
        let x = SINC_SERIES_BELOW * 0.999;
        let direct = x.sin() / x;
        assert!((sinc_unnormalized(x) - direct).abs() < 1e-16);
    }

    #[test]
    fn j1_over_x_small_values() {
        assert_eq!(j1_over_x(0.0, Precision::MachineDouble), 0.5);
        let v = j1_over_x(1.0, Precision::MachineDouble);
        assert!((v - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!(j1_over_x(J1_ZERO_1, Precision::MachineDouble).abs() < 1e-10);
    }

    #[test]
    fn oracle_values() {
        assert_eq!(j1_series_oracle(0.0, 5).unwrap(), 0.0);
        let v = j1_series_oracle(2.0, 40).unwrap();
        assert!((v - 0.576_724_807_756_873_4).abs() < 1e-15);
        assert_eq!(
            j1_series_oracle(-2.5, 40).unwrap(),
            -j1_series_oracle(2.5, 40).unwrap()
        );
        assert!(matches!(j1_series_oracle(30.5, 10), Err(Error::Domain(_))));
        assert!(j1_series_oracle(1.0, 0).is_err());
    }

    #[test]
    fn first_zero_by_bisection_on_oracle() {
        let (mut lo, mut hi) = (3.5, 4.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if j1_series_oracle(mid, 60).unwrap() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - J1_ZERO_1).abs() < 1e-14);
        assert!(j1_over_x(lo, Precision::MachineDouble).abs() < 1e-10);
    }

    #[test]
    fn asymptotic_branch_far_out() {
        // J1(40) = 0.12603831803758499920...
        let x = 40.0;
        let ext = j1_over_x(x, Precision::Extended { mantissa_bits: 128 });
        let dbl = j1_over_x_double(x);
        assert!(((dbl - ext) / ext).abs() < 1e-14, "{dbl} vs {ext}");
        assert!((bessel_j1(x) - 0.126_038_318_037_585).abs() < 1e-15);
    }

    #[test]
    fn even_in_argument() {
        for &x in &[0.3, 5.0, 19.7, 26.0, 38.5] {
            assert_eq!(j1_over_x_double(x), j1_over_x_double(-x));
            assert_eq!(sinc_unnormalized(x), sinc_unnormalized(-x));
        }
    }

    #[test]
    fn quadratic_continuity_at_origin() {
        for &eps in &[1e-3, 1e-4, 1e-5] {
            assert!((sinc_unnormalized(eps) - 1.0).abs() <= eps * eps);
            assert!((j1_over_x_double(eps) - 0.5).abs() <= eps * eps);
        }
    }

    #[test]
    fn extended_sinc_at_zero_and_pi() {
        let z = ExtFloat::new(256, 0.0);
        assert_eq!(sinc_ext(&z).to_f64(), 1.0);
        let pi = ExtFloat::pi(256);
        assert!(sinc_ext(&pi).to_f64().abs() < 1e-70);
    }
}
