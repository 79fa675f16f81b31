//! Channel vectors from the surface to a single-antenna user, plus two
//! oracles that evaluate the field and the radiated power directly.

use std::f64::consts::PI;
use std::ops::Index;

use num_complex::Complex64;

use crate::dense::SplitComplex;
use crate::error::{Error, Result};
use crate::geometry::{distance, ArrayGeometry, ElementKind, Vec3};
use crate::precision::Real;

/// Complex vector used for channels and excitation currents.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        ComplexVector(entries)
    }

    /// Like [`ComplexVector::new`] but rejects empty or non-finite input.
    pub fn checked(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("complex vector must not be empty".into()));
        }
        if let Some(n) = entries.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("entry {n} is not finite")));
        }
        Ok(ComplexVector(entries))
    }

    pub fn from_real(entries: &[f64]) -> Self {
        ComplexVector(entries.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        ComplexVector(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    /// `selfᴴ other`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// `Σ |v_n|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&self, alpha: Complex64) -> ComplexVector {
        ComplexVector(self.0.iter().map(|c| c * alpha).collect())
    }

    pub fn add(&self, other: &ComplexVector) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(v: Vec<Complex64>) -> Self {
        ComplexVector(v)
    }
}

/// Physical constants that only matter for absolute field values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldModel {
    /// Antenna proportionality factor.
    pub beta: f64,
    /// Intrinsic impedance of vacuum in ohms.
    pub eta: f64,
}

impl Default for FieldModel {
    fn default() -> Self {
        FieldModel {
            beta: 1.0,
            eta: 376.730313668,
        }
    }
}

impl FieldModel {
    pub fn new(beta: f64, eta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite() && eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "field model constants must be positive, got beta = {beta}, eta = {eta}"
            )));
        }
        Ok(FieldModel { beta, eta })
    }
}

fn check_user(geom: &ArrayGeometry, o: Vec3) -> Result<()> {
    if !o.is_finite() {
        return Err(Error::Domain(format!("user position {o} is not finite")));
    }
    if geom.kind() == ElementKind::Planar && !(o.x > 0.0) {
        return Err(Error::Domain(format!(
            "planar elements need the user in front of the panel (x > 0), got {o}"
        )));
    }
    if let Some(n) = geom.positions().iter().position(|&p| p == o) {
        return Err(Error::Domain(format!("user coincides with element {n}")));
    }
    Ok(())
}

/// `h_n = λ/(4π d_n) · e^{−jk d_n}`.
pub fn channel_isotropic(geom: &ArrayGeometry, o: Vec3) -> Result<ComplexVector> {
    channel(&geom.with_kind(ElementKind::Isotropic), o)
}

/// `h_n = √(x_o/d_n) · λ/(4π d_n) · e^{−jk d_n}`; the user must sit at `x > 0`.
pub fn channel_planar(geom: &ArrayGeometry, o: Vec3) -> Result<ComplexVector> {
    channel(&geom.with_kind(ElementKind::Planar), o)
}

/// Channel for the geometry's own element kind.
pub fn channel(geom: &ArrayGeometry, o: Vec3) -> Result<ComplexVector> {
    check_user(geom, o)?;
    let lambda = geom.wavelength();
    let k = geom.wavenumber();
    let h = geom
        .positions()
        .iter()
        .map(|&p| {
            let d = distance(o, p);
            let mut amp = lambda / (4.0 * PI * d);
            if geom.kind() == ElementKind::Planar {
                amp *= (o.x / d).sqrt();
            }
            Complex64::from_polar(amp, -k * d)
        })
        .collect();
    Ok(ComplexVector(h))
}

/// Channel evaluated entirely in arithmetic `R`.
///
/// The high-precision path needs this: rounding `h` to double injects noise
/// into the near-null modes of `Z`, which the exact inverse then amplifies.
pub fn channel_in<R: Real>(geom: &ArrayGeometry, o: Vec3, ctx: R::Ctx) -> Result<SplitComplex<R>> {
    check_user(geom, o)?;
    let c = |v: f64| R::from_f64(ctx, v);
    let lambda = c(geom.wavelength());
    let four_pi = R::pi(ctx) * c(4.0);
    let k = R::pi(ctx) * c(2.0) / &lambda;
    let (ox, oy, oz) = (c(o.x), c(o.y), c(o.z));
    let mut re = Vec::with_capacity(geom.len());
    let mut im = Vec::with_capacity(geom.len());
    for p in geom.positions() {
        let dx = ox.clone() - c(p.x);
        let dy = oy.clone() - c(p.y);
        let dz = oz.clone() - c(p.z);
        let d = (dx.clone() * &dx + dy.clone() * &dy + dz.clone() * &dz).sqrt();
        let mut amp = lambda.clone() / (four_pi.clone() * &d);
        if geom.kind() == ElementKind::Planar {
            amp = amp * (ox.clone() / &d).sqrt();
        }
        let phase = k.clone() * &d;
        re.push(amp.clone() * phase.cos());
        im.push(-(amp * phase.sin()));
    }
    Ok(SplitComplex { re, im })
}

/// Field strength at `o`: `√η · √(4πβ/λ²) · iᴴh`.
pub fn field_at(o: Vec3, geom: &ArrayGeometry, i: &ComplexVector, fm: FieldModel) -> Result<Complex64> {
    if i.len() != geom.len() {
        return Err(Error::DimensionMismatch {
            expected: geom.len(),
            got: i.len(),
        });
    }
    let h = channel(geom, o)?;
    let lambda = geom.wavelength();
    let scale = fm.eta.sqrt() * (4.0 * PI * fm.beta / (lambda * lambda)).sqrt();
    Ok(i.inner(&h) * scale)
}

/// Largest array the quadrature oracle accepts.
pub const QUADRATURE_MAX_ELEMENTS: usize = 64;
/// Smallest accepted quadrature order.
pub const QUADRATURE_MIN_ORDER: usize = 16;
/// Relative gap between orders `q` and `2q` above which the result is flagged.
pub const RICHARDSON_TOLERANCE: f64 = 1e-4;

/// Output of [`radiated_power_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePower {
    /// `β ∮ (G/4π) |Σ i_n e^{−jk r̂·p_n}|² dΩ` at the requested order.
    pub power: f64,
    /// Relative change when the order is doubled.
    pub richardson_gap: f64,
    /// Set when `richardson_gap` exceeds [`RICHARDSON_TOLERANCE`].
    pub accuracy_warning: bool,
}

/// Radiated power of the currents `i`, by integrating the far-field power
/// density over the unit sphere.
///
/// The polar axis is the panel normal, so `u = cos α = r̂_x` and the planar
/// gain is `|u|`. Each hemisphere gets `quad_order` Gauss–Legendre nodes in
/// `u` (the kink of `|u|` sits on the seam) and the azimuth a
/// `2·quad_order`-point trapezoid rule. Converges to `β · iᴴZi`.
pub fn radiated_power_quadrature(
    geom: &ArrayGeometry,
    i: &ComplexVector,
    fm: FieldModel,
    quad_order: usize,
) -> Result<QuadraturePower> {
    if geom.len() > QUADRATURE_MAX_ELEMENTS {
        return Err(Error::InvalidArgument(format!(
            "quadrature oracle is limited to {QUADRATURE_MAX_ELEMENTS} elements, got {}",
            geom.len()
        )));
    }
    if quad_order < QUADRATURE_MIN_ORDER {
        return Err(Error::InvalidArgument(format!(
            "quadrature order must be at least {QUADRATURE_MIN_ORDER}, got {quad_order}"
        )));
    }
    if i.len() != geom.len() {
        return Err(Error::DimensionMismatch {
            expected: geom.len(),
            got: i.len(),
        });
    }
    let coarse = sphere_integral(geom, i, quad_order);
    let fine = sphere_integral(geom, i, 2 * quad_order);
    let richardson_gap = if fine == 0.0 {
        (coarse - fine).abs()
    } else {
        ((coarse - fine) / fine).abs()
    };
    Ok(QuadraturePower {
        power: fm.beta * coarse,
        richardson_gap,
        accuracy_warning: richardson_gap > RICHARDSON_TOLERANCE,
    })
}

fn sphere_integral(geom: &ArrayGeometry, i: &ComplexVector, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let n_phi = 2 * order;
    let k = geom.wavenumber();
    let planar = geom.kind() == ElementKind::Planar;
    let pos = geom.positions();
    let mut total = 0.0;
    for hemisphere in [-1.0, 1.0] {
        for (&t, &w) in nodes.iter().zip(&weights) {
            // map [-1, 1] onto this half of u
            let u = hemisphere * 0.5 * (t + 1.0);
            let wu = 0.5 * w;
            let gain = if planar { u.abs() } else { 1.0 };
            let rho = (1.0 - u * u).max(0.0).sqrt();
            let mut ring = 0.0;
            for m in 0..n_phi {
                let phi = 2.0 * PI * m as f64 / n_phi as f64;
                let r = Vec3::new(u, rho * phi.cos(), rho * phi.sin());
                let af: Complex64 = pos
                    .iter()
                    .zip(i.iter())
                    .map(|(p, c)| c * Complex64::from_polar(1.0, -k * r.dot(p)))
                    .sum();
                ring += af.norm_sqr();
            }
            total += wu * gain * ring * (2.0 * PI / n_phi as f64);
        }
    }
    total / (4.0 * PI)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
