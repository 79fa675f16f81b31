//! SNR, directivity, excitation power and the continuous-aperture reference.

use std::f64::consts::PI;

use crate::channel::ComplexVector;
use crate::coupling::{self, ImpedanceMatrix};
use crate::dense::{Matrix, SplitComplex};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::precision::{Precision, Real};

/// Transmit power and receiver noise, both in watts.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudget {
    pub ptx: f64,
    pub noise_var: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            ptx: 1.0,
            noise_var: 1.0,
        }
    }
}

impl LinkBudget {
    pub fn new(ptx: f64, noise_var: f64) -> Result<Self> {
        let lb = LinkBudget { ptx, noise_var };
        lb.validate()?;
        Ok(lb)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.ptx) && ok(self.noise_var)) {
            return Err(Error::InvalidArgument(format!(
                "link budget needs positive ptx and noise_var, got {} and {}",
                self.ptx, self.noise_var
            )));
        }
        Ok(())
    }

    pub fn ratio(&self) -> f64 {
        self.ptx / self.noise_var
    }
}

/// `|iᴴh|² / (iᴴZi)`, the part shared by SNR and directivity.
fn gain_ratio(i: &ComplexVector, z: &ImpedanceMatrix, h: &ComplexVector) -> Result<f64> {
    if h.len() != i.len() {
        return Err(Error::DimensionMismatch {
            expected: i.len(),
            got: h.len(),
        });
    }
    let p = z.quadratic_form(i)?;
    if !(p > 0.0) {
        return Err(Error::NonRadiating(p));
    }
    Ok(i.inner(h).norm_sqr() / p)
}

/// `(ptx/σ²) · |iᴴh|² / (iᴴZi)`.
pub fn snr(i: &ComplexVector, z: &ImpedanceMatrix, h: &ComplexVector, lb: LinkBudget) -> Result<f64> {
    lb.validate()?;
    Ok(lb.ratio() * gain_ratio(i, z, h)?)
}

/// `(4π‖o‖/λ)²`, the free-space loss to the user.
pub fn range_factor(o: Vec3, lambda: f64) -> f64 {
    (4.0 * PI * o.norm() / lambda).powi(2)
}

/// `D = |iᴴh|² / (iᴴZi) · (4π‖o‖/λ)²`.
pub fn directivity(
    i: &ComplexVector,
    z: &ImpedanceMatrix,
    h: &ComplexVector,
    o: Vec3,
    lambda: f64,
) -> Result<f64> {
    Ok(gain_ratio(i, z, h)? * range_factor(o, lambda))
}

/// Directivity with every inner product evaluated in arithmetic `R`.
pub fn directivity_in<R: Real>(
    i: &SplitComplex<R>,
    z: &Matrix<R>,
    h: &SplitComplex<R>,
    o: Vec3,
    lambda: f64,
) -> Result<f64> {
    if h.len() != i.len() || z.rows() != i.len() {
        return Err(Error::DimensionMismatch {
            expected: z.rows(),
            got: i.len(),
        });
    }
    let p = i.quadratic_form(z);
    if !(p > R::zero(p.ctx())) {
        return Err(Error::NonRadiating(p.to_f64()));
    }
    let (re, im) = i.inner(h);
    let num = re.clone() * &re + im.clone() * &im;
    Ok((num / p).to_f64() * range_factor(o, lambda))
}

/// Coupling-aware directivity through the closed form
/// `(4π‖o‖/λ)² · hᴴZ⁻¹h`, for cross-checking [`directivity`].
pub fn ca_mf_directivity_closed_form(
    z: &ImpedanceMatrix,
    h: &ComplexVector,
    o: Vec3,
    lambda: f64,
    prec: Precision,
) -> Result<f64> {
    let x = coupling::solve(z, h, prec)?;
    Ok(h.inner(&x).re * range_factor(o, lambda))
}

/// `10 log₁₀ D`.
pub fn to_dbi(d: f64) -> f64 {
    10.0 * d.log10()
}

/// `iᴴi`.
pub fn excitation_power(i: &ComplexVector) -> f64 {
    i.norm_sqr()
}

/// Default relative tolerance of [`d_nc`].
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

/// Options for [`d_nc_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DncOptions {
    pub quad_tol: f64,
    /// Integrate over `[−y_lis, y_lis] × [−z_lis, z_lis]` (twice the panel)
    /// instead of the physical `[−y_lis/2, y_lis/2] × [−z_lis/2, z_lis/2]`.
    pub paper_literal_limits: bool,
    /// Subinterval budget of each one-dimensional integration.
    pub max_intervals: usize,
}

impl Default for DncOptions {
    fn default() -> Self {
        DncOptions {
            quad_tol: DEFAULT_QUAD_TOL,
            paper_literal_limits: false,
            max_intervals: 2000,
        }
    }
}

/// Directivity of a continuous, uncoupled aperture of `y_lis × z_lis`
/// centred on the origin in the `x = 0` plane:
/// `(4π‖o‖/λ)² ∬ x_o / (4π d_p³) dy dz`.
pub fn d_nc(o: Vec3, y_lis: f64, z_lis: f64, lambda: f64, quad_tol: f64) -> Result<f64> {
    d_nc_with(
        o,
        y_lis,
        z_lis,
        lambda,
        DncOptions {
            quad_tol,
            ..DncOptions::default()
        },
    )
}

pub fn d_nc_with(o: Vec3, y_lis: f64, z_lis: f64, lambda: f64, opts: DncOptions) -> Result<f64> {
    if !(o.x > 0.0) || !o.is_finite() {
        return Err(Error::Domain(format!("user must be in front of the panel, got {o}")));
    }
    for (name, v) in [("y_lis", y_lis), ("z_lis", z_lis), ("wavelength", lambda)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    if !(opts.quad_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "quadrature tolerance must be positive, got {}",
            opts.quad_tol
        )));
    }
    let (hy, hz) = if opts.paper_literal_limits {
        (y_lis, z_lis)
    } else {
        (0.5 * y_lis, 0.5 * z_lis)
    };
    let x = o.x;
    let inner_tol = opts.quad_tol * 0.1;
    let mut inner_failure = None;
    let outer = adaptive_gk15(
        |y| {
            let dy2 = (y - o.y).powi(2) + x * x;
            let f = |z: f64| x / (4.0 * PI * (dy2 + (z - o.z).powi(2)).powf(1.5));
            match adaptive_gk15(f, -hz, hz, inner_tol, opts.max_intervals) {
                Ok(v) => v,
                Err(e) => {
                    inner_failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        -hy,
        hy,
        opts.quad_tol,
        opts.max_intervals,
    );
    if let Some(e) = inner_failure {
        return Err(e);
    }
    Ok(outer? * range_factor(o, lambda))
}

/// Solid angle subtended by the rectangle `[y0, y1] × [z0, z1]` on the
/// `x = 0` plane, seen from `o` with `o.x > 0`. Closed form; `∬ x/d³`.
pub fn rectangle_solid_angle(o: Vec3, y0: f64, y1: f64, z0: f64, z1: f64) -> f64 {
    let x = o.x;
    let f = |a: f64, b: f64| (a * b / (x * (x * x + a * a + b * b).sqrt())).atan();
    let (a0, a1) = (y0 - o.y, y1 - o.y);
    let (b0, b1) = (z0 - o.z, z1 - o.z);
    f(a1, b1) - f(a0, b1) - f(a1, b0) + f(a0, b0)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7)
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WEIGHTS[7] * fc;
    let mut g = G_WEIGHTS[3] * fc;
    for j in 0..7 {
        let dx = h * GK_NODES[j];
        let s = f(c - dx) + f(c + dx);
        k += GK_WEIGHTS[j] * s;
        if j % 2 == 1 {
            g += G_WEIGHTS[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7, 15) on `[a, b]` to relative
/// tolerance `tol`; splits the worst interval until the summed error
/// estimate is small enough.
pub fn adaptive_gk15(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature {
                tolerance: tol,
                estimate: f64::INFINITY,
            });
        }
        if err <= tol * total.abs() || err <= f64::MIN_POSITIVE {
            return Ok(total);
        }
        if parts.len() >= max_intervals {
            return Err(Error::Quadrature {
                tolerance: tol,
                estimate: err / total.abs(),
            });
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(k, _)| k)
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::channel;
    use crate::coupling::impedance;
    use crate::geometry::{linear_array, wavelength, ElementKind};
    use crate::precision::ExtFloat;
    use num_complex::Complex64;

    const LAMBDA: f64 = 0.1;

    #[test]
    fn gk15_integrates_smooth_and_peaked() {
        let v = adaptive_gk15(|x| x.cos(), 0.0, 1.0, 1e-12, 100).unwrap();
        assert!((v - 1f64.sin()).abs() < 1e-14);
        // Lorentzian of width 1e-3
        let w = 1e-3;
        let v = adaptive_gk15(|x| w / (x * x + w * w), -1.0, 1.0, 1e-10, 1000).unwrap();
        let exact = 2.0 * (1.0 / w).atan();
        assert!((v - exact).abs() < 1e-9 * exact);
        assert!(matches!(
            adaptive_gk15(|x| w / (x * x + w * w), -1.0, 1.0, 1e-14, 3),
            Err(Error::Quadrature { .. })
        ));
    }

    #[test]
    fn identity_matched_filter_snr() {
        let z = ImpedanceMatrix::identity(2);
        let h = ComplexVector::new(vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 2.0)]);
        let lb = LinkBudget::new(2.0, 0.5).unwrap();
        assert!((snr(&h, &z, &h, lb).unwrap() - 4.0 * 6.0).abs() < 1e-13);
        let orth = ComplexVector::new(vec![Complex64::new(2.0, 0.0), Complex64::new(-1.0, -1.0)]);
        assert!(snr(&orth, &z, &h, lb).unwrap().abs() < 1e-30);
        assert!(LinkBudget::new(0.0, 1.0).is_err());
    }

    #[test]
    fn single_element_directivity() {
        let o = Vec3::new(10.0, 0.0, 0.0);
        for (kind, expected) in [(ElementKind::Isotropic, 1.0), (ElementKind::Planar, 2.0)] {
            let g = linear_array(1, 0.05, kind, LAMBDA).unwrap();
            let z = impedance(&g, Precision::MachineDouble).unwrap();
            let h = channel(&g, o).unwrap();
            let d = directivity(&h, &z, &h, o, LAMBDA).unwrap();
            assert!((d - expected).abs() < 1e-12, "{kind}: {d}");
        }
    }

    #[test]
    fn snr_and_directivity_differ_by_constant() {
        let g = linear_array(5, 0.03, ElementKind::Planar, LAMBDA).unwrap();
        let o = Vec3::new(4.0, 1.0, -0.5);
        let z = impedance(&g, Precision::MachineDouble).unwrap();
        let h = channel(&g, o).unwrap();
        let lb = LinkBudget::new(3.0, 0.01).unwrap();
        let s = snr(&h, &z, &h, lb).unwrap();
        let d = directivity(&h, &z, &h, o, LAMBDA).unwrap();
        let predicted = d * lb.ratio() / range_factor(o, LAMBDA);
        assert!((s - predicted).abs() < 1e-14 * s);
    }

    #[test]
    fn closed_form_matches_two_step() {
        let g = linear_array(8, 0.04, ElementKind::Isotropic, LAMBDA).unwrap();
        let o = Vec3::new(6.0, 0.0, 1.0);
        let z = impedance(&g, Precision::MachineDouble).unwrap();
        let h = channel(&g, o).unwrap();
        let i = coupling::solve(&z, &h, Precision::MachineDouble).unwrap();
        let a = directivity(&i, &z, &h, o, LAMBDA).unwrap();
        let b = ca_mf_directivity_closed_form(&z, &h, o, LAMBDA, Precision::MachineDouble).unwrap();
        assert!(((a - b) / b).abs() < 1e-8);
    }

    #[test]
    fn extended_directivity_agrees_on_easy_case() {
        let g = linear_array(6, 0.05, ElementKind::Planar, LAMBDA).unwrap();
        let o = Vec3::new(10.0, 0.0, 0.0);
        let z = impedance(&g, Precision::MachineDouble).unwrap();
        let h = channel(&g, o).unwrap();
        let d = directivity(&h, &z, &h, o, LAMBDA).unwrap();
        let ze = z.entries().map(|&v| ExtFloat::new(128, v));
        let he = SplitComplex::<ExtFloat>::from_complex(128, h.as_slice());
        let de = directivity_in(&he, &ze, &he, o, LAMBDA).unwrap();
        assert!(((d - de) / d).abs() < 1e-13);
    }

    #[test]
    fn excitation_power_basics() {
        let i = ComplexVector::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        assert_eq!(excitation_power(&i), 2.0);
        assert_eq!(excitation_power(&ComplexVector::zeros(4)), 0.0);
    }

    #[test]
    fn d_nc_against_solid_angle() {
        let lambda = wavelength(2.6e9);
        for o in [
            Vec3::new(10.0, 0.0, 0.0),
            Vec3::new(0.7, 0.1, -0.2),
            Vec3::new(2.0, 3.0, 1.0),
        ] {
            let d = d_nc(o, 0.5, 0.5, lambda, 1e-10).unwrap();
            let omega = rectangle_solid_angle(o, -0.25, 0.25, -0.25, 0.25);
            let exact = range_factor(o, lambda) * omega / (4.0 * PI);
            assert!(((d - exact) / exact).abs() < 1e-9, "{o}: {d} vs {exact}");
        }
    }

    #[test]
    fn d_nc_far_field_and_scaling() {
        let lambda = wavelength(2.6e9);
        let o = Vec3::new(10.0, 0.0, 0.0);
        let d = d_nc(o, 0.5, 0.5, lambda, DEFAULT_QUAD_TOL).unwrap();
        let aperture = 4.0 * PI * 0.25 / (lambda * lambda);
        assert!(((d - aperture) / aperture).abs() < 1e-2);
        let half = d_nc(o, 0.5, 0.5, lambda / 2.0, DEFAULT_QUAD_TOL).unwrap();
        assert!((half / d - 4.0).abs() < 1e-9);
    }

    #[test]
    fn d_nc_literal_limits_cover_four_times_the_area() {
        let lambda = 0.1;
        let o = Vec3::new(1e3, 0.0, 0.0);
        let opts = DncOptions {
            paper_literal_limits: true,
            ..DncOptions::default()
        };
        let wide = d_nc_with(o, 0.5, 0.5, lambda, opts).unwrap();
        let physical = d_nc(o, 0.5, 0.5, lambda, DEFAULT_QUAD_TOL).unwrap();
        assert!((wide / physical - 4.0).abs() < 1e-5);
    }

    #[test]
    fn d_nc_decreases_off_broadside() {
        let lambda = 0.1;
        let mut last = f64::INFINITY;
        for deg in [0.0f64, 15.0, 30.0, 45.0, 60.0, 75.0] {
            let t = deg.to_radians();
            let o = Vec3::new(10.0 * t.cos(), 10.0 * t.sin(), 0.0);
            let d = d_nc(o, 0.5, 0.5, lambda, DEFAULT_QUAD_TOL).unwrap();
            assert!(d <= last);
            last = d;
        }
    }

    #[test]
    fn d_nc_near_surface_is_bounded() {
        let d = d_nc(Vec3::new(1e-3, 0.0, 0.0), 0.5, 0.5, 0.1, 1e-6).unwrap();
        // solid angle tends to 2π
        let limit = range_factor(Vec3::new(1e-3, 0.0, 0.0), 0.1) * 0.5;
        assert!(d.is_finite() && d < limit);
        assert!(matches!(d_nc(Vec3::new(0.0, 0.0, 1.0), 0.5, 0.5, 0.1, 1e-8), Err(Error::Domain(_))));
    }
}
