//! Matched-filter precoders with and without coupling awareness.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{channel_in, ComplexVector};
use crate::coupling::{self, impedance_in, solve_in, ImpedanceMatrix};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Vec3};
use crate::metrics::directivity_in;
use crate::precision::{ExtFloat, Precision, Real};

/// Precoding scheme names as they appear in configs and CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Plain matched filter, `i = h`.
    #[serde(rename = "nCA-MF")]
    NcaMf,
    /// Whitened matched filter, `i = Z⁻¹h`, in double precision.
    #[serde(rename = "CA-MF")]
    CaMf,
    /// Whitened matched filter through a truncated eigen-inverse.
    #[serde(rename = "CA-pMF")]
    CaPmf,
    /// `Z⁻¹h` evaluated in extended precision end to end.
    #[serde(rename = "HP-CA-MF")]
    HpCaMf,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::NcaMf, Scheme::CaMf, Scheme::CaPmf, Scheme::HpCaMf];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::NcaMf => "nCA-MF",
            Scheme::CaMf => "CA-MF",
            Scheme::CaPmf => "CA-pMF",
            Scheme::HpCaMf => "HP-CA-MF",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme {s:?}")))
    }
}

/// `i = h`.
pub fn nca_mf(h: &ComplexVector) -> Result<ComplexVector> {
    if h.is_zero() {
        return Err(Error::Degenerate("channel vector is identically zero".into()));
    }
    Ok(h.clone())
}

/// `i = Z⁻¹h` by refined linear solve at `prec`.
pub fn ca_mf(z: &ImpedanceMatrix, h: &ComplexVector, prec: Precision) -> Result<ComplexVector> {
    coupling::solve(z, h, prec)
}

/// `i = Z†h`, keeping eigenvalues strictly above `s_min_threshold`.
pub fn ca_pmf(z: &ImpedanceMatrix, h: &ComplexVector, s_min_threshold: f64) -> Result<ComplexVector> {
    let modes = z.retained_by_threshold(s_min_threshold)?;
    z.apply_truncated_inverse(h, modes)
}

/// `i = Z†h` with the `modes` largest eigenvalues retained.
pub fn ca_pmf_modes(z: &ImpedanceMatrix, h: &ComplexVector, modes: usize) -> Result<ComplexVector> {
    z.apply_truncated_inverse(h, modes)
}

/// Coupling-aware matched filter computed end to end at `bits` of mantissa.
#[derive(Debug, Clone)]
pub struct HpCaMf {
    pub current: ComplexVector,
    pub directivity: f64,
    /// `iᴴi / iᴴZi`.
    pub excitation_power: f64,
    pub relative_residual: f64,
}

/// CA-MF with `Z`, `h`, the solve and the directivity all carried out in
/// software floating point.
///
/// Rounding `Z` to double before forming `iᴴZi` throws away everything once
/// κ(Z) passes about 1e16, so for dense arrays this is the only meaningful
/// way to evaluate the coupling-aware filter.
pub fn hp_ca_mf(geom: &ArrayGeometry, o: Vec3, bits: u32) -> Result<HpCaMf> {
    Precision::extended(bits)?;
    let z = impedance_in::<ExtFloat>(geom, bits)?;
    let h = channel_in::<ExtFloat>(geom, o, bits)?;
    let sol = solve_in(&z, &h)?;
    let directivity = directivity_in(&sol.x, &z, &h, o, geom.wavelength())?;
    let p = sol.x.quadratic_form(&z);
    Ok(HpCaMf {
        excitation_power: (sol.x.norm_sqr() / p).to_f64(),
        current: ComplexVector::new(sol.x.to_complex()),
        directivity,
        relative_residual: sol.relative_residual,
    })
}

/// `i / √(iᴴZi)`, so that the normalised current radiates unit power.
pub fn power_normalize(i: &ComplexVector, z: &ImpedanceMatrix) -> Result<ComplexVector> {
    let p = z.quadratic_form(i)?;
    if !(p > 0.0) {
        return Err(Error::NonRadiating(p));
    }
    Ok(i.scale(Complex64::new(1.0 / p.sqrt(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::Matrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
        assert!("MF".parse::<Scheme>().is_err());
    }

    #[test]
    fn matched_filter_copies() {
        let h = ComplexVector::new(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(nca_mf(&h).unwrap(), h);
        assert!(matches!(nca_mf(&ComplexVector::zeros(3)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn identity_coupling_changes_nothing() {
        let h = ComplexVector::new(vec![c(1.0, -2.0), c(0.5, 0.25), c(0.0, 3.0)]);
        let z = ImpedanceMatrix::identity(3);
        let a = ca_mf(&z, &h, Precision::MachineDouble).unwrap();
        let b = ca_pmf(&z, &h, 1e-9).unwrap();
        for n in 0..3 {
            assert!((a[n] - h[n]).norm() < 1e-15);
            assert!((b[n] - h[n]).norm() < 1e-15);
        }
    }

    #[test]
    fn diagonal_solve() {
        let z = ImpedanceMatrix::diagonal(&[1.0, 4.0]).unwrap();
        let h = ComplexVector::from_real(&[1.0, 1.0]);
        let i = ca_mf(&z, &h, Precision::MachineDouble).unwrap();
        assert!((i[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((i[1] - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn truncation_threshold_behaviour() {
        let m = Matrix::from_row_major(2, 2, vec![2.0, 0.5, 0.5, 1.0]);
        let z = ImpedanceMatrix::from_matrix(m).unwrap();
        let h = ComplexVector::new(vec![c(1.0, 1.0), c(-0.5, 2.0)]);
        let exact = ca_mf(&z, &h, Precision::MachineDouble).unwrap();
        let p = ca_pmf(&z, &h, 0.0).unwrap();
        for n in 0..2 {
            assert!((exact[n] - p[n]).norm() < 1e-12);
        }
        let s_max = z.sym_eig().unwrap().values[0];
        assert!(matches!(ca_pmf(&z, &h, s_max), Err(Error::EmptySpectrum { .. })));
    }

    #[test]
    fn normalisation() {
        let z = ImpedanceMatrix::identity(2);
        let i = ComplexVector::new(vec![c(3.0, 0.0), c(0.0, 4.0)]);
        let n = power_normalize(&i, &z).unwrap();
        assert!((n[0] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((n[1] - c(0.0, 0.8)).norm() < 1e-15);
        let again = power_normalize(&n, &z).unwrap();
        assert!((again[1] - n[1]).norm() < 1e-15);
        assert!(matches!(
            power_normalize(&ComplexVector::zeros(2), &z),
            Err(Error::NonRadiating(_))
        ));
    }

    #[test]
    fn extended_filter_matches_double_when_well_conditioned() {
        use crate::channel::channel;
        use crate::geometry::{linear_array, wavelength, ElementKind};
        use crate::metrics::directivity;

        let lambda = wavelength(2.6e9);
        let o = Vec3::new(10.0, 1.0, -2.0);
        let geom = linear_array(8, 0.4 * lambda, ElementKind::Planar, lambda).unwrap();
        let z = coupling::impedance(&geom, Precision::MachineDouble).unwrap();
        let h = channel(&geom, o).unwrap();
        let i = ca_mf(&z, &h, Precision::MachineDouble).unwrap();
        let d = directivity(&i, &z, &h, o, lambda).unwrap();
        let hp = hp_ca_mf(&geom, o, 128).unwrap();
        assert!((hp.directivity - d).abs() / d < 1e-10);
        assert!(hp.relative_residual < 1e-30);
        assert!(matches!(hp_ca_mf(&geom, o, 32), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn extended_filter_survives_dense_spacing() {
        use crate::geometry::{linear_array, wavelength, ElementKind};

        let lambda = wavelength(2.6e9);
        let o = Vec3::new(10.0, 0.0, 0.0);
        let sparse = linear_array(20, 0.3 * lambda, ElementKind::Isotropic, lambda).unwrap();
        let dense = linear_array(20, 0.1 * lambda, ElementKind::Isotropic, lambda).unwrap();
        let a = hp_ca_mf(&sparse, o, 256).unwrap();
        let b = hp_ca_mf(&dense, o, 256).unwrap();
        // the dense line is three times shorter, so D need not grow, but the
        // current needed per radiated watt does
        assert!(b.directivity.is_finite() && b.directivity > 1.0);
        assert!(b.excitation_power > a.excitation_power);
    }
}
