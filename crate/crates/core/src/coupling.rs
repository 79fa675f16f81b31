//! Mutual-coupling impedance matrices and the solves built on them.
//!
//! `Z[n,m] = sinc(k‖p_n − p_m‖)` for isotropic elements and
//! `J₁(k‖p_n − p_m‖)/(k‖p_n − p_m‖)` for planar ones (the common aperture
//! gain factor is dropped, as it is from the planar channel). `iᴴZi` is the
//! radiated power of the excitation `i` up to that constant.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::channel::ComplexVector;
use crate::dense::{Matrix, SplitComplex};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, ElementKind};
use crate::linalg::{self, jacobi_eigen, Lu};
use crate::precision::{ExtFloat, Precision, Real};

/// Relative residual a solve has to reach after refinement.
pub const SOLVE_TOLERANCE: f64 = 1e-8;

/// Above this order the double-precision eigensolve goes through `faer`
/// instead of cyclic Jacobi.
pub const JACOBI_MAX_ORDER_DOUBLE: usize = 256;

/// Eigen-decomposition `Z = U diag(s) Uᵀ` with `s` descending, rounded to
/// double after being computed at the matrix's working precision.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column `n` is the eigenvector of `values[n]`.
    pub vectors: Matrix<f64>,
}

impl SymEigen {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of eigenvalues strictly above `threshold` (after clamping
    /// negative round-off to zero).
    pub fn count_above(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&s| s.max(0.0) > threshold).count()
    }

    /// `‖U diag(s) Uᵀ − Z‖_max`.
    pub fn reconstruction_error(&self, z: &Matrix<f64>) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n)
                    .map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)])
                    .sum();
                worst = worst.max((v - z[(i, j)]).abs());
            }
        }
        worst
    }

    /// `‖UᵀU − I‖_max`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let g: f64 = (0..n).map(|k| self.vectors[(k, i)] * self.vectors[(k, j)]).sum();
                worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }
}

/// Real symmetric coupling matrix with a lazily computed eigendecomposition.
#[derive(Debug)]
pub struct ImpedanceMatrix {
    entries: Matrix<f64>,
    extended: Option<Matrix<ExtFloat>>,
    kind: Option<ElementKind>,
    precision: Precision,
    eig: OnceLock<std::result::Result<SymEigen, (usize, f64)>>,
}

impl Clone for ImpedanceMatrix {
    fn clone(&self) -> Self {
        let eig = OnceLock::new();
        if let Some(e) = self.eig.get() {
            let _ = eig.set(e.clone());
        }
        ImpedanceMatrix {
            entries: self.entries.clone(),
            extended: self.extended.clone(),
            kind: self.kind,
            precision: self.precision,
            eig,
        }
    }
}

impl ImpedanceMatrix {
    /// Wraps an arbitrary symmetric matrix (used for analytic test cases).
    pub fn from_matrix(entries: Matrix<f64>) -> Result<Self> {
        if !entries.is_square() || entries.rows() == 0 {
            return Err(Error::InvalidArgument("impedance matrix must be square and non-empty".into()));
        }
        let n = entries.rows();
        for i in 0..n {
            for j in 0..i {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(ImpedanceMatrix {
            entries,
            extended: None,
            kind: None,
            precision: Precision::MachineDouble,
            eig: OnceLock::new(),
        })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::from_matrix(Matrix::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 }))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_matrix(Matrix::identity(n, ())).expect("identity is symmetric")
    }

    pub fn len(&self) -> usize {
        self.entries.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.rows() == 0
    }

    pub fn entries(&self) -> &Matrix<f64> {
        &self.entries
    }

    /// Entries at the working precision, when that is extended.
    pub fn extended_entries(&self) -> Option<&Matrix<ExtFloat>> {
        self.extended.as_ref()
    }

    pub fn kind(&self) -> Option<ElementKind> {
        self.kind
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Double-precision copy without the extended entries or cached spectrum.
    pub fn to_double(&self) -> ImpedanceMatrix {
        ImpedanceMatrix {
            entries: self.entries.clone(),
            extended: None,
            kind: self.kind,
            precision: Precision::MachineDouble,
            eig: OnceLock::new(),
        }
    }

    /// `iᴴ Z i` (real for symmetric real Z).
    pub fn quadratic_form(&self, i: &ComplexVector) -> Result<f64> {
        check_len(self.len(), i.len())?;
        let split = SplitComplex::<f64>::from_complex((), i.as_slice());
        Ok(split.quadratic_form(&self.entries))
    }

    pub fn mul_vec(&self, x: &ComplexVector) -> Result<ComplexVector> {
        check_len(self.len(), x.len())?;
        let split = SplitComplex::<f64>::from_complex((), x.as_slice());
        let re = self.entries.mul_vec(&split.re);
        let im = self.entries.mul_vec(&split.im);
        Ok(ComplexVector::new(
            re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect(),
        ))
    }

    /// Eigen-decomposition, computed once and cached.
    pub fn sym_eig(&self) -> Result<&SymEigen> {
        let cached = self.eig.get_or_init(|| self.compute_eig());
        match cached {
            Ok(e) => Ok(e),
            Err((sweeps, off)) => Err(Error::NoConvergence {
                sweeps: *sweeps,
                off_diagonal: *off,
            }),
        }
    }

    fn compute_eig(&self) -> std::result::Result<SymEigen, (usize, f64)> {
        let unpack = |e: Error| match e {
            Error::NoConvergence {
                sweeps,
                off_diagonal,
            } => (sweeps, off_diagonal),
            _ => (0, f64::NAN),
        };
        match (&self.extended, self.precision) {
            (Some(ext), _) => {
                let e = jacobi_eigen(ext).map_err(unpack)?;
                Ok(SymEigen {
                    values: e.values.iter().map(Real::to_f64).collect(),
                    vectors: e.vectors.to_f64(),
                })
            }
            (None, Precision::Extended { mantissa_bits }) => {
                let ext = self.entries.map(|&v| ExtFloat::new(mantissa_bits, v));
                let e = jacobi_eigen(&ext).map_err(unpack)?;
                Ok(SymEigen {
                    values: e.values.iter().map(Real::to_f64).collect(),
                    vectors: e.vectors.to_f64(),
                })
            }
            (None, Precision::MachineDouble) => {
                if self.len() <= JACOBI_MAX_ORDER_DOUBLE {
                    let e = jacobi_eigen(&self.entries).map_err(unpack)?;
                    Ok(SymEigen {
                        values: e.values,
                        vectors: e.vectors,
                    })
                } else {
                    faer_eig(&self.entries)
                }
            }
        }
    }

    /// `s_max / s_min` over eigenvalue magnitudes; `+∞` when `s_min = 0`.
    pub fn condition_number(&self) -> Result<f64> {
        let e = self.sym_eig()?;
        let mags: Vec<f64> = e.values.iter().map(|v| v.abs()).collect();
        let hi = mags.iter().cloned().fold(0.0, f64::max);
        let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi == 0.0 {
            return Err(Error::Degenerate("impedance matrix is zero".into()));
        }
        Ok(if lo == 0.0 { f64::INFINITY } else { hi / lo })
    }

    /// `Σ_{s_n > threshold} s_n⁻¹ u_n u_nᵀ`.
    pub fn truncated_inverse(&self, s_min_threshold: f64) -> Result<Matrix<f64>> {
        let kept = self.retained_by_threshold(s_min_threshold)?;
        Ok(self.truncated_inverse_from(kept))
    }

    /// Truncated inverse keeping the `modes` largest eigenvalues.
    pub fn truncated_inverse_modes(&self, modes: usize) -> Result<Matrix<f64>> {
        let kept = self.retained_by_count(modes)?;
        Ok(self.truncated_inverse_from(kept))
    }

    fn truncated_inverse_from(&self, kept: usize) -> Matrix<f64> {
        let e = self.sym_eig().expect("spectrum computed by caller");
        let n = self.len();
        let mut out = Matrix::from_fn(n, n, |_, _| 0.0);
        for k in 0..kept {
            let w = 1.0 / e.values[k];
            for i in 0..n {
                let ui = e.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += ui * e.vectors[(j, k)];
                }
            }
        }
        out
    }

    /// Number of modes kept by a threshold; errors when none survive.
    pub fn retained_by_threshold(&self, s_min_threshold: f64) -> Result<usize> {
        if !(s_min_threshold >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation threshold must be non-negative, got {s_min_threshold}"
            )));
        }
        let kept = self.sym_eig()?.count_above(s_min_threshold);
        if kept == 0 {
            return Err(Error::EmptySpectrum {
                threshold: s_min_threshold,
            });
        }
        Ok(kept)
    }

    fn retained_by_count(&self, modes: usize) -> Result<usize> {
        let e = self.sym_eig()?;
        if modes == 0 || modes > e.len() {
            return Err(Error::InvalidArgument(format!(
                "retained mode count must be in 1..={}, got {modes}",
                e.len()
            )));
        }
        if e.values[modes - 1] <= 0.0 {
            return Err(Error::EmptySpectrum { threshold: 0.0 });
        }
        Ok(modes)
    }

    /// `Z† h` restricted to the `modes` leading eigenpairs, without forming Z†.
    pub fn apply_truncated_inverse(&self, h: &ComplexVector, modes: usize) -> Result<ComplexVector> {
        check_len(self.len(), h.len())?;
        let kept = self.retained_by_count(modes)?;
        let e = self.sym_eig()?;
        let n = self.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..kept {
            let proj: Complex64 = (0..n).map(|i| h[i] * e.vectors[(i, k)]).sum();
            let w = proj / e.values[k];
            for (i, o) in out.iter_mut().enumerate() {
                *o += w * e.vectors[(i, k)];
            }
        }
        Ok(ComplexVector::new(out))
    }

    /// Writes the entries as text, one row per line, 17 significant digits.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        for i in 0..self.len() {
            let row = self.entries.row(i);
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{v:.16e}");
            }
            s.push('\n');
        }
        fs::write(path, s).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn faer_eig(z: &Matrix<f64>) -> std::result::Result<SymEigen, (usize, f64)> {
    let n = z.rows();
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| z[(i, j)]);
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| (0usize, f64::NAN))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer sorts ascending
    let values = (0..n).map(|k| s[n - 1 - k]).collect();
    let vectors = Matrix::from_fn(n, n, |i, k| u[(i, n - 1 - k)]);
    Ok(SymEigen { values, vectors })
}

/// Coupling kernel evaluated at `x = k‖p_n − p_m‖`.
pub fn kernel<R: Real>(kind: ElementKind, x: &R) -> R {
    match kind {
        ElementKind::Isotropic => x.sinc(),
        ElementKind::Planar => x.j1_over_x(),
    }
}

/// Impedance matrix in arithmetic `R`; duplicate positions are rejected.
pub fn impedance_in<R: Real>(geom: &ArrayGeometry, ctx: R::Ctx) -> Result<Matrix<R>> {
    let n = geom.len();
    let pos = geom.positions();
    let two_pi = R::pi(ctx) * R::from_f64(ctx, 2.0);
    let k = two_pi / R::from_f64(ctx, geom.wavelength());
    let zero = R::zero(ctx);
    let diag = kernel(geom.kind(), &zero);
    let mut z = Matrix::from_fn(n, n, |_, _| zero.clone());
    for a in 0..n {
        z[(a, a)] = diag.clone();
        for b in a + 1..n {
            let d = pos[a] - pos[b];
            if d.x == 0.0 && d.y == 0.0 && d.z == 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "elements {a} and {b} share position {}",
                    pos[a]
                )));
            }
            // subtract in R: f64 differences would round and break definiteness
            let dx = R::from_f64(ctx, pos[a].x) - R::from_f64(ctx, pos[b].x);
            let dy = R::from_f64(ctx, pos[a].y) - R::from_f64(ctx, pos[b].y);
            let dz = R::from_f64(ctx, pos[a].z) - R::from_f64(ctx, pos[b].z);
            let dist = (dx.clone() * &dx + dy.clone() * &dy + dz.clone() * &dz).sqrt();
            let v = kernel(geom.kind(), &(k.clone() * &dist));
            z[(a, b)] = v.clone();
            z[(b, a)] = v;
        }
    }
    Ok(z)
}

/// Builds Z for `geom` at the requested precision.
pub fn impedance(geom: &ArrayGeometry, prec: Precision) -> Result<ImpedanceMatrix> {
    let (entries, extended) = match prec {
        Precision::MachineDouble => (impedance_in::<f64>(geom, ())?, None),
        Precision::Extended { mantissa_bits } => {
            let ext = impedance_in::<ExtFloat>(geom, mantissa_bits)?;
            (ext.to_f64(), Some(ext))
        }
    };
    Ok(ImpedanceMatrix {
        entries,
        extended,
        kind: Some(geom.kind()),
        precision: prec,
        eig: OnceLock::new(),
    })
}

/// Result of a refined solve in arithmetic `R`.
#[derive(Debug, Clone)]
pub struct RefinedSolve<R> {
    pub x: SplitComplex<R>,
    pub relative_residual: f64,
    pub condition_estimate: f64,
}

/// Solves `Z x = h` by LU with one pass of iterative refinement, all in
/// arithmetic `R`, and checks the relative residual against
/// [`SOLVE_TOLERANCE`].
pub fn solve_in<R: Real>(z: &Matrix<R>, h: &SplitComplex<R>) -> Result<RefinedSolve<R>> {
    check_len(z.rows(), h.len())?;
    let lu = Lu::factor(z)?;
    let refine = |b: &[R]| {
        let mut x = lu.solve(b);
        let (r, _) = linalg::relative_residual(z, &x, b);
        let dx = lu.solve(&r);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi = xi.clone() + di;
        }
        x
    };
    let re = refine(&h.re);
    let im = refine(&h.im);
    let (_, res_re) = linalg::relative_residual(z, &re, &h.re);
    let (_, res_im) = linalg::relative_residual(z, &im, &h.im);
    let norm = |v: &[R]| v.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt();
    let (nr, ni) = (norm(&h.re), norm(&h.im));
    // combine the two real residuals into one complex relative residual
    let total = (nr * nr + ni * ni).sqrt();
    let residual = if total == 0.0 {
        0.0
    } else {
        ((res_re * nr).powi(2) + (res_im * ni).powi(2)).sqrt() / total
    };
    let condition_estimate = lu.pivot_ratio();
    if !(residual <= SOLVE_TOLERANCE) {
        return Err(Error::IllConditioned {
            residual,
            tolerance: SOLVE_TOLERANCE,
            condition: condition_estimate,
        });
    }
    Ok(RefinedSolve {
        x: SplitComplex { re, im },
        relative_residual: residual,
        condition_estimate,
    })
}

/// `Z⁻¹ h` at the requested precision, rounded back to double.
pub fn solve(z: &ImpedanceMatrix, h: &ComplexVector, prec: Precision) -> Result<ComplexVector> {
    check_len(z.len(), h.len())?;
    match prec {
        Precision::MachineDouble => {
            let hs = SplitComplex::<f64>::from_complex((), h.as_slice());
            let r = solve_in(&z.entries, &hs)?;
            Ok(ComplexVector::new(r.x.to_complex()))
        }
        Precision::Extended { mantissa_bits } => {
            let lifted;
            let ze = match &z.extended {
                Some(e) if e[(0, 0)].bits() == mantissa_bits => e,
                _ => {
                    lifted = z.entries.map(|&v| ExtFloat::new(mantissa_bits, v));
                    &lifted
                }
            };
            let hs = SplitComplex::<ExtFloat>::from_complex(mantissa_bits, h.as_slice());
            let r = solve_in(ze, &hs)?;
            Ok(ComplexVector::new(r.x.to_complex()))
        }
    }
}
