//! Element layouts on the y–z plane and UE-relative distances and angles.
//!
//! The surface sits at `x = 0` centred on the origin; broadside is `+x`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default cap on the number of elements a layout may hold.
pub const DEFAULT_MAX_ELEMENTS: usize = 100_000;

/// Wavelength in metres for a carrier frequency in Hz.
pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ORIGIN: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    /// Rejects non-finite components.
    pub fn checked(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vec3 { x, y, z };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidArgument(format!("non-finite position {v}")))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.x, self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Euclidean distance `‖o − p‖`.
pub fn distance(o: Vec3, p: Vec3) -> f64 {
    (o - p).norm()
}

/// Angle between the panel normal and the direction from `p` to `o`,
/// `arccos(x_o / ‖o − p‖)`, in `[0, π]`.
pub fn departure_angle(o: Vec3, p: Vec3) -> Result<f64> {
    let d = distance(o, p);
    if d == 0.0 {
        return Err(Error::Domain(
            "departure angle undefined at zero distance".into(),
        ));
    }
    Ok((o.x / d).clamp(-1.0, 1.0).acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Isotropic,
    Planar,
}

impl ElementKind {
    pub fn name(&self) -> &'static str {
        match self {
            ElementKind::Isotropic => "isotropic",
            ElementKind::Planar => "planar",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of identical elements on the `x = 0` plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<Vec3>,
    kind: ElementKind,
    dy: f64,
    dz: f64,
    aperture_per_element: f64,
    wavelength: f64,
    /// Columns along y and rows along z.
    shape: (usize, usize),
}

impl ArrayGeometry {
    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    /// Physical element area in m²; zero for isotropic elements.
    pub fn aperture_per_element(&self) -> f64 {
        self.aperture_per_element
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Wavenumber `2π/λ`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// `(columns along y, rows along z)`.
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    /// Same positions and spacing, different element type.
    pub fn with_kind(&self, kind: ElementKind) -> Self {
        let mut g = self.clone();
        g.kind = kind;
        g.aperture_per_element = aperture_for(kind, g.dy, g.dz);
        g
    }

    pub fn centroid(&self) -> Vec3 {
        let n = self.positions.len() as f64;
        let sum = self
            .positions
            .iter()
            .fold(Vec3::ORIGIN, |acc, &p| acc + p);
        sum * (1.0 / n)
    }
}

impl ArrayGeometry {
    /// Arbitrary layout on the `x = 0` plane. `dy`, `dz` set the per-element
    /// aperture of planar elements. Coincident positions are accepted here
    /// and rejected when the impedance matrix is built.
    pub fn from_positions(
        positions: Vec<Vec3>,
        kind: ElementKind,
        dy: f64,
        dz: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArgument("geometry needs at least one element".into()));
        }
        positive("dy", dy)?;
        positive("dz", dz)?;
        positive("wavelength", wavelength)?;
        if let Some(p) = positions.iter().find(|p| !p.is_finite() || p.x != 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "element positions must be finite and lie on x = 0, got {p}"
            )));
        }
        let n = positions.len();
        Ok(ArrayGeometry {
            positions,
            kind,
            dy,
            dz,
            aperture_per_element: aperture_for(kind, dy, dz),
            wavelength,
            shape: (1, n),
        })
    }
}

fn aperture_for(kind: ElementKind, dy: f64, dz: f64) -> f64 {
    match kind {
        ElementKind::Isotropic => 0.0,
        ElementKind::Planar => dy * dz,
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

/// Number of lattice points with exact pitch that fit in `extent`.
fn count_along(extent: f64, pitch: f64) -> usize {
    // relative slack so that e.g. 0.5 / (0.5/3) still counts 4 points
    (extent / pitch * (1.0 + 1e-12)).floor() as usize + 1
}

fn centred(i: usize, n: usize, pitch: f64) -> f64 {
    (i as f64 - (n as f64 - 1.0) / 2.0) * pitch
}

/// Rectangular lattice with pitch `(dy, dz)` centred on the origin, filling a
/// `y_lis × z_lis` panel with `floor(extent/pitch) + 1` points per axis.
pub fn planar_grid(
    y_lis: f64,
    z_lis: f64,
    dy: f64,
    dz: f64,
    kind: ElementKind,
    wavelength: f64,
) -> Result<ArrayGeometry> {
    planar_grid_capped(y_lis, z_lis, dy, dz, kind, wavelength, DEFAULT_MAX_ELEMENTS)
}

/// [`planar_grid`] with an explicit element cap.
pub fn planar_grid_capped(
    y_lis: f64,
    z_lis: f64,
    dy: f64,
    dz: f64,
    kind: ElementKind,
    wavelength: f64,
    max_elements: usize,
) -> Result<ArrayGeometry> {
    positive("y_lis", y_lis)?;
    positive("z_lis", z_lis)?;
    positive("dy", dy)?;
    positive("dz", dz)?;
    positive("wavelength", wavelength)?;
    if dy > y_lis || dz > z_lis {
        return Err(Error::InvalidArgument(format!(
            "pitch ({dy}, {dz}) exceeds panel size ({y_lis}, {z_lis})"
        )));
    }
    let ny = count_along(y_lis, dy);
    let nz = count_along(z_lis, dz);
    let n = ny.saturating_mul(nz);
    if n > max_elements {
        return Err(Error::Capacity {
            requested: n,
            cap: max_elements,
        });
    }
    let mut positions = Vec::with_capacity(n);
    for iy in 0..ny {
        let y = centred(iy, ny, dy);
        for iz in 0..nz {
            positions.push(Vec3::new(0.0, y, centred(iz, nz, dz)));
        }
    }
    Ok(ArrayGeometry {
        positions,
        kind,
        dy,
        dz,
        aperture_per_element: aperture_for(kind, dy, dz),
        wavelength,
        shape: (ny, nz),
    })
}

/// `n` elements on the z-axis with pitch `dz`, centred on the origin.
pub fn linear_array(n: usize, dz: f64, kind: ElementKind, wavelength: f64) -> Result<ArrayGeometry> {
    if n == 0 {
        return Err(Error::InvalidArgument("linear array needs at least one element".into()));
    }
    positive("dz", dz)?;
    positive("wavelength", wavelength)?;
    let positions = (0..n)
        .map(|i| Vec3::new(0.0, 0.0, centred(i, n, dz)))
        .collect();
    Ok(ArrayGeometry {
        positions,
        kind,
        dy: dz,
        dz,
        aperture_per_element: aperture_for(kind, dz, dz),
        wavelength,
        shape: (1, n),
    })
}
