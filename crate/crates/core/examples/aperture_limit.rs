//! Directivity of a continuous uncoupled aperture, approaching 4πA/λ² in
//! the far field.

use lis_core::metrics::DEFAULT_QUAD_TOL;
use lis_core::prelude::*;
use std::f64::consts::PI;

fn main() -> Result<()> {
    let lambda = wavelength(2.6e9);
    let (y, z) = (0.5, 0.5);
    let limit = 4.0 * PI * y * z / (lambda * lambda);
    println!("4πA/λ² = {:.2} dBi", to_dbi(limit));
    for range in [0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
        let d = d_nc(Vec3::new(range, 0.0, 0.0), y, z, lambda, DEFAULT_QUAD_TOL)?;
        println!("  {range:>5} m: D_NC = {:.3} dBi ({:.3} % below)", to_dbi(d), 100.0 * (1.0 - d / limit));
    }
    Ok(())
}
