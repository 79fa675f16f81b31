//! Builds Z for a short line of elements and prints its spectrum.
//!
//! `cargo run --example impedance_matrix -- 0.2` (spacing in wavelengths)

use lis_core::prelude::*;

fn main() -> Result<()> {
    let frac: f64 = std::env::args().nth(1).map_or(Ok(0.25), |s| s.parse()).expect("spacing in wavelengths");
    let lambda = wavelength(2.6e9);
    for kind in [ElementKind::Isotropic, ElementKind::Planar] {
        let geom = linear_array(10, frac * lambda, kind, lambda)?;
        let z = impedance(&geom, Precision::MachineDouble)?;
        let eig = z.sym_eig()?;
        println!("{kind} elements, {frac}λ spacing");
        println!("  Z[0][1] = {:.6}, Z[0][0] = {}", z.entries()[(0, 1)], z.entries()[(0, 0)]);
        let shown: Vec<String> = eig.values.iter().map(|s| format!("{s:.3e}")).collect();
        println!("  eigenvalues {}", shown.join(" "));
        println!("  κ(Z) = {:.3e}", z.condition_number()?);
    }
    Ok(())
}
