//! Radiated power two ways: integrating the far field over the sphere, and
//! the quadratic form iᴴZi. They agree once the coupling is in Z.

use lis_core::channel::radiated_power_quadrature;
use lis_core::prelude::*;
use num_complex::Complex64;

fn main() -> Result<()> {
    let lambda = wavelength(2.6e9);
    let currents = ComplexVector::new(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.3, -0.8),
        Complex64::new(-0.5, 0.2),
        Complex64::new(0.1, 0.9),
    ]);
    for kind in [ElementKind::Isotropic, ElementKind::Planar] {
        let geom = linear_array(4, 0.2 * lambda, kind, lambda)?;
        let z = impedance(&geom, Precision::MachineDouble)?;
        let q = radiated_power_quadrature(&geom, &currents, FieldModel::default(), 128)?;
        let closed = z.quadratic_form(&currents)?;
        let uncoupled = currents.norm_sqr() * z.entries()[(0, 0)];
        println!(
            "{kind:>9}: sphere {:.12}  iᴴZi {:.12}  (ignoring coupling {:.6}, order-doubling gap {:.1e})",
            q.power, closed, uncoupled, q.richardson_gap
        );
    }
    Ok(())
}
