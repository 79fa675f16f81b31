//! CA-MF on a dense line: machine double gives up, 256-bit arithmetic does
//! not.

use lis_core::prelude::*;

fn main() -> Result<()> {
    let lambda = wavelength(2.6e9);
    let o = Vec3::new(10.0, 0.0, 0.0);
    for frac in [0.3, 0.2, 0.1] {
        let geom = linear_array(20, frac * lambda, ElementKind::Isotropic, lambda)?;
        let z = impedance(&geom, Precision::extended(256)?)?;
        let h = channel(&geom, o)?;
        println!("{frac}λ, κ(Z) = {:.3e}", z.condition_number()?);
        let double = impedance(&geom, Precision::MachineDouble)?;
        match ca_mf(&double, &h, Precision::MachineDouble) {
            Ok(i) => println!("  double: D = {:.3} dBi", to_dbi(directivity(&i, &double, &h, o, lambda)?)),
            Err(e) => println!("  double: {e}"),
        }
        let hp = hp_ca_mf(&geom, o, 256)?;
        println!(
            "  256-bit: D = {:.3} dBi, iᴴi/iᴴZi = {:.3e}, residual {:.1e}",
            to_dbi(hp.directivity),
            hp.excitation_power,
            hp.relative_residual
        );
    }
    Ok(())
}
