use lis_core::channel::radiated_power_quadrature;
use lis_core::geometry::ArrayGeometry;
use lis_core::metrics::{ca_mf_directivity_closed_form, excitation_power, DEFAULT_QUAD_TOL};
use lis_core::precoding::ca_pmf_modes;
use lis_core::prelude::*;
use num_complex::Complex64;
use proptest::prelude::*;

const F: f64 = 2.6e9;

fn kind() -> impl Strategy<Value = ElementKind> {
    prop_oneof![Just(ElementKind::Isotropic), Just(ElementKind::Planar)]
}

fn line(n: usize, frac: f64, kind: ElementKind) -> ArrayGeometry {
    let lambda = wavelength(F);
    linear_array(n, frac * lambda, kind, lambda).unwrap()
}

fn currents(parts: &[(f64, f64)]) -> ComplexVector {
    ComplexVector::new(parts.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn impedance_is_symmetric_and_positive(n in 2usize..12, frac in 0.2f64..1.2, kind in kind()) {
        let z = impedance(&line(n, frac, kind), Precision::MachineDouble).unwrap();
        let e = z.entries();
        for a in 0..n {
            for b in 0..n {
                prop_assert_eq!(e[(a, b)], e[(b, a)]);
            }
        }
        let eig = z.sym_eig().unwrap();
        prop_assert!(eig.values.iter().all(|&s| s > 0.0));
        prop_assert!(eig.reconstruction_error(e) < 1e-12);
    }

    #[test]
    fn sphere_integral_equals_quadratic_form(
        frac in 0.15f64..1.0,
        kind in kind(),
        parts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..6),
    ) {
        let geom = line(parts.len(), frac, kind);
        let i = currents(&parts);
        prop_assume!(i.norm_sqr() > 1e-3);
        let z = impedance(&geom, Precision::MachineDouble).unwrap();
        let q = radiated_power_quadrature(&geom, &i, FieldModel::default(), 96).unwrap();
        let p = z.quadratic_form(&i).unwrap();
        prop_assert!(((q.power - p) / p).abs() < 1e-9, "{} vs {}", q.power, p);
    }

    #[test]
    fn coupling_aware_filter_is_never_worse(
        n in 2usize..10,
        frac in 0.25f64..1.0,
        kind in kind(),
        (x, y, zz) in (2.0f64..30.0, -5.0f64..5.0, -5.0f64..5.0),
    ) {
        let lambda = wavelength(F);
        let geom = line(n, frac, kind);
        let o = Vec3::new(x, y, zz);
        let z = impedance(&geom, Precision::MachineDouble).unwrap();
        let h = channel(&geom, o).unwrap();
        let nca = directivity(&nca_mf(&h).unwrap(), &z, &h, o, lambda).unwrap();
        let ca_i = ca_mf(&z, &h, Precision::MachineDouble).unwrap();
        let ca = directivity(&ca_i, &z, &h, o, lambda).unwrap();
        let closed = ca_mf_directivity_closed_form(&z, &h, o, lambda, Precision::MachineDouble).unwrap();
        prop_assert!(ca >= nca * (1.0 - 1e-10));
        prop_assert!(((ca - closed) / closed).abs() < 1e-9);
        let all_modes = ca_pmf_modes(&z, &h, n).unwrap();
        prop_assert!(((directivity(&all_modes, &z, &h, o, lambda).unwrap() - ca) / ca).abs() < 1e-9);
    }

    #[test]
    fn directivity_ignores_current_scale(
        scale in 1e-6f64..1e6,
        phase in 0.0f64..std::f64::consts::TAU,
        kind in kind(),
    ) {
        let lambda = wavelength(F);
        let geom = line(5, 0.35, kind);
        let o = Vec3::new(8.0, 1.0, 0.5);
        let z = impedance(&geom, Precision::MachineDouble).unwrap();
        let h = channel(&geom, o).unwrap();
        let i = ca_mf(&z, &h, Precision::MachineDouble).unwrap();
        let j = i.scale(Complex64::from_polar(scale, phase));
        let a = directivity(&i, &z, &h, o, lambda).unwrap();
        let b = directivity(&j, &z, &h, o, lambda).unwrap();
        prop_assert!(((a - b) / a).abs() < 1e-12);
        let unit = power_normalize(&j, &z).unwrap();
        prop_assert!((z.quadratic_form(&unit).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn retained_modes_trade_current_for_directivity() {
    let lambda = wavelength(F);
    let geom = line(16, 0.3, ElementKind::Planar);
    let o = Vec3::new(10.0, 0.0, 0.0);
    let z = impedance(&geom, Precision::extended(192).unwrap()).unwrap();
    let h = channel(&geom, o).unwrap();
    let mut last = (0.0, 0.0);
    for m in 1..=16 {
        let i = power_normalize(&ca_pmf_modes(&z, &h, m).unwrap(), &z).unwrap();
        let d = directivity(&i, &z, &h, o, lambda).unwrap();
        let p = excitation_power(&i);
        assert!(d >= last.0 * (1.0 - 1e-10), "mode {m}: {d} after {}", last.0);
        assert!(p >= last.1 * (1.0 - 1e-10), "mode {m}: {p} after {}", last.1);
        last = (d, p);
    }
}

#[test]
fn far_panel_directivity_approaches_the_aperture_limit() {
    let lambda = wavelength(F);
    let limit = 4.0 * std::f64::consts::PI * 0.04 / (lambda * lambda);
    let mut prev = 0.0;
    for r in [1.0, 3.0, 10.0, 100.0] {
        let d = d_nc(Vec3::new(r, 0.0, 0.0), 0.2, 0.2, lambda, DEFAULT_QUAD_TOL).unwrap();
        assert!(d > prev && d < limit);
        prev = d;
    }
    assert!((limit - prev) / limit < 1e-4);
}

#[test]
fn half_wavelength_grid_sits_between_n_and_the_two_sided_aperture() {
    let lambda = wavelength(F);
    let geom = planar_grid(0.3, 0.3, lambda / 2.0, lambda / 2.0, ElementKind::Isotropic, lambda).unwrap();
    let o = Vec3::new(1e5, 0.0, 0.0);
    let z = impedance(&geom, Precision::MachineDouble).unwrap();
    let h = channel(&geom, o).unwrap();
    let nca = directivity(&nca_mf(&h).unwrap(), &z, &h, o, lambda).unwrap();
    let ca = directivity(&ca_mf(&z, &h, Precision::MachineDouble).unwrap(), &z, &h, o, lambda).unwrap();
    let n = geom.len() as f64;
    // isotropic elements radiate to both sides: 2πA/λ² = πN/2 for this pitch
    assert!(nca > n && nca < std::f64::consts::PI * n / 2.0, "{nca} for N = {n}");
    assert!(to_dbi(ca) - to_dbi(nca) < 0.5);
}
