use std::path::PathBuf;
use std::time::Instant;

use crate::channel::{channel, ComplexVector};
use crate::coupling::{impedance, ImpedanceMatrix};
use crate::error::{Error, Result};
use crate::geometry::{linear_array, planar_grid_capped, ArrayGeometry, ElementKind};
use crate::metrics::{d_nc_with, directivity, excitation_power, DncOptions};
use crate::precision::Precision;
use crate::precoding::{ca_mf, ca_pmf, ca_pmf_modes, hp_ca_mf, nca_mf, HpCaMf, Scheme};

use super::{
    dump_stem, dump_vector, par_map, with_suffix, Experiment, ExperimentConfig, RunOptions, SweepResult,
    SweepRow,
};

/// Default spacings of the conditioning sweep, in wavelengths (1.0 down to 0.1).
pub const CONDITIONING_GRID: [f64; 19] = [
    1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7, 0.65, 0.6, 0.55, 0.5, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1,
];
/// Default spacing of the eigenvalue profile, in wavelengths.
pub const PROFILE_GRID: [f64; 1] = [0.3];
/// Default spacing of the truncation sweep, in wavelengths.
pub const TRUNCATION_GRID: [f64; 1] = [0.3];
/// Default spacings of the fixed-aperture sweep, in wavelengths.
pub const SPACING_GRID: [f64; 10] = [1.0, 0.75, 0.5, 0.4, 0.3, 0.25, 0.2, 0.15, 0.125, 0.1];

struct Point {
    index: usize,
    kind: ElementKind,
    spacing: f64,
    geom: ArrayGeometry,
}

fn points(
    cfg: &ExperimentConfig,
    grid: &[f64],
    build: impl Fn(f64, ElementKind) -> Result<ArrayGeometry>,
) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (index, s) in cfg.spacings_m(grid).into_iter().enumerate() {
        for &kind in &cfg.element_kinds {
            out.push(Point {
                index,
                kind,
                spacing: s,
                geom: build(s, kind)?,
            });
        }
    }
    Ok(out)
}

fn linear_points(cfg: &ExperimentConfig, grid: &[f64]) -> Result<Vec<Point>> {
    let lambda = cfg.wavelength();
    points(cfg, grid, |s, kind| {
        linear_array(cfg.linear_elements, s, kind, lambda).map_err(|e| Error::Config(e.to_string()))
    })
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn fail(row: &mut SweepRow, e: &Error) {
    row.status = e.tag().to_string();
}

fn report(opts: &RunOptions, exp: Experiment, p: &Point, lambda: f64, started: Instant) {
    if opts.progress {
        eprintln!(
            "[{exp}] {:<9} spacing {:.4} λ  N = {:<5} {:>10.1} ms",
            p.kind.name(),
            p.spacing / lambda,
            p.geom.len(),
            elapsed_ms(started)
        );
    }
}

fn dump_matrix(opts: &RunOptions, exp: Experiment, p: &Point, z: &ImpedanceMatrix) -> Result<Option<PathBuf>> {
    match &opts.dump_dir {
        None => Ok(None),
        Some(dir) => {
            let stem = dump_stem(dir, exp, p.kind, p.index)?;
            z.dump(&with_suffix(&stem, "_Z.txt"))?;
            Ok(Some(stem))
        }
    }
}

fn finish(exp: Experiment, cfg: &ExperimentConfig, rows: Result<Vec<Vec<SweepRow>>>) -> Result<SweepResult> {
    Ok(SweepResult {
        experiment: exp,
        wavelength: cfg.wavelength(),
        rows: rows?.into_iter().flatten().collect(),
        include_wall_time: cfg.wall_time,
    })
}

/// `κ(Z)` of the linear array for every spacing and element kind.
pub fn run_conditioning_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let exp = Experiment::Conditioning;
    let lambda = cfg.wavelength();
    let pts = linear_points(cfg, &CONDITIONING_GRID)?;
    let rows = par_map(&pts, opts, |p| -> Result<Vec<SweepRow>> {
        let t = Instant::now();
        let mut row = SweepRow::new(p.kind, p.spacing, lambda, p.geom.len());
        let z = impedance(&p.geom, cfg.precision)?;
        dump_matrix(opts, exp, p, &z)?;
        match z.condition_number() {
            Ok(k) => row.condition_number = Some(k),
            Err(e) => fail(&mut row, &e),
        }
        row.wall_time_ms = elapsed_ms(t);
        report(opts, exp, p, lambda, t);
        Ok(vec![row])
    })?
    .into_iter()
    .collect();
    finish(exp, cfg, rows)
}

/// Eigenvalues of `Z`, descending, one row each.
pub fn run_singular_profile(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let exp = Experiment::Profile;
    let lambda = cfg.wavelength();
    let pts = linear_points(cfg, &PROFILE_GRID)?;
    let rows = par_map(&pts, opts, |p| -> Result<Vec<SweepRow>> {
        let t = Instant::now();
        let z = impedance(&p.geom, cfg.precision)?;
        dump_matrix(opts, exp, p, &z)?;
        let base = SweepRow::new(p.kind, p.spacing, lambda, p.geom.len());
        let out = match z.sym_eig() {
            Err(e) => {
                let mut row = base;
                fail(&mut row, &e);
                vec![row]
            }
            Ok(eig) => {
                let kappa = z.condition_number().ok();
                eig.values
                    .iter()
                    .enumerate()
                    .map(|(k, &s)| {
                        let mut row = base.clone();
                        row.mode = Some(k + 1);
                        row.eigenvalue = Some(s);
                        row.condition_number = kappa;
                        row
                    })
                    .collect()
            }
        };
        let ms = elapsed_ms(t);
        report(opts, exp, p, lambda, t);
        Ok(out
            .into_iter()
            .map(|mut r| {
                r.wall_time_ms = ms;
                r
            })
            .collect())
    })?
    .into_iter()
    .collect();
    finish(exp, cfg, rows)
}

/// Power-normalised `iᴴi`, i.e. `iᴴi / iᴴZi`.
fn normalised_power(i: &ComplexVector, z: &ImpedanceMatrix) -> Result<f64> {
    let p = z.quadratic_form(i)?;
    if !(p > 0.0) {
        return Err(Error::NonRadiating(p));
    }
    Ok(excitation_power(i) / p)
}

/// CA-pMF directivity and current cost for every retained-mode count.
pub fn run_truncation_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let exp = Experiment::Truncation;
    let lambda = cfg.wavelength();
    let o = cfg.ue();
    let pts = linear_points(cfg, &TRUNCATION_GRID)?;
    let rows = par_map(&pts, opts, |p| -> Result<Vec<SweepRow>> {
        let t = Instant::now();
        let n = p.geom.len();
        let z = impedance(&p.geom, cfg.precision)?;
        let h = channel(&p.geom, o).map_err(|e| Error::Config(e.to_string()))?;
        let stem = dump_matrix(opts, exp, p, &z)?;
        if let Some(stem) = &stem {
            dump_vector(&with_suffix(stem, "_h.txt"), &h)?;
        }
        let kappa = z.condition_number().ok();
        let mut out = Vec::with_capacity(n);
        for m in 1..=n {
            let tm = Instant::now();
            let mut row = SweepRow::new(p.kind, p.spacing, lambda, n);
            row.scheme = Some(Scheme::CaPmf);
            row.mode = Some(m);
            row.retained_modes = Some(m);
            row.condition_number = kappa;
            let eval = || -> Result<(f64, f64, ComplexVector)> {
                let i = ca_pmf_modes(&z, &h, m)?;
                Ok((directivity(&i, &z, &h, o, lambda)?, normalised_power(&i, &z)?, i))
            };
            match eval() {
                Ok((d, pw, i)) => {
                    row.directivity = Some(d);
                    row.excitation_power = Some(pw);
                    if let Some(stem) = &stem {
                        dump_vector(&with_suffix(stem, &format!("_m{m:03}_i.txt")), &i)?;
                    }
                }
                Err(e) => fail(&mut row, &e),
            }
            row.wall_time_ms = elapsed_ms(tm);
            out.push(row);
        }
        report(opts, exp, p, lambda, t);
        Ok(out)
    })?
    .into_iter()
    .collect();
    finish(exp, cfg, rows)
}

/// Directivity of a fixed-size panel against element spacing, per scheme,
/// with the continuous-aperture reference alongside.
pub fn run_spacing_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let exp = Experiment::Spacing;
    let lambda = cfg.wavelength();
    let o = cfg.ue();
    if !(o.x > 0.0) {
        return Err(Error::Config(format!(
            "the spacing sweep needs the user in front of the panel, got {o}"
        )));
    }
    // capacity problems surface here, before any work is done
    let pts = points(cfg, &SPACING_GRID, |s, kind| {
        planar_grid_capped(cfg.panel_width, cfg.panel_height, s, s, kind, lambda, cfg.max_elements)
    })?;
    let reference = d_nc_with(
        o,
        cfg.panel_width,
        cfg.panel_height,
        lambda,
        DncOptions {
            quad_tol: cfg.quad_tol,
            paper_literal_limits: cfg.paper_literal_limits,
            ..DncOptions::default()
        },
    )?;
    let rows = par_map(&pts, opts, |p| -> Result<Vec<SweepRow>> {
        let t = Instant::now();
        let n = p.geom.len();
        let z = impedance(&p.geom, Precision::MachineDouble)?;
        let h = channel(&p.geom, o)?;
        let stem = dump_matrix(opts, exp, p, &z)?;
        if let Some(stem) = &stem {
            dump_vector(&with_suffix(stem, "_h.txt"), &h)?;
        }
        let needs_spectrum = cfg.schemes.contains(&Scheme::CaPmf);
        let kappa = if needs_spectrum { z.condition_number().ok() } else { None };
        let mut out = Vec::with_capacity(cfg.schemes.len());
        for &scheme in &cfg.schemes {
            let ts = Instant::now();
            let mut row = SweepRow::new(p.kind, p.spacing, lambda, n);
            row.scheme = Some(scheme);
            row.condition_number = kappa;
            row.d_nc = Some(reference);
            let outcome = match scheme {
                Scheme::NcaMf | Scheme::CaMf | Scheme::CaPmf => {
                    let i = match scheme {
                        Scheme::NcaMf => nca_mf(&h),
                        Scheme::CaMf => ca_mf(&z, &h, Precision::MachineDouble),
                        _ => {
                            row.retained_modes = z.retained_by_threshold(cfg.svd_threshold).ok();
                            ca_pmf(&z, &h, cfg.svd_threshold)
                        }
                    };
                    i.and_then(|i| {
                        Ok(HpCaMf {
                            directivity: directivity(&i, &z, &h, o, lambda)?,
                            excitation_power: normalised_power(&i, &z)?,
                            current: i,
                            relative_residual: 0.0,
                        })
                    })
                }
                Scheme::HpCaMf => {
                    let bits = cfg.precision.mantissa_bits();
                    if n > cfg.hp_max_elements {
                        Err(Error::Capacity {
                            requested: n,
                            cap: cfg.hp_max_elements,
                        })
                    } else {
                        hp_ca_mf(&p.geom, o, bits)
                    }
                }
            };
            match outcome {
                Ok(r) => {
                    row.directivity = Some(r.directivity);
                    row.excitation_power = Some(r.excitation_power);
                    if let Some(stem) = &stem {
                        let name = format!("_{}_i.txt", scheme.name());
                        dump_vector(&with_suffix(stem, &name), &r.current)?;
                    }
                }
                Err(e) => fail(&mut row, &e),
            }
            row.wall_time_ms = elapsed_ms(ts);
            out.push(row);
        }
        report(opts, exp, p, lambda, t);
        Ok(out)
    })?
    .into_iter()
    .collect();
    finish(exp, cfg, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::from_json(text).unwrap();
        c.wall_time = false;
        c
    }

    #[test]
    fn conditioning_at_half_wavelength_is_one() {
        let c = cfg(r#"{"spacings": ["0.5 λ", "1 λ"], "element_kinds": ["isotropic"]}"#);
        let r = run_conditioning_sweep(&c, &RunOptions::default()).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert!((row.condition_number.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn profile_is_sorted_and_complete() {
        let c = cfg(r#"{"linear_elements": 8}"#);
        let r = run_singular_profile(&c, &RunOptions::default()).unwrap();
        assert_eq!(r.rows.len(), 16);
        for kind in [ElementKind::Isotropic, ElementKind::Planar] {
            let vals: Vec<f64> = r.select(kind, None).map(|row| row.eigenvalue.unwrap()).collect();
            assert_eq!(vals.len(), 8);
            assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn truncation_ends_at_ca_mf() {
        let c = cfg(r#"{"linear_elements": 6, "spacings": ["0.45 λ"], "element_kinds": ["planar"]}"#);
        let r = run_truncation_sweep(&c, &RunOptions::default()).unwrap();
        assert_eq!(r.rows.len(), 6);
        let last = r.rows.last().unwrap().directivity.unwrap();
        let lambda = c.wavelength();
        let g = linear_array(6, 0.45 * lambda, ElementKind::Planar, lambda).unwrap();
        let z = impedance(&g, Precision::MachineDouble).unwrap();
        let h = channel(&g, c.ue()).unwrap();
        let i = ca_mf(&z, &h, Precision::MachineDouble).unwrap();
        let d = directivity(&i, &z, &h, c.ue(), lambda).unwrap();
        assert!(((last - d) / d).abs() < 1e-10);
    }

    #[test]
    fn spacing_sweep_rows_and_capacity() {
        let c = cfg(
            r#"{"panel_width": 0.2, "panel_height": 0.2, "spacings": ["0.5 λ", "0.4 λ"],
                "schemes": ["nCA-MF", "CA-MF", "CA-pMF", "HP-CA-MF"], "precision": "ext:128"}"#,
        );
        let r = run_spacing_sweep(&c, &RunOptions::default()).unwrap();
        assert_eq!(r.rows.len(), 2 * 2 * 4);
        assert!(r.rows.iter().all(|row| row.is_ok() && row.d_nc.is_some()));
        // the double and extended solves agree on a benign problem
        for kind in [ElementKind::Isotropic, ElementKind::Planar] {
            let ca: Vec<f64> = r.select(kind, Some(Scheme::CaMf)).map(|x| x.directivity.unwrap()).collect();
            let hp: Vec<f64> = r.select(kind, Some(Scheme::HpCaMf)).map(|x| x.directivity.unwrap()).collect();
            for (a, b) in ca.iter().zip(&hp) {
                assert!(((a - b) / b).abs() < 1e-9);
            }
        }
        let mut small = c.clone();
        small.max_elements = 4;
        assert!(matches!(
            run_spacing_sweep(&small, &RunOptions::default()),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn output_is_deterministic() {
        let c = cfg(r#"{"panel_width": 0.15, "panel_height": 0.15, "spacings": ["0.5 λ", "0.3 λ"]}"#);
        let a = run_spacing_sweep(&c, &RunOptions::default()).unwrap().to_csv_string().unwrap();
        let b = run_spacing_sweep(
            &c,
            &RunOptions {
                workers: Some(1),
                ..RunOptions::default()
            },
        )
        .unwrap()
        .to_csv_string()
        .unwrap();
        assert_eq!(a, b);
    }
}
