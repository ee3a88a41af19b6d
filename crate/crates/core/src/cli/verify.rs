//! `verify all`: every check at reduced resolution, deterministic for a fixed seed.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::Outcome;
use crate::billiard::{forward_map, jacobian_det, AnnulusPoint};
use crate::curves::{build_fourier_table, disc_table, random_fourier_spec, FourierSupportSpec, TableCurve};
use crate::dynamics::{find_periodic_orbits, functional_gap, orbit_distance, phase_space_orbits, round_trip_error};
use crate::error::{Error, Result};
use crate::geom::{circle_dist, Vec2};
use crate::homotopy::{
    bracket_db, hamilton_jacobi_residual, support_interp_path, translation_path, verify_comparison, HjOptions,
    HoferOptions, LengthOptions, TablePath,
};
use crate::io::{write_csv, write_json};
use crate::persistence::{
    bottleneck_brute_force, bottleneck_distance, stability_check, torus_betti, Bar, Barcode,
};
use crate::smoothing::{cauchy_tail, family_with_width, independence_fit, PolygonSpec};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub metrics: Value,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
}

fn check(name: &'static str, pass: bool, metrics: Value) -> Check {
    Check { name, pass, metrics }
}

fn random_table(rng: &mut ChaCha8Rng) -> Result<(FourierSupportSpec, TableCurve)> {
    let spec = random_fourier_spec(rng, 4, 0.3);
    let t = build_fourier_table(&spec)?;
    Ok((spec, t))
}

fn disc_closed_form(rng: &mut ChaCha8Rng) -> Result<Check> {
    let d = disc_table();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q = rng.gen::<f64>();
        let p = rng.gen_range(-0.99..0.99);
        let y = forward_map(&d, AnnulusPoint::new(q, p))?;
        let big_q = q + p.acos() / PI;
        worst = worst.max(circle_dist(y.q, big_q)).max((y.p - p).abs());
    }
    Ok(check("disc_closed_form", worst < 1e-10, json!({"points": 1000, "max_error": worst})))
}

fn symplecticity(rng: &mut ChaCha8Rng) -> Result<Check> {
    let (_, t) = random_table(rng)?;
    let mut defects = Vec::new();
    for table in [disc_table(), t] {
        let mut worst: f64 = 0.0;
        for i in 0..20 {
            for j in 0..20 {
                let x = AnnulusPoint::new(i as f64 / 20.0, -0.95 + 1.9 * j as f64 / 19.0);
                worst = worst.max((jacobian_det(&table, x, 1e-6)? - 1.0).abs());
            }
        }
        defects.push(worst);
    }
    let pass = defects.iter().all(|&d| d < 1e-6);
    Ok(check("symplecticity", pass, json!({"max_det_defect": defects})))
}

/// Seeded support-interpolation paths from the disc plus two translations.
fn paths(rng: &mut ChaCha8Rng) -> Result<Vec<(String, Box<dyn TablePath>)>> {
    let mut out: Vec<(String, Box<dyn TablePath>)> = Vec::new();
    for i in 0..3 {
        let (spec, _) = random_table(rng)?;
        out.push((format!("support_interp_{i}"), Box::new(support_interp_path(&FourierSupportSpec::circle(1.0), &spec)?)));
    }
    let (_, t) = random_table(rng)?;
    out.push(("translation_0".into(), Box::new(translation_path(&disc_table(), Vec2::new(0.1, -0.05)))));
    out.push(("translation_1".into(), Box::new(translation_path(&t, Vec2::new(-0.02, 0.07)))));
    Ok(out)
}

fn hofer_certificates(paths: &[(String, Box<dyn TablePath>)]) -> Result<(Check, Check)> {
    let hopts = HoferOptions {
        s_nodes: 9,
        q_grid: 64,
        p_grid: 31,
        ..HoferOptions::default()
    };
    let lopts = LengthOptions {
        s_nodes: 9,
        q_grid: 256,
    };
    let mut certs = Vec::new();
    let mut brackets = Vec::new();
    let mut cert_pass = true;
    let mut bracket_pass = true;
    for (name, p) in paths {
        let c = verify_comparison(p.as_ref(), &hopts, &lopts)?;
        cert_pass &= c.pass;
        certs.push(json!({"path": name, "l_H": c.l_h, "l_B": c.l_b, "ratio": c.ratio, "pass": c.pass}));
        let b = match bracket_db(p.as_ref(), &lopts) {
            Ok(b) => b,
            Err(e @ Error::BracketInverted { .. }) => {
                bracket_pass = false;
                brackets.push(json!({"path": name, "error": e.to_string()}));
                continue;
            }
            Err(e) => return Err(e),
        };
        let tight = !name.starts_with("translation") || (b.upper - b.lower).abs() < 1e-9;
        bracket_pass &= b.lower <= b.upper * (1.0 + 1e-6) && tight;
        brackets.push(json!({"path": name, "lower": b.lower, "upper": b.upper}));
    }
    Ok((
        check("hofer_comparison", cert_pass, json!({"certificates": certs})),
        check("db_bracket", bracket_pass, json!({"brackets": brackets})),
    ))
}

fn hamiltonian_checks(rng: &mut ChaCha8Rng) -> Result<Check> {
    let path = support_interp_path(&FourierSupportSpec::circle(1.0), &FourierSupportSpec::mild_ellipse(0.05))?;
    let slice = path.slice(0.5)?;
    let mut monotone = true;
    let mut last: f64 = 0.0;
    for sign in [1.0, -1.0] {
        for i in 0..8 {
            let big_q = i as f64 / 8.0;
            let mut prev = f64::INFINITY;
            for k in 2..=6 {
                let h = slice.hamiltonian(big_q, sign * (1.0 - 10f64.powi(-k)))?.abs();
                monotone &= h <= prev + 1e-15;
                prev = h;
            }
            last = last.max(prev);
        }
    }
    let points: Vec<AnnulusPoint> = (0..20)
        .map(|_| AnnulusPoint::new(rng.gen::<f64>(), rng.gen_range(-0.9..0.9)))
        .collect();
    let res = |h: f64| hamilton_jacobi_residual(&path, 0.5, &points, &HjOptions { h, ..HjOptions::default() });
    let r = res(HjOptions::default().h)?;
    let (r0, r2) = (res(4e-2)?, res(1e-2)?);
    let pass = monotone && r < 1e-3 && r0 / r2 > 4.0;
    Ok(check(
        "hamiltonian",
        pass,
        json!({"boundary_monotone": monotone, "h_at_1e-6": last, "hj_residual": r, "residual_ratio_4x": r0 / r2}),
    ))
}

fn smoothing() -> Result<Check> {
    let sq = PolygonSpec::unit_square();
    let fam = family_with_width(&sq, sq.default_width())?;
    let affine = (1..=16)
        .map(|i| {
            let s = i as f64 / 16.0;
            (fam.length_by_quadrature(s) - fam.length(s)).abs()
        })
        .fold(0.0, f64::max);
    let tail = cauchy_tail(&fam, 1.0, 8)?;
    let decreasing = tail.increments.windows(2).all(|w| w[1] < w[0]);
    let other = family_with_width(&sq, sq.default_width() / 2.0)?;
    let fit = independence_fit(&fam, &other, &[0.25, 0.0625, 0.015625])?;
    let pass = affine < 1e-9 && decreasing && (0.9..=1.1).contains(&fit.slope);
    Ok(check(
        "smoothing",
        pass,
        json!({"affine_residual": affine, "tail": tail.tail, "increments_decreasing": decreasing, "independence_slope": fit.slope}),
    ))
}

fn gap_bounds(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut rows = Vec::new();
    let mut pass = true;
    for _ in 0..3 {
        let (_, a) = random_table(rng)?;
        let (_, b) = random_table(rng)?;
        for (n, grid) in [(2, 32), (3, 16)] {
            match functional_gap(&a, &b, n, grid) {
                Ok(r) => rows.push(json!({"n": n, "gap": r.gap, "bound": r.bound})),
                Err(e @ Error::BoundViolated { .. }) => {
                    pass = false;
                    rows.push(json!({"n": n, "error": e.to_string()}));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(check("functional_gap", pass, json!({"pairs": rows})))
}

fn orbits(seed: u64) -> Result<Check> {
    let d = disc_table();
    let two = find_periodic_orbits(&d, 2, 4, seed)?;
    let three = find_periodic_orbits(&d, 3, 4, seed)?;
    let a2 = two.first().map(|c| c.action).unwrap_or(f64::NAN);
    let a3 = three.first().map(|c| c.action).unwrap_or(f64::NAN);
    let disc_ok = (a2 - 2.0 / PI).abs() < 1e-9 && (a3 - 3.0 * 3f64.sqrt() / (2.0 * PI)).abs() < 1e-9;
    let e = build_fourier_table(&FourierSupportSpec::mild_ellipse(0.05))?;
    let torus = find_periodic_orbits(&e, 2, 8, seed)?;
    let phase = phase_space_orbits(&e, 2)?;
    let mut worst: f64 = 0.0;
    for o in &phase {
        worst = worst.max(torus.iter().map(|c| orbit_distance(&c.qs, &o.qs)).fold(f64::INFINITY, f64::min));
    }
    for c in &torus {
        worst = worst.max(phase.iter().map(|o| orbit_distance(&c.qs, &o.qs)).fold(f64::INFINITY, f64::min));
    }
    let pass = disc_ok && !phase.is_empty() && worst < 1e-8;
    Ok(check(
        "orbits",
        pass,
        json!({"disc_actions": [a2, a3], "ellipse_orbits": torus.len(), "max_mismatch": worst}),
    ))
}

fn persistence(rng: &mut ChaCha8Rng) -> Result<Check> {
    let e = build_fourier_table(&FourierSupportSpec::mild_ellipse(0.05))?;
    let r = stability_check(&disc_table(), &e, 2, 32);
    let (stable, betti_ok, bottleneck) = match &r {
        Ok(r) => (
            true,
            r.barcode_a.infinite_counts() == torus_betti(2) && r.barcode_b.infinite_counts() == torus_betti(2),
            r.bottleneck.clone(),
        ),
        Err(Error::StabilityViolated { .. }) => (false, false, Vec::new()),
        Err(e) => return Err(e.clone()),
    };
    let mut brute_ok = true;
    for _ in 0..50 {
        let mut bars = |k: usize| -> Barcode {
            let v = (0..k)
                .map(|_| {
                    let birth = rng.gen::<f64>();
                    Bar { degree: 0, birth, death: birth + rng.gen_range(0.01..0.5) }
                })
                .collect();
            Barcode::new(0, v)
        };
        let (a, b) = (bars(3), bars(3));
        brute_ok &= bottleneck_distance(&a, &b, 0) == bottleneck_brute_force(&a, &b, 0);
    }
    let pass = stable && betti_ok && brute_ok;
    Ok(check(
        "persistence",
        pass,
        json!({"stable": stable, "betti_ok": betti_ok, "bottleneck": bottleneck, "brute_force_agrees": brute_ok}),
    ))
}

fn reconstruction(rng: &mut ChaCha8Rng) -> Result<Check> {
    let (_, t) = random_table(rng)?;
    let err = round_trip_error(&t, 64)?;
    Ok(check("reconstruction", err < 1e-6, json!({"m": 64, "max_error": err})))
}

pub fn run_checks(seed: u64) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![disc_closed_form(&mut rng)?, symplecticity(&mut rng)?];
    let ps = paths(&mut rng)?;
    let (cert, bracket) = hofer_certificates(&ps)?;
    checks.push(cert);
    checks.push(hamiltonian_checks(&mut rng)?);
    checks.push(bracket);
    checks.push(smoothing()?);
    checks.push(gap_bounds(&mut rng)?);
    checks.push(orbits(seed)?);
    checks.push(persistence(&mut rng)?);
    checks.push(reconstruction(&mut rng)?);
    Ok(VerifyReport {
        seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

pub(super) fn verify_all(seed: u64, out: &Path) -> Result<Outcome> {
    let report = run_checks(seed)?;
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    write_json(&out.join("verify.json"), &report)?;
    let rows: Vec<[f64; 2]> = report
        .checks
        .iter()
        .enumerate()
        .map(|(i, c)| [i as f64, if c.pass { 1.0 } else { 0.0 }])
        .collect();
    write_csv(&out.join("verify.csv"), &["check", "pass"], rows.iter().map(|r| &r[..]))?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let names: Vec<Value> = report.checks.iter().map(|c| json!({"name": c.name, "pass": c.pass})).collect();
    Ok(Outcome {
        json: json!({"seed": seed, "pass": report.pass, "checks": names}),
        summary: if failed.is_empty() {
            format!("all {} checks passed", report.checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
        pass: report.pass,
    })
}
