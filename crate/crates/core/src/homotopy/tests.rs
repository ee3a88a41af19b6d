use super::*;
use crate::billiard::{chord_length, AnnulusPoint};
use crate::curves::{build_fourier_table, disc_table, FourierSupportSpec};
use crate::error::Error;
use std::f64::consts::TAU;

fn disc_spec() -> FourierSupportSpec {
    FourierSupportSpec::circle(1.0)
}

fn ellipse_spec(a2: f64) -> FourierSupportSpec {
    FourierSupportSpec {
        c0: 1.0,
        cos: vec![0.0, a2],
        sin: vec![],
    }
}

fn small_length() -> LengthOptions {
    LengthOptions {
        s_nodes: 17,
        q_grid: 512,
    }
}

#[test]
fn translation_path_geometry() {
    let t = build_fourier_table(&ellipse_spec(0.05)).unwrap();
    let v = Vec2::new(0.1, 0.0);
    let path = translation_path(&t, v);
    let end = path.table(1.0).unwrap();
    assert!(end.position(0.3).dist(t.position(0.3) + v) < 1e-12);
    let len = path_geometric_length(&path, &small_length()).unwrap();
    assert!((len.value - 0.1).abs() < 1e-9);
    let b = bracket_db(&path, &small_length()).unwrap();
    assert!((b.upper - b.lower).abs() < 1e-9);
    let slice = path.slice(0.4).unwrap();
    for i in 0..20 {
        let h = slice.hamiltonian(i as f64 / 20.0, -0.9 + 0.09 * i as f64).unwrap();
        assert_eq!(h, 0.0);
    }
    let still = translation_path(&t, Vec2::ZERO);
    assert_eq!(path_geometric_length(&still, &small_length()).unwrap().value, 0.0);
}

#[test]
fn constant_support_path_is_still() {
    let p = support_interp_path(&ellipse_spec(0.05), &ellipse_spec(0.05)).unwrap();
    let len = path_geometric_length(&p, &small_length()).unwrap();
    assert!(len.value < 1e-15);
}

#[test]
fn invalid_endpoint_is_rejected() {
    match support_interp_path(&disc_spec(), &ellipse_spec(0.4)) {
        Err(Error::CurvatureNotPositive { at_s: Some(s), .. }) => assert!(s > 0.5),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn analytic_velocity_matches_differences() {
    let a = FourierSupportSpec {
        c0: 0.8,
        cos: vec![0.1, 0.03, 0.0, 0.01],
        sin: vec![0.0, -0.02, 0.01],
    };
    let b = FourierSupportSpec {
        c0: 1.3,
        cos: vec![-0.05, -0.04],
        sin: vec![0.2, 0.01, 0.0, -0.012],
    };
    let path = support_interp_path(&a, &b).unwrap();
    let h = 1e-5;
    for &s in &[0.1, 0.5, 0.93] {
        let slice = path.slice(s).unwrap();
        let lo = path.table(s - h).unwrap();
        let hi = path.table(s + h).unwrap();
        for i in 0..64 {
            let q = i as f64 / 64.0;
            let fd = (hi.position(q) - lo.position(q)) / (2.0 * h);
            assert!(fd.dist(slice.velocity(q)) < 1e-7, "s={s} q={q}");
        }
    }
}

#[test]
fn hamiltonian_matches_chord_difference() {
    let path = support_interp_path(&disc_spec(), &ellipse_spec(0.05)).unwrap();
    let (s, big_q, big_p, h) = (0.5, 0.3, 0.2, 1e-4);
    let slice = path.slice(s).unwrap();
    let value = slice.hamiltonian(big_q, big_p).unwrap();
    let (q, _) = crate::billiard::inverse_lifted(&slice.table, big_q, big_p).unwrap();
    let fp = chord_length(&path.table(s + h).unwrap(), q, big_q).unwrap();
    let fm = chord_length(&path.table(s - h).unwrap(), q, big_q).unwrap();
    assert!((value + (fp - fm) / (2.0 * h)).abs() < 1e-6);
    assert!(value.abs() > 1e-4);
}

#[test]
fn hamiltonian_decays_at_the_boundary() {
    let path = support_interp_path(&disc_spec(), &ellipse_spec(0.05)).unwrap();
    let slice = path.slice(0.5).unwrap();
    let vmax = hofer::max_speed(&slice, 1024);
    for &sign in &[1.0, -1.0] {
        for i in 0..16 {
            let big_q = i as f64 / 16.0;
            let mut prev = f64::INFINITY;
            for k in 2..=6 {
                let p = sign * (1.0 - 10f64.powi(-k));
                let (h, bound) = slice.hamiltonian_with_bound(big_q, p).unwrap();
                assert!(h.abs() <= bound + 1e-12);
                assert!(h.abs() <= prev + 1e-15);
                prev = h.abs();
            }
            assert!(prev <= 1e-3 * vmax, "{prev} vs {vmax}");
        }
    }
}

#[test]
fn hamilton_jacobi_consistency() {
    let path = support_interp_path(&disc_spec(), &ellipse_spec(0.05)).unwrap();
    let points: Vec<AnnulusPoint> = (0..100)
        .map(|i| {
            let q = (i as f64 * 0.618_033_988_749_895) % 1.0;
            let p = 0.9 * ((i as f64 * 0.414_213_562_373_095) % 2.0 - 1.0);
            AnnulusPoint::new(q, p)
        })
        .collect();
    let r = hamilton_jacobi_residual(&path, 0.5, &points, &HjOptions::default()).unwrap();
    assert!(r < 1e-3, "residual {r}");
    // Second order in the time step, measured above the rounding floor.
    let res = |h: f64| {
        hamilton_jacobi_residual(
            &path,
            0.5,
            &points[..20],
            &HjOptions {
                h,
                gradient_step: 1e-5,
            },
        )
        .unwrap()
    };
    let (r0, r2) = (res(4e-2), res(1e-2));
    assert!(r0 / r2 > 4.0, "{r0} -> {r2}");
}

#[test]
fn translation_hj_residual_vanishes() {
    let path = translation_path(&disc_table(), Vec2::new(0.02, -0.03));
    let pts = [AnnulusPoint::new(0.1, 0.3), AnnulusPoint::new(0.7, -0.6)];
    let r = hamilton_jacobi_residual(&path, 0.5, &pts, &HjOptions::default()).unwrap();
    assert!(r < 1e-10);
}

#[test]
fn comparison_certificate_small_grid() {
    let path = support_interp_path(&disc_spec(), &ellipse_spec(0.05)).unwrap();
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
    let cert = verify_comparison(&path, &hopts, &lopts).unwrap();
    assert!(cert.l_h > 0.0 && cert.l_b > 0.0);
    assert!(cert.pass && cert.chain_holds, "{cert:?}");
    let h = hofer_length(&path, &hopts).unwrap();
    assert!(h.bound_excess <= 1e-9);
    let b = bracket_db(&path, &lopts).unwrap();
    assert!(b.lower <= b.upper * (1.0 + 1e-6) && b.lower > 0.0, "{b:?}");
}

#[test]
fn translation_certificate() {
    let path = translation_path(&disc_table(), Vec2::new(0.0, 0.2));
    let cert = verify_comparison(
        &path,
        &HoferOptions {
            s_nodes: 5,
            q_grid: 16,
            p_grid: 9,
            ..HoferOptions::default()
        },
        &small_length(),
    )
    .unwrap();
    assert_eq!(cert.l_h, 0.0);
    assert_eq!(cert.ratio, 0.0);
    assert!(cert.pass);
}

fn cosine_samples(amp: f64, k: f64) -> Vec<f64> {
    (0..256).map(|i| amp * (TAU * k * i as f64 / 256.0).cos()).collect()
}

#[test]
fn zero_perturbation() {
    let (path, bound) = normal_perturbation_path(&disc_table(), &vec![0.0; 256]).unwrap();
    assert_eq!(bound.bound, 0.0);
    let len = path_geometric_length(&path, &small_length()).unwrap();
    assert!(len.value < 1e-9);
}

#[test]
fn perturbation_bound_holds() {
    let (path, bound) = normal_perturbation_path(&disc_table(), &cosine_samples(0.01, 1.0)).unwrap();
    let b = bracket_db(&path, &small_length()).unwrap();
    assert!(b.upper > 0.0);
    assert!(b.upper <= bound.bound, "{} > {}", b.upper, bound.bound);
    assert!(bound.constant.is_finite());
}

#[test]
fn large_perturbation_is_rejected() {
    let e = normal_perturbation_path(&disc_table(), &vec![0.5; 256]).unwrap_err();
    assert!(matches!(e, Error::PerturbationTooLarge(_)));
}
