//! Acceptance suite: one pass/fail line per criterion, each with its pinned tolerance and
//! time limit. Run with `cargo test -p hb-core --test acceptance`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hb_core::billiard::{forward_map, jacobian_det, AnnulusPoint};
use hb_core::curves::{build_fourier_table, disc_table, random_fourier_spec, FourierSupportSpec, TableCurve};
use hb_core::dynamics::{
    chord_data, find_periodic_orbits, functional_gap, orbit_distance, phase_space_orbits, reconstruct_table,
};
use hb_core::geom::{circle_dist, Vec2};
use hb_core::homotopy::{
    bracket_db, hamilton_jacobi_residual, support_interp_path, translation_path, verify_comparison, HjOptions,
    HoferOptions, LengthOptions, TablePath,
};
use hb_core::persistence::{
    bottleneck_brute_force, bottleneck_distance, sample_orbit_functional, stability_check, sublevel_barcode,
    torus_betti, Bar, Barcode, GridFunction,
};
use hb_core::smoothing::{cauchy_tail, dyadic_scales, family_with_width, independence_fit, PolygonSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DISC_TOL: f64 = 1e-10;
const DET_TOL: f64 = 1e-6;
const HOFER_SLACK: f64 = 1.01;
const HJ_TOL: f64 = 1e-3;
const TRANSLATION_BRACKET_TOL: f64 = 1e-9;
const AFFINE_TOL: f64 = 1e-9;
const FINAL_INCREMENT_FRACTION: f64 = 1e-3;
const SLOPE_RANGE: (f64, f64) = (0.9, 1.1);
const ORBIT_AGREEMENT_TOL: f64 = 1e-8;
const ACTION_TOL: f64 = 1e-9;
const ROUND_TRIP_TOL: f64 = 1e-6;
const CAUCHY_K: usize = 12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let took = start.elapsed();
    let in_time = took < limit;
    let pass = o.pass && in_time;
    println!(
        "[{}] {id:>2} {name}: {}; {:.2} s (limit {} s)",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn ellipse() -> TableCurve {
    build_fourier_table(&FourierSupportSpec::mild_ellipse(0.05)).unwrap()
}

fn disc_closed_form() -> Outcome {
    let d = disc_table();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q = rng.gen::<f64>();
        let p = rng.gen_range(-0.999..0.999);
        let y = forward_map(&d, AnnulusPoint::new(q, p)).unwrap();
        let expect_q = (q + p.acos() / PI).rem_euclid(1.0);
        worst = worst.max(circle_dist(y.q, expect_q)).max((y.p - p).abs());
    }
    outcome(worst < DISC_TOL, format!("max error {worst:.2e} over 1000 points (tol {DISC_TOL:e})"))
}

fn symplecticity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let fourier = build_fourier_table(&random_fourier_spec(&mut rng, 4, 0.3)).unwrap();
    let mut worst = [0.0f64; 2];
    for (k, t) in [disc_table(), fourier].iter().enumerate() {
        for i in 0..20 {
            for j in 0..20 {
                let x = AnnulusPoint::new(i as f64 / 20.0, -0.95 + 1.9 * j as f64 / 19.0);
                worst[k] = worst[k].max((jacobian_det(t, x, 1e-6).unwrap() - 1.0).abs());
            }
        }
    }
    outcome(
        worst.iter().all(|&w| w < DET_TOL),
        format!("max |det Dψ - 1| disc {:.2e}, fourier {:.2e} (tol {DET_TOL:e})", worst[0], worst[1]),
    )
}

/// 20 seeded support-interpolation paths and the translation paths of the suite.
fn constructed_paths() -> (Vec<Box<dyn TablePath>>, Vec<Box<dyn TablePath>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut interp: Vec<Box<dyn TablePath>> = Vec::new();
    while interp.len() < 20 {
        let a = if interp.len() % 2 == 0 {
            FourierSupportSpec::circle(1.0)
        } else {
            random_fourier_spec(&mut rng, 4, 0.3)
        };
        let b = random_fourier_spec(&mut rng, 4, 0.3);
        // Interpolants of two valid tables stay valid (ρ is linear in the coefficients).
        interp.push(Box::new(support_interp_path(&a, &b).unwrap()));
    }
    let t = build_fourier_table(&random_fourier_spec(&mut rng, 4, 0.3)).unwrap();
    let translations: Vec<Box<dyn TablePath>> = vec![
        Box::new(translation_path(&disc_table(), Vec2::new(0.1, 0.0))),
        Box::new(translation_path(&disc_table(), Vec2::new(-0.03, 0.04))),
        Box::new(translation_path(&ellipse(), Vec2::new(0.0, 0.2))),
        Box::new(translation_path(&t, Vec2::new(0.05, -0.07))),
    ];
    (interp, translations)
}

fn hofer_certificates() -> Outcome {
    let (interp, translations) = constructed_paths();
    let hopts = HoferOptions {
        s_nodes: 17,
        q_grid: 128,
        p_grid: 63,
        ..HoferOptions::default()
    };
    let lopts = LengthOptions {
        s_nodes: 17,
        q_grid: 1024,
    };
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for p in interp.iter().chain(&translations) {
        let c = verify_comparison(p.as_ref(), &hopts, &lopts).unwrap();
        ok &= c.l_h <= 4.0 * c.l_b * HOFER_SLACK;
        if c.l_b > 0.0 {
            worst = worst.max(c.l_h / c.l_b);
        }
    }
    outcome(
        ok,
        format!("{} paths, max l_H/l_B = {worst:.6} (limit 4 × {HOFER_SLACK})", interp.len() + translations.len()),
    )
}

fn hamiltonian_lemma() -> Outcome {
    let path = support_interp_path(&FourierSupportSpec::circle(1.0), &FourierSupportSpec::mild_ellipse(0.05)).unwrap();
    let mut monotone = true;
    let mut last: f64 = 0.0;
    for s in [0.25, 0.5, 0.75] {
        let slice = path.slice(s).unwrap();
        for sign in [1.0, -1.0] {
            for i in 0..32 {
                let big_q = i as f64 / 32.0;
                let mut prev = f64::INFINITY;
                for k in 2..=6 {
                    let h = slice.hamiltonian(big_q, sign * (1.0 - 10f64.powi(-k))).unwrap().abs();
                    monotone &= h <= prev;
                    prev = h;
                }
                last = last.max(prev);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let points: Vec<AnnulusPoint> = (0..100)
        .map(|_| AnnulusPoint::new(rng.gen::<f64>(), rng.gen_range(-0.9..0.9)))
        .collect();
    let residual = |h: f64| hamilton_jacobi_residual(&path, 0.5, &points, &HjOptions { h, ..HjOptions::default() }).unwrap();
    let r = residual(HjOptions::default().h);
    let steps = [4e-2, 2e-2, 1e-2];
    let rs: Vec<f64> = steps.iter().map(|&h| residual(h)).collect();
    let orders: Vec<f64> = rs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let second_order = orders.iter().all(|&o| (1.8..=2.2).contains(&o));
    outcome(
        monotone && r < HJ_TOL && second_order,
        format!(
            "|H| decreasing in k = 2..6: {monotone} (|H| ≤ {last:.2e} at k = 6); HJ residual {r:.2e} at 100 points (tol {HJ_TOL:e}); observed orders {:.3}, {:.3} (range [1.8, 2.2])",
            orders[0], orders[1]
        ),
    )
}

fn db_brackets() -> Outcome {
    let (interp, translations) = constructed_paths();
    let lopts = LengthOptions {
        s_nodes: 17,
        q_grid: 1024,
    };
    let mut ordered = true;
    for p in interp.iter().chain(&translations) {
        match bracket_db(p.as_ref(), &lopts) {
            Ok(b) => ordered &= b.lower <= b.upper * (1.0 + 1e-6),
            Err(_) => ordered = false,
        }
    }
    let mut tight: f64 = 0.0;
    for p in &translations {
        let b = bracket_db(p.as_ref(), &lopts).unwrap();
        tight = tight.max((b.upper - b.lower).abs());
    }
    outcome(
        ordered && tight < TRANSLATION_BRACKET_TOL,
        format!("lower ≤ upper on all {} paths: {ordered}; translation |upper - lower| ≤ {tight:.2e} (tol {TRANSLATION_BRACKET_TOL:e})", interp.len() + translations.len()),
    )
}

fn smoothing() -> Outcome {
    let sq = PolygonSpec::unit_square();
    let w = sq.default_width();
    let fam = family_with_width(&sq, w).unwrap();
    // The affine law from the corner defects, recomputed here from the profiles.
    let defects: f64 = fam.profiles().iter().map(|p| p.length_defect()).sum();
    let affine = (1..=32)
        .map(|i| {
            let s = i as f64 / 32.0;
            (fam.length_by_quadrature(s) - (fam.polygon_length() - s * defects)).abs()
        })
        .fold(0.0, f64::max);
    let tail = cauchy_tail(&fam, 1.0, CAUCHY_K).unwrap();
    // Successive differences of the partial sums are the increments.
    let decreasing = tail.increments.windows(2).all(|d| d[1] < d[0]);
    let total = *tail.partial_sums.last().unwrap();
    let final_fraction = tail.increments.last().unwrap() / total;
    let other = family_with_width(&sq, w / 2.0).unwrap();
    let fit = independence_fit(&fam, &other, &dyadic_scales()).unwrap();
    let slope_ok = (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&fit.slope);
    outcome(
        affine < AFFINE_TOL && decreasing && final_fraction < FINAL_INCREMENT_FRACTION && slope_ok,
        format!(
            "affine residual {affine:.2e} (tol {AFFINE_TOL:e}); K = {CAUCHY_K} differences decreasing: {decreasing}, final increment {final_fraction:.2e} of total (tol {FINAL_INCREMENT_FRACTION:e}); independence slope {:.4} (range [{}, {}])",
            fit.slope, SLOPE_RANGE.0, SLOPE_RANGE.1
        ),
    )
}

/// `max_i ‖a(q_i) - b(q_i)‖` over a grid containing every gap grid point.
fn grid_c0(a: &TableCurve, b: &TableCurve, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let q = i as f64 / n as f64;
            a.position(q).dist(b.position(q))
        })
        .fold(0.0, f64::max)
}

fn functional_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let a = build_fourier_table(&random_fourier_spec(&mut rng, 4, 0.3)).unwrap();
        let b = build_fourier_table(&random_fourier_spec(&mut rng, 4, 0.3)).unwrap();
        let c0 = grid_c0(&a, &b, 8192);
        for (n, grid) in [(2, 64), (3, 32)] {
            match functional_gap(&a, &b, n, grid) {
                Ok(r) => {
                    let bound = 2.0 * n as f64 * c0;
                    ok &= r.gap <= bound;
                    worst = worst.max(r.gap / bound);
                }
                Err(_) => ok = false,
            }
        }
    }
    outcome(ok, format!("10 pairs, n = 2, 3: max gap / (2n·c0) = {worst:.4} (limit 1)"))
}

fn orbit_agreement() -> Outcome {
    let e = ellipse();
    let mut worst: f64 = 0.0;
    let mut found = true;
    for n in [2, 3] {
        let torus = find_periodic_orbits(&e, n, 16, 8).unwrap();
        let phase = phase_space_orbits(&e, n).unwrap();
        found &= !torus.is_empty() && !phase.is_empty();
        for o in &phase {
            worst = worst.max(torus.iter().map(|c| orbit_distance(&c.qs, &o.qs)).fold(f64::INFINITY, f64::min));
        }
        for c in &torus {
            worst = worst.max(phase.iter().map(|o| orbit_distance(&c.qs, &o.qs)).fold(f64::INFINITY, f64::min));
        }
    }
    let d = disc_table();
    let a2 = find_periodic_orbits(&d, 2, 8, 8).unwrap()[0].action;
    let a3 = find_periodic_orbits(&d, 3, 8, 8).unwrap()[0].action;
    let e2 = (a2 - 2.0 / PI).abs();
    let e3 = (a3 - 3.0 * 3f64.sqrt() / (2.0 * PI)).abs();
    outcome(
        found && worst < ORBIT_AGREEMENT_TOL && e2 < ACTION_TOL && e3 < ACTION_TOL,
        format!(
            "torus vs phase-space mismatch {worst:.2e} (tol {ORBIT_AGREEMENT_TOL:e}); disc action errors {e2:.2e}, {e3:.2e} (tol {ACTION_TOL:e})"
        ),
    )
}

fn random_bars(rng: &mut ChaCha8Rng, k: usize) -> Vec<Bar> {
    (0..k)
        .map(|_| {
            let birth = rng.gen::<f64>();
            let death = if rng.gen_bool(0.2) { f64::INFINITY } else { birth + rng.gen_range(0.0..0.6) };
            Bar { degree: 0, birth, death }
        })
        .filter(|b| b.birth < b.death)
        .collect()
}

fn persistence() -> Outcome {
    let e = ellipse();
    let mut betti_ok = true;
    let mut grids = vec![
        sample_orbit_functional(&disc_table(), 2, 64).unwrap(),
        sample_orbit_functional(&e, 2, 64).unwrap(),
        sample_orbit_functional(&e, 3, 16).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    grids.push(GridFunction::new(2, 10, (0..100).map(|_| rng.gen_range(0..5) as f64).collect()).unwrap());
    for g in &grids {
        betti_ok &= sublevel_barcode(g).infinite_counts() == torus_betti(g.n);
    }
    let mut agree = 0;
    let trials = 500;
    for _ in 0..trials {
        let ka = rng.gen_range(0..=6);
        let kb = rng.gen_range(0..=6);
        let a = Barcode::new(0, random_bars(&mut rng, ka));
        let b = Barcode::new(0, random_bars(&mut rng, kb));
        if bottleneck_distance(&a, &b, 0) == bottleneck_brute_force(&a, &b, 0) {
            agree += 1;
        }
    }
    let r = stability_check(&disc_table(), &e, 2, 64);
    let stable = match &r {
        Ok(r) => r.bottleneck.iter().all(|&b| b <= r.gap + r.slack),
        Err(_) => false,
    };
    let detail = match &r {
        Ok(r) => format!("bottleneck {:?} ≤ gap {:.4e} + slack {:.4e}", r.bottleneck.iter().map(|b| format!("{b:.3e}")).collect::<Vec<_>>(), r.gap, r.slack),
        Err(e) => format!("stability error: {e}"),
    };
    outcome(
        betti_ok && agree == trials && stable,
        format!("Betti counts on {} barcodes: {betti_ok}; brute force agrees {agree}/{trials}; {detail}", grids.len()),
    )
}

fn reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let t = build_fourier_table(&random_fourier_spec(&mut rng, 6, 0.5)).unwrap();
    let m = 128;
    let rec = reconstruct_table(&chord_data(&t, m).unwrap()).unwrap();
    // Rigid motion sending γ(0) to the origin and γ(1/2) to the positive x-axis.
    let s = t.position(0.0);
    let r = t.position(0.5);
    let u = (r - s) / (r - s).norm();
    let align = |x: Vec2| {
        let d = x - s;
        Vec2::new(d.x * u.x + d.y * u.y, -d.x * u.y + d.y * u.x)
    };
    let err = rec.iter().map(|&(q, p)| align(t.position(q)).dist(p)).fold(0.0, f64::max);
    outcome(err < ROUND_TRIP_TOL, format!("{} points, max aligned error {err:.2e} (tol {ROUND_TRIP_TOL:e})", rec.len()))
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hb");
    let root = tempfile::tempdir().unwrap();
    let runs: [(&str, Option<&str>); 4] = [("a", None), ("b", None), ("t1", Some("1")), ("t8", Some("8"))];
    let mut outputs = Vec::new();
    for (name, threads) in runs {
        let dir = root.path().join(name);
        let mut cmd = Command::new(bin);
        cmd.args(["verify", "all", "--seed", "7", "--out"]).arg(&dir);
        if let Some(t) = threads {
            cmd.args(["--threads", t]);
        }
        let out = cmd.output().unwrap();
        if out.status.code() != Some(0) {
            return outcome(false, format!("run {name} exited with {:?}", out.status.code()));
        }
        outputs.push((out.stdout, read_dir(&dir)));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    let files = outputs[0].1.len();
    outcome(same, format!("4 runs (twice default, --threads 1, --threads 8): stdout and {files} artifacts byte-identical: {same}"))
}

fn main() {
    let results = [
        run(1, "disc closed form", secs(1), disc_closed_form),
        run(2, "symplecticity", secs(5), symplecticity),
        run(3, "Hofer vs geometric length", secs(120), hofer_certificates),
        run(4, "Hamiltonian boundary decay and HJ residual", secs(60), hamiltonian_lemma),
        run(5, "d_B bracket", secs(10), db_brackets),
        run(6, "polygon smoothing", secs(300), smoothing),
        run(7, "orbit functional bound", secs(60), functional_bound),
        run(8, "orbit oracle agreement", secs(60), orbit_agreement),
        run(9, "persistence", secs(120), persistence),
        run(10, "reconstruction round trip", secs(10), reconstruction),
        run(11, "determinism", secs(600), determinism),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
