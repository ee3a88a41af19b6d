use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};

use super::{BarcodeCmd, Global, HoferCmd, MapCmd, OrbitsCmd, Outcome, PolygonCmd, TableCmd};
use crate::billiard::{forward_map, inverse_map, iterate, jacobian_det, AnnulusPoint};
use crate::curves::{parametrization_defects, polyline_length, TableCurve};
use crate::dynamics::{
    almost_periodicity_experiment, chord_data, find_periodic_orbits, functional_gap, reconstruct_table,
    round_trip_error, align_two_anchors, ChordData,
};
use crate::error::{Error, Result};
use crate::homotopy::{
    bracket_db, hamilton_jacobi_residual, hofer_length, path_geometric_length, verify_comparison, HjOptions,
    HoferOptions, LengthOptions, TablePath,
};
use crate::io::{load_json, write_csv, write_grid, write_json, PathSpec, TableSpec};
use crate::persistence::{
    bottleneck_distance, sample_orbit_functional, stability_check, sublevel_barcode, torus_betti, Barcode,
};
use crate::smoothing::{cauchy_tail, dyadic_scales, family_speed, family_with_width, independence_fit, SmoothingFamily};

fn table_spec(arg: Option<&String>, flag: &str) -> Result<TableSpec> {
    let arg = arg.ok_or_else(|| Error::InvalidInput(format!("--{flag} is required")))?;
    load_json(arg)
}

fn load_table(g: &Global) -> Result<TableCurve> {
    table_spec(g.table.as_ref(), "table")?.build()
}

fn load_other(g: &Global) -> Result<TableCurve> {
    table_spec(g.other.as_ref(), "other")?.build()
}

fn load_path(g: &Global) -> Result<Box<dyn TablePath>> {
    let arg = g.path.as_ref().ok_or_else(|| Error::InvalidInput("--path is required".into()))?;
    load_json::<PathSpec>(arg)?.build()
}

fn out_dir(g: &Global) -> Result<PathBuf> {
    fs::create_dir_all(&g.out).map_err(|e| Error::Io(format!("{}: {e}", g.out.display())))?;
    Ok(g.out.clone())
}

fn file(g: &Global, name: &str) -> Result<(PathBuf, String)> {
    let p = out_dir(g)?.join(name);
    let shown = p.display().to_string();
    Ok((p, shown))
}

fn positive(v: Option<usize>, default: usize, flag: &str) -> Result<usize> {
    match v {
        Some(0) => Err(Error::InvalidInput(format!("--{flag} must be positive"))),
        Some(x) => Ok(x),
        None => Ok(default),
    }
}

pub(super) fn table(g: &Global, cmd: &TableCmd) -> Result<Outcome> {
    let t = load_table(g)?;
    match cmd {
        TableCmd::Inspect => {
            let n = positive(g.grid_q, 4096, "grid-q")?;
            let curv: Vec<f64> = (0..n).map(|i| t.curvature(i as f64 / n as f64)).collect();
            let (kmin, kmax) = curv.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &k| (a.0.min(k), a.1.max(k)));
            let (tangent, period) = parametrization_defects(&t, n);
            let len = polyline_length(&t, n);
            let m = t.marked_point();
            let c = t.centroid();
            Ok(Outcome::ok(
                json!({
                    "kind": t.kind(),
                    "strictly_convex": t.is_strictly_convex(),
                    "polyline_length": len,
                    "marked_point": [m.x, m.y],
                    "centroid": [c.x, c.y],
                    "min_curvature": kmin,
                    "max_curvature": kmax,
                    "tangent_defect": tangent,
                    "periodicity_defect": period,
                    "grid": n,
                }),
                format!("{:?} table, polyline length {len:.12}, curvature in [{kmin:.6}, {kmax:.6}]", t.kind()),
            ))
        }
        TableCmd::Sample => {
            let n = positive(g.grid_q, 256, "grid-q")?;
            let rows: Vec<[f64; 6]> = (0..n)
                .map(|i| {
                    let q = i as f64 / n as f64;
                    let f = t.frame(q);
                    [q, f.position.x, f.position.y, f.tangent.x, f.tangent.y, f.curvature]
                })
                .collect();
            let (p, shown) = file(g, "table_sample.csv")?;
            write_csv(&p, &["q", "x", "y", "tx", "ty", "curvature"], rows.iter().map(|r| &r[..]))?;
            Ok(Outcome::ok(json!({"points": n, "file": shown}), format!("{n} samples written to {shown}")))
        }
    }
}

pub(super) fn map(g: &Global, cmd: &MapCmd) -> Result<Outcome> {
    let t = load_table(g)?;
    match *cmd {
        MapCmd::Eval { q, p, inverse } => {
            let x = AnnulusPoint::new(q, p);
            let y = if inverse { inverse_map(&t, x)? } else { forward_map(&t, x)? };
            Ok(Outcome::ok(json!({"Q": y.q, "P": y.p}), format!("({q}, {p}) -> ({}, {})", y.q, y.p)))
        }
        MapCmd::Iterate { q, p, steps } => {
            let orbit = iterate(&t, AnnulusPoint::new(q, p), steps)?;
            let rows: Vec<[f64; 3]> = orbit.iter().enumerate().map(|(i, x)| [i as f64, x.q, x.p]).collect();
            let (path, shown) = file(g, "trajectory.csv")?;
            write_csv(&path, &["step", "q", "p"], rows.iter().map(|r| &r[..]))?;
            let last = orbit[orbit.len() - 1];
            Ok(Outcome::ok(
                json!({"steps": steps, "final": [last.q, last.p], "file": shown}),
                format!("{} iterates written to {shown}", steps.unsigned_abs()),
            ))
        }
        MapCmd::Portrait { steps, p_max } => {
            if !(p_max > 0.0 && p_max < 1.0) {
                return Err(Error::InvalidInput(format!("--p-max must lie in (0, 1), got {p_max}")));
            }
            let nq = positive(g.grid_q, 16, "grid-q")?;
            let np = positive(g.grid_p, 16, "grid-p")?;
            let mut rows: Vec<[f64; 4]> = Vec::new();
            let mut det_defect: f64 = 0.0;
            let mut truncated = 0;
            for i in 0..nq {
                for j in 0..np {
                    let q = i as f64 / nq as f64;
                    let p = if np == 1 { 0.0 } else { -p_max + 2.0 * p_max * j as f64 / (np - 1) as f64 };
                    let x = AnnulusPoint::new(q, p);
                    det_defect = det_defect.max((jacobian_det(&t, x, 1e-6)? - 1.0).abs());
                    let seed = (i * np + j) as f64;
                    let mut cur = x;
                    rows.push([seed, 0.0, cur.q, cur.p]);
                    for k in 1..=steps {
                        match forward_map(&t, cur) {
                            Ok(y) => cur = y,
                            Err(Error::NearGrazing { .. }) => {
                                truncated += 1;
                                break;
                            }
                            Err(e) => return Err(e),
                        }
                        rows.push([seed, k as f64, cur.q, cur.p]);
                    }
                }
            }
            let (path, shown) = file(g, "portrait.csv")?;
            write_csv(&path, &["seed", "step", "q", "p"], rows.iter().map(|r| &r[..]))?;
            let tol = g.tol.unwrap_or(1e-6);
            Ok(Outcome {
                json: json!({
                    "seeds": nq * np,
                    "steps": steps,
                    "truncated_orbits": truncated,
                    "max_det_defect": det_defect,
                    "tol": tol,
                    "file": shown,
                }),
                summary: format!("{} orbits, max |det Dψ - 1| = {det_defect:e}", nq * np),
                pass: det_defect < tol,
            })
        }
    }
}

fn hofer_options(g: &Global) -> Result<HoferOptions> {
    let d = HoferOptions::default();
    Ok(HoferOptions {
        s_nodes: odd(positive(g.grid_s, d.s_nodes, "grid-s")?)?,
        q_grid: positive(g.grid_q, d.q_grid, "grid-q")?,
        p_grid: positive(g.grid_p, d.p_grid, "grid-p")?,
        p_max: d.p_max,
    })
}

fn length_options(g: &Global) -> Result<LengthOptions> {
    let d = LengthOptions::default();
    Ok(LengthOptions {
        s_nodes: odd(positive(g.grid_s, d.s_nodes, "grid-s")?)?,
        q_grid: positive(g.grid_q, d.q_grid, "grid-q")?.max(d.q_grid),
    })
}

/// Simpson quadrature needs an odd node count of at least 3.
fn odd(n: usize) -> Result<usize> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidInput(format!("--grid-s must be odd and at least 3, got {n}")));
    }
    Ok(n)
}

pub(super) fn hofer(g: &Global, cmd: &HoferCmd) -> Result<Outcome> {
    let path = load_path(g)?;
    match *cmd {
        HoferCmd::Length => {
            let lopts = length_options(g)?;
            let hopts = hofer_options(g)?;
            let lb = path_geometric_length(path.as_ref(), &lopts)?;
            let lh = hofer_length(path.as_ref(), &hopts)?;
            let bracket = bracket_db(path.as_ref(), &lopts)?;
            // The Hamiltonian on a coarse (s, Q, P) grid, for plotting.
            let mut rows: Vec<[f64; 4]> = Vec::new();
            for i in 0..=8 {
                let s = i as f64 / 8.0;
                let slice = path.slice(s)?;
                for a in 0..32 {
                    for b in 0..15 {
                        let big_q = a as f64 / 32.0;
                        let big_p = -0.875 + 0.125 * b as f64;
                        rows.push([s, big_q, big_p, slice.hamiltonian(big_q, big_p)?]);
                    }
                }
            }
            let (file_path, shown) = file(g, "hamiltonian.csv")?;
            write_csv(&file_path, &["s", "Q", "P", "H"], rows.iter().map(|r| &r[..]))?;
            Ok(Outcome::ok(
                json!({
                    "l_B": lb.value,
                    "l_B_quadrature_error": lb.quadrature_error,
                    "l_H": lh.value,
                    "l_H_quadrature_error": lh.quadrature_error,
                    "bound_excess": lh.bound_excess,
                    "d_B_bracket": bracket,
                    "grids": {"length": lopts, "hofer": hopts},
                    "file": shown,
                }),
                format!("l_B = {:.9}, l_H = {:.9}, {} <= d_B <= {:.9}", lb.value, lh.value, bracket.lower, bracket.upper),
            ))
        }
        HoferCmd::Compare => {
            let cert = verify_comparison(path.as_ref(), &hofer_options(g)?, &length_options(g)?)?;
            let pass = cert.pass;
            let summary = format!("l_H = {:.9}, l_B = {:.9}, ratio = {:.6} (limit 4)", cert.l_h, cert.l_b, cert.ratio);
            Ok(Outcome {
                json: json!({
                    "l_H": cert.l_h,
                    "l_B": cert.l_b,
                    "ratio": cert.ratio,
                    "chord_bound": cert.chord_bound,
                    "chain_holds": cert.chain_holds,
                    "grids": {"hofer": cert.hofer_grid, "length": cert.length_grid},
                    "pass": pass,
                }),
                summary,
                pass,
            })
        }
        HoferCmd::Hjresidual { s } => {
            let nq = positive(g.grid_q, 10, "grid-q")?;
            let np = positive(g.grid_p, 10, "grid-p")?;
            let points: Vec<AnnulusPoint> = (0..nq)
                .flat_map(|i| {
                    (0..np).map(move |j| {
                        let p = if np == 1 { 0.0 } else { -0.9 + 1.8 * j as f64 / (np - 1) as f64 };
                        AnnulusPoint::new((i as f64 + 0.5) / nq as f64, p)
                    })
                })
                .collect();
            let base = HjOptions::default();
            let fine = hamilton_jacobi_residual(path.as_ref(), s, &points, &base)?;
            // Step halving from coarse steps, where the O(h²) term dominates rounding.
            let steps = [4e-2, 2e-2, 1e-2];
            let halving: Vec<f64> = steps
                .iter()
                .map(|&h| hamilton_jacobi_residual(path.as_ref(), s, &points, &HjOptions { h, ..base }))
                .collect::<Result<_>>()?;
            let tol = g.tol.unwrap_or(1e-3);
            Ok(Outcome {
                json: json!({
                    "s": s,
                    "points": points.len(),
                    "h": base.h,
                    "residual": fine,
                    "halving_steps": steps,
                    "halving_residuals": halving,
                    "observed_order": (halving[1] / halving[2]).log2(),
                    "tol": tol,
                }),
                summary: format!("HJ residual {fine:e} at h = {}, observed order {:.3}", base.h, (halving[1] / halving[2]).log2()),
                pass: fine < tol,
            })
        }
    }
}

fn polygon_family(g: &Global) -> Result<SmoothingFamily> {
    match &g.table {
        Some(arg) => load_json::<TableSpec>(arg)?.family(),
        None => {
            let p = crate::smoothing::PolygonSpec::unit_square();
            family_with_width(&p, p.default_width())
        }
    }
}

pub(super) fn polygon(g: &Global, cmd: &PolygonCmd) -> Result<Outcome> {
    let fam = polygon_family(g)?;
    match *cmd {
        PolygonCmd::Family => {
            let n = positive(g.grid_s, 32, "grid-s")?;
            let rows: Vec<[f64; 5]> = (1..=n)
                .map(|i| {
                    let s = i as f64 / n as f64;
                    [s, fam.length(s), fam.length_by_quadrature(s), fam.lambda(s), family_speed(&fam, s)]
                })
                .collect();
            let residual = rows.iter().map(|r| (r[1] - r[2]).abs()).fold(0.0, f64::max);
            let (path, shown) = file(g, "family.csv")?;
            write_csv(&path, &["s", "length", "length_quadrature", "lambda", "family_speed"], rows.iter().map(|r| &r[..]))?;
            let tol = g.tol.unwrap_or(1e-9);
            Ok(Outcome {
                json: json!({
                    "polygon_length": fam.polygon_length(),
                    "deltas": fam.deltas(),
                    "sum_delta": fam.sum_delta(),
                    "affine_residual": residual,
                    "speed_bound": fam.speed_bound(),
                    "tol": tol,
                    "file": shown,
                }),
                summary: format!("L(s) = {} - s·{}, affine residual {residual:e}", fam.polygon_length(), fam.sum_delta()),
                pass: residual < tol,
            })
        }
        PolygonCmd::Cauchy { k, s0 } => {
            let tail = cauchy_tail(&fam, s0, k)?;
            let rows: Vec<[f64; 3]> = (0..=k)
                .map(|j| {
                    let done = if j == 0 { 0.0 } else { tail.partial_sums[j - 1] };
                    [tail.scales[j], tail.speeds[j], tail.tail - done]
                })
                .collect();
            let (path, shown) = file(g, "cauchy.csv")?;
            write_csv(&path, &["s", "family_speed", "tail"], rows.iter().map(|r| &r[..]))?;
            let decreasing = tail.increments.windows(2).all(|w| w[1] < w[0]);
            let last = tail.increments.last().copied().unwrap_or(0.0);
            let tol = g.tol.unwrap_or(1e-3);
            let pass = decreasing && last < tol * tail.tail;
            Ok(Outcome {
                json: json!({
                    "s0": s0,
                    "k": k,
                    "increments": tail.increments,
                    "partial_sums": tail.partial_sums,
                    "remainder": tail.remainder,
                    "tail": tail.tail,
                    "increments_decreasing": decreasing,
                    "final_increment_ratio": last / tail.tail,
                    "pass": pass,
                    "file": shown,
                }),
                summary: format!("tail integral {:.9}, final increment {last:e}", tail.tail),
                pass,
            })
        }
        PolygonCmd::Independence { width_b } => {
            let w = fam.profiles()[0].width();
            let other = family_with_width(fam.polygon(), width_b.unwrap_or(w / 2.0))?;
            let fit = independence_fit(&fam, &other, &dyadic_scales())?;
            let rows: Vec<[f64; 2]> = fit.scales.iter().zip(&fit.gaps).map(|(s, g)| [*s, *g]).collect();
            let (path, shown) = file(g, "independence.csv")?;
            write_csv(&path, &["s", "gap"], rows.iter().map(|r| &r[..]))?;
            let pass = (0.9..=1.1).contains(&fit.slope);
            Ok(Outcome {
                json: json!({
                    "scales": fit.scales,
                    "gaps": fit.gaps,
                    "slope": fit.slope,
                    "max_ratio": fit.max_ratio,
                    "pass": pass,
                    "file": shown,
                }),
                summary: format!("profile-independence gap has log-log slope {:.4}", fit.slope),
                pass,
            })
        }
    }
}

fn orbit_json(c: &crate::dynamics::PeriodicOrbitCandidate) -> Value {
    json!({
        "n": c.n,
        "qs": c.qs,
        "action": c.action,
        "residual": c.residual,
        "accepted": c.accepted,
        "winding": c.winding,
        "degenerate": c.degenerate,
        "phase_point": c.phase_point,
        "closing_error": c.closing_error,
    })
}

pub(super) fn orbits(g: &Global, cmd: &OrbitsCmd) -> Result<Outcome> {
    let t = load_table(g)?;
    match *cmd {
        OrbitsCmd::Find { n, seeds } => {
            let found = find_periodic_orbits(&t, n, seeds, g.seed)?;
            let list: Vec<Value> = found.iter().map(orbit_json).collect();
            let (path, shown) = file(g, "orbits.json")?;
            write_json(&path, &list)?;
            Ok(Outcome::ok(
                json!({"n": n, "count": found.len(), "orbits": list, "file": shown}),
                format!("{} period-{n} orbit classes", found.len()),
            ))
        }
        OrbitsCmd::Experiment { n, radius, samples } => {
            let b = load_other(g)?;
            let found = find_periodic_orbits(&t, n, 16, g.seed)?;
            let orbit = found
                .iter()
                .find(|c| !c.degenerate)
                .or(found.first())
                .ok_or_else(|| Error::NoConvergence(format!("no period-{n} orbit found")))?;
            let r = almost_periodicity_experiment(&t, &b, orbit, radius, samples, g.seed, None)?;
            let rows: Vec<[f64; 6]> = (0..r.samples.len())
                .map(|i| {
                    let (x, a, bb) = (r.samples[i], r.images_a[i], r.images_b[i]);
                    [x.q, x.p, a.q, a.p, bb.q, bb.p]
                })
                .collect();
            let (path, shown) = file(g, "experiment.csv")?;
            write_csv(&path, &["q", "p", "qa", "pa", "qb", "pb"], rows.iter().map(|r| &r[..]))?;
            Ok(Outcome::ok(
                json!({
                    "orbit": orbit_json(orbit),
                    "radius": r.radius,
                    "samples": samples,
                    "min_distance": r.min_distance,
                    "return_distance": r.return_distance,
                    "file": shown,
                }),
                format!("closest return of the perturbed cloud: {:e}", r.min_distance),
            ))
        }
        OrbitsCmd::Gap { n } => {
            let b = load_other(g)?;
            let grid = positive(g.grid_q, 64, "grid-q")?;
            let r = functional_gap(&t, &b, n, grid)?;
            Ok(Outcome::ok(
                serde_json::to_value(&r).map_err(|e| Error::Io(e.to_string()))?,
                format!("functional gap {:e} <= 2n·c0 = {:e}", r.gap, r.bound),
            ))
        }
    }
}

fn counts_by_degree(b: &Barcode) -> (Vec<usize>, Vec<usize>) {
    let inf = b.infinite_counts();
    let fin = (0..=b.n).map(|d| b.degree(d).filter(|x| x.death.is_finite()).count()).collect();
    (inf, fin)
}

pub(super) fn barcode(g: &Global, cmd: &BarcodeCmd) -> Result<Outcome> {
    match *cmd {
        BarcodeCmd::Compute { n } => {
            let t = load_table(g)?;
            let m = positive(g.grid_q, 64, "grid-q")?;
            let grid = sample_orbit_functional(&t, n, m)?;
            let b = sublevel_barcode(&grid);
            let (gp, gshown) = file(g, "grid.bin")?;
            write_grid(&gp, &grid)?;
            let (bp, bshown) = file(g, "barcode.json")?;
            write_json(&bp, &b)?;
            let (inf, fin) = counts_by_degree(&b);
            let pass = inf == torus_betti(n);
            Ok(Outcome {
                json: json!({
                    "n": n,
                    "m": m,
                    "infinite_bars": inf,
                    "finite_bars": fin,
                    "betti": torus_betti(n),
                    "barcode_file": bshown,
                    "grid_file": gshown,
                }),
                summary: format!("{} bars, essential counts {inf:?}", b.bars.len()),
                pass,
            })
        }
        BarcodeCmd::Bottleneck { ref a, ref b } => {
            let ba: Barcode = load_json(a)?;
            let bb: Barcode = load_json(b)?;
            let top = ba.n.max(bb.n);
            let d: Vec<f64> = (0..=top).map(|k| bottleneck_distance(&ba, &bb, k)).collect();
            // JSON has no infinity.
            let shown: Vec<Value> = d
                .iter()
                .map(|x| if x.is_finite() { json!(x) } else { json!("inf") })
                .collect();
            Ok(Outcome::ok(json!({"bottleneck": shown}), format!("bottleneck distances by degree: {d:?}")))
        }
        BarcodeCmd::Stability { n } => {
            let ta = load_table(g)?;
            let tb = load_other(g)?;
            let m = positive(g.grid_q, 64, "grid-q")?;
            let r = stability_check(&ta, &tb, n, m)?;
            let (p, shown) = file(g, "stability.json")?;
            write_json(&p, &r)?;
            Ok(Outcome::ok(
                json!({
                    "n": n,
                    "m": m,
                    "bottleneck": r.bottleneck,
                    "gap": r.gap,
                    "slack": r.slack,
                    "sup_grid": r.sup_grid,
                    "file": shown,
                }),
                format!("bottleneck {:?} <= gap {:e} + slack {:e}", r.bottleneck, r.gap, r.slack),
            ))
        }
    }
}

pub(super) fn reconstruct(g: &Global, chords: Option<&str>) -> Result<Outcome> {
    let m = positive(g.grid_q, 128, "grid-q")?;
    let (data, source): (ChordData, Option<TableCurve>) = match chords {
        Some(arg) => (load_json(arg)?, None),
        None => {
            let t = load_table(g)?;
            (chord_data(&t, m)?, Some(t))
        }
    };
    let rec = reconstruct_table(&data)?;
    let rows: Vec<[f64; 3]> = rec.iter().map(|(t, p)| [*t, p.x, p.y]).collect();
    let (path, shown) = file(g, "reconstruction.csv")?;
    write_csv(&path, &["t", "x", "y"], rows.iter().map(|r| &r[..]))?;
    match source {
        Some(t) => {
            let (cp, cshown) = file(g, "chords.json")?;
            write_json(&cp, &data)?;
            let err = round_trip_error(&t, m)?;
            let g0 = align_two_anchors(&t);
            let tol = g.tol.unwrap_or(1e-6);
            Ok(Outcome {
                json: json!({
                    "m": m,
                    "max_error": err,
                    "anchor_shift": [g0.shift.x, g0.shift.y],
                    "tol": tol,
                    "file": shown,
                    "chords_file": cshown,
                }),
                summary: format!("{} points rebuilt, max aligned error {err:e}", rec.len()),
                pass: err < tol,
            })
        }
        None => Ok(Outcome::ok(
            json!({"points": rec.len(), "file": shown}),
            format!("{} points rebuilt from chord data", rec.len()),
        )),
    }
}
