//! Small numerical building blocks: Gauss-Legendre panels, composite Simpson,
//! golden-section refinement and cubic Hermite interpolation.

/// 8-point Gauss-Legendre abscissae on [-1, 1] (positive half).
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Integrates `f` over `[a, b]` with one 8-point Gauss-Legendre panel.
#[inline]
pub fn gauss8<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..4 {
        let dx = h * GL8_X[i];
        acc += GL8_W[i] * (f(c - dx) + f(c + dx));
    }
    acc * h
}

/// [`gauss8`] for a vector-valued integrand.
#[inline]
pub fn gauss8_vec<F: FnMut(f64) -> crate::geom::Vec2>(a: f64, b: f64, mut f: F) -> crate::geom::Vec2 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = crate::geom::Vec2::ZERO;
    for i in 0..4 {
        let dx = h * GL8_X[i];
        acc += (f(c - dx) + f(c + dx)) * GL8_W[i];
    }
    acc * h
}

/// Integrates `f` over `[a, b]` with `panels` Gauss-Legendre panels.
pub fn gauss8_composite<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            gauss8(lo, lo + h, &mut f)
        })
        .sum()
}

/// Adaptive Gauss-Legendre integration with absolute tolerance `tol`.
pub fn adaptive<F: Fn(f64) -> f64>(a: f64, b: f64, tol: f64, f: &F) -> f64 {
    fn rec<F: Fn(f64) -> f64>(a: f64, b: f64, whole: f64, tol: f64, depth: u32, f: &F) -> f64 {
        let m = 0.5 * (a + b);
        let left = gauss8(a, m, f);
        let right = gauss8(m, b, f);
        if depth == 0 || (left + right - whole).abs() <= tol {
            left + right
        } else {
            rec(a, m, left, 0.5 * tol, depth - 1, f) + rec(m, b, right, 0.5 * tol, depth - 1, f)
        }
    }
    let whole = gauss8(a, b, f);
    rec(a, b, whole, tol, 40, f)
}

/// Composite Simpson weights for `n` (odd, >= 3) equally spaced nodes on an interval of length `len`.
pub fn simpson_weights(n: usize, len: f64) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd node count >= 3");
    let h = len / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// Composite Simpson sum of already-sampled values on `[a, b]`.
pub fn simpson(values: &[f64], a: f64, b: f64) -> f64 {
    simpson_weights(values.len(), b - a)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Simpson value together with the difference against the half-resolution rule.
pub fn simpson_with_error(values: &[f64], a: f64, b: f64) -> (f64, f64) {
    let full = simpson(values, a, b);
    let n = values.len();
    if n >= 5 && (n - 1) % 4 == 0 {
        let coarse: Vec<f64> = values.iter().step_by(2).copied().collect();
        let half = simpson(&coarse, a, b);
        (full, (full - half).abs())
    } else {
        (full, f64::NAN)
    }
}

/// Maximizes `f` on `[a, b]` by golden-section search; returns `(x, f(x))`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut a: f64, mut b: f64, iters: usize, mut f: F) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Cubic Hermite interpolation on `[x0, x1]` from endpoint values and slopes.
#[inline]
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

/// Index `j` with `xs[j] <= x < xs[j + 1]`, clamped to the valid panel range.
#[inline]
pub fn locate(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_is_exact_for_degree_15() {
        let v = gauss8(-1.0, 2.0, |x| x.powi(15) - 3.0 * x.powi(4));
        let exact = (2f64.powi(16) - 1.0) / 16.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
    }

    #[test]
    fn adaptive_handles_kinks() {
        let v = adaptive(-1.0, 2.0, 1e-13, &|x: f64| (x - 0.3).abs());
        let exact = 0.5 * 1.3 * 1.3 + 0.5 * 1.7 * 1.7;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let vals: Vec<f64> = xs.iter().map(|x| x * x * x - x).collect();
        let (v, err) = simpson_with_error(&vals, 0.0, 1.0);
        assert!((v - (0.25 - 0.5)).abs() < 1e-15);
        assert!(err < 1e-15);
    }

    #[test]
    fn golden_finds_interior_max() {
        let (x, fx) = golden_max(0.0, 2.0, 80, |x| -(x - 1.234).powi(2));
        assert!((x - 1.234).abs() < 1e-7);
        assert!(fx <= 0.0);
    }

    #[test]
    fn locate_clamps() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(locate(&xs, -1.0), 0);
        assert_eq!(locate(&xs, 1.5), 1);
        assert_eq!(locate(&xs, 3.0), 2);
        assert_eq!(locate(&xs, 9.0), 2);
    }
}
