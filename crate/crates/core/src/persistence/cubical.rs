use std::collections::HashMap;

use super::{Bar, Barcode, GridFunction};

/// Periodic cubical complex of a grid function: cell `(v, S)` is the cube spanned by
/// vertex `v` and the unit steps along the axes in the bit mask `S`.
struct Complex<'a> {
    g: &'a GridFunction,
    strides: Vec<usize>,
}

impl Complex<'_> {
    fn step(&self, v: usize, axis: usize) -> usize {
        let m = self.g.m;
        let s = self.strides[axis];
        let digit = (v / s) % m;
        if digit + 1 == m {
            v + s - m * s
        } else {
            v + s
        }
    }

    fn value(&self, cell: usize) -> f64 {
        let n = self.g.n;
        let (v, mask) = (cell >> n, cell & ((1 << n) - 1));
        let mut best = f64::NEG_INFINITY;
        // Every vertex of the cube: subsets of the mask.
        let mut sub = mask;
        loop {
            let mut w = v;
            for axis in 0..n {
                if sub & (1 << axis) != 0 {
                    w = self.step(w, axis);
                }
            }
            best = best.max(self.g.values[w]);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
        best
    }

    fn boundary(&self, cell: usize, out: &mut Vec<usize>) {
        let n = self.g.n;
        let (v, mask) = (cell >> n, cell & ((1 << n) - 1));
        out.clear();
        for axis in 0..n {
            if mask & (1 << axis) != 0 {
                let face = mask & !(1 << axis);
                out.push((v << n) | face);
                out.push((self.step(v, axis) << n) | face);
            }
        }
    }
}

/// Symmetric difference of two sorted index lists.
fn add_columns(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Lower-star barcode with ties broken by `tie(cell)` after value and dimension.
pub(super) fn barcode_with_ties<F: Fn(usize) -> usize>(g: &GridFunction, tie: F) -> Barcode {
    let n = g.n;
    let strides: Vec<usize> = (0..n).map(|k| g.m.pow((n - 1 - k) as u32)).collect();
    let cx = Complex { g, strides };
    let cells = g.values.len() << n;
    let values: Vec<f64> = (0..cells).map(|c| cx.value(c)).collect();
    let dim = |c: usize| (c & ((1 << n) - 1)).count_ones() as usize;
    let mut order: Vec<usize> = (0..cells).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .total_cmp(&values[b])
            .then(dim(a).cmp(&dim(b)))
            .then(tie(a).cmp(&tie(b)))
    });
    let mut rank = vec![0usize; cells];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    let mut paired = vec![false; cells];
    let mut negative = vec![false; cells];
    let mut bars = Vec::new();
    let mut faces = Vec::new();
    let mut scratch = Vec::new();
    for d in (1..=n).rev() {
        // Reduced columns of this dimension keyed by their pivot (lowest rank is last).
        let mut by_low: HashMap<usize, Vec<usize>> = HashMap::new();
        for &c in order.iter().filter(|&&c| dim(c) == d) {
            if paired[rank[c]] {
                continue;
            }
            cx.boundary(c, &mut faces);
            let mut col: Vec<usize> = faces.iter().map(|&f| rank[f]).collect();
            // Faces are distinct because the grid has at least 3 points per axis.
            col.sort_unstable();
            while let Some(&low) = col.last() {
                match by_low.get(&low) {
                    Some(other) => {
                        add_columns(&col, other, &mut scratch);
                        std::mem::swap(&mut col, &mut scratch);
                    }
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                paired[low] = true;
                negative[rank[c]] = true;
                let birth = values[order[low]];
                let death = values[c];
                if birth < death {
                    bars.push(Bar {
                        degree: d - 1,
                        birth,
                        death,
                    });
                }
                by_low.insert(low, col);
            }
        }
    }
    for (r, &c) in order.iter().enumerate() {
        if !paired[r] && !negative[r] {
            bars.push(Bar {
                degree: dim(c),
                birth: values[c],
                death: f64::INFINITY,
            });
        }
    }
    Barcode::new(n, bars)
}
