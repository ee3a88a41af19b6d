use super::{Bar, Barcode};

/// `L∞` distance between two finite bars as points of the plane.
fn pair_cost(a: &Bar, b: &Bar) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

/// Cost of matching a finite bar to the diagonal.
fn diagonal_cost(a: &Bar) -> f64 {
    0.5 * (a.death - a.birth)
}

/// Cost matrix of the augmented bipartite problem: left = `a ∪ diag(b)`, right = `b ∪ diag(a)`.
/// `None` marks forbidden edges.
fn augmented(a: &[Bar], b: &[Bar]) -> Vec<Vec<Option<f64>>> {
    let (na, nb) = (a.len(), b.len());
    let k = na + nb;
    let mut c = vec![vec![None; k]; k];
    for i in 0..na {
        for j in 0..nb {
            c[i][j] = Some(pair_cost(&a[i], &b[j]));
        }
        c[i][nb + i] = Some(diagonal_cost(&a[i]));
    }
    for j in 0..nb {
        c[na + j][j] = Some(diagonal_cost(&b[j]));
        for i in 0..na {
            c[na + j][nb + i] = Some(0.0);
        }
    }
    c
}

/// Hopcroft-Karp maximum matching on a bipartite graph given by adjacency lists.
fn max_matching(adj: &[Vec<usize>], right: usize) -> usize {
    let left = adj.len();
    const FREE: usize = usize::MAX;
    let mut match_l = vec![FREE; left];
    let mut match_r = vec![FREE; right];
    let mut dist = vec![0usize; left];
    let mut size = 0;
    loop {
        // Breadth-first layering from free left vertices.
        let mut queue = std::collections::VecDeque::new();
        for u in 0..left {
            if match_l[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == FREE {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            return size;
        }
        fn augment(
            u: usize,
            adj: &[Vec<usize>],
            match_l: &mut [usize],
            match_r: &mut [usize],
            dist: &mut [usize],
        ) -> bool {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == usize::MAX || (dist[w] == dist[u] + 1 && augment(w, adj, match_l, match_r, dist)) {
                    match_l[u] = v;
                    match_r[v] = u;
                    return true;
                }
            }
            dist[u] = usize::MAX;
            false
        }
        for u in 0..left {
            if match_l[u] == FREE && augment(u, adj, &mut match_l, &mut match_r, &mut dist) {
                size += 1;
            }
        }
    }
}

fn perfect_at(costs: &[Vec<Option<f64>>], r: f64) -> bool {
    let k = costs.len();
    let adj: Vec<Vec<usize>> = costs
        .iter()
        .map(|row| (0..k).filter(|&j| row[j].is_some_and(|c| c <= r)).collect())
        .collect();
    max_matching(&adj, k) == k
}

fn split(bars: &[Bar], degree: usize) -> (Vec<Bar>, Vec<f64>) {
    let mut finite = Vec::new();
    let mut infinite = Vec::new();
    for b in bars.iter().filter(|b| b.degree == degree) {
        if b.death.is_finite() {
            finite.push(*b);
        } else {
            infinite.push(b.birth);
        }
    }
    infinite.sort_by(f64::total_cmp);
    (finite, infinite)
}

/// Essential bars match in birth order; `+∞` if their counts differ.
fn infinite_part(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Bottleneck distance between the degree-`degree` parts of two barcodes: binary search over
/// the candidate costs with a Hopcroft-Karp feasibility test.
pub fn bottleneck_distance(a: &Barcode, b: &Barcode, degree: usize) -> f64 {
    let (fa, ia) = split(&a.bars, degree);
    let (fb, ib) = split(&b.bars, degree);
    let inf = infinite_part(&ia, &ib);
    if !inf.is_finite() {
        return inf;
    }
    let costs = augmented(&fa, &fb);
    let mut candidates: Vec<f64> = costs.iter().flatten().flatten().copied().collect();
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_at(&costs, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    inf.max(candidates[lo])
}

/// Exhaustive minimum over all perfect matchings of the augmented problem.
/// Factorial cost; intended for barcodes with a handful of bars.
pub fn bottleneck_brute_force(a: &Barcode, b: &Barcode, degree: usize) -> f64 {
    let (fa, ia) = split(&a.bars, degree);
    let (fb, ib) = split(&b.bars, degree);
    let inf = infinite_part(&ia, &ib);
    if !inf.is_finite() {
        return inf;
    }
    let costs = augmented(&fa, &fb);
    let k = costs.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    fn visit(i: usize, perm: &mut Vec<usize>, costs: &[Vec<Option<f64>>], acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if i == perm.len() {
            *best = acc;
            return;
        }
        for j in i..perm.len() {
            perm.swap(i, j);
            if let Some(c) = costs[i][perm[i]] {
                visit(i + 1, perm, costs, acc.max(c), best);
            }
            perm.swap(i, j);
        }
    }
    visit(0, &mut perm, &costs, 0.0, &mut best);
    if k == 0 {
        best = 0.0;
    }
    inf.max(best)
}
