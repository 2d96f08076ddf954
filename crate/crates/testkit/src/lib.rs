//! Slow, independent reference computations used as test oracles.
//!
//! Nothing here depends on `catci-core`: tables are plain `Vec<u64>` in
//! first-dimension-fastest order and rows are `Vec<u32>` code tuples.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Decodes a linear cell index (first dimension fastest).
pub fn decode(mut linear: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|&d| {
            let i = linear % d;
            linear /= d;
            i
        })
        .collect()
}

/// Per-cell recount: for every cell, scan all rows and count the matches.
pub fn nested_loop_table(rows: &[Vec<u32>], vars: &[usize], dims: &[usize]) -> Vec<u64> {
    let n_cells: usize = dims.iter().product();
    (0..n_cells)
        .map(|cell| {
            let want = decode(cell, dims);
            rows.iter().filter(|row| vars.iter().zip(&want).all(|(&v, &w)| row[v] as usize == w)).count() as u64
        })
        .collect()
}

/// `(N_{x+z}, N_{+yz}, N_{++z})` for every stratum `z`, by explicit summation.
pub fn slice_sums(counts: &[u64], dims: &[usize]) -> Vec<(Vec<u64>, Vec<u64>, u64)> {
    let (dx, dy) = (dims[0], dims[1]);
    let n_strata: usize = dims[2..].iter().product();
    (0..n_strata)
        .map(|z| {
            let cell = |x: usize, y: usize| counts[x + dx * (y + dy * z)];
            let nx = (0..dx).map(|x| (0..dy).map(|y| cell(x, y)).sum()).collect();
            let ny = (0..dy).map(|y| (0..dx).map(|x| cell(x, y)).sum()).collect();
            let n = (0..dx).flat_map(|x| (0..dy).map(move |y| (x, y))).map(|(x, y)| cell(x, y)).sum();
            (nx, ny, n)
        })
        .collect()
}

/// Expected counts under conditional independence, applying the formula cell by cell.
pub fn expected_by_formula(counts: &[u64], dims: &[usize]) -> Vec<f64> {
    let sums = slice_sums(counts, dims);
    (0..counts.len())
        .map(|cell| {
            let idx = decode(cell, dims);
            let z = cell / (dims[0] * dims[1]);
            let (nx, ny, n) = &sums[z];
            if *n == 0 {
                0.0
            } else {
                nx[idx[0]] as f64 * ny[idx[1]] as f64 / *n as f64
            }
        })
        .collect()
}

pub fn g2(counts: &[u64], expected: &[f64]) -> f64 {
    2.0 * counts
        .iter()
        .zip(expected)
        .filter(|(&n, _)| n > 0)
        .map(|(&n, &e)| n as f64 * (n as f64 / e).ln())
        .sum::<f64>()
}

pub fn chi2(counts: &[u64], expected: &[f64]) -> f64 {
    counts.iter().zip(expected).filter(|(_, &e)| e > 0.0).map(|(&n, &e)| (n as f64 - e).powi(2) / e).sum()
}

/// Random rows with column `j` uniform on `0..levels[j]`.
pub fn random_rows(rng: &mut impl Rng, n: usize, levels: &[usize]) -> Vec<Vec<u32>> {
    (0..n).map(|_| levels.iter().map(|&l| rng.random_range(0..l) as u32).collect()).collect()
}

/// Random table with `total` observations spread over a random subset of cells
/// with random weights, so that tables have uneven margins and some zeros.
pub fn random_counts(rng: &mut impl Rng, dims: &[usize], total: u64) -> Vec<u64> {
    let n_cells: usize = dims.iter().product();
    let keep = rng.random_range(0.6..1.0);
    let weights: Vec<f64> =
        (0..n_cells).map(|_| if rng.random::<f64>() < keep { rng.random::<f64>() + 0.05 } else { 0.0 }).collect();
    let mut cumulative = Vec::with_capacity(n_cells);
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    let mut counts = vec![0u64; n_cells];
    if acc == 0.0 {
        counts[0] = total;
        return counts;
    }
    for _ in 0..total {
        let u = rng.random::<f64>() * acc;
        let cell = cumulative.partition_point(|&c| c <= u).min(n_cells - 1);
        counts[cell] += 1;
    }
    counts
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Adaptive quadrature of `f` on `[a, b]`: a panel is accepted when its
/// 12-point Gauss–Legendre estimate agrees with the sum over its two halves
/// to within `eps` absolute, otherwise it is bisected.
pub fn adaptive_quadrature(f: &impl Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    let rule = gauss_legendre(12);
    let panel = |lo: f64, hi: f64| {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        h * rule.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>()
    };
    let mut total = 0.0;
    let mut stack = vec![(a, b, panel(a, b), 0u32)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (left, right) = (panel(lo, mid), panel(mid, hi));
        if (left + right - whole).abs() <= eps || depth >= 50 {
            total += left + right;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    total
}

/// `ln ∫_{v0}^∞ exp(h(v)) dv` for the χ² density in the variable `v = √t`,
/// `h(v) = (k − 1) ln v − v²/2` (normalizing constants dropped).
fn ln_tail_in_v(v0: f64, dof: u64) -> f64 {
    let k = dof as f64;
    let h = |v: f64| {
        if dof == 1 {
            -0.5 * v * v
        } else if v == 0.0 {
            f64::NEG_INFINITY
        } else {
            (k - 1.0) * v.ln() - 0.5 * v * v
        }
    };
    let mode = (k - 1.0).sqrt();
    let peak = v0.max(mode);
    let h_max = h(peak);
    let mut hi = peak + 1.0;
    while h(hi) - h_max > -90.0 {
        hi = peak + 2.0 * (hi - peak);
    }
    let f = |v: f64| (h(v) - h_max).exp();
    let mut total = 0.0;
    let mut pieces = vec![v0];
    if mode > v0 {
        pieces.push(mode);
    }
    pieces.push(hi);
    for w in pieces.windows(2) {
        // the integrand peaks at 1, so the integral is at least of order 1/hi
        total += adaptive_quadrature(&f, w[0], w[1], 1e-17);
    }
    total.ln() + h_max
}

/// `ln P(χ²_dof > stat)` by numerical integration of the density, normalized by
/// integrating the same density over the whole half line.
pub fn log_sf_quadrature(stat: f64, dof: u64) -> f64 {
    ln_tail_in_v(stat.sqrt(), dof) - ln_tail_in_v(0.0, dof)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_known_values() {
        // dof = 2: P = e^{-s/2}
        for &s in &[0.5, 3.0, 40.0, 600.0, 1300.0] {
            assert!((log_sf_quadrature(s, 2) + s / 2.0).abs() < 1e-11, "s={s}");
        }
        // 95% critical value of χ²_1
        assert!((log_sf_quadrature(3.841458820694124, 1) - 0.05f64.ln()).abs() < 1e-11);
        // dof = 4: P = e^{-s/2}(1 + s/2)
        for &s in &[1.0f64, 10.0, 500.0] {
            let want = -s / 2.0 + (1.0 + s / 2.0).ln();
            assert!((log_sf_quadrature(s, 4) - want).abs() < 1e-11, "s={s}");
        }
    }

    #[test]
    fn table_helpers() {
        let rows = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 0]];
        let t = nested_loop_table(&rows, &[0, 1], &[2, 2]);
        assert_eq!(t, vec![1, 2, 1, 0]);
        let e = expected_by_formula(&[20, 30, 30, 20], &[2, 2]);
        assert_eq!(e, vec![25.0; 4]);
        assert!((chi2(&[20, 30, 30, 20], &e) - 4.0).abs() < 1e-12);
    }
}
