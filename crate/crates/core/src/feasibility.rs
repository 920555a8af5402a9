//! Nonnegative feasibility for small dense linear equality systems.
//!
//! Solves "find s ≥ 0 with A·s = b" by enumerating basic solutions: if any
//! nonnegative solution exists, one exists whose support is a set of at most
//! rank(A) linearly independent columns, so checking every column subset of
//! size ≤ rows is exhaustive. Intended for the tiny systems produced by the
//! parent-POVM ansatz (≤ 5 rows, ≤ 16 columns).

const PIVOT_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-9;

/// All k-element index subsets of {0, .., n-1}, in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Solves the square-ish system formed by the chosen columns via Gaussian
/// elimination with partial pivoting. Returns `None` when the columns are
/// linearly dependent or the remaining rows are inconsistent with `b`.
fn solve_subset(a: &[Vec<f64>], b: &[f64], cols: &[usize]) -> Option<Vec<f64>> {
    let rows = a.len();
    let k = cols.len();
    let mut aug: Vec<Vec<f64>> = (0..rows)
        .map(|r| {
            let mut row: Vec<f64> = cols.iter().map(|&c| a[r][c]).collect();
            row.push(b[r]);
            row
        })
        .collect();

    let scale = aug
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);

    let mut pivot_row = 0;
    for col in 0..k {
        let best = (pivot_row..rows)
            .max_by(|&i, &j| aug[i][col].abs().partial_cmp(&aug[j][col].abs()).unwrap())?;
        if aug[best][col].abs() <= PIVOT_TOL * scale {
            return None; // dependent columns
        }
        aug.swap(pivot_row, best);
        let inv = 1.0 / aug[pivot_row][col];
        for v in &mut aug[pivot_row][col..=k] {
            *v *= inv;
        }
        let pivot = aug[pivot_row].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r != pivot_row {
                let f = row[col];
                if f != 0.0 {
                    for (v, p) in row[col..=k].iter_mut().zip(&pivot[col..=k]) {
                        *v -= f * p;
                    }
                }
            }
        }
        pivot_row += 1;
    }
    // Rows below the pivots must be annihilated for the system to be
    // consistent.
    if aug[pivot_row..rows]
        .iter()
        .any(|row| row[k].abs() > RESIDUAL_TOL * scale)
    {
        return None;
    }
    Some((0..k).map(|i| aug[i][k]).collect())
}

/// Finds s ≥ 0 with A·s = b, or `None` when no such vector exists. `a` is
/// row-major with equal-length rows. Tiny negative components (≥ −1e-9) are
/// clamped to zero in the returned vector.
pub(crate) fn solve_nonneg(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let rows = a.len();
    assert_eq!(rows, b.len(), "row/rhs count mismatch");
    let cols = a.first().map_or(0, Vec::len);
    assert!(a.iter().all(|r| r.len() == cols), "ragged matrix");

    for k in 0..=rows.min(cols) {
        for subset in combinations(cols, k) {
            let Some(x) = solve_subset(a, b, &subset) else {
                continue;
            };
            if x.iter().any(|&v| v < -RESIDUAL_TOL) {
                continue;
            }
            let mut s = vec![0.0; cols];
            for (&c, &v) in subset.iter().zip(&x) {
                s[c] = v.max(0.0);
            }
            return Some(s);
        }
    }
    None
}

// ---------------------------------------------------------------------------
