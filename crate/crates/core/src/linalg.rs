//! Dense Gaussian elimination helpers for the small systems in this crate.

/// Solves the square system `a x = b` by partial pivoting. Returns `None`
/// when the matrix is singular at tolerance `tol`.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= tol {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let pivot = a[col].clone();
                for (x, p) in a[row][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Row-reduces `rows` (each an equation `coeffs | rhs`) and returns a
/// maximal linearly independent subset of them, plus a flag that is `false`
/// when some dependent row contradicts the others.
pub(crate) fn independent_rows(rows: &[(Vec<f64>, f64)], tol: f64) -> (Vec<(Vec<f64>, f64)>, bool) {
    let mut basis: Vec<(Vec<f64>, f64)> = Vec::new();
    // reduced copies, each with a pivot column
    let mut reduced: Vec<(Vec<f64>, f64, usize)> = Vec::new();
    let mut consistent = true;
    for (coeffs, rhs) in rows {
        let mut r = coeffs.clone();
        let mut c = *rhs;
        for (red, red_rhs, piv) in &reduced {
            let f = r[*piv] / red[*piv];
            if f != 0.0 {
                for (x, y) in r.iter_mut().zip(red) {
                    *x -= f * y;
                }
                c -= f * red_rhs;
            }
        }
        let scale = coeffs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        match (0..r.len()).max_by(|&i, &j| r[i].abs().total_cmp(&r[j].abs())) {
            Some(p) if r[p].abs() > tol * scale => {
                reduced.push((r, c, p));
                basis.push((coeffs.clone(), *rhs));
            }
            _ => {
                if c.abs() > tol * scale.max(rhs.abs()).max(1.0) {
                    consistent = false;
                }
            }
        }
    }
    (basis, consistent)
}
