//! Bracketed scalar root isolation.

/// Bisects a sign-changing bracket until it cannot shrink any further or its
/// width falls below `tol`. Returns the endpoint with the smaller |f|.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return lo;
    }
    if f_hi == 0.0 {
        return hi;
    }
    debug_assert!(f_lo.signum() != f_hi.signum(), "bisect needs a sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if f_lo.abs() <= f_hi.abs() {
        lo
    } else {
        hi
    }
}

/// Finds the roots of `f` on the open interval `(lo, hi)` by scanning a
/// uniform grid of `n` points for sign changes.
///
/// A cell whose endpoints share a sign can still hide two close roots. When
/// `df` changes sign inside such a cell, the critical point is located and,
/// if `f` crosses zero there, both roots are bracketed around it.
pub fn isolate_roots<F, D>(f: F, df: D, lo: f64, hi: f64, n: usize, tol: f64) -> Vec<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    assert!(n >= 2 && hi > lo);
    let step = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|k| if k == n - 1 { hi } else { lo + step * k as f64 }).collect();
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let slopes: Vec<f64> = grid.iter().map(|&t| df(t)).collect();

    let mut roots = Vec::new();
    for k in 0..n - 1 {
        let (a, b) = (grid[k], grid[k + 1]);
        let (fa, fb) = (values[k], values[k + 1]);
        if fa == 0.0 {
            if k > 0 {
                roots.push(a);
            }
            continue;
        }
        if fb == 0.0 {
            // picked up as the left end of the next cell
            continue;
        }
        if fa.signum() != fb.signum() {
            roots.push(bisect(&f, a, b, tol));
            continue;
        }
        let (da, db) = (slopes[k], slopes[k + 1]);
        if da != 0.0 && db != 0.0 && da.signum() != db.signum() {
            let c = bisect(&df, a, b, tol);
            let fc = f(c);
            if fc == 0.0 {
                roots.push(c);
            } else if fc.signum() != fa.signum() {
                roots.push(bisect(&f, a, c, tol));
                roots.push(bisect(&f, c, b, tol));
            }
        }
    }
    roots
}
