//! Dense big-float elimination.

use rug::{Assign, Float};

use crate::exec::Exec;

/// Rows below this size are updated serially; forking costs more than it saves.
#[cfg(feature = "parallel")]
const PAR_MIN_ROWS: usize = 24;

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det_lu(mut a: Vec<Vec<Float>>) -> Float {
    let n = a.len();
    let prec = a.first().map_or(64, |r| r[0].prec());
    let mut det = Float::with_val(prec, 1);
    let mut tmp = Float::new(prec);
    for p in 0..n {
        let piv = (p..n)
            .max_by(|&x, &y| a[x][p].cmp_abs(&a[y][p]).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        if a[piv][p].is_zero() {
            return Float::with_val(prec, 0);
        }
        if piv != p {
            a.swap(piv, p);
            det = -det;
        }
        det *= &a[p][p];
        let (top, rest) = a.split_at_mut(p + 1);
        let pivot_row = &top[p];
        for row in rest.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let l = Float::with_val(prec, &row[p] / &pivot_row[p]);
            for k in p + 1..n {
                tmp.assign(&l * &pivot_row[k]);
                row[k] -= &tmp;
            }
        }
    }
    det
}

/// Pivots of unpivoted symmetric elimination, i.e. the ratios of successive
/// leading principal minors. Only the lower triangle is read. Returns `None`
/// as soon as a pivot is not strictly positive, which for a positive
/// definite matrix only happens when the working precision is too low.
pub fn spd_pivots(a: &[Vec<Float>], exec: Exec) -> Option<Vec<Float>> {
    let n = a.len();
    // Lower-triangular working copy: row i holds columns 0..=i.
    let mut l: Vec<Vec<Float>> = a.iter().enumerate().map(|(i, r)| r[..=i].to_vec()).collect();
    let mut pivots = Vec::with_capacity(n);
    for p in 0..n {
        let d = l[p][p].clone();
        if d.is_sign_negative() || d.is_zero() || d.is_nan() {
            return None;
        }
        // Column p below the pivot, scaled copy and raw copy.
        let col: Vec<Float> = (p + 1..n).map(|i| l[i][p].clone()).collect();
        let mult: Vec<Float> = col.iter().map(|c| Float::with_val(d.prec(), c / &d)).collect();
        let rows = &mut l[p + 1..];
        let update = |(off, row): (usize, &mut Vec<Float>)| {
            let m = &mult[off];
            if m.is_zero() {
                return;
            }
            let mut tmp = Float::new(d.prec());
            // Row i = p+1+off, columns p+1..=i; a[k][p] for k > p is col[k-p-1].
            for (c, cv) in col.iter().enumerate().take(off + 1) {
                tmp.assign(m * cv);
                row[p + 1 + c] -= &tmp;
            }
        };
        #[cfg(feature = "parallel")]
        if exec.is_parallel() && rows.len() >= PAR_MIN_ROWS {
            use rayon::prelude::*;
            rows.par_iter_mut().enumerate().for_each(update);
            pivots.push(d);
            continue;
        }
        let _ = exec;
        rows.iter_mut().enumerate().for_each(update);
        pivots.push(d);
    }
    Some(pivots)
}

/// Leading principal minors `D_1 … D_n` from the pivots.
pub fn minors_from_pivots(pivots: &[Float]) -> Vec<Float> {
    let mut acc: Option<Float> = None;
    pivots
        .iter()
        .map(|p| {
            let next = match acc.take() {
                None => p.clone(),
                Some(a) => a * p,
            };
            acc = Some(next.clone());
            next
        })
        .collect()
}

/// Determinant of a symmetric positive definite matrix, falling back to
/// partial pivoting when rounding breaks positivity.
pub fn det_spd(a: Vec<Vec<Float>>, exec: Exec) -> Float {
    if a.is_empty() {
        return Float::with_val(64, 1);
    }
    match spd_pivots(&a, exec) {
        Some(p) => minors_from_pivots(&p).pop().unwrap(),
        None => det_lu(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Vec<Vec<Float>> {
        rows.iter().map(|r| r.iter().map(|&x| Float::with_val(128, x)).collect()).collect()
    }

    #[test]
    fn small_determinants() {
        assert_eq!(det_lu(mat(&[&[2.0, 1.0], &[1.0, 3.0]])), 5);
        assert_eq!(det_lu(mat(&[&[0.0, 1.0], &[1.0, 0.0]])), -1);
        assert_eq!(det_lu(mat(&[&[1.0, 2.0], &[2.0, 4.0]])), 0);
        let spd = mat(&[&[4.0, 2.0, 0.0], &[2.0, 5.0, 1.0], &[0.0, 1.0, 3.0]]);
        assert_eq!(det_lu(spd.clone()), 44);
        assert_eq!(det_spd(spd.clone(), Exec::Sequential), 44);
        let minors = minors_from_pivots(&spd_pivots(&spd, Exec::Sequential).unwrap());
        assert_eq!(minors.iter().map(|m| m.to_f64()).collect::<Vec<_>>(), vec![4.0, 16.0, 44.0]);
    }

    #[test]
    fn indefinite_falls_back() {
        let a = mat(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(spd_pivots(&a, Exec::Sequential).is_none());
        assert_eq!(det_spd(a, Exec::Sequential), -3);
    }

    #[test]
    fn parallel_rows_match_serial() {
        let n = 40;
        let a: Vec<Vec<Float>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Float::with_val(200, 1.0 / (1.0 + (i as f64 - j as f64).abs()) + if i == j { n as f64 } else { 0.0 }))
                    .collect()
            })
            .collect();
        let s = spd_pivots(&a, Exec::Sequential).unwrap();
        let p = spd_pivots(&a, Exec::Parallel).unwrap();
        assert_eq!(s, p);
    }
}
