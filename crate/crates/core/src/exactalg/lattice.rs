//! Row reduction over the integers and the rationals.
//!
//! Rows are dense coefficient vectors over a fixed column order. Column 0 is
//! eliminated first, so callers sort their columns by elimination priority.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A reduced row together with the column of its leading (pivot) entry.
#[derive(Clone, Debug)]
pub struct PivotRow<T> {
    pub pivot: usize,
    pub row: Vec<T>,
}

/// Hermite normal form of the lattice spanned by `rows`.
///
/// Pivots are positive and every entry above a pivot lies in `[0, pivot)`.
pub fn hermite_rows(rows: Vec<Vec<BigInt>>, ncols: usize) -> Vec<PivotRow<BigInt>> {
    let mut active: Vec<Vec<BigInt>> = rows
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut out: Vec<PivotRow<BigInt>> = Vec::new();

    for col in 0..ncols {
        loop {
            let nz: Vec<usize> = (0..active.len())
                .filter(|&i| !active[i][col].is_zero())
                .collect();
            if nz.is_empty() {
                break;
            }
            if nz.len() == 1 {
                let mut row = active.swap_remove(nz[0]);
                if row[col].is_negative() {
                    row.iter_mut().for_each(|x| *x = -&*x);
                }
                out.push(PivotRow { pivot: col, row });
                break;
            }
            let best = *nz
                .iter()
                .min_by(|&&a, &&b| active[a][col].abs().cmp(&active[b][col].abs()))
                .expect("nonempty");
            let pivot_row = active[best].clone();
            let p = pivot_row[col].clone();
            for &i in &nz {
                if i == best {
                    continue;
                }
                let q = &active[i][col] / &p;
                if q.is_zero() {
                    continue;
                }
                for (x, y) in active[i].iter_mut().zip(pivot_row.iter()) {
                    if !y.is_zero() {
                        *x -= &q * y;
                    }
                }
            }
            active.retain(|r| r.iter().any(|x| !x.is_zero()));
        }
    }

    // Reduce entries above each pivot into [0, pivot).
    for i in 0..out.len() {
        let (head, tail) = out.split_at_mut(i);
        let piv = &tail[0];
        let p = &piv.row[piv.pivot];
        for earlier in head.iter_mut() {
            let e = &earlier.row[piv.pivot];
            if e.is_zero() {
                continue;
            }
            let q = e.div_floor(p);
            if q.is_zero() {
                continue;
            }
            for (x, y) in earlier.row.iter_mut().zip(piv.row.iter()) {
                if !y.is_zero() {
                    *x -= &q * y;
                }
            }
        }
    }
    out
}

/// Reduces `v` to the canonical representative of its coset modulo the
/// lattice given in Hermite form.
pub fn reduce_by_hermite(v: &mut [BigInt], rows: &[PivotRow<BigInt>]) {
    for r in rows {
        let p = &r.row[r.pivot];
        let q = v[r.pivot].div_floor(p);
        if q.is_zero() {
            continue;
        }
        for (x, y) in v.iter_mut().zip(r.row.iter()) {
            if !y.is_zero() {
                *x -= &q * y;
            }
        }
    }
}

/// Reduced row echelon form over the rationals, pivots equal to one.
pub fn rational_rref(rows: Vec<Vec<BigRational>>, ncols: usize) -> Vec<PivotRow<BigRational>> {
    let mut active: Vec<Vec<BigRational>> = rows
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut out: Vec<PivotRow<BigRational>> = Vec::new();
    for col in 0..ncols {
        let Some(pos) = active.iter().position(|r| !r[col].is_zero()) else {
            continue;
        };
        let mut prow = active.swap_remove(pos);
        let inv = prow[col].recip();
        prow.iter_mut().for_each(|x| *x *= &inv);
        for r in active.iter_mut().chain(out.iter_mut().map(|p| &mut p.row)) {
            if r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (x, y) in r.iter_mut().zip(prow.iter()) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        active.retain(|r| r.iter().any(|x| !x.is_zero()));
        out.push(PivotRow { pivot: col, row: prow });
    }
    out
}

/// Nonzero invariant factors of the integer matrix `rows` (Smith normal form diagonal).
pub fn smith_invariants(rows: &[Vec<BigInt>], ncols: usize) -> Vec<BigInt> {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let nrows = m.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < nrows.min(ncols) {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..nrows {
            for j in t..ncols {
                if m[i][j].is_zero() {
                    continue;
                }
                if best.map_or(true, |(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap(t, bi);
        for row in m.iter_mut() {
            row.swap(t, bj);
        }
        let mut done = true;
        let p = m[t][t].clone();
        for i in t + 1..nrows {
            if m[i][t].is_zero() {
                continue;
            }
            let q = m[i][t].div_floor(&p);
            let (a, b) = m.split_at_mut(i);
            for (x, y) in b[0].iter_mut().zip(a[t].iter()) {
                *x -= &q * y;
            }
            if !m[i][t].is_zero() {
                done = false;
            }
        }
        for j in t + 1..ncols {
            if m[t][j].is_zero() {
                continue;
            }
            let q = m[t][j].div_floor(&p);
            for row in m.iter_mut() {
                let y = row[t].clone();
                row[j] -= &q * y;
            }
            if !m[t][j].is_zero() {
                done = false;
            }
        }
        if !done {
            continue;
        }
        // divisibility condition on the trailing block
        let mut bad_row = None;
        'outer: for i in t + 1..nrows {
            for j in t + 1..ncols {
                if !(&m[i][j] % &p).is_zero() {
                    bad_row = Some(i);
                    break 'outer;
                }
            }
        }
        if let Some(i) = bad_row {
            let (a, b) = m.split_at_mut(i);
            for (x, y) in a[t].iter_mut().zip(b[0].iter()) {
                *x += y;
            }
            continue;
        }
        diag.push(p.abs());
        t += 1;
    }
    diag
}

pub fn is_unit(x: &BigInt) -> bool {
    x.abs().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn hermite_of_small_lattice() {
        let rows = hermite_rows(vec![z(&[4, 6]), z(&[6, 4])], 2);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].row, z(&[2, 8]));
        assert_eq!(rows[1].row, z(&[0, 10]));
        // |det| of the lattice is |16 - 36| = 20
        assert_eq!(&rows[0].row[0] * &rows[1].row[1], BigInt::from(20));
    }

    #[test]
    fn coset_representatives_are_canonical() {
        let rows = hermite_rows(vec![z(&[2, 1])], 2);
        let mut a = z(&[3, 5]);
        let mut b = z(&[1, 4]);
        reduce_by_hermite(&mut a, &rows);
        reduce_by_hermite(&mut b, &rows);
        assert_eq!(a, b);
    }

    #[test]
    fn smith_detects_torsion() {
        assert_eq!(smith_invariants(&[z(&[2, 0]), z(&[0, 3])], 2), z(&[1, 6]));
        assert_eq!(smith_invariants(&[z(&[1, 2])], 2), z(&[1]));
        assert_eq!(smith_invariants(&[z(&[2, 4])], 2), z(&[2]));
    }

    #[test]
    fn rref_normalises_pivots() {
        let q = |a: i64| BigRational::from_integer(a.into());
        let rows = rational_rref(vec![vec![q(2), q(4)], vec![q(1), q(3)]], 2);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].row, vec![q(1), q(0)]);
        assert_eq!(rows[1].row, vec![q(0), q(1)]);
    }
}
