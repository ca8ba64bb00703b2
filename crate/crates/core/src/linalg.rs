//! Small dense complex-matrix routines: rank-revealing elimination with
//! column pivoting, nullspace extraction, and Hermitian trace norms.
//!
//! The matrices here are tiny (at most a dozen rows and columns) and carry
//! exact-shaped entries such as 0, ±1/2 and ±i/2, so plain Gauss-Jordan
//! elimination with a relative pivot threshold is transparent and auditable.

use nalgebra::{DMatrix, DVector};

use crate::fock::Amplitude;

/// Relative pivot threshold for rank decisions, measured against the largest
/// entry of the original matrix.
pub const PIVOT_TOLERANCE: f64 = 1e-9;

/// Result of a rank-revealing elimination.
#[derive(Clone, Debug)]
pub struct Elimination {
    pub rank: usize,
    pub nullity: usize,
    /// Orthonormal basis of the right nullspace.
    pub nullspace: Vec<DVector<Amplitude>>,
    /// Column indices chosen as pivots, in elimination order.
    pub pivot_columns: Vec<usize>,
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<Amplitude>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Gauss-Jordan elimination with column pivoting over the complex entries.
///
/// At every step the pivot is the largest remaining entry by modulus (lowest
/// column, then lowest row, on ties); elimination stops when the best
/// candidate falls below [`PIVOT_TOLERANCE`] relative to the largest entry of
/// the input. Free columns yield the nullspace basis, which is then
/// orthonormalized by modified Gram-Schmidt in deterministic order.
pub fn nullspace(matrix: &DMatrix<Amplitude>) -> Elimination {
    let rows = matrix.nrows();
    let cols = matrix.ncols();
    let scale = max_abs(matrix);
    if cols == 0 {
        return Elimination {
            rank: 0,
            nullity: 0,
            nullspace: Vec::new(),
            pivot_columns: Vec::new(),
        };
    }
    if rows == 0 || scale == 0.0 {
        let basis = (0..cols)
            .map(|c| {
                let mut v = DVector::zeros(cols);
                v[c] = Amplitude::ONE;
                v
            })
            .collect();
        return Elimination {
            rank: 0,
            nullity: cols,
            nullspace: basis,
            pivot_columns: Vec::new(),
        };
    }

    let threshold = PIVOT_TOLERANCE * scale;
    let mut a = matrix.clone();
    let mut pivot_columns: Vec<usize> = Vec::new();
    let mut is_pivot_col = vec![false; cols];
    let mut next_row = 0;

    while next_row < rows {
        let mut best = 0.0;
        let mut best_pos = None;
        for c in 0..cols {
            if is_pivot_col[c] {
                continue;
            }
            for r in next_row..rows {
                let mag = a[(r, c)].norm();
                if mag > best {
                    best = mag;
                    best_pos = Some((r, c));
                }
            }
        }
        let (pr, pc) = match best_pos {
            Some(pos) if best > threshold => pos,
            _ => break,
        };
        a.swap_rows(next_row, pr);
        let pivot = a[(next_row, pc)];
        for c in 0..cols {
            a[(next_row, c)] /= pivot;
        }
        for r in 0..rows {
            if r == next_row {
                continue;
            }
            let factor = a[(r, pc)];
            if factor.norm() == 0.0 {
                continue;
            }
            for c in 0..cols {
                let sub = factor * a[(next_row, c)];
                a[(r, c)] -= sub;
            }
        }
        is_pivot_col[pc] = true;
        pivot_columns.push(pc);
        next_row += 1;
    }

    let rank = pivot_columns.len();
    let mut raw: Vec<DVector<Amplitude>> = Vec::new();
    for free in 0..cols {
        if is_pivot_col[free] {
            continue;
        }
        let mut v = DVector::zeros(cols);
        v[free] = Amplitude::ONE;
        for (row, &pc) in pivot_columns.iter().enumerate() {
            v[pc] = -a[(row, free)];
        }
        raw.push(v);
    }

    let nullspace = orthonormalize(raw);
    Elimination {
        rank,
        nullity: nullspace.len(),
        nullspace,
        pivot_columns,
    }
}

/// Modified Gram-Schmidt; vectors that collapse below tolerance are dropped.
pub fn orthonormalize(vectors: Vec<DVector<Amplitude>>) -> Vec<DVector<Amplitude>> {
    let mut basis: Vec<DVector<Amplitude>> = Vec::new();
    for mut v in vectors {
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let n = v.norm();
        if n > PIVOT_TOLERANCE {
            basis.push(v / Amplitude::from(n));
        }
    }
    basis
}

/// Largest residual entry of `m . v`, used to confirm nullspace membership.
pub fn residual(m: &DMatrix<Amplitude>, v: &DVector<Amplitude>) -> f64 {
    (m * v).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a complex Hermitian matrix.
///
/// `H = A + iB` embeds into the real symmetric matrix `[[A, -B], [B, A]]`,
/// whose spectrum is that of `H` with every eigenvalue doubled.
pub fn hermitian_eigenvalues(h: &DMatrix<Amplitude>) -> Vec<f64> {
    let d = h.nrows();
    assert_eq!(
        d,
        h.ncols(),
        "hermitian_eigenvalues requires a square matrix"
    );
    if d == 0 {
        return Vec::new();
    }
    let mut s = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for r in 0..d {
        for c in 0..d {
            let z = h[(r, c)];
            s[(r, c)] = z.re;
            s[(r + d, c + d)] = z.re;
            s[(r, c + d)] = -z.im;
            s[(r + d, c)] = z.im;
        }
    }
    let mut eig: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    // Keep one of each doubled pair.
    eig.into_iter().step_by(2).collect()
}

/// Trace norm (sum of absolute eigenvalues) of a Hermitian matrix.
pub fn trace_norm_hermitian(h: &DMatrix<Amplitude>) -> f64 {
    hermitian_eigenvalues(h).iter().map(|l| l.abs()).sum()
}
