//! Small dense linear algebra kernels.
//!
//! Row-major [`Matrix`] plus the three solvers the toolkit needs:
//!
//! * [`gram`] / [`gram_right`] / [`matmul_at_b`] — cache-friendly products
//!   for assembling normal equations,
//! * [`cholesky_solve`] — SPD solve for ridge systems,
//! * [`Cod`] — column-pivoted Householder QR with a complete orthogonal
//!   decomposition fallback, giving minimum-norm least-squares solutions on
//!   rank-deficient designs (singular values below `rel_tol * max` treated
//!   as zero).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn add_diagonal(&mut self, v: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += v;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = out.row_mut(i);
            for (k, &aik) in a_row.iter().enumerate() {
                if aik != 0.0 {
                    let b_row = other.row(k);
                    for (o, &b) in out_row.iter_mut().zip(b_row) {
                        *o += aik * b;
                    }
                }
            }
        }
        out
    }

    /// `self * v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `AᵀA`, accumulating the upper triangle row by row and mirroring.
pub fn gram(a: &Matrix) -> Matrix {
    let k = a.cols;
    let mut out = Matrix::zeros(k, k);
    for r in 0..a.rows {
        let row = a.row(r);
        for i in 0..k {
            let ai = row[i];
            if ai != 0.0 {
                let dst = &mut out.data[i * k + i..i * k + k];
                for (d, &aj) in dst.iter_mut().zip(&row[i..]) {
                    *d += ai * aj;
                }
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            out.data[i * k + j] = out.data[j * k + i];
        }
    }
    out
}

/// `AAᵀ` (useful when rows ≪ cols).
pub fn gram_right(a: &Matrix) -> Matrix {
    let n = a.rows;
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let ri = a.row(i);
        for j in i..n {
            let v = dot(ri, a.row(j));
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    out
}

/// `AᵀB` where `A` is n×k and `B` is n×m.
pub fn matmul_at_b(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.rows, b.rows);
    let mut out = Matrix::zeros(a.cols, b.cols);
    for r in 0..a.rows {
        let a_row = a.row(r);
        let b_row = b.row(r);
        for (i, &ai) in a_row.iter().enumerate() {
            if ai != 0.0 {
                let dst = out.row_mut(i);
                for (d, &bv) in dst.iter_mut().zip(b_row) {
                    *d += ai * bv;
                }
            }
        }
    }
    out
}

/// Solves `A X = B` for symmetric positive definite `A` via Cholesky.
///
/// `B` may carry multiple right-hand sides as columns.
pub fn cholesky_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    assert_eq!(a.rows, a.cols);
    assert_eq!(a.rows, b.rows);
    let n = a.rows;
    let mut l = a.clone();
    for j in 0..n {
        let mut d = l.get(j, j);
        for k in 0..j {
            let v = l.get(j, k);
            d -= v * v;
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::Singular(format!(
                "cholesky pivot {d:.3e} at column {j}"
            )));
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in (j + 1)..n {
            let mut v = l.get(i, j);
            for k in 0..j {
                v -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, v / d);
        }
    }
    // forward then backward substitution per column, operating on a transposed
    // copy of B so each RHS is contiguous
    let mut xt = b.transpose();
    for c in 0..xt.rows() {
        let col = xt.row_mut(c);
        for i in 0..n {
            let mut v = col[i];
            for k in 0..i {
                v -= l.get(i, k) * col[k];
            }
            col[i] = v / l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut v = col[i];
            for k in (i + 1)..n {
                v -= l.get(k, i) * col[k];
            }
            col[i] = v / l.get(i, i);
        }
    }
    Ok(xt.transpose())
}

/// Relative singular-value cutoff used by the least-squares solvers.
pub const RANK_TOL: f64 = 1e-10;

/// Column-pivoted Householder QR with a complete orthogonal decomposition
/// for rank-deficient systems.
///
/// Solutions are least-squares solutions; when the design is rank deficient
/// (trailing `R` diagonal below `rel_tol * |R[0,0]|`) the minimum-norm
/// solution is returned.
pub struct Cod {
    qr: Matrix,
    betas: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
    /// QR of `R_fullᵀ` (cols × rank), present only when rank < cols.
    rt: Option<(Matrix, Vec<f64>)>,
}

impl Cod {
    pub fn factor(a: &Matrix, rel_tol: f64) -> Cod {
        let n = a.rows();
        let k = a.cols();
        let kmax = n.min(k);
        let mut qr = a.clone();
        let mut betas = vec![0.0; kmax];
        let mut perm: Vec<usize> = (0..k).collect();

        for j in 0..kmax {
            // exact column norms over the active block; recomputing keeps the
            // pivot order deterministic and immune to downdating drift
            let mut best = j;
            let mut best_norm = -1.0;
            for c in j..k {
                let mut s = 0.0;
                for r in j..n {
                    let v = qr.get(r, c);
                    s += v * v;
                }
                if s > best_norm {
                    best_norm = s;
                    best = c;
                }
            }
            if best != j {
                for r in 0..n {
                    let tmp = qr.get(r, j);
                    qr.set(r, j, qr.get(r, best));
                    qr.set(r, best, tmp);
                }
                perm.swap(j, best);
            }

            let sigma = best_norm.max(0.0).sqrt();
            if sigma == 0.0 {
                betas[j] = 0.0;
                continue;
            }
            let x0 = qr.get(j, j);
            let alpha = if x0 >= 0.0 { -sigma } else { sigma };
            let v0 = x0 - alpha;
            // v = x - alpha e1, stored normalized so v[0] = 1
            for r in (j + 1)..n {
                let v = qr.get(r, j) / v0;
                qr.set(r, j, v);
            }
            let beta = v0 * v0 * (2.0 / (sigma * sigma - 2.0 * alpha * x0 + alpha * alpha));
            betas[j] = beta;
            qr.set(j, j, alpha);

            // apply H = I - beta u uᵀ to the remaining columns
            for c in (j + 1)..k {
                let mut s = qr.get(j, c);
                for r in (j + 1)..n {
                    s += qr.get(r, j) * qr.get(r, c);
                }
                s *= beta;
                let new = qr.get(j, c) - s;
                qr.set(j, c, new);
                for r in (j + 1)..n {
                    let v = qr.get(r, c) - s * qr.get(r, j);
                    qr.set(r, c, v);
                }
            }
        }

        let r00 = qr.get(0, 0).abs();
        let mut rank = 0;
        for j in 0..kmax {
            if qr.get(j, j).abs() > rel_tol * r00 && r00 > 0.0 {
                rank += 1;
            } else {
                break;
            }
        }

        let rt = if rank < k && rank > 0 {
            // factor R_fullᵀ (k × rank) by plain Householder QR
            let mut m = Matrix::zeros(k, rank);
            for i in 0..rank {
                for c in i..k {
                    m.set(c, i, qr.get(i, c));
                }
            }
            let mut b2 = vec![0.0; rank];
            for j in 0..rank {
                let mut s = 0.0;
                for r in j..k {
                    let v = m.get(r, j);
                    s += v * v;
                }
                let sigma = s.sqrt();
                if sigma == 0.0 {
                    b2[j] = 0.0;
                    continue;
                }
                let x0 = m.get(j, j);
                let alpha = if x0 >= 0.0 { -sigma } else { sigma };
                let v0 = x0 - alpha;
                for r in (j + 1)..k {
                    let v = m.get(r, j) / v0;
                    m.set(r, j, v);
                }
                let beta = v0 * v0 * (2.0 / (s - 2.0 * alpha * x0 + alpha * alpha));
                b2[j] = beta;
                m.set(j, j, alpha);
                for c in (j + 1)..rank {
                    let mut t = m.get(j, c);
                    for r in (j + 1)..k {
                        t += m.get(r, j) * m.get(r, c);
                    }
                    t *= beta;
                    let new = m.get(j, c) - t;
                    m.set(j, c, new);
                    for r in (j + 1)..k {
                        let v = m.get(r, c) - t * m.get(r, j);
                        m.set(r, c, v);
                    }
                }
            }
            Some((m, b2))
        } else {
            None
        };

        Cod {
            qr,
            betas,
            perm,
            rank,
            rt,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Applies `Qᵀ` to a right-hand side in place.
    fn qt_apply(&self, b: &mut [f64]) {
        let n = self.qr.rows();
        for (j, &beta) in self.betas.iter().enumerate() {
            if beta == 0.0 {
                continue;
            }
            let mut s = b[j];
            for r in (j + 1)..n {
                s += self.qr.get(r, j) * b[r];
            }
            s *= beta;
            b[j] -= s;
            for r in (j + 1)..n {
                b[r] -= s * self.qr.get(r, j);
            }
        }
    }

    /// Least-squares solution for one right-hand side (length = rows).
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.qr.cols();
        let mut c = b.to_vec();
        self.qt_apply(&mut c);
        let r = self.rank;
        let mut x = vec![0.0; k];
        if r == 0 {
            return x;
        }
        let z = if let Some((m, b2)) = &self.rt {
            // minimum-norm: R_full = Uᵀ Q2ᵀ; solve Uᵀ w = c, then z = Q2 [w; 0]
            let kk = m.rows();
            let mut w = vec![0.0; r];
            for i in 0..r {
                let mut v = c[i];
                for t in 0..i {
                    v -= m.get(t, i) * w[t];
                }
                w[i] = v / m.get(i, i);
            }
            let mut z = vec![0.0; kk];
            z[..r].copy_from_slice(&w);
            // apply Q2 = H_0 H_1 ... in reverse order
            for j in (0..r).rev() {
                let beta = b2[j];
                if beta == 0.0 {
                    continue;
                }
                let mut s = z[j];
                for t in (j + 1)..kk {
                    s += m.get(t, j) * z[t];
                }
                s *= beta;
                z[j] -= s;
                for t in (j + 1)..kk {
                    z[t] -= s * m.get(t, j);
                }
            }
            z
        } else {
            // full rank: back substitution
            let mut z = vec![0.0; r];
            for i in (0..r).rev() {
                let mut v = c[i];
                for t in (i + 1)..r {
                    v -= self.qr.get(i, t) * z[t];
                }
                z[i] = v / self.qr.get(i, i);
            }
            z
        };
        for (j, &pj) in self.perm.iter().enumerate() {
            if j < z.len() {
                x[pj] = z[j];
            }
        }
        x
    }

    /// Diagonal of `(AᵀA)⁻¹` for full-rank designs; `None` when rank deficient.
    pub fn xtx_inverse_diag(&self) -> Option<Vec<f64>> {
        let k = self.qr.cols();
        if self.rank < k {
            return None;
        }
        // invert the upper-triangular R, then diag = squared row norms,
        // mapped back through the column permutation
        let mut rinv = Matrix::zeros(k, k);
        for i in 0..k {
            rinv.set(i, i, 1.0 / self.qr.get(i, i));
            for j in (i + 1)..k {
                let mut s = 0.0;
                for t in i..j {
                    s += rinv.get(i, t) * self.qr.get(t, j);
                }
                rinv.set(i, j, -s / self.qr.get(j, j));
            }
        }
        let mut diag = vec![0.0; k];
        for j in 0..k {
            let mut s = 0.0;
            for t in j..k {
                let v = rinv.get(j, t);
                s += v * v;
            }
            diag[self.perm[j]] = s;
        }
        Some(diag)
    }
}

/// Least squares `min ||A x - b||` with SSR of the returned solution.
pub fn lstsq_ssr(a: &Matrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::Invalid("empty design matrix".into()));
    }
    if a.rows() != b.len() {
        return Err(Error::Shape(format!(
            "design has {} rows but target has {}",
            a.rows(),
            b.len()
        )));
    }
    let cod = Cod::factor(a, RANK_TOL);
    let x = cod.solve(b);
    let mut ssr = 0.0;
    for r in 0..a.rows() {
        let e = b[r] - dot(a.row(r), &x);
        ssr += e * e;
    }
    Ok((x, ssr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_matrix(rng: &mut SplitMix64, n: usize, k: usize) -> Matrix {
        Matrix::from_fn(n, k, |_, _| rng.normal())
    }

    #[test]
    fn matmul_against_hand_example() {
        let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = Matrix::from_rows(vec![vec![5.0, 6.0], vec![7.0, 8.0]]);
        let c = a.matmul(&b);
        assert_eq!(c.row(0), &[19.0, 22.0]);
        assert_eq!(c.row(1), &[43.0, 50.0]);
    }

    #[test]
    fn gram_matches_explicit_product() {
        let mut rng = SplitMix64::new(1);
        let a = random_matrix(&mut rng, 17, 5);
        let g = gram(&a);
        let explicit = a.transpose().matmul(&a);
        for i in 0..5 {
            for j in 0..5 {
                assert!((g.get(i, j) - explicit.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let mut rng = SplitMix64::new(2);
        let a = random_matrix(&mut rng, 30, 6);
        let mut g = gram(&a);
        g.add_diagonal(0.5);
        let x_true = Matrix::from_fn(6, 2, |i, j| (i + j) as f64 / 3.0 - 1.0);
        let b = g.matmul(&x_true);
        let x = cholesky_solve(&g, &b).unwrap();
        for i in 0..6 {
            for j in 0..2 {
                assert!((x.get(i, j) - x_true.get(i, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(cholesky_solve(&m, &Matrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn lstsq_exact_fit_has_zero_ssr() {
        let mut rng = SplitMix64::new(3);
        let a = random_matrix(&mut rng, 20, 4);
        let x_true = vec![1.5, -0.25, 0.0, 2.0];
        let b = a.matvec(&x_true);
        let (x, ssr) = lstsq_ssr(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-10);
        }
        let b_norm2: f64 = b.iter().map(|v| v * v).sum();
        assert!(ssr < 1e-16 * b_norm2.max(1.0));
    }

    #[test]
    fn lstsq_three_point_fixture() {
        // y = (1, 2, 4) on intercept + slope over x = 0, 1, 2:
        // slope 3/2, intercept 5/6, ssr 1/6 by hand normal equations
        let a = Matrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]]);
        let (x, ssr) = lstsq_ssr(&a, &[1.0, 2.0, 4.0]).unwrap();
        assert!((x[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((x[1] - 1.5).abs() < 1e-12);
        assert!((ssr - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_duplicated_column_same_ssr() {
        let mut rng = SplitMix64::new(4);
        let a = random_matrix(&mut rng, 25, 3);
        let b: Vec<f64> = (0..25).map(|_| rng.normal()).collect();
        let (_, ssr_base) = lstsq_ssr(&a, &b).unwrap();

        let dup = Matrix::from_fn(25, 4, |i, j| if j < 3 { a.get(i, j) } else { a.get(i, 1) });
        let (x, ssr_dup) = lstsq_ssr(&dup, &b).unwrap();
        assert!(
            (ssr_base - ssr_dup).abs() <= 1e-9 * ssr_base.max(1.0),
            "ssr {ssr_base} vs {ssr_dup}"
        );
        // minimum-norm splits the weight across the duplicated columns
        assert!((x[1] - x[3]).abs() < 1e-8);
    }

    #[test]
    fn min_norm_solution_is_smallest() {
        let mut rng = SplitMix64::new(5);
        // rank-2 design in 4 columns
        let base = random_matrix(&mut rng, 30, 2);
        let a = Matrix::from_fn(30, 4, |i, j| match j {
            0 => base.get(i, 0),
            1 => base.get(i, 1),
            2 => base.get(i, 0) + base.get(i, 1),
            _ => 2.0 * base.get(i, 0) - base.get(i, 1),
        });
        let b: Vec<f64> = (0..30).map(|_| rng.normal()).collect();
        let (x, ssr) = lstsq_ssr(&a, &b).unwrap();
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        // any perturbation within the null space must not shrink the norm
        // null space of Aᵀ columns: directions (1, 1, -1, 0) and (2, -1, 0, -1)
        for dir in [[1.0, 1.0, -1.0, 0.0], [2.0, -1.0, 0.0, -1.0]] {
            for eps in [-1e-3, 1e-3] {
                let perturbed: Vec<f64> = x.iter().zip(&dir).map(|(xi, d)| xi + eps * d).collect();
                let p_norm2: f64 = perturbed.iter().map(|v| v * v).sum();
                let mut p_ssr = 0.0;
                for r in 0..30 {
                    let e = b[r] - dot(a.row(r), &perturbed);
                    p_ssr += e * e;
                }
                assert!((p_ssr - ssr).abs() < 1e-8, "perturbation left the fit");
                assert!(p_norm2 >= norm2 - 1e-12);
            }
        }
    }

    #[test]
    fn xtx_inverse_diag_matches_direct_inverse() {
        let mut rng = SplitMix64::new(6);
        let a = random_matrix(&mut rng, 40, 3);
        let cod = Cod::factor(&a, RANK_TOL);
        let diag = cod.xtx_inverse_diag().unwrap();

        let g = gram(&a);
        let inv = cholesky_solve(&g, &Matrix::identity(3)).unwrap();
        for i in 0..3 {
            assert!((diag[i] - inv.get(i, i)).abs() < 1e-10 * inv.get(i, i).abs());
        }
    }
}
