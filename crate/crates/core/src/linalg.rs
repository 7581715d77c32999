//! Small dense and Krylov linear solvers for real systems.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::SizeMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    /// Assembles the matrix of a linear map column by column.
    pub fn from_operator(n: usize, mut apply: impl FnMut(&[T]) -> Result<Vec<T>>) -> Result<Self> {
        let mut m = Self::zeros(n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            let col = apply(&e)?;
            if col.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: col.len(),
                });
            }
            for (i, v) in col.into_iter().enumerate() {
                m[(i, j)] = v;
            }
            e[j] = T::zero();
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).fold(T::zero(), |s, (&a, &b)| s + a * b))
            .collect()
    }

    /// LU factorization with partial pivoting.
    pub fn lu(self) -> Result<LuFactors<T>> {
        let n = self.n;
        let scale = self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let floor = scale * T::epsilon() * T::from_usize_exact(n.max(1));
        let lu = T::lu_factor(n, &self.data);
        if let Some(pivot) = T::lu_pivots(&lu).iter().position(|p| !(p.abs() > floor)) {
            return Err(Error::SingularMatrix { pivot });
        }
        Ok(LuFactors { lu, n })
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

#[derive(Debug, Clone)]
pub struct LuFactors<T: Scalar> {
    lu: T::Lu,
    n: usize,
}

impl<T: Scalar> LuFactors<T> {
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        if b.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        T::lu_solve(&self.lu, b).ok_or(Error::SingularMatrix { pivot: 0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions<T> {
    /// Relative residual target `||b - Ax|| / ||b||`.
    pub tol: T,
    pub max_iter: usize,
    pub restart: usize,
}

impl<T: Scalar> Default for GmresOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            max_iter: 500,
            restart: 60,
        }
    }
}

/// Result of a GMRES run; `converged` is false when the run stopped on the
/// iteration cap or on stagnation, in which case `x` is the best iterate.
#[derive(Debug, Clone)]
pub struct GmresOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub residual: T,
    pub converged: bool,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Restarted GMRES with right preconditioning, started from `x0`.
///
/// Solves `A x = b` where `apply` computes `A v` and `precond` computes an
/// approximation of `A^{-1} v`.
pub fn gmres<T, A, P>(
    mut apply: A,
    mut precond: P,
    b: &[T],
    x0: Option<&[T]>,
    opts: GmresOptions<T>,
) -> Result<GmresOutcome<T>>
where
    T: Scalar,
    A: FnMut(&[T]) -> Result<Vec<T>>,
    P: FnMut(&[T]) -> Result<Vec<T>>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![T::zero(); n],
    };
    if bnorm == T::zero() {
        return Ok(GmresOutcome {
            x: vec![T::zero(); n],
            iterations: 0,
            residual: T::zero(),
            converged: true,
        });
    }
    let m = opts.restart.max(1);
    let mut total = 0usize;
    let mut best_res = T::infinity();
    let mut stalled_cycles = 0usize;

    loop {
        let ax = apply(&x)?;
        let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= opts.tol {
            return Ok(GmresOutcome {
                x,
                iterations: total,
                residual: rel,
                converged: true,
            });
        }
        if rel < best_res * T::lit(0.5) {
            best_res = rel;
            stalled_cycles = 0;
        } else {
            best_res = best_res.min(rel);
            stalled_cycles += 1;
        }
        if total >= opts.max_iter || stalled_cycles >= 3 {
            return Ok(GmresOutcome {
                x,
                iterations: total,
                residual: rel,
                converged: false,
            });
        }

        let mut v: Vec<Vec<T>> = vec![r.iter().map(|&ri| ri / beta).collect()];
        let mut z: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut h = vec![vec![T::zero(); m]; m + 1];
        let mut cs = vec![T::zero(); m];
        let mut sn = vec![T::zero(); m];
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut k_used = 0;

        for k in 0..m {
            if total >= opts.max_iter {
                break;
            }
            total += 1;
            let zk = precond(&v[k])?;
            let mut w = apply(&zk)?;
            z.push(zk);
            for (i, vi) in v.iter().enumerate() {
                let hik = dot(&w, vi);
                h[i][k] = hik;
                for (wj, &vij) in w.iter_mut().zip(vi) {
                    *wj -= hik * vij;
                }
            }
            // one reorthogonalization pass keeps the basis orthogonal at
            // the 1e-12 level for nearly singular operators
            for (i, vi) in v.iter().enumerate() {
                let c = dot(&w, vi);
                h[i][k] += c;
                for (wj, &vij) in w.iter_mut().zip(vi) {
                    *wj -= c * vij;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if d == T::zero() {
                cs[k] = T::one();
                sn[k] = T::zero();
            } else {
                cs[k] = h[k][k] / d;
                sn[k] = h[k + 1][k] / d;
            }
            h[k][k] = d;
            h[k + 1][k] = T::zero();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            k_used = k + 1;
            if g[k + 1].abs() / bnorm <= opts.tol * T::lit(0.5) || hn == T::zero() {
                break;
            }
            v.push(w.iter().map(|&wi| wi / hn).collect());
        }

        let mut y = vec![T::zero(); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = if h[i][i] == T::zero() { T::zero() } else { s / h[i][i] };
        }
        for (yi, zi) in y.iter().zip(&z) {
            for (xj, &zij) in x.iter_mut().zip(zi) {
                *xj += *yi * zij;
            }
        }
    }
}

/// Convenience wrapper that turns a non-converged GMRES run into an error.
pub fn gmres_strict<T, A, P>(apply: A, precond: P, b: &[T], opts: GmresOptions<T>) -> Result<Vec<T>>
where
    T: Scalar,
    A: FnMut(&[T]) -> Result<Vec<T>>,
    P: FnMut(&[T]) -> Result<Vec<T>>,
{
    let out = gmres(apply, precond, b, None, opts)?;
    if out.converged {
        Ok(out.x)
    } else {
        Err(Error::SolverDivergence {
            iterations: out.iterations,
            residual: out.residual.to_f64_lossy(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64, shift: f64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = rng.gen_range(-1.0..1.0) / n as f64;
            }
            m[(i, i)] += shift;
        }
        m
    }

    #[test]
    fn lu_solves_random_system() {
        let a = random_matrix(40, 1, 1.0);
        let x: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let b = a.matvec(&x);
        let got = a.clone().lu().unwrap().solve(&b).unwrap();
        for (u, v) in got.iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn lu_needs_pivoting() {
        let a = DenseMatrix::from_rows(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let x = a.lu().unwrap().solve(&[2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn lu_rejects_singular() {
        let a = DenseMatrix::from_rows(2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(a.lu(), Err(Error::SingularMatrix { .. })));
        assert!(DenseMatrix::<f64>::from_rows(2, vec![1.0]).is_err());
    }

    #[test]
    fn operator_assembly_matches_matvec() {
        let a = random_matrix(12, 7, 0.5);
        let b = DenseMatrix::from_operator(12, |v| Ok(a.matvec(v))).unwrap();
        assert_eq!(a, b);
        assert_eq!(DenseMatrix::<f64>::identity(3).matvec(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn gmres_matches_lu() {
        let a = random_matrix(80, 3, 1.0);
        let b: Vec<f64> = (0..80).map(|i| (0.3 * i as f64).cos()).collect();
        let direct = a.clone().lu().unwrap().solve(&b).unwrap();
        let out = gmres(|v| Ok(a.matvec(v)), |v| Ok(v.to_vec()), &b, None, GmresOptions::default()).unwrap();
        assert!(out.converged, "{out:?}");
        for (u, v) in out.x.iter().zip(&direct) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn gmres_with_restarts_and_preconditioner() {
        // diagonal spread over four decades; preconditioning by the diagonal
        // makes it nearly the identity
        let n = 200;
        let mut a = random_matrix(n, 5, 0.0);
        for i in 0..n {
            a[(i, i)] = 10f64.powf(4.0 * i as f64 / n as f64);
        }
        let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        let b = vec![1.0; n];
        let opts = GmresOptions {
            tol: 1e-12,
            max_iter: 400,
            restart: 10,
        };
        let out = gmres(
            |v| Ok(a.matvec(v)),
            |v| Ok(v.iter().zip(&diag).map(|(x, d)| x / d).collect()),
            &b,
            None,
            opts,
        )
        .unwrap();
        assert!(out.converged);
        let r: f64 = a.matvec(&out.x).iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
        assert!(r / (n as f64).sqrt() < 1e-11);
    }

    #[test]
    fn gmres_zero_rhs_and_cap() {
        let a = random_matrix(10, 2, 1.0);
        let out = gmres(|v| Ok(a.matvec(v)), |v| Ok(v.to_vec()), &[0.0; 10], None, GmresOptions::default()).unwrap();
        assert!(out.converged && out.x.iter().all(|&v| v == 0.0));
        let opts = GmresOptions {
            tol: 1e-30,
            max_iter: 3,
            restart: 2,
        };
        let out = gmres(|v| Ok(a.matvec(v)), |v| Ok(v.to_vec()), &[1.0; 10], None, opts).unwrap();
        assert!(!out.converged);
        assert!(matches!(
            gmres_strict(|v| Ok(a.matvec(v)), |v| Ok(v.to_vec()), &[1.0; 10], opts),
            Err(Error::SolverDivergence { .. })
        ));
    }
}
