//! Small dense complex linear algebra: LU factorization with partial
//! pivoting, solves and determinants. Desk-scale (N <= 16) only.

use num_complex::Complex64;

use crate::model::ComplexMatrix;

pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    /// Number of row swaps mod 2 (determinant sign).
    swaps: usize,
    /// True if a pivot had to be replaced to avoid exact singularity.
    pub perturbed: bool,
}

impl Lu {
    /// Factor `m`. Pivots smaller than `pivot_floor` are replaced by
    /// `pivot_floor` so that inverse iteration can proceed on (near-)singular
    /// shifted matrices.
    pub fn factor(m: &ComplexMatrix, pivot_floor: f64) -> Self {
        let n = m.n();
        let mut lu: Vec<Complex64> = (0..n * n)
            .map(|idx| m.get(idx / n, idx % n))
            .collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut perturbed = false;
        for col in 0..n {
            let mut piv = col;
            let mut best = lu[col * n + col].norm();
            for r in (col + 1)..n {
                let v = lu[r * n + col].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if piv != col {
                for c in 0..n {
                    lu.swap(col * n + c, piv * n + c);
                }
                perm.swap(col, piv);
                swaps += 1;
            }
            if lu[col * n + col].norm() < pivot_floor {
                lu[col * n + col] = Complex64::new(pivot_floor.max(f64::MIN_POSITIVE), 0.0);
                perturbed = true;
            }
            let d = lu[col * n + col];
            for r in (col + 1)..n {
                let f = lu[r * n + col] / d;
                lu[r * n + col] = f;
                for c in (col + 1)..n {
                    let sub = f * lu[col * n + c];
                    lu[r * n + c] -= sub;
                }
            }
        }
        Self {
            n,
            lu,
            perm,
            swaps,
            perturbed,
        }
    }

    pub fn det(&self) -> Complex64 {
        let mut d = if self.swaps % 2 == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        for k in 0..self.n {
            d *= self.lu[k * self.n + k];
        }
        d
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 1..n {
            for c in 0..r {
                let sub = self.lu[r * n + c] * x[c];
                x[r] -= sub;
            }
        }
        for r in (0..n).rev() {
            for c in (r + 1)..n {
                let sub = self.lu[r * n + c] * x[c];
                x[r] -= sub;
            }
            x[r] /= self.lu[r * n + r];
        }
        x
    }
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unconjugated bilinear product `sum_k u_k v_k`.
pub fn bilinear(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Conjugated inner product `<u|v> = sum_k conj(u_k) v_k`.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}
