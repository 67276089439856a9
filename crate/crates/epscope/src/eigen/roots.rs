//! Characteristic polynomial extraction and simultaneous root finding.
//!
//! The characteristic polynomial `p(z) = det(z I - A)` is computed exactly by
//! cofactor expansion for N <= 4 and through the Hessenberg determinant
//! recurrence for larger N. Roots come from the Aberth-Ehrlich simultaneous
//! iteration. This path is fully independent of the closed-form two-level
//! solution so the two can cross-check each other.

use num_complex::Complex64;

use crate::model::ComplexMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients ascending: p(z) = sum c[k] z^k.
type Poly = Vec<Complex64>;

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_scale(a: &Poly, s: Complex64) -> Poly {
    a.iter().map(|&x| x * s).collect()
}

/// Monic characteristic polynomial of `a`: coefficients of det(z I - A).
pub fn char_poly(a: &ComplexMatrix) -> Poly {
    let n = a.n();
    if n <= 4 {
        // entries of (z I - A) as degree <= 1 polynomials, expanded exactly
        let entries: Vec<Vec<Poly>> = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        if r == c {
                            vec![-a.get(r, c), ONE]
                        } else {
                            vec![-a.get(r, c)]
                        }
                    })
                    .collect()
            })
            .collect();
        let idx: Vec<usize> = (0..n).collect();
        poly_det(&entries, &idx)
    } else {
        hessenberg_char_poly(a)
    }
}

/// Laplace expansion along the first remaining row; `cols` lists the active
/// column indices, rows are the last `cols.len()` rows implicitly.
fn poly_det(entries: &[Vec<Poly>], cols: &[usize]) -> Poly {
    let row = entries.len() - cols.len();
    if cols.len() == 1 {
        return entries[row][cols[0]].clone();
    }
    let mut acc: Poly = vec![ZERO];
    for (k, &c) in cols.iter().enumerate() {
        let minor_cols: Vec<usize> = cols
            .iter()
            .copied()
            .filter(|&cc| cc != c)
            .collect();
        let minor = poly_det(entries, &minor_cols);
        let term = poly_mul(&entries[row][c], &minor);
        let signed = if k % 2 == 0 {
            term
        } else {
            poly_scale(&term, -ONE)
        };
        acc = poly_add(&acc, &signed);
    }
    acc
}

/// Reduce to upper Hessenberg form by stabilized elementary similarity
/// transforms, then apply the leading-principal-minor recurrence for
/// det(z I - H).
fn hessenberg_char_poly(a: &ComplexMatrix) -> Poly {
    let n = a.n();
    let mut h = a.clone();
    for col in 0..n.saturating_sub(2) {
        let mut piv = col + 1;
        let mut best = h.get(piv, col).norm();
        for r in (col + 2)..n {
            let v = h.get(r, col).norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            continue;
        }
        if piv != col + 1 {
            for c in 0..n {
                let tmp = h.get(col + 1, c);
                h.set(col + 1, c, h.get(piv, c));
                h.set(piv, c, tmp);
            }
            for r in 0..n {
                let tmp = h.get(r, col + 1);
                h.set(r, col + 1, h.get(r, piv));
                h.set(r, piv, tmp);
            }
        }
        let d = h.get(col + 1, col);
        for r in (col + 2)..n {
            let f = h.get(r, col) / d;
            if f == ZERO {
                continue;
            }
            for c in 0..n {
                let v = h.get(r, c) - f * h.get(col + 1, c);
                h.set(r, c, v);
            }
            for rr in 0..n {
                let v = h.get(rr, col + 1) + f * h.get(rr, r);
                h.set(rr, col + 1, v);
            }
        }
    }
    // p_k(z) = (z - h[k-1][k-1]) p_{k-1}(z)
    //          - sum_i h[i][k-1] * (prod of subdiagonals between) * p_i(z)
    let mut ps: Vec<Poly> = Vec::with_capacity(n + 1);
    ps.push(vec![ONE]);
    for k in 1..=n {
        let diag = h.get(k - 1, k - 1);
        let mut p = poly_mul(&vec![-diag, ONE], &ps[k - 1]);
        let mut subprod = ONE;
        for i in (0..k - 1).rev() {
            subprod *= h.get(i + 1, i);
            let coef = h.get(i, k - 1) * subprod;
            p = poly_add(&p, &poly_scale(&ps[i], -coef));
        }
        ps.push(p);
    }
    ps.pop().unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoConvergence;

/// All roots of the monic polynomial `c` (ascending coefficients, c[n] = 1)
/// by Aberth-Ehrlich simultaneous iteration.
pub fn aberth_roots(c: &[Complex64]) -> Result<Vec<Complex64>, NoConvergence> {
    let n = c.len() - 1;
    assert!(n >= 1);
    if n == 1 {
        return Ok(vec![-c[0]]);
    }
    let tol = 1e-13;
    let max_iter = 200;

    let center = -c[n - 1] / n as f64;
    let radius = 1.0 + c[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.7;
            center + 0.5 * radius * Complex64::new(ang.cos(), ang.sin())
        })
        .collect();

    let eval = |x: Complex64| -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &ck in c.iter().rev() {
            dp = dp * x + p;
            p = p * x + ck;
        }
        (p, dp)
    };

    for _ in 0..max_iter {
        let mut max_step = 0.0_f64;
        for k in 0..n {
            let (p, dp) = eval(z[k]);
            if p == ZERO {
                continue;
            }
            let w = if dp == ZERO { p } else { p / dp };
            let mut s = ZERO;
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d != ZERO {
                        s += ONE / d;
                    }
                }
            }
            let denom = ONE - w * s;
            let step = if denom.norm() < 1e-300 { w } else { w / denom };
            z[k] -= step;
            let rel = step.norm() / (1.0 + z[k].norm());
            max_step = max_step.max(rel);
        }
        if max_step < tol {
            return Ok(z);
        }
    }
    // Near multiple roots the correction stalls at the cluster radius; accept
    // if the residuals are small relative to the evaluation scale.
    let ok = z.iter().all(|&x| {
        let (p, _) = eval(x);
        let scale: f64 = c
            .iter()
            .enumerate()
            .map(|(k, ck)| ck.norm() * x.norm().powi(k as i32))
            .sum::<f64>()
            .max(1e-300);
        p.norm() / scale < 1e-10
    });
    if ok {
        Ok(z)
    } else {
        Err(NoConvergence)
    }
}

/// Double-double scalar: value is hi + lo with |lo| <= ulp(hi)/2.
/// Only what the clustered-root refinement needs.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        let err = a.mul_add(b, -p);
        Self { hi: p, lo: err }
    }

    fn add(self, other: Dd) -> Self {
        let s = Self::two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        let t = Self::two_sum(s.hi, lo);
        Self { hi: t.hi, lo: t.lo }
    }

    fn mul(self, other: Dd) -> Self {
        let p = Self::two_prod(self.hi, other.hi);
        let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
        let t = Self::two_sum(p.hi, lo);
        Self { hi: t.hi, lo: t.lo }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DdC {
    re: Dd,
    im: Dd,
}

impl DdC {
    fn from(z: Complex64) -> Self {
        Self {
            re: Dd::from(z.re),
            im: Dd::from(z.im),
        }
    }

    fn zero() -> Self {
        Self::from(ZERO)
    }

    fn neg(self) -> Self {
        Self {
            re: Dd {
                hi: -self.re.hi,
                lo: -self.re.lo,
            },
            im: Dd {
                hi: -self.im.hi,
                lo: -self.im.lo,
            },
        }
    }

    fn add(self, o: DdC) -> Self {
        Self {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    fn mul(self, o: DdC) -> Self {
        let rr = self.re.mul(o.re);
        let ii = self.im.mul(o.im);
        let ri = self.re.mul(o.im);
        let ir = self.im.mul(o.re);
        Self {
            re: rr.add(Dd {
                hi: -ii.hi,
                lo: -ii.lo,
            }),
            im: ri.add(ir),
        }
    }

    pub fn value(self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

type DdPoly = Vec<DdC>;

fn dd_poly_add(a: &DdPoly, b: &DdPoly) -> DdPoly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            a.get(k)
                .copied()
                .unwrap_or_else(DdC::zero)
                .add(b.get(k).copied().unwrap_or_else(DdC::zero))
        })
        .collect()
}

fn dd_poly_mul(a: &DdPoly, b: &DdPoly) -> DdPoly {
    let mut out = vec![DdC::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(x.mul(y));
        }
    }
    out
}

/// Characteristic polynomial with double-double coefficients. The widened
/// coefficients are what lets a double root split cleanly: with plain f64
/// coefficients the root pair carries an O(sqrt(machine epsilon)) error no
/// matter how precisely the polynomial is evaluated afterwards. Exact
/// cofactor expansion for N <= 4; beyond that the Hessenberg coefficients
/// are promoted as-is and the refinement is limited by their accuracy.
pub fn char_poly_dd(a: &ComplexMatrix) -> DdPoly {
    let n = a.n();
    if n <= 4 {
        let entries: Vec<Vec<DdPoly>> = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        if r == c {
                            vec![DdC::from(-a.get(r, c)), DdC::from(ONE)]
                        } else {
                            vec![DdC::from(-a.get(r, c))]
                        }
                    })
                    .collect()
            })
            .collect();
        let idx: Vec<usize> = (0..n).collect();
        dd_poly_det(&entries, &idx)
    } else {
        hessenberg_char_poly(a).iter().map(|&c| DdC::from(c)).collect()
    }
}

fn dd_poly_det(entries: &[Vec<DdPoly>], cols: &[usize]) -> DdPoly {
    let row = entries.len() - cols.len();
    if cols.len() == 1 {
        return entries[row][cols[0]].clone();
    }
    let mut acc: DdPoly = vec![DdC::zero()];
    for (k, &c) in cols.iter().enumerate() {
        let minor_cols: Vec<usize> = cols.iter().copied().filter(|&cc| cc != c).collect();
        let minor = dd_poly_det(entries, &minor_cols);
        let mut term = dd_poly_mul(&entries[row][c], &minor);
        if k % 2 == 1 {
            for t in &mut term {
                *t = t.neg();
            }
        }
        acc = dd_poly_add(&acc, &term);
    }
    acc
}

/// Horner evaluation in double-double arithmetic.
fn horner_dd(c: &[DdC], x: Complex64) -> Complex64 {
    let xd = DdC::from(x);
    let mut acc = DdC::zero();
    for &ck in c.iter().rev() {
        acc = acc.mul(xd).add(ck);
    }
    acc.value()
}

fn derivative_coeffs_dd(c: &[DdC]) -> Vec<DdC> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| ck.mul(DdC::from(Complex64::new(k as f64, 0.0))))
        .collect()
}

/// Re-solve a near-coincident root pair from the local quadratic model of
/// the polynomial at the cluster midpoint, evaluated in double-double
/// precision. Without this the computed gap of a double root bottoms out
/// near sqrt(machine epsilon), well above the EP acceptance floor.
fn refine_pair(c: &[DdC], r1: Complex64, r2: Complex64) -> (Complex64, Complex64) {
    let m = 0.5 * (r1 + r2);
    let dc = derivative_coeffs_dd(c);
    let ddc = derivative_coeffs_dd(&dc);
    let p = horner_dd(c, m);
    let dp = horner_dd(&dc, m);
    let ddp = horner_dd(&ddc, m);
    if ddp.norm() < 1e-300 {
        return (r1, r2);
    }
    // p + dp*d + (ddp/2) d^2 = 0
    let disc = (dp * dp - 2.0 * p * ddp).sqrt();
    let da = (-dp + disc) / ddp;
    let db = (-dp - disc) / ddp;
    (m + da, m + db)
}

/// Post-pass over a root set: any pair closer than `1e-6 * (1 + |z|)` is
/// re-solved through the local quadratic model.
pub fn polish_clusters(c: &[DdC], roots: &mut [Complex64]) {
    let n = roots.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = 1.0 + roots[i].norm().max(roots[j].norm());
            if (roots[i] - roots[j]).norm() < 1e-6 * scale {
                let (a, b) = refine_pair(c, roots[i], roots[j]);
                if a.is_finite() && b.is_finite() {
                    roots[i] = a;
                    roots[j] = b;
                }
            }
        }
    }
}
