//! Branch-point location: the closed-form two-level solution and a numeric
//! gap minimization for N-level models.
//!
//! For two levels the condition `F(a, w) = 0` splits into
//! `Im F = -(e1 - e2) (g1 - g2) = 0` and
//! `Re F = (e1 - e2)^2 - ((g1 - g2)/2)^2 + 4 w^2 = 0`, so the branch point
//! sits at the root of `e1(a) = e2(a)` with critical coupling
//! `w_cr = |g1 - g2| / 4` (equivalently critical width difference
//! `|dg|_cr = 4 w` at fixed coupling).

use num_complex::Complex64;
use thiserror::Error;

use crate::eigen::{discriminant, eigenvalues, EigenError};
use crate::model::{build_matrix, ModelSpec};

#[derive(Debug, Error, PartialEq)]
pub enum EpError {
    #[error("energy laws are parallel, the unperturbed levels never cross")]
    NoCrossing,
    #[error("equal widths cannot be scaled onto the branch point at nonzero coupling")]
    DegenerateWidths,
    #[error("search box does not bracket a gap minimum")]
    NotBracketed,
    #[error("gap minimum {gap:.3e} exceeds tolerance {tol:.3e}: avoided crossing, not an EP")]
    GapFloorNotReached { gap: f64, tol: f64 },
    #[error("eigen solve failed during search: {0}")]
    Eigen(EigenError),
}

/// Which parameter the search solved for, and its critical value.
#[derive(Debug, Clone, PartialEq)]
pub enum CriticalParam {
    /// Critical coupling strength (two-level).
    Omega(f64),
    /// Common factor on all widths, plus the critical widths it produces.
    WidthScale { scale: f64, gamma_cr: Vec<f64> },
    /// Factor on one coupling entry.
    CouplingScale { k: usize, l: usize, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub a_cr: f64,
    pub param: CriticalParam,
    /// Coalesced eigenvalue X.
    pub value: Complex64,
    /// |F| (two-level) or eigenvalue gap (numeric) at the reported point.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveFor {
    Omega,
    GammaScale,
}

/// Closed-form branch point of a two-level model.
pub fn locate_ep_2level(model: &ModelSpec, solve_for: SolveFor) -> Result<BranchPoint, EpError> {
    assert_eq!(model.n(), 2);
    let l1 = model.levels()[0];
    let l2 = model.levels()[1];
    let ds = l1.energy.slope - l2.energy.slope;
    if ds == 0.0 {
        return Err(EpError::NoCrossing);
    }
    let a_cr = (l2.energy.intercept - l1.energy.intercept) / ds;
    let dgamma = l1.gamma - l2.gamma;
    let e_mid = 0.5 * (l1.energy.eval(a_cr) + l2.energy.eval(a_cr));
    match solve_for {
        SolveFor::Omega => {
            // equal widths collapse the EP onto the unperturbed crossing
            let omega_cr = dgamma.abs() / 4.0;
            let critical = crate::model::ModelSpec::two_level(l1, l2, omega_cr);
            let residual = discriminant(&critical, a_cr).norm();
            Ok(BranchPoint {
                a_cr,
                param: CriticalParam::Omega(omega_cr),
                value: Complex64::new(e_mid, -0.25 * (l1.gamma + l2.gamma)),
                residual,
            })
        }
        SolveFor::GammaScale => {
            let omega = model.omega(0, 1);
            if dgamma == 0.0 {
                return Err(EpError::DegenerateWidths);
            }
            let scale = 4.0 * omega.abs() / dgamma.abs();
            let critical = model.with_width_scale(scale);
            let residual = discriminant(&critical, a_cr).norm();
            Ok(BranchPoint {
                a_cr,
                param: CriticalParam::WidthScale {
                    scale,
                    gamma_cr: vec![l1.gamma * scale, l2.gamma * scale],
                },
                value: Complex64::new(e_mid, -0.25 * (l1.gamma + l2.gamma) * scale),
                residual,
            })
        }
    }
}

/// What the numeric search scales alongside `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleTarget {
    AllWidths,
    CouplingEntry(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub a: (f64, f64),
    pub scale: (f64, f64),
}

fn scaled_model(model: &ModelSpec, target: ScaleTarget, s: f64) -> ModelSpec {
    match target {
        ScaleTarget::AllWidths => model.with_width_scale(s),
        ScaleTarget::CouplingEntry(k, l) => model.with_coupling_scale(k, l, s),
    }
}

/// Numeric branch-point search: minimize the eigenvalue gap of `pair` over
/// `(a, scale)` by restarted Nelder-Mead, then coordinate golden-section
/// polish. The gap function has a conical minimum at an EP, which is why a
/// derivative-free method is used.
pub fn locate_ep_numeric(
    model: &ModelSpec,
    pair: (usize, usize),
    target: ScaleTarget,
    search: SearchBox,
) -> Result<BranchPoint, EpError> {
    locate_ep_numeric_tol(model, pair, target, search, crate::eigen::EP_GAP_FLOOR)
}

/// Same search with an explicit relative accept tolerance on the gap.
pub fn locate_ep_numeric_tol(
    model: &ModelSpec,
    pair: (usize, usize),
    target: ScaleTarget,
    search: SearchBox,
    rel_tol: f64,
) -> Result<BranchPoint, EpError> {
    let (i, j) = pair;
    assert!(i < model.n() && j < model.n() && i != j);
    let (a_lo, a_hi) = search.a;
    let (s_lo, s_hi) = search.scale;
    assert!(a_lo < a_hi && s_lo < s_hi);

    let gap_at = |a: f64, s: f64| -> Result<(f64, Complex64), EpError> {
        let m = scaled_model(model, target, s);
        let vals = eigenvalues(&build_matrix(&m, a)).map_err(EpError::Eigen)?;
        let gi = vals[i.min(j)];
        let gj = vals[i.max(j)];
        Ok(((gi - gj).norm(), 0.5 * (gi + gj)))
    };
    let objective = |x: [f64; 2]| -> f64 {
        // soft wall outside the box keeps the simplex inside
        let mut penalty = 0.0;
        let clamped = [
            x[0].clamp(a_lo, a_hi),
            x[1].clamp(s_lo, s_hi),
        ];
        penalty += (x[0] - clamped[0]).abs() + (x[1] - clamped[1]).abs();
        match gap_at(clamped[0], clamped[1]) {
            Ok((g, _)) => g + 1e3 * penalty,
            Err(_) => f64::INFINITY,
        }
    };

    // restart from a 5x5 grid of starting points across the box
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for ia in 0..5 {
        for is in 0..5 {
            let start = [
                a_lo + (ia as f64 + 0.5) / 5.0 * (a_hi - a_lo),
                s_lo + (is as f64 + 0.5) / 5.0 * (s_hi - s_lo),
            ];
            let step = [(a_hi - a_lo) / 10.0, (s_hi - s_lo) / 10.0];
            let (x, f) = nelder_mead(&objective, start, step, 250, 1e-14);
            if f < best.1 {
                best = (x, f);
            }
        }
    }

    // coordinate golden-section polish down to the conical tip
    let mut x = best.0;
    let mut half = [(a_hi - a_lo) / 50.0, (s_hi - s_lo) / 50.0];
    for _ in 0..8 {
        for c in 0..2 {
            let (lo, hi) = if c == 0 { (a_lo, a_hi) } else { (s_lo, s_hi) };
            let span = (x[c] - half[c]).max(lo)..(x[c] + half[c]).min(hi);
            let f1 = |t: f64| {
                let mut y = x;
                y[c] = t;
                objective(y)
            };
            x[c] = golden_min(&f1, span.start, span.end, 80);
            half[c] *= 0.25;
        }
    }

    let (gap, midpoint) = gap_at(x[0].clamp(a_lo, a_hi), x[1].clamp(s_lo, s_hi))?;
    let edge_a = (a_hi - a_lo) * 1e-6;
    let edge_s = (s_hi - s_lo) * 1e-6;
    if x[0] - a_lo < edge_a || a_hi - x[0] < edge_a || x[1] - s_lo < edge_s || s_hi - x[1] < edge_s
    {
        return Err(EpError::NotBracketed);
    }
    let hnorm = build_matrix(&scaled_model(model, target, x[1]), x[0]).norm();
    let tol = rel_tol * hnorm;
    if gap > tol {
        return Err(EpError::GapFloorNotReached { gap, tol });
    }
    let param = match target {
        ScaleTarget::AllWidths => CriticalParam::WidthScale {
            scale: x[1],
            gamma_cr: model.levels().iter().map(|lv| lv.gamma * x[1]).collect(),
        },
        ScaleTarget::CouplingEntry(k, l) => CriticalParam::CouplingScale {
            k,
            l,
            scale: x[1],
        },
    };
    Ok(BranchPoint {
        a_cr: x[0],
        param,
        value: midpoint,
        residual: gap,
    })
}

/// Two-parameter Nelder-Mead with standard coefficients.
fn nelder_mead(
    f: &dyn Fn([f64; 2]) -> f64,
    start: [f64; 2],
    step: [f64; 2],
    max_iter: usize,
    tol: f64,
) -> ([f64; 2], f64) {
    let mut simplex = vec![
        start,
        [start[0] + step[0], start[1]],
        [start[0], start[1] + step[1]],
    ];
    let mut fv: Vec<f64> = simplex.iter().map(|&x| f(x)).collect();
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| fv[a].partial_cmp(&fv[b]).unwrap());
        let (b, m, w) = (order[0], order[1], order[2]);
        if (fv[w] - fv[b]).abs() <= tol * (1.0 + fv[b].abs()) {
            break;
        }
        let centroid = [
            0.5 * (simplex[b][0] + simplex[m][0]),
            0.5 * (simplex[b][1] + simplex[m][1]),
        ];
        let refl = [
            centroid[0] + (centroid[0] - simplex[w][0]),
            centroid[1] + (centroid[1] - simplex[w][1]),
        ];
        let fr = f(refl);
        if fr < fv[b] {
            let exp = [
                centroid[0] + 2.0 * (centroid[0] - simplex[w][0]),
                centroid[1] + 2.0 * (centroid[1] - simplex[w][1]),
            ];
            let fe = f(exp);
            if fe < fr {
                simplex[w] = exp;
                fv[w] = fe;
            } else {
                simplex[w] = refl;
                fv[w] = fr;
            }
        } else if fr < fv[m] {
            simplex[w] = refl;
            fv[w] = fr;
        } else {
            let con = [
                centroid[0] + 0.5 * (simplex[w][0] - centroid[0]),
                centroid[1] + 0.5 * (simplex[w][1] - centroid[1]),
            ];
            let fc = f(con);
            if fc < fv[w] {
                simplex[w] = con;
                fv[w] = fc;
            } else {
                for k in 0..3 {
                    if k != b {
                        simplex[k] = [
                            0.5 * (simplex[k][0] + simplex[b][0]),
                            0.5 * (simplex[k][1] + simplex[b][1]),
                        ];
                        fv[k] = f(simplex[k]);
                    }
                }
            }
        }
    }
    let mut bi = 0;
    for k in 1..3 {
        if fv[k] < fv[bi] {
            bi = k;
        }
    }
    (simplex[bi], fv[bi])
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        x1
    } else {
        x2
    }
}
