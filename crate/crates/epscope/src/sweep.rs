//! Parameter sweeps: evaluate the model over a grid of `a`, assign eigenpairs
//! to continuous trajectories by unconjugated-overlap matching, and classify
//! (near-)crossings as free or avoided in energy and in width.

use num_complex::Complex64;
use thiserror::Error;

use crate::diagnostics::{biorth_measures, mixing, MixingRow};
use crate::eigen::linalg::bilinear;
use crate::eigen::{eigen2_analytic, eigen_general, EigenError, EigenSet};
use crate::model::{build_matrix, ModelSpec};

/// Overlap magnitude below which two consecutive eigenvectors are not
/// considered the same branch and the grid is refined.
pub const CONTINUITY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub a_min: f64,
    pub a_max: f64,
    pub steps: usize,
    pub adaptive: bool,
    /// Refinement floor for the adaptive bisection near suspected EPs.
    pub min_step: f64,
}

impl SweepGrid {
    pub fn new(a_min: f64, a_max: f64, steps: usize) -> Result<Self, SweepError> {
        if steps < 2 {
            return Err(SweepError::InvalidGrid("steps must be >= 2"));
        }
        if !(a_min < a_max) {
            return Err(SweepError::InvalidGrid("a_min must be < a_max"));
        }
        Ok(Self {
            a_min,
            a_max,
            steps,
            adaptive: true,
            min_step: 1e-9,
        })
    }

    pub fn points(&self) -> Vec<f64> {
        let h = (self.a_max - self.a_min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.a_max
                } else {
                    self.a_min + k as f64 * h
                }
            })
            .collect()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("trajectory assignment ambiguous at a = {a} even at minimum step")]
    TrackingAmbiguity { a: f64 },
    #[error("eigen solve failed at a = {a}: {source}")]
    Eigen { a: f64, source: EigenError },
    #[error("closest approach not bracketed inside the window")]
    WindowTooNarrow,
}

/// One accepted grid point of one trajectory.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub a: f64,
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub mixing: MixingRow,
    /// Conjugated self-overlap `A`; NaN at degenerate points.
    pub a_measure: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub label: usize,
    pub points: Vec<SweepPoint>,
}

impl Trajectory {
    pub fn energies(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.a, p.value.re)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Accepted grid points, ascending (refinement points included).
    pub a: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
    /// Cross bi-orthogonality `B_ij` per grid point, trajectory pairs i < j.
    pub b_cross: Vec<Vec<f64>>,
    pub pair_index: Vec<(usize, usize)>,
    /// Grid locations where the overlap stayed below threshold at the
    /// refinement floor (crossing events on the path).
    pub ambiguous_at: Vec<f64>,
}

enum Solved {
    Regular(EigenSet),
    /// Coalesced pair: both eigenvalues equal this value, no usable vectors.
    Degenerate { value: Complex64, residual: f64 },
}

fn solve_point(model: &ModelSpec, a: f64) -> Result<Solved, SweepError> {
    if model.n() == 2 {
        let set = eigen2_analytic(model, a);
        if set.degenerate {
            let value = set.pairs[0].value;
            let residual = set.pairs[0].residual;
            Ok(Solved::Degenerate { value, residual })
        } else {
            Ok(Solved::Regular(set))
        }
    } else {
        match eigen_general(&build_matrix(model, a)) {
            Ok(set) => Ok(Solved::Regular(set)),
            Err(EigenError::DegenerateAtEP { value }) => Ok(Solved::Degenerate {
                value,
                residual: f64::NAN,
            }),
            Err(source) => Err(SweepError::Eigen { a, source }),
        }
    }
}

/// Greedy assignment on the |overlap| matrix, largest magnitude first.
/// Vectors are kept in their bi-orthonormal scaling (v^T v = 1), so the
/// same-branch overlap between nearby points stays close to one even where
/// the conjugated norm blows up near an EP.
/// Returns perm with `perm[traj] = set index` and the smallest assigned
/// overlap.
fn assign(prev: &[Vec<Complex64>], set: &EigenSet) -> (Vec<usize>, f64) {
    let n = prev.len();
    let mut overlaps = vec![vec![0.0; n]; n];
    for (i, pv) in prev.iter().enumerate() {
        for (j, p) in set.pairs.iter().enumerate() {
            overlaps[i][j] = bilinear(pv, &p.vector).norm();
        }
    }
    let mut perm = vec![usize::MAX; n];
    let mut used_row = vec![false; n];
    let mut used_col = vec![false; n];
    let mut worst = f64::INFINITY;
    for _ in 0..n {
        let mut best = (0, 0, -1.0);
        for i in 0..n {
            if used_row[i] {
                continue;
            }
            for j in 0..n {
                if used_col[j] {
                    continue;
                }
                if overlaps[i][j] > best.2 {
                    best = (i, j, overlaps[i][j]);
                }
            }
        }
        perm[best.0] = best.1;
        used_row[best.0] = true;
        used_col[best.1] = true;
        worst = worst.min(best.2);
    }
    (perm, worst)
}

/// Evaluate the model over the grid and track N continuous trajectories.
pub fn run_sweep(model: &ModelSpec, grid: &SweepGrid) -> Result<SweepResult, SweepError> {
    let n = model.n();
    let mut result = SweepResult {
        a: Vec::new(),
        trajectories: (0..n)
            .map(|label| Trajectory {
                label,
                points: Vec::new(),
            })
            .collect(),
        b_cross: Vec::new(),
        pair_index: {
            let mut ps = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    ps.push((i, j));
                }
            }
            ps
        },
        ambiguous_at: Vec::new(),
    };

    // stack of pending a values, largest last so pop yields ascending order
    let mut pending: Vec<f64> = grid.points();
    pending.reverse();
    // tracking reference: vectors of the last non-degenerate point
    let mut prev_vecs: Option<Vec<Vec<Complex64>>> = None;
    let mut last_a = f64::NEG_INFINITY;

    while let Some(a) = pending.pop() {
        match solve_point(model, a)? {
            Solved::Degenerate { value, residual } => {
                push_degenerate_point(&mut result, a, value, residual, n);
            }
            Solved::Regular(set) => {
                let (perm, worst) = match &prev_vecs {
                    // label trajectories by dominant basis component at the
                    // first point; the threshold does not apply here
                    None => {
                        let basis: Vec<Vec<Complex64>> = (0..n)
                            .map(|i| {
                                let mut e = vec![Complex64::new(0.0, 0.0); n];
                                e[i] = Complex64::new(1.0, 0.0);
                                e
                            })
                            .collect();
                        (assign(&basis, &set).0, 1.0)
                    }
                    Some(prev) => assign(prev, &set),
                };
                if worst < CONTINUITY_THRESHOLD {
                    let step = a - last_a;
                    if grid.adaptive && step > grid.min_step && last_a.is_finite() {
                        let mid = 0.5 * (last_a + a);
                        if mid > last_a && mid < a {
                            pending.push(a);
                            pending.push(mid);
                            continue;
                        }
                    }
                    // refinement floor reached
                    let all_below = {
                        let prev = prev_vecs.as_ref().unwrap();
                        prev.iter().all(|pv| {
                            set.pairs
                                .iter()
                                .all(|p| bilinear(pv, &p.vector).norm() < CONTINUITY_THRESHOLD)
                        })
                    };
                    if all_below {
                        return Err(SweepError::TrackingAmbiguity { a });
                    }
                    result.ambiguous_at.push(a);
                }
                prev_vecs = Some(
                    perm.iter()
                        .map(|&j| set.pairs[j].vector.clone())
                        .collect(),
                );
                push_regular_point(&mut result, a, &set, &perm);
            }
        }
        last_a = a;
    }
    Ok(result)
}

fn push_regular_point(result: &mut SweepResult, a: f64, set: &EigenSet, perm: &[usize]) {
    let n = perm.len();
    // reorder the set into trajectory order before computing diagnostics so
    // row indices line up with trajectory labels
    let reordered = EigenSet {
        pairs: perm.iter().map(|&j| set.pairs[j].clone()).collect(),
        gram_condition: set.gram_condition,
        degenerate: false,
    };
    let rows = mixing(&reordered);
    let meas = biorth_measures(&reordered);
    result.a.push(a);
    for (i, row) in rows.into_iter().enumerate() {
        let p = &reordered.pairs[i];
        result.trajectories[i].points.push(SweepPoint {
            a,
            value: p.value,
            vector: p.vector.clone(),
            residual: p.residual,
            mixing: row,
            a_measure: meas.a[i],
            degenerate: false,
        });
    }
    let mut b_row = Vec::with_capacity(n * (n - 1) / 2);
    for (k, _) in meas.pairs.iter().enumerate() {
        b_row.push(meas.b[k]);
    }
    result.b_cross.push(b_row);
}

fn push_degenerate_point(
    result: &mut SweepResult,
    a: f64,
    value: Complex64,
    residual: f64,
    n: usize,
) {
    result.a.push(a);
    for i in 0..n {
        let nanrow = MixingRow {
            index: i,
            dominant: i,
            coefficients: vec![Complex64::new(f64::NAN, f64::NAN); n],
            abs2: vec![f64::NAN; n],
            delta: f64::NAN,
        };
        result.trajectories[i].points.push(SweepPoint {
            a,
            value,
            vector: Vec::new(),
            residual,
            mixing: nanrow,
            a_measure: f64::NAN,
            degenerate: true,
        });
    }
    result
        .b_cross
        .push(vec![f64::NAN; n * (n - 1) / 2]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingMode {
    FreeCross,
    Avoided,
}

#[derive(Debug, Clone)]
pub struct CrossingReport {
    /// Closest-approach location (grid point of minimum complex gap).
    pub a_star: f64,
    pub energy_gap_min: f64,
    pub width_gap_min: f64,
    pub energy_mode: CrossingMode,
    pub width_mode: CrossingMode,
    pub exchange: bool,
    /// Complex eigenvalue gap at `a_star`.
    pub ep_proximity: f64,
}

/// Classify the (near-)crossing of trajectories `pair` inside `window`.
///
/// A mode is a free crossing when the signed gap changes sign across the
/// closest approach (or the traces are identical to within rounding);
/// otherwise the crossing is avoided. Exchange is detected from the dominant
/// basis component at the window edges.
pub fn classify_crossing(
    result: &SweepResult,
    pair: (usize, usize),
    window: (f64, f64),
) -> Result<CrossingReport, SweepError> {
    let (ti, tj) = pair;
    let idx: Vec<usize> = result
        .a
        .iter()
        .enumerate()
        .filter(|&(_, &a)| a >= window.0 && a <= window.1)
        .map(|(k, _)| k)
        .collect();
    if idx.len() < 3 {
        return Err(SweepError::WindowTooNarrow);
    }
    let pt = |t: usize, k: usize| -> &SweepPoint { &result.trajectories[t].points[k] };
    let gap = |k: usize| (pt(ti, k).value - pt(tj, k).value).norm();
    let kmin = idx
        .iter()
        .copied()
        .min_by(|&x, &y| gap(x).partial_cmp(&gap(y)).unwrap())
        .unwrap();
    if kmin == idx[0] || kmin == *idx.last().unwrap() {
        return Err(SweepError::WindowTooNarrow);
    }

    let de: Vec<f64> = idx
        .iter()
        .map(|&k| pt(ti, k).value.re - pt(tj, k).value.re)
        .collect();
    let dw: Vec<f64> = idx
        .iter()
        .map(|&k| pt(tj, k).value.im - pt(ti, k).value.im) // width = -2 Im
        .collect();
    let mode = |d: &[f64]| -> CrossingMode {
        let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scale = lo.abs().max(hi.abs());
        if lo < 0.0 && hi > 0.0 || scale < 1e-10 {
            CrossingMode::FreeCross
        } else {
            CrossingMode::Avoided
        }
    };

    let first_dom = first_valid_dominant(result, ti, &idx, false);
    let last_dom = first_valid_dominant(result, ti, &idx, true);
    let exchange = match (first_dom, last_dom) {
        (Some(x), Some(y)) => x != y,
        _ => false,
    };

    Ok(CrossingReport {
        a_star: result.a[kmin],
        energy_gap_min: idx.iter().map(|&k| de[pos(&idx, k)].abs()).fold(f64::INFINITY, f64::min),
        width_gap_min: idx.iter().map(|&k| dw[pos(&idx, k)].abs()).fold(f64::INFINITY, f64::min),
        energy_mode: mode(&de),
        width_mode: mode(&dw),
        exchange,
        ep_proximity: gap(kmin),
    })
}

fn pos(idx: &[usize], k: usize) -> usize {
    idx.iter().position(|&x| x == k).unwrap()
}

fn first_valid_dominant(
    result: &SweepResult,
    traj: usize,
    idx: &[usize],
    from_end: bool,
) -> Option<usize> {
    let it: Box<dyn Iterator<Item = &usize>> = if from_end {
        Box::new(idx.iter().rev())
    } else {
        Box::new(idx.iter())
    };
    for &k in it {
        let p = &result.trajectories[traj].points[k];
        if !p.degenerate {
            return Some(p.mixing.dominant);
        }
    }
    None
}
