//! Observables computed from an eigen set: mixing over the unperturbed basis,
//! the purity difference `delta`, the bi-orthogonality measures `A` and `B`,
//! and the branch-point eigenvector relation check.

use num_complex::Complex64;

use crate::eigen::linalg::{inner, norm2};
use crate::eigen::EigenSet;

/// Mixing of one eigenvector over the unperturbed (uncoupled) basis. Because
/// the unperturbed matrix is diagonal, the basis states are the canonical
/// unit vectors and `b_ij` is simply the j-th vector component.
#[derive(Debug, Clone)]
pub struct MixingRow {
    /// Position of the eigenpair in the set.
    pub index: usize,
    /// Basis state this eigenvector is dominantly built from
    /// (argmax_j |b_ij|^2, disambiguated greedily across the set).
    pub dominant: usize,
    pub coefficients: Vec<Complex64>,
    pub abs2: Vec<f64>,
    /// Purity difference `|b_ii|^2 - max_{j != i} |b_ij|^2` with `i` the
    /// dominant basis state, so that delta stays in [0, 1] for two-level
    /// systems regardless of eigenvalue ordering. For N > 2 this dominant-
    /// component generalization goes beyond the two-level definition.
    pub delta: f64,
}

/// Mixing rows for every eigenpair in the set.
pub fn mixing(set: &EigenSet) -> Vec<MixingRow> {
    let n = set.n();
    // greedy dominant-component assignment, largest magnitude first, so two
    // rows never claim the same basis state
    let mut assigned = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut entries: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in set.pairs.iter().enumerate() {
        for (j, z) in p.vector.iter().enumerate() {
            entries.push((z.norm_sqr(), i, j));
        }
    }
    entries.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut row_done = vec![false; n];
    for (_, i, j) in entries {
        if !row_done[i] && !taken[j] {
            assigned[i] = j;
            row_done[i] = true;
            taken[j] = true;
        }
    }

    set.pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let coefficients = p.vector.clone();
            let abs2: Vec<f64> = coefficients.iter().map(|z| z.norm_sqr()).collect();
            let dom = assigned[i];
            let off_max = abs2
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != dom)
                .map(|(_, &v)| v)
                .fold(0.0, f64::max);
            MixingRow {
                index: i,
                dominant: dom,
                delta: abs2[dom] - off_max,
                coefficients,
                abs2,
            }
        })
        .collect()
}

/// Per-state purity differences, in set order.
pub fn delta_at(set: &EigenSet) -> Vec<f64> {
    mixing(set).into_iter().map(|r| r.delta).collect()
}

/// Bi-orthogonality measures and structural-identity defects.
#[derive(Debug, Clone)]
pub struct BiorthMeasures {
    /// Conjugated self-overlaps `A_i = <Phi_i|Phi_i> >= 1`, per state.
    pub a: Vec<f64>,
    /// `B_ij = |<Phi_i|Phi_j>|` for i < j, in `pairs` order.
    pub b: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    /// Largest |Im <Phi_i|Phi_i>| (must vanish).
    pub self_imag_defect: f64,
    /// Largest |Re <Phi_i|Phi_j>| for i != j (cross overlaps are purely
    /// imaginary).
    pub cross_real_defect: f64,
    /// Largest |<Phi_i|Phi_j> + <Phi_j|Phi_i>| for i != j (antisymmetry).
    pub antisym_defect: f64,
}

pub fn biorth_measures(set: &EigenSet) -> BiorthMeasures {
    let n = set.n();
    let mut a = Vec::with_capacity(n);
    let mut self_imag_defect = 0.0_f64;
    for p in &set.pairs {
        let s = inner(&p.vector, &p.vector);
        a.push(s.re);
        self_imag_defect = self_imag_defect.max(s.im.abs());
    }
    let mut b = Vec::new();
    let mut pairs = Vec::new();
    let mut cross_real_defect = 0.0_f64;
    let mut antisym_defect = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let ij = inner(&set.pairs[i].vector, &set.pairs[j].vector);
            let ji = inner(&set.pairs[j].vector, &set.pairs[i].vector);
            b.push(ij.norm());
            pairs.push((i, j));
            cross_real_defect = cross_real_defect.max(ij.re.abs()).max(ji.re.abs());
            antisym_defect = antisym_defect.max((ij + ji).norm());
        }
    }
    BiorthMeasures {
        a,
        b,
        pairs,
        self_imag_defect,
        cross_real_defect,
        antisym_defect,
    }
}

/// Branch-point eigenvector relation check for two-level sets: the defect
/// `min_pm |v1 -+ i v2| / |v1|` on copies renormalized to unit conjugated
/// norm. Tends to 0 approaching an EP; 1 by convention for an uncoupled set
/// (both vectors are pure basis states, the relation is meaningless there).
pub fn ep_vector_relation(set: &EigenSet) -> f64 {
    assert_eq!(set.n(), 2);
    let unit = |v: &[Complex64]| -> Vec<Complex64> {
        let s = norm2(v);
        v.iter().map(|z| z / s).collect()
    };
    let v1 = unit(&set.pairs[0].vector);
    let v2 = unit(&set.pairs[1].vector);
    let pure = |v: &[Complex64]| v.iter().any(|z| z.norm_sqr() > 1.0 - 1e-12);
    if pure(&v1) && pure(&v2) {
        return 1.0;
    }
    let i = Complex64::new(0.0, 1.0);
    let d = |sign: f64| -> f64 {
        let r: Vec<Complex64> = v1
            .iter()
            .zip(&v2)
            .map(|(a, b)| a - sign * i * b)
            .collect();
        norm2(&r)
    };
    d(1.0).min(d(-1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigen2_analytic;
    use crate::model::{EnergyLaw, LevelSpec, ModelSpec};

    fn demo_two_level(g1h: f64, g2h: f64, omega: f64) -> ModelSpec {
        ModelSpec::two_level(
            LevelSpec::new(EnergyLaw::new(1.0, -0.5), 2.0 * g1h),
            LevelSpec::new(EnergyLaw::new(0.0, 1.0), 2.0 * g2h),
            omega,
        )
    }

    const A_CR: f64 = 2.0 / 3.0;

    #[test]
    fn equal_mixing_for_discrete_states_at_crossing() {
        let m = demo_two_level(0.0, 0.0, 0.05);
        let rows = mixing(&eigen2_analytic(&m, A_CR));
        for r in &rows {
            assert!((r.abs2[0] - 0.5).abs() < 1e-10, "{:?}", r.abs2);
            assert!((r.abs2[1] - 0.5).abs() < 1e-10);
            assert!(r.delta.abs() < 1e-10);
        }
    }

    #[test]
    fn uncoupled_mixing_is_identity() {
        let m = demo_two_level(0.3, 0.8, 0.0);
        let rows = mixing(&eigen2_analytic(&m, 0.2));
        for r in &rows {
            assert!((r.abs2[r.dominant] - 1.0).abs() < 1e-12);
            assert!((r.delta - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_zero_below_critical_width() {
        // (delta gamma / 2)^2 = 0.0081 < 4 omega^2 = 0.01
        let m = demo_two_level(0.90, 0.99, 0.05);
        let set = eigen2_analytic(&m, A_CR);
        for (r, d) in mixing(&set).iter().zip(delta_at(&set)) {
            assert!(d.abs() < 1e-8, "delta = {d}");
            let ratio = r.coefficients[1].norm() / r.coefficients[0].norm();
            assert!((ratio - 1.0).abs() < 1e-8 || (1.0 / ratio - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn delta_one_above_critical_width() {
        // (delta gamma / 2)^2 = 0.010201 > 4 omega^2 = 0.01
        let m = demo_two_level(1.010, 1.111, 0.05);
        for d in delta_at(&eigen2_analytic(&m, A_CR)) {
            assert!((d - 1.0).abs() < 1e-8, "delta = {d}");
        }
    }

    #[test]
    fn delta_tends_to_one_away_from_crossing() {
        let m = demo_two_level(0.0, 0.0, 0.05);
        for a in [0.0, 1.3] {
            for d in delta_at(&eigen2_analytic(&m, a)) {
                assert!(d > 0.9, "delta = {d} at a = {a}");
            }
        }
    }

    #[test]
    fn critical_region_symmetry_of_b() {
        // b_11 = b_22 and b_12 = -b_21 in the critical region
        let m = demo_two_level(0.90, 0.99, 0.05);
        let set = eigen2_analytic(&m, A_CR);
        let rows = mixing(&set);
        let b11 = rows[0].coefficients[rows[0].dominant];
        let b22 = rows[1].coefficients[rows[1].dominant];
        let b12 = rows[0].coefficients[rows[1].dominant];
        let b21 = rows[1].coefficients[rows[0].dominant];
        assert!((b11 - b22).norm() < 1e-8, "{b11} vs {b22}");
        assert!((b12 + b21).norm() < 1e-8, "{b12} vs {b21}");
    }

    #[test]
    fn biorth_limits_real_case() {
        let m = demo_two_level(0.0, 0.0, 0.05);
        let meas = biorth_measures(&eigen2_analytic(&m, 0.61));
        for &a in &meas.a {
            assert!((a - 1.0).abs() < 1e-12);
        }
        for &b in &meas.b {
            assert!(b < 1e-12);
        }
    }

    #[test]
    fn biorth_grows_near_ep() {
        let m = demo_two_level(1.0, 1.1, 0.05);
        let near = biorth_measures(&eigen2_analytic(&m, A_CR + 1e-4));
        let far = biorth_measures(&eigen2_analytic(&m, A_CR + 1e-2));
        assert!(near.a[0] > far.a[0]);
        assert!(near.b[0] > far.b[0]);
        assert!(near.a[0] > 1.0);
    }

    #[test]
    fn biorth_structure_identities() {
        let m = demo_two_level(0.9, 0.99, 0.05);
        let meas = biorth_measures(&eigen2_analytic(&m, 0.7));
        assert!(meas.self_imag_defect < 1e-10);
        assert!(meas.cross_real_defect < 1e-10);
        assert!(meas.antisym_defect < 1e-10);
    }

    #[test]
    fn ep_relation_defect_near_double_pole() {
        let m = demo_two_level(1.0, 1.1, 0.05);
        for h in [1e-6, -1e-6] {
            let set = eigen2_analytic(&m, A_CR + h);
            let d = ep_vector_relation(&set);
            assert!(d < 1e-2, "defect = {d} at offset {h}");
        }
    }

    #[test]
    fn ep_relation_defect_order_one_for_discrete_states() {
        let m = demo_two_level(0.0, 0.0, 0.05);
        let d = ep_vector_relation(&eigen2_analytic(&m, A_CR));
        assert!(d > 0.5, "defect = {d}");
    }

    #[test]
    fn ep_relation_defect_one_for_uncoupled() {
        let m = demo_two_level(0.3, 0.8, 0.0);
        let d = ep_vector_relation(&eigen2_analytic(&m, 0.2));
        assert_eq!(d, 1.0);
    }
}
