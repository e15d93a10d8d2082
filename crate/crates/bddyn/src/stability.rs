//! Characteristic-polynomial analysis, Routh-Hurwitz classification, and
//! the sufficient-condition checkers (persistence, boundedness, local and
//! global stability).
//!
//! The checkers evaluate every hypothesis and report both sides of each
//! inequality instead of assuming any conclusion; several of the published
//! sufficient conditions fail at the default parameter set and the reports
//! are expected to say so.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cubic;
use crate::equilibria::{Equilibrium, EquilibriumKind};
use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::model::{jacobian, Params, PredatorIndex};
use crate::scalar::Real;

/// Coefficients of `lambda^3 + k1 lambda^2 + k2 lambda + k3` plus the
/// Hopf test function `C2 = k1 k2 - k3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPoly<T> {
    pub k1: T,
    pub k2: T,
    pub k3: T,
    pub c2: T,
}

impl<T: Real> CharPoly<T> {
    /// `1 + |k1| + |k2| + |k3|`, the scale used by residual tolerances.
    pub fn scale(&self) -> T {
        T::one() + self.k1.abs() + self.k2.abs() + self.k3.abs()
    }
}

/// Characteristic polynomial of a 3x3 matrix: `k1 = -tr`, `k2` the sum of
/// principal 2x2 minors, `k3 = -det`.
pub fn char_poly<T: Real>(j: &Mat3<T>) -> CharPoly<T> {
    let k1 = -j.trace();
    let k2 = j.principal_minors_sum();
    let k3 = -j.det();
    CharPoly {
        k1,
        k2,
        k3,
        c2: k1 * k2 - k3,
    }
}

/// Eigenvalues of a 3x3 matrix via the closed-form cubic, complex roots in
/// conjugate pairs, sorted by (re, im).
pub fn eigenvalues3<T: Real>(j: &Mat3<T>) -> [Complex<T>; 3] {
    let cp = char_poly(j);
    cubic::roots_monic(cp.k1, cp.k2, cp.k3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    StableNode,
    StableFocus,
    Saddle,
    UnstableNode,
    UnstableFocus,
    /// Some eigenvalue real part is zero within tolerance.
    Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport<T> {
    pub equilibrium: Equilibrium<T>,
    pub charpoly: CharPoly<T>,
    /// (re, im) pairs, sorted by (re, im).
    pub eigenvalues: [(T, T); 3],
    pub routh_hurwitz_stable: bool,
    pub classification: Classification,
}

/// Classify eigenvalues with a documented zero-real-part tolerance of
/// `1e-9 * (1 + spectral radius)`.
pub fn classify_eigenvalues<T: Real>(eig: &[Complex<T>; 3]) -> Classification {
    let scale = eig
        .iter()
        .map(|e| e.norm())
        .fold(T::zero(), T::max)
        .max(T::zero());
    let tol = T::lit(1e-9) * (T::one() + scale);
    if eig.iter().any(|e| e.re.abs() <= tol) {
        return Classification::Marginal;
    }
    let n_pos = eig.iter().filter(|e| e.re > T::zero()).count();
    let has_complex = eig.iter().any(|e| e.im.abs() > tol);
    match n_pos {
        0 => {
            if has_complex {
                Classification::StableFocus
            } else {
                Classification::StableNode
            }
        }
        3 => {
            if has_complex {
                Classification::UnstableFocus
            } else {
                Classification::UnstableNode
            }
        }
        _ => Classification::Saddle,
    }
}

/// Full linear-stability report for a feasible equilibrium.
pub fn classify<T: Real>(p: &Params<T>, e: &Equilibrium<T>) -> Result<StabilityReport<T>> {
    if !e.feasible {
        return Err(Error::Usage(format!(
            "classify requires a feasible equilibrium, got infeasible {:?}",
            e.kind
        )));
    }
    let j = jacobian(p, &e.coords)?;
    let cp = char_poly(&j);
    let eig = cubic::roots_monic(cp.k1, cp.k2, cp.k3);
    let rh = cp.k1 > T::zero() && cp.k3 > T::zero() && cp.k1 * cp.k2 > cp.k3;
    Ok(StabilityReport {
        equilibrium: e.clone(),
        charpoly: cp,
        eigenvalues: [
            (eig[0].re, eig[0].im),
            (eig[1].re, eig[1].im),
            (eig[2].re, eig[2].im),
        ],
        routh_hurwitz_stable: rh,
        classification: classify_eigenvalues(&eig),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionStatus {
    Satisfied,
    Violated,
    /// Equality within tolerance; flags a bifurcation boundary.
    Marginal,
    /// A prerequisite value (e.g. an absent equilibrium) is missing.
    NotEvaluable,
}

/// One analytical condition with both sides evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport<T> {
    pub name: String,
    pub lhs: Option<T>,
    pub rhs: Option<T>,
    pub status: ConditionStatus,
    /// What the condition claims, and any caveat (e.g. "sufficient only").
    pub context: String,
}

impl<T: Real> ConditionReport<T> {
    fn gt(name: &str, lhs: T, rhs: T, context: &str) -> Self {
        ConditionReport {
            name: name.to_string(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            status: if lhs > rhs {
                ConditionStatus::Satisfied
            } else {
                ConditionStatus::Violated
            },
            context: context.to_string(),
        }
    }

    fn not_evaluable(name: &str, context: &str) -> Self {
        ConditionReport {
            name: name.to_string(),
            lhs: None,
            rhs: None,
            status: ConditionStatus::NotEvaluable,
            context: context.to_string(),
        }
    }

    pub fn satisfied(&self) -> bool {
        self.status == ConditionStatus::Satisfied
    }
}

/// The three sufficient conditions for persistence. Conditions (ii) and
/// (iii) need the boundary equilibria; absent ones are reported as not
/// evaluable rather than assumed either way.
pub fn persistence_check<T: Real>(
    p: &Params<T>,
    e1: Option<&Equilibrium<T>>,
    e2: Option<&Equilibrium<T>>,
) -> Vec<ConditionReport<T>> {
    let mut out = Vec::with_capacity(3);
    out.push(ConditionReport::gt(
        "persistence_i: r > delta1 + delta2",
        p.r,
        p.delta1 + p.delta2,
        "growth must outrun total predator mortality (sufficient condition)",
    ));
    match e1 {
        Some(e) if e.kind == EquilibriumKind::Boundary1 => out.push(ConditionReport::gt(
            "persistence_ii: x1_1 > a2*delta2/(c2*e2 - delta2)",
            e.coords.x1,
            p.a2 * p.delta2 / (p.c2 * p.e2 - p.delta2),
            "second predator invades the first boundary equilibrium",
        )),
        _ => out.push(ConditionReport::not_evaluable(
            "persistence_ii: x1_1 > a2*delta2/(c2*e2 - delta2)",
            "first boundary equilibrium absent",
        )),
    }
    match e2 {
        Some(e) if e.kind == EquilibriumKind::Boundary2 => out.push(ConditionReport::gt(
            "persistence_iii: x1_2 > a1*delta1/(c1*e1 - delta1)",
            e.coords.x1,
            p.a1 * p.delta1 / (p.c1 * p.e1 - p.delta1),
            "first predator invades the second boundary equilibrium",
        )),
        _ => out.push(ConditionReport::not_evaluable(
            "persistence_iii: x1_2 > a1*delta1/(c1*e1 - delta1)",
            "second boundary equilibrium absent",
        )),
    }
    out
}

/// Ultimate-bound quantities and the hypotheses they rest on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport<T> {
    /// `rho = min(1, delta1, delta2)`.
    pub rho: T,
    /// Auxiliary predator bound `m`; an input with default `k/2`.
    pub predator_bound: T,
    /// Averaging constant, valid on `(r m/(e1+e2), r k/(e1+e2))`.
    pub sigma: T,
    /// Prey ultimate bound `w = k (r m - (e1+e2) sigma)/((e1+e2) sigma - r k)`.
    pub prey_bound: T,
    /// Population-total ultimate bound `M = ((r+1) k + w)/rho`.
    pub ultimate_bound: T,
    pub conditions: Vec<ConditionReport<T>>,
}

/// Evaluate the ultimate-bound chain. `sigma` and `predator_bound` are
/// inputs with documented defaults (interval midpoint and `k/2`) because
/// the published derivation leaves both free; a sigma outside its stated
/// interval is a usage error.
pub fn boundedness_bounds<T: Real>(
    p: &Params<T>,
    sigma: Option<T>,
    predator_bound: Option<T>,
) -> Result<BoundednessReport<T>> {
    let m = predator_bound.unwrap_or(p.k * T::lit(0.5));
    if m <= T::zero() || m >= p.k {
        return Err(Error::Usage(format!(
            "predator bound m must lie in (0, k); got m = {m}, k = {}",
            p.k
        )));
    }
    let e_sum = p.e1 + p.e2;
    let lo = p.r * m / e_sum;
    let hi = p.r * p.k / e_sum;
    let sigma = sigma.unwrap_or((lo + hi) * T::lit(0.5));
    if sigma <= lo || sigma >= hi {
        return Err(Error::Usage(format!(
            "sigma = {sigma} outside its stated interval ({lo}, {hi})"
        )));
    }

    let rho = T::one().min(p.delta1).min(p.delta2);
    let w = p.k * (p.r * m - e_sum * sigma) / (e_sum * sigma - p.r * p.k);
    let big_m = ((p.r + T::one()) * p.k + w) / rho;

    let conditions = vec![
        ConditionReport::gt(
            "predator_decay_1: delta1 > c1*e1",
            p.delta1,
            p.c1 * p.e1,
            "hypothesis for the exponential predator bound",
        ),
        ConditionReport::gt(
            "predator_decay_2: delta2 > c2*e2",
            p.delta2,
            p.c2 * p.e2,
            "hypothesis for the exponential predator bound",
        ),
    ];

    Ok(BoundednessReport {
        rho,
        predator_bound: m,
        sigma,
        prey_bound: w,
        ultimate_bound: big_m,
        conditions,
    })
}

/// Local-stability trace condition for a boundary equilibrium:
/// `e_i x1 + x_pred > (k (1 - b_i e_i) - a_i)/b_i`. Equality within
/// `1e-12 * scale` flags the Hopf boundary.
pub fn local_condition_boundary<T: Real>(
    p: &Params<T>,
    e: &Equilibrium<T>,
    which: PredatorIndex,
) -> Result<ConditionReport<T>> {
    let (expected_kind, a, b, conv, pred, name) = match which {
        PredatorIndex::First => (
            EquilibriumKind::Boundary1,
            p.a1,
            p.b1,
            p.e1,
            e.coords.x2,
            "boundary1_trace: e1*x1 + x2 > (k(1 - b1*e1) - a1)/b1",
        ),
        PredatorIndex::Second => (
            EquilibriumKind::Boundary2,
            p.a2,
            p.b2,
            p.e2,
            e.coords.x3,
            "boundary2_trace: e2*x1 + x3 > (k(1 - b2*e2) - a2)/b2",
        ),
    };
    if e.kind != expected_kind {
        return Err(Error::Usage(format!(
            "boundary condition for {which:?} applied to a {:?} equilibrium",
            e.kind
        )));
    }
    if !e.feasible {
        return Err(Error::Usage(
            "boundary condition requires a feasible equilibrium".into(),
        ));
    }
    let lhs = conv * e.coords.x1 + pred;
    let rhs = (p.k * (T::one() - b * conv) - a) / b;
    let tol = T::lit(1e-12) * (T::one() + lhs.abs() + rhs.abs());
    let status = if (lhs - rhs).abs() <= tol {
        ConditionStatus::Marginal
    } else if lhs > rhs {
        ConditionStatus::Satisfied
    } else {
        ConditionStatus::Violated
    };
    Ok(ConditionReport {
        name: name.to_string(),
        lhs: Some(lhs),
        rhs: Some(rhs),
        status,
        context: "negative trace of the prey/predator block; equality marks the Hopf boundary"
            .to_string(),
    })
}

/// Sufficient (not necessary) local-stability condition at the interior
/// equilibrium: `k < min(a1 + b1 x2*, a2 + b2 x3*)`.
pub fn local_condition_interior<T: Real>(
    p: &Params<T>,
    estar: &Equilibrium<T>,
) -> Result<ConditionReport<T>> {
    require_interior(estar)?;
    let rhs = (p.a1 + p.b1 * estar.coords.x2).min(p.a2 + p.b2 * estar.coords.x3);
    let mut report = ConditionReport::gt(
        "interior_local: k < min(a1 + b1*x2*, a2 + b2*x3*)",
        rhs,
        p.k,
        "sufficient condition only; stability may hold when it fails",
    );
    // Inequality direction is k < rhs; gt() evaluated rhs > k, so swap the
    // displayed sides back.
    report.lhs = Some(p.k);
    report.rhs = Some(rhs);
    Ok(report)
}

/// Global-stability condition and the Lyapunov weights it certifies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalStabilityReport<T> {
    pub condition: ConditionReport<T>,
    /// `s1 = 1`, `s2 = (a1 + x1*)/(b1 e1 x2*)`, `s3 = (a2 + x1*)/(b2 e2 x3*)`.
    pub lyapunov_weights: [T; 3],
}

/// `a1 a2 b1 b2 r k > (x1* + k)(w + k)(a1 b1 c2 + a2 b2 c1)`, with `w`
/// supplied by the caller (typically from [`boundedness_bounds`]).
pub fn global_condition<T: Real>(
    p: &Params<T>,
    estar: &Equilibrium<T>,
    w: T,
) -> Result<GlobalStabilityReport<T>> {
    require_interior(estar)?;
    let lhs = p.a1 * p.a2 * p.b1 * p.b2 * p.r * p.k;
    let rhs = (estar.coords.x1 + p.k) * (w + p.k) * (p.a1 * p.b1 * p.c2 + p.a2 * p.b2 * p.c1);
    let condition = ConditionReport::gt(
        "interior_global: a1*a2*b1*b2*r*k > (x1* + k)(w + k)(a1*b1*c2 + a2*b2*c1)",
        lhs,
        rhs,
        "sufficient condition for global asymptotic stability",
    );
    let s2 = (p.a1 + estar.coords.x1) / (p.b1 * p.e1 * estar.coords.x2);
    let s3 = (p.a2 + estar.coords.x1) / (p.b2 * p.e2 * estar.coords.x3);
    Ok(GlobalStabilityReport {
        condition,
        lyapunov_weights: [T::one(), s2, s3],
    })
}

fn require_interior<T: Real>(e: &Equilibrium<T>) -> Result<()> {
    if e.kind != EquilibriumKind::Interior || !e.feasible {
        return Err(Error::Usage(format!(
            "operation requires a feasible interior equilibrium, got {:?} (feasible: {})",
            e.kind, e.feasible
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria;
    use crate::model::State;
    use crate::presets;
    use rand::{Rng, SeedableRng};

    fn base(r: f64) -> Params<f64> {
        presets::table2(r)
    }

    fn random_structural_matrix(rng: &mut impl Rng) -> Mat3<f64> {
        let mut m = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = rng.gen_range(-1.0..1.0);
            }
        }
        m.0[1][2] = 0.0;
        m.0[2][1] = 0.0;
        m
    }

    #[test]
    fn char_poly_of_negative_identity() {
        let cp = char_poly(&Mat3::from_diagonal([-1.0, -1.0, -1.0]));
        assert_eq!((cp.k1, cp.k2, cp.k3, cp.c2), (3.0, 3.0, 1.0, 8.0));
    }

    #[test]
    fn char_poly_matches_symbolic_expansion_for_diagonals() {
        // (x - d1)(x - d2)(x - d3) expanded symbolically.
        let p = base(1.37);
        let (d1, d2, d3) = (p.r, -p.delta1, -p.delta2);
        let cp = char_poly(&Mat3::from_diagonal([d1, d2, d3]));
        assert!((cp.k1 - (p.delta1 + p.delta2 - p.r)).abs() < 1e-15);
        assert!((cp.k2 - (d1 * d2 + d1 * d3 + d2 * d3)).abs() < 1e-15);
        assert!((cp.k3 + d1 * d2 * d3).abs() < 1e-15);
    }

    #[test]
    fn char_poly_matches_determinant_sampling() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let j = random_structural_matrix(&mut rng);
            let cp = char_poly(&j);
            for lambda in [0.0, 1.0, 2.0] {
                let shifted = Mat3::from_diagonal([lambda, lambda, lambda]).sub(&j);
                let det = shifted.det();
                let poly = ((lambda + cp.k1) * lambda + cp.k2) * lambda + cp.k3;
                assert!(
                    (det - poly).abs() <= 1e-9 * (1.0 + det.abs()),
                    "lambda={lambda}: det {det} vs poly {poly}"
                );
            }
        }
    }

    #[test]
    fn eigenvalues_of_origin_jacobian() {
        let p = base(1.37);
        let j = jacobian(&p, &State::new(0.0, 0.0, 0.0)).unwrap();
        let eig = eigenvalues3(&j);
        let mut res: Vec<f64> = eig.iter().map(|e| e.re).collect();
        res.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((res[0] + p.delta1).abs() < 1e-12);
        assert!((res[1] + p.delta2).abs() < 1e-12);
        assert!((res[2] - p.r).abs() < 1e-12);
        assert!(eig.iter().all(|e| e.im == 0.0));
    }

    #[test]
    fn eigenvalues_of_negative_identity() {
        let eig = eigenvalues3(&Mat3::from_diagonal([-1.0, -1.0, -1.0]));
        for e in eig {
            assert!((e.re + 1.0).abs() < 1e-9);
            assert_eq!(e.im, 0.0);
        }
    }

    #[test]
    fn symmetric_matrices_have_real_eigenvalues_matching_bisection() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let mut m = Mat3::zeros();
            for i in 0..3 {
                for j in 0..=i {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    m.0[i][j] = v;
                    m.0[j][i] = v;
                }
            }
            m.0[1][2] = 0.0;
            m.0[2][1] = 0.0;
            let cp = char_poly(&m);
            let eig = eigenvalues3(&m);
            assert!(eig.iter().all(|e| e.im == 0.0), "symmetric => real");

            // Brute-force sign-scan bisection of the cubic on [-10, 10].
            let f = |x: f64| ((x + cp.k1) * x + cp.k2) * x + cp.k3;
            let mut oracle = Vec::new();
            let n = 200_000;
            let mut xp = -10.0;
            let mut fp = f(xp);
            for i in 1..=n {
                let x = -10.0 + 20.0 * i as f64 / n as f64;
                let fx = f(x);
                if fp * fx < 0.0 {
                    let (mut lo, mut hi) = (xp, x);
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        if f(lo) * f(mid) <= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    oracle.push(0.5 * (lo + hi));
                }
                xp = x;
                fp = fx;
            }
            if oracle.len() == 3 {
                for (e, o) in eig.iter().zip(&oracle) {
                    assert!((e.re - o).abs() < 1e-8, "{} vs oracle {o}", e.re);
                }
            }
        }
    }

    #[test]
    fn routh_hurwitz_agrees_with_eigenvalue_signs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let mut checked = 0;
        for _ in 0..1000 {
            let j = random_structural_matrix(&mut rng);
            let cp = char_poly(&j);
            let eig = eigenvalues3(&j);
            let scale = eig.iter().map(|e| e.norm()).fold(0.0, f64::max);
            let margin = 1e-9 * (1.0 + scale);
            if eig.iter().any(|e| e.re.abs() < margin) {
                continue;
            }
            checked += 1;
            let rh = cp.k1 > 0.0 && cp.k3 > 0.0 && cp.k1 * cp.k2 > cp.k3;
            let all_negative = eig.iter().all(|e| e.re < 0.0);
            assert_eq!(rh, all_negative, "J = {j:?}");
        }
        assert!(checked > 900, "margin band excluded too many: {checked}");
    }

    #[test]
    fn origin_is_a_saddle() {
        let p = base(1.37);
        let report = classify(&p, &equilibria::trivial_equilibrium()).unwrap();
        assert_eq!(report.classification, Classification::Saddle);
        assert!(!report.routh_hurwitz_stable);
    }

    #[test]
    fn interior_is_stable_focus_well_above_the_critical_rate() {
        let p = base(1.8);
        let estar = equilibria::feasible_interior(&p).unwrap();
        let report = classify(&p, &estar).unwrap();
        assert!(report.routh_hurwitz_stable);
        assert_eq!(report.classification, Classification::StableFocus);
        assert!(report.charpoly.c2 > 0.0);
    }

    #[test]
    fn eigenvalues_reproduce_coefficients() {
        let p = base(1.37);
        for e in equilibria::all_equilibria(&p) {
            let report = classify(&p, &e).unwrap();
            let cp = report.charpoly;
            let sum_re: f64 = report.eigenvalues.iter().map(|(re, _)| re).sum();
            let scale = cp.scale();
            assert!((sum_re + cp.k1).abs() < 1e-9 * scale);
            let prod = report
                .eigenvalues
                .iter()
                .fold(Complex::new(1.0, 0.0), |acc, &(re, im)| {
                    acc * Complex::new(re, im)
                });
            assert!((prod.re + cp.k3).abs() < 1e-9 * scale);
            assert!(prod.im.abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn exact_marginal_polynomial_is_classified_marginal() {
        // Companion matrix of (x + k1)(x^2 + k2): purely imaginary pair.
        let (k1, k2) = (0.4, 0.9);
        let k3 = k1 * k2;
        let j = Mat3([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-k3, -k2, -k1]]);
        let eig = eigenvalues3(&j);
        assert_eq!(classify_eigenvalues(&eig), Classification::Marginal);
    }

    #[test]
    fn classify_rejects_infeasible_equilibria() {
        let e = Equilibrium {
            kind: EquilibriumKind::Interior,
            coords: State::new(1.0, -1.0, -1.0),
            feasible: false,
            diagnostics: Vec::new(),
        };
        assert!(classify(&base(1.37), &e).is_err());
    }

    #[test]
    fn persistence_fails_its_first_condition_at_the_default_set() {
        let p = base(1.37);
        let e1 = equilibria::boundary1(&p).equilibrium.unwrap();
        let e2 = equilibria::boundary2(&p).equilibrium.unwrap();
        let reports = persistence_check(&p, Some(&e1), Some(&e2));
        assert_eq!(reports.len(), 3);
        // (i): 1.37 vs 0.82 + 0.62 = 1.44 -> violated.
        assert_eq!(reports[0].status, ConditionStatus::Violated);
        assert!((reports[0].lhs.unwrap() - 1.37).abs() < 1e-15);
        assert!((reports[0].rhs.unwrap() - 1.44).abs() < 1e-15);
        // (ii) and (iii) hold: both boundary prey levels clear the thresholds.
        assert!(reports[1].satisfied());
        assert!(reports[2].satisfied());
    }

    #[test]
    fn persistence_first_condition_can_hold() {
        let mut p = base(2.0);
        p.delta1 = 0.5;
        p.delta2 = 0.5;
        let reports = persistence_check(&p, None, None);
        assert!(reports[0].satisfied());
        assert_eq!(reports[1].status, ConditionStatus::NotEvaluable);
        assert_eq!(reports[2].status, ConditionStatus::NotEvaluable);
    }

    #[test]
    fn boundedness_defaults_give_w_equal_k() {
        // With m = k/2 and sigma at the interval midpoint, w reduces to k.
        let p = base(1.47);
        let rep = boundedness_bounds(&p, None, None).unwrap();
        assert_eq!(rep.rho, 0.62);
        assert!((rep.prey_bound - p.k).abs() < 1e-9);
        assert!((rep.sigma - 1.53199471965538805e2).abs() < 1e-10);
        assert!((rep.ultimate_bound - 1.11935483870967732e3).abs() < 1e-9);
        // The exponential-decay hypotheses fail here: delta_i < c_i e_i.
        assert!(!rep.conditions[0].satisfied());
        assert!(!rep.conditions[1].satisfied());
    }

    #[test]
    fn boundedness_identity_m_rho_minus_growth_is_w() {
        let p = base(1.47);
        let rep = boundedness_bounds(&p, None, None).unwrap();
        let recovered = rep.ultimate_bound * rep.rho - (p.r + 1.0) * p.k;
        assert!((recovered - rep.prey_bound).abs() < 1e-9 * rep.prey_bound.abs());
    }

    #[test]
    fn sigma_outside_interval_is_a_usage_error() {
        let p = base(1.47);
        assert!(boundedness_bounds(&p, Some(1.0), None).is_err());
        assert!(boundedness_bounds(&p, Some(1e6), None).is_err());
        assert!(boundedness_bounds(&p, None, Some(300.0)).is_err()); // m >= k
    }

    #[test]
    fn boundary_trace_condition_at_default_set() {
        let p = base(1.37);
        let e1 = equilibria::boundary1(&p).equilibrium.unwrap();
        let rep = local_condition_boundary(&p, &e1, PredatorIndex::First).unwrap();
        // lhs = e1 x1 + x2 ~ 318, rhs = (k(1 - b1 e1) - a1)/b1 ~ 37: satisfied.
        assert!(rep.satisfied());
        // The trace condition covers only the prey/predator-1 block; the
        // full 3x3 spectrum also carries the invasion eigenvalue of the
        // absent predator, which is positive here, so E1 is a saddle.
        let full = classify(&p, &e1).unwrap();
        assert_eq!(full.classification, Classification::Saddle);
        let j = jacobian(&p, &e1.coords).unwrap();
        let block_trace = j.get(0, 0) + j.get(1, 1);
        assert_eq!(rep.satisfied(), block_trace < 0.0);
    }

    #[test]
    fn boundary_trace_condition_trivially_true_when_rhs_negative() {
        let mut p = base(1.37);
        p.k = 50.0; // k(1 - b1 e1) < a1 makes the bound negative
        if let Some(e1) = equilibria::boundary1(&p).equilibrium {
            let rep = local_condition_boundary(&p, &e1, PredatorIndex::First).unwrap();
            assert!(rep.rhs.unwrap() < 0.0);
            assert!(rep.satisfied());
        }
    }

    #[test]
    fn boundary_condition_rejects_kind_mismatch() {
        let p = base(1.37);
        let e1 = equilibria::boundary1(&p).equilibrium.unwrap();
        assert!(local_condition_boundary(&p, &e1, PredatorIndex::Second).is_err());
    }

    #[test]
    fn interior_sufficient_condition_is_not_necessary() {
        // At r = 1.6 the condition k < min(...) fails while the eigenvalues
        // are stable: sufficiency without necessity.
        let p = base(1.6);
        let estar = equilibria::feasible_interior(&p).unwrap();
        let rep = local_condition_interior(&p, &estar).unwrap();
        assert!(!rep.satisfied());
        assert!(rep.context.contains("sufficient"));
        let stab = classify(&p, &estar).unwrap();
        assert!(stab.routh_hurwitz_stable);
    }

    #[test]
    fn interior_condition_true_for_small_k() {
        let mut p = base(1.37);
        p.k = 40.0;
        if let Ok(estar) = equilibria::feasible_interior(&p) {
            let rep = local_condition_interior(&p, &estar).unwrap();
            assert!(rep.satisfied());
        }
    }

    #[test]
    fn interior_condition_implies_routh_hurwitz() {
        // Random feasible draws where k < min(a1 + b1 x2*, a2 + b2 x3*):
        // the sufficient condition must always deliver stability.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut hits = 0;
        for _ in 0..4000 {
            let p = Params {
                r: rng.gen_range(0.5..2.0),
                k: rng.gen_range(5.0..40.0),
                a1: rng.gen_range(50.0..150.0),
                a2: rng.gen_range(50.0..150.0),
                b1: rng.gen_range(0.2..1.0),
                b2: rng.gen_range(0.2..1.0),
                c1: rng.gen_range(1.0..2.0),
                c2: rng.gen_range(1.0..2.0),
                delta1: rng.gen_range(0.05..0.4),
                delta2: rng.gen_range(0.05..0.4),
                e1: rng.gen_range(0.5..0.95),
                e2: rng.gen_range(0.5..0.95),
            };
            let Ok(estar) = equilibria::feasible_interior(&p) else {
                continue;
            };
            let rep = local_condition_interior(&p, &estar).unwrap();
            if !rep.satisfied() {
                continue;
            }
            hits += 1;
            let stab = classify(&p, &estar).unwrap();
            assert!(
                stab.routh_hurwitz_stable,
                "sufficient condition held but spectrum unstable: {p:?}"
            );
        }
        assert!(hits > 50, "only {hits} feasible draws satisfied the condition");
    }

    #[test]
    fn global_condition_reports_both_sides_and_positive_weights() {
        let p = base(1.29);
        let estar = equilibria::feasible_interior(&p).unwrap();
        let w = boundedness_bounds(&p, None, None).unwrap().prey_bound;
        let rep = global_condition(&p, &estar, w).unwrap();
        // lhs = 100*100*0.25*1.29*200, rhs ~ 2.6e7: condition fails here.
        assert!((rep.condition.lhs.unwrap() - 645_000.0).abs() < 1e-6);
        assert!(!rep.condition.satisfied());
        assert!(rep.lyapunov_weights.iter().all(|s| *s > 0.0));
    }

    #[test]
    fn global_condition_holds_for_large_interference() {
        // At a fixed equilibrium and prey bound, the left side grows like
        // b1*b2 while the right side is linear in the interference, so
        // large interference satisfies the inequality.
        let p = base(1.29);
        let estar = equilibria::feasible_interior(&p).unwrap();
        let mut scaled = p;
        scaled.b1 = 1e4;
        scaled.b2 = 1e4;
        let rep = global_condition(&scaled, &estar, 200.0).unwrap();
        assert!(rep.condition.satisfied());
    }
}
