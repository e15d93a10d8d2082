//! Closed-form equilibria of the model with feasibility diagnostics.
//!
//! Besides the origin, each equilibrium reduces to a quadratic in the prey
//! component: the predator components then follow from the per-predator
//! nullcline relations. The quadratics are solved with the two-branch
//! formula (`q = -(B + sign(B) sqrt(B^2-4AC))/2`, roots `q/A` and `C/q`)
//! because at the default scale (`k = 200`) the naive formula cancels
//! catastrophically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rhs, Params, State};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    /// The origin; always feasible.
    Trivial,
    /// Prey plus first predator, `x3 = 0`.
    Boundary1,
    /// Prey plus second predator, `x2 = 0`.
    Boundary2,
    /// All three species present.
    Interior,
}

/// Which prey-component quadratic the coefficients belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadraticSource {
    Boundary1,
    Boundary2,
    Interior,
}

/// Coefficients of `A x^2 + B x + C = 0` for a prey component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoeffs<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub source: QuadraticSource,
}

impl<T: Real> QuadraticCoeffs<T> {
    pub fn eval(&self, x: T) -> T {
        (self.a * x + self.b) * x + self.c
    }

    /// All real roots, largest-magnitude-first branch, numerically stable.
    pub fn real_roots(&self) -> Vec<T> {
        let (a, b, c) = (self.a, self.b, self.c);
        if a == T::zero() {
            if b == T::zero() {
                return Vec::new();
            }
            return vec![-c / b];
        }
        let disc = b * b - T::lit(4.0) * a * c;
        if disc < T::zero() {
            return Vec::new();
        }
        let sq = disc.sqrt();
        let sign_b = if b >= T::zero() { T::one() } else { -T::one() };
        let q = -(b + sign_b * sq) / T::lit(2.0);
        if q == T::zero() {
            // b = 0 and disc = -4ac: symmetric roots.
            let r = (-c / a).max(T::zero()).sqrt();
            return vec![-r, r];
        }
        let mut roots = vec![q / a, c / q];
        roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
        roots
    }

    pub fn positive_roots(&self) -> Vec<T> {
        self.real_roots()
            .into_iter()
            .filter(|x| *x > T::zero())
            .collect()
    }
}

/// One named feasibility inequality with both sides evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic<T> {
    pub name: String,
    pub lhs: T,
    pub rhs: T,
    pub satisfied: bool,
}

impl<T: Real> Diagnostic<T> {
    fn gt(name: &str, lhs: T, rhs: T) -> Self {
        Diagnostic {
            name: name.to_string(),
            lhs,
            rhs,
            satisfied: lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium<T> {
    pub kind: EquilibriumKind,
    pub coords: State<T>,
    pub feasible: bool,
    pub diagnostics: Vec<Diagnostic<T>>,
}

/// Outcome of a boundary-equilibrium computation. `equilibrium` is absent
/// when the predator cannot sustain itself (no positive root exists); the
/// viability diagnostic records why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOutcome<T> {
    pub equilibrium: Option<Equilibrium<T>>,
    pub viability: Diagnostic<T>,
    pub quadratic: QuadraticCoeffs<T>,
}

/// Sign of the leading quadratic coefficient for the interior equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeadingCoefficient {
    /// `n1 < 0`: exactly one positive root regardless of the middle term.
    Negative,
    /// `n1 > 0`: zero, one (double) or two positive roots are possible.
    Positive,
    /// `n1 = 0`: the quadratic degenerates to a linear equation.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorOutcome<T> {
    pub candidates: Vec<Equilibrium<T>>,
    pub quadratic: QuadraticCoeffs<T>,
    pub leading: LeadingCoefficient,
}

/// The origin, always feasible.
pub fn trivial_equilibrium<T: Real>() -> Equilibrium<T> {
    Equilibrium {
        kind: EquilibriumKind::Trivial,
        coords: State::new(T::zero(), T::zero(), T::zero()),
        feasible: true,
        diagnostics: Vec::new(),
    }
}

fn boundary<T: Real>(
    p: &Params<T>,
    kind: EquilibriumKind,
    source: QuadraticSource,
    // (a_i, b_i, c_i, delta_i, e_i) of the surviving predator
    a: T,
    b: T,
    c: T,
    delta: T,
    e: T,
) -> BoundaryOutcome<T> {
    let l1 = delta - c * e;
    let l2 = a * delta;
    let quadratic = QuadraticCoeffs {
        a: l1,
        b: l2 + l1 * p.k + p.r * p.k * b * e,
        c: l2 * p.k,
        source,
    };
    let viability = Diagnostic::gt("predator_sustains_itself: c*e > delta", c * e, delta);

    let mut equilibrium = None;
    if let Some(&x1) = quadratic.positive_roots().first() {
        // Unique positive root when l1 < 0 (root product l2*k/l1 < 0).
        let pred = ((c * e - delta) * x1 - a * delta) / (b * delta);
        let threshold = a * delta / (c * e - delta);
        let feasibility = Diagnostic::gt(
            "positive_predator_component: x1 > a*delta/(c*e - delta)",
            x1,
            threshold,
        );
        let feasible = feasibility.satisfied;
        let coords = match kind {
            EquilibriumKind::Boundary1 => State::new(x1, pred, T::zero()),
            EquilibriumKind::Boundary2 => State::new(x1, T::zero(), pred),
            _ => unreachable!(),
        };
        equilibrium = Some(Equilibrium {
            kind,
            coords,
            feasible,
            diagnostics: vec![viability.clone(), feasibility],
        });
    }
    BoundaryOutcome {
        equilibrium,
        viability,
        quadratic,
    }
}

/// Prey/first-predator equilibrium (`x3 = 0`).
pub fn boundary1<T: Real>(p: &Params<T>) -> BoundaryOutcome<T> {
    boundary(
        p,
        EquilibriumKind::Boundary1,
        QuadraticSource::Boundary1,
        p.a1,
        p.b1,
        p.c1,
        p.delta1,
        p.e1,
    )
}

/// Prey/second-predator equilibrium (`x2 = 0`).
pub fn boundary2<T: Real>(p: &Params<T>) -> BoundaryOutcome<T> {
    boundary(
        p,
        EquilibriumKind::Boundary2,
        QuadraticSource::Boundary2,
        p.a2,
        p.b2,
        p.c2,
        p.delta2,
        p.e2,
    )
}

/// All interior equilibrium candidates, feasibility-flagged.
pub fn interior<T: Real>(p: &Params<T>) -> InteriorOutcome<T> {
    let n1 = p.b1 * p.e1 * (p.delta2 - p.c2 * p.e2) + p.b2 * p.e2 * (p.delta1 - p.c1 * p.e1);
    let n2 = p.b2 * p.e2 * p.delta1 * p.a1 + p.b1 * p.e1 * p.delta2 * p.a2;
    let quadratic = QuadraticCoeffs {
        a: n1,
        b: n2 + n1 * p.k + p.r * p.k * p.b1 * p.b2 * p.e1 * p.e2,
        c: n2 * p.k,
        source: QuadraticSource::Interior,
    };
    let leading = if n1 < T::zero() {
        LeadingCoefficient::Negative
    } else if n1 > T::zero() {
        LeadingCoefficient::Positive
    } else {
        LeadingCoefficient::Zero
    };

    let thr1 = p.a1 * p.delta1 / (p.c1 * p.e1 - p.delta1);
    let thr2 = p.a2 * p.delta2 / (p.c2 * p.e2 - p.delta2);

    let candidates = quadratic
        .positive_roots()
        .into_iter()
        .map(|x1| {
            let x2 = ((p.c1 * p.e1 - p.delta1) * x1 - p.a1 * p.delta1) / (p.b1 * p.delta1);
            let x3 = ((p.c2 * p.e2 - p.delta2) * x1 - p.a2 * p.delta2) / (p.b2 * p.delta2);
            // The threshold inequalities decide positivity only when the
            // predators sustain themselves (c*e > delta); record both.
            let v1 = Diagnostic::gt(
                "first_predator_sustains_itself: c1*e1 > delta1",
                p.c1 * p.e1,
                p.delta1,
            );
            let v2 = Diagnostic::gt(
                "second_predator_sustains_itself: c2*e2 > delta2",
                p.c2 * p.e2,
                p.delta2,
            );
            let d1 = Diagnostic::gt(
                "first_predator_positive: x1 > a1*delta1/(c1*e1 - delta1)",
                x1,
                thr1,
            );
            let d2 = Diagnostic::gt(
                "second_predator_positive: x1 > a2*delta2/(c2*e2 - delta2)",
                x1,
                thr2,
            );
            let feasible = v1.satisfied && v2.satisfied && d1.satisfied && d2.satisfied;
            Equilibrium {
                kind: EquilibriumKind::Interior,
                coords: State::new(x1, x2, x3),
                feasible,
                diagnostics: vec![v1, v2, d1, d2],
            }
        })
        .collect();

    InteriorOutcome {
        candidates,
        quadratic,
        leading,
    }
}

/// Every equilibrium the model admits at these parameters, in the order
/// origin, boundary 1, boundary 2, interior candidates. Candidates that do
/// not exist (no positive root) are omitted; infeasible candidates are kept
/// and flagged.
pub fn all_equilibria<T: Real>(p: &Params<T>) -> Vec<Equilibrium<T>> {
    let mut out = vec![trivial_equilibrium()];
    if let Some(e) = boundary1(p).equilibrium {
        out.push(e);
    }
    if let Some(e) = boundary2(p).equilibrium {
        out.push(e);
    }
    out.extend(interior(p).candidates);
    out
}

/// The unique feasible interior equilibrium, or an error when none exists.
pub fn feasible_interior<T: Real>(p: &Params<T>) -> Result<Equilibrium<T>> {
    let mut found: Vec<Equilibrium<T>> = interior(p)
        .candidates
        .into_iter()
        .filter(|e| e.feasible)
        .collect();
    match found.len() {
        1 => Ok(found.pop().unwrap()),
        0 => Err(Error::NoInteriorEquilibrium { r: p.r.as_f64() }),
        n => Err(Error::Usage(format!(
            "{n} feasible interior equilibria at r = {}; analysis requires a unique one",
            p.r
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vec_max_abs;
    use crate::presets;
    use proptest::prelude::*;

    fn base(r: f64) -> Params<f64> {
        presets::table2(r)
    }

    /// Brute-force root oracle: sign scan over (0, 1e6) plus bisection.
    fn oracle_positive_roots(q: &QuadraticCoeffs<f64>) -> Vec<f64> {
        let n = 400_000usize;
        let step = 1e6 / n as f64;
        let mut roots = Vec::new();
        let mut x_prev = 1e-9;
        let mut f_prev = q.eval(x_prev);
        for i in 1..=n {
            let x = i as f64 * step;
            let f = q.eval(x);
            if f_prev == 0.0 {
                roots.push(x_prev);
            } else if f_prev * f < 0.0 {
                let (mut lo, mut hi) = (x_prev, x);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if q.eval(lo) * q.eval(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x_prev = x;
            f_prev = f;
        }
        roots
    }

    #[test]
    fn trivial_is_always_feasible_with_zero_rhs() {
        let e = trivial_equilibrium::<f64>();
        assert!(e.feasible);
        let p = base(0.73);
        let d = rhs(&p, &e.coords).unwrap();
        assert_eq!(d.as_array(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn boundary1_matches_frozen_oracle_root() {
        // Sign-scan + bisection oracle value at the default set, r = 1.37.
        let out = boundary1(&base(1.37));
        let e = out.equilibrium.unwrap();
        assert!(e.feasible);
        assert!((e.coords.x1 / 2.168607548552911e2 - 1.0).abs() < 1e-9);
        assert!((e.coords.x2 / 1.415503996103797e2 - 1.0).abs() < 1e-9);
        assert_eq!(e.coords.x3, 0.0);
    }

    #[test]
    fn boundary2_matches_frozen_oracle_root() {
        let out = boundary2(&base(1.37));
        let e = out.equilibrium.unwrap();
        assert!(e.feasible);
        assert!((e.coords.x1 / 2.095203736460074e2 - 1.0).abs() < 1e-9);
        assert!((e.coords.x3 / 1.413154473910766e2 - 1.0).abs() < 1e-9);
        assert_eq!(e.coords.x2, 0.0);
    }

    #[test]
    fn interior_matches_frozen_oracle_root() {
        let out = interior(&base(1.37));
        assert_eq!(out.leading, LeadingCoefficient::Negative);
        assert_eq!(out.candidates.len(), 1);
        let e = &out.candidates[0];
        assert!(e.feasible);
        assert!((e.coords.x1 / 1.633264847742314e2 - 1.0).abs() < 1e-9);
        assert!((e.coords.x2 / 5.723522994661514e1 - 1.0).abs() < 1e-9);
        assert!((e.coords.x3 / 6.606411229350599e1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quadratic_roots_agree_with_sign_scan_oracle() {
        for r in [1.29, 1.37, 1.47] {
            let p = base(r);
            for q in [
                boundary1(&p).quadratic,
                boundary2(&p).quadratic,
                interior(&p).quadratic,
            ] {
                let got = q.positive_roots();
                let want = oracle_positive_roots(&q);
                assert_eq!(got.len(), want.len(), "{q:?}");
                for (g, w) in got.iter().zip(&want) {
                    assert!((g / w - 1.0).abs() < 1e-9, "{g} vs oracle {w}");
                }
            }
        }
    }

    #[test]
    fn feasible_equilibria_have_tiny_rhs_residual() {
        for r in [1.29, 1.37, 1.47] {
            let p = base(r);
            for e in all_equilibria(&p) {
                if e.feasible {
                    let res = vec_max_abs(&rhs(&p, &e.coords).unwrap().as_array());
                    assert!(res < 1e-8, "residual {res} at {:?} r={r}", e.kind);
                }
            }
        }
    }

    #[test]
    fn default_set_has_four_equilibria() {
        let all = all_equilibria(&base(1.37));
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|e| e.feasible));
        let kinds: Vec<_> = all.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            [
                EquilibriumKind::Trivial,
                EquilibriumKind::Boundary1,
                EquilibriumKind::Boundary2,
                EquilibriumKind::Interior
            ]
        );
    }

    #[test]
    fn unsustainable_predators_leave_only_the_origin() {
        // c*e < delta for both predators: no boundary or interior points.
        let mut p = base(1.37);
        p.delta1 = 2.0;
        p.delta2 = 2.0;
        let all = all_equilibria(&p);
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].kind, EquilibriumKind::Trivial);
        let out = interior(&p);
        assert_eq!(out.leading, LeadingCoefficient::Positive);
        assert!(out.candidates.is_empty());
        assert!(feasible_interior(&p).is_err());
    }

    #[test]
    fn degenerate_linear_case_is_solved_not_rejected() {
        // c1*e1 == delta1 exactly: the first boundary quadratic is linear.
        let mut p = base(1.37);
        p.c1 = 1.0;
        p.e1 = 0.82;
        p.delta1 = 0.82;
        let out = boundary1(&p);
        assert_eq!(out.quadratic.a, 0.0);
        assert!(out.equilibrium.is_none());
        assert!(!out.viability.satisfied);
    }

    #[test]
    fn constant_term_is_exactly_symbol_times_k() {
        let p = base(1.37);
        assert_eq!(boundary1(&p).quadratic.c, p.a1 * p.delta1 * p.k);
        assert_eq!(boundary2(&p).quadratic.c, p.a2 * p.delta2 * p.k);
        let n2 = p.b2 * p.e2 * p.delta1 * p.a1 + p.b1 * p.e1 * p.delta2 * p.a2;
        assert_eq!(interior(&p).quadratic.c, n2 * p.k);
    }

    fn small_param_strategy() -> impl Strategy<Value = Params<f64>> {
        (
            0.3f64..2.5,
            20.0f64..400.0,
            (20.0f64..200.0, 20.0f64..200.0),
            (0.1f64..1.5, 0.1f64..1.5),
            (0.5f64..2.5, 0.5f64..2.5),
            (0.05f64..1.2, 0.05f64..1.2),
            (0.3f64..0.95, 0.3f64..0.95),
        )
            .prop_map(|(r, k, (a1, a2), (b1, b2), (c1, c2), (d1, d2), (e1, e2))| Params {
                r,
                k,
                a1,
                a2,
                b1,
                b2,
                c1,
                c2,
                delta1: d1,
                delta2: d2,
                e1,
                e2,
            })
    }

    proptest! {
        /// With a negative leading coefficient the interior quadratic has
        /// exactly one positive root, whatever the middle coefficient does.
        #[test]
        fn negative_leading_coefficient_gives_unique_positive_root(
            p in small_param_strategy()
        ) {
            let out = interior(&p);
            if out.leading == LeadingCoefficient::Negative {
                prop_assert_eq!(out.quadratic.positive_roots().len(), 1);
            }
        }

        /// Positivity of the predator components is equivalent to the prey
        /// component exceeding both feasibility thresholds.
        #[test]
        fn predator_positivity_matches_threshold_inequality(
            p in small_param_strategy()
        ) {
            for e in interior(&p).candidates {
                let pos = e.coords.x2 > 0.0 && e.coords.x3 > 0.0;
                prop_assert_eq!(pos, e.feasible, "coords {:?}", e.coords);
            }
        }
    }
}
