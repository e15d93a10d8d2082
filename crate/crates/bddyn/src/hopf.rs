//! Hopf-bifurcation location in the growth rate and the center-manifold
//! reduction that decides whether the bifurcating cycle is stable.
//!
//! The test function is `C2(r) = k1 k2 - k3` evaluated on the interior
//! equilibrium branch (the equilibrium moves with `r`). A simple zero of
//! `C2` with `k2 > 0` puts a conjugate eigenvalue pair on the imaginary
//! axis; the quadratic reduction onto the center manifold then yields the
//! sign quantity `Pi` (positive: unstable cycle, subcritical; negative:
//! stable cycle, supercritical).
//!
//! The coefficient lists this reduction rests on were transcribed from a
//! published source that contains slips; the primary pipeline uses the
//! algebraically consistent bilinear forms and the literal transcription
//! is kept alongside so the report can flag the mismatches instead of
//! inheriting them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, AttractorClass, IntegratorConfig};
use crate::equilibria::{self, Equilibrium};
use crate::error::{Error, Result};
use crate::linalg::{vec_norm, vec_sub, Mat3};
use crate::model::{hessian, jacobian, Params, State};
use crate::scalar::Real;
use crate::stability::{char_poly, CharPoly};

/// Interior equilibrium, Jacobian and characteristic coefficients at `r`.
pub fn interior_linearization<T: Real>(
    p: &Params<T>,
    r: T,
) -> Result<(Equilibrium<T>, Mat3<T>, CharPoly<T>)> {
    let pr = p.with_r(r);
    let estar = equilibria::feasible_interior(&pr)?;
    let j = jacobian(&pr, &estar.coords)?;
    let cp = char_poly(&j);
    Ok((estar, j, cp))
}

/// The Hopf test function `C2(r) = k1 k2 - k3` on the equilibrium branch.
pub fn c2_of_r<T: Real>(p: &Params<T>, r: T) -> Result<T> {
    Ok(interior_linearization(p, r)?.2.c2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfSearchResult<T> {
    /// Root of C2, located to ~1e-12 relative in r.
    pub r_c: T,
    /// Final bracketing interval.
    pub bracket: (T, T),
    /// |C2(r_c)|.
    pub c2_residual: T,
    /// k2 at the root; must be positive for a genuine Hopf point.
    pub k2_at_rc: T,
    /// Central-difference dC2/dr at the root (step 1e-6).
    pub transversality: T,
    /// |Re| of the conjugate eigenvalue pair at the root.
    pub eigen_crosscheck: T,
}

/// Locate the Hopf point by bracketed bisection with secant acceleration.
pub fn find_rc<T: Real>(p: &Params<T>, bracket: (T, T)) -> Result<HopfSearchResult<T>> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::Usage(format!(
            "bracket must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    let mut f_lo = c2_of_r(p, lo)?;
    let mut f_hi = c2_of_r(p, hi)?;
    if f_lo == T::zero() {
        (lo, hi, f_lo, f_hi) = (lo, lo, f_lo, f_lo);
    } else if f_hi == T::zero() {
        (lo, hi, f_lo, f_hi) = (hi, hi, f_hi, f_hi);
    } else if (f_lo > T::zero()) == (f_hi > T::zero()) {
        return Err(Error::NoBifurcationInBracket {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            c2_lo: f_lo.as_f64(),
            c2_hi: f_hi.as_f64(),
        });
    }

    let width_goal = T::lit(1e-12) * hi.abs().max(T::one());
    for _ in 0..200 {
        if (hi - lo).abs() <= width_goal || f_lo == T::zero() || f_hi == T::zero() {
            break;
        }
        // Secant candidate, falling back to the midpoint whenever it leaves
        // the open bracket or stalls.
        let mid = (lo + hi) * T::lit(0.5);
        let denom = f_hi - f_lo;
        let mut x = if denom != T::zero() {
            hi - f_hi * (hi - lo) / denom
        } else {
            mid
        };
        let margin = (hi - lo) * T::lit(1e-3);
        if !(x > lo + margin && x < hi - margin) {
            x = mid;
        }
        let fx = c2_of_r(p, x)?;
        if fx == T::zero() {
            lo = x;
            hi = x;
            f_lo = fx;
            break;
        }
        if (fx > T::zero()) == (f_lo > T::zero()) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }

    let r_c = if f_lo.abs() <= f_hi.abs() { lo } else { hi };
    let (_, j, cp) = interior_linearization(p, r_c)?;
    if cp.k2 <= T::zero() {
        return Err(Error::NotAHopfPoint {
            r: r_c.as_f64(),
            k2: cp.k2.as_f64(),
        });
    }

    let dr = T::lit(1e-6);
    let transversality = (c2_of_r(p, r_c + dr)? - c2_of_r(p, r_c - dr)?) / (T::lit(2.0) * dr);

    let eig = crate::stability::eigenvalues3(&j);
    let pair = eig
        .iter()
        .max_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap())
        .unwrap();
    if pair.im == T::zero() {
        return Err(Error::NotAHopfPoint {
            r: r_c.as_f64(),
            k2: cp.k2.as_f64(),
        });
    }

    Ok(HopfSearchResult {
        r_c,
        bracket: (lo, hi),
        c2_residual: cp.c2.abs(),
        k2_at_rc: cp.k2,
        transversality,
        eigen_crosscheck: pair.re.abs(),
    })
}

/// Closed-form cross-check of the critical rate: `C2 = 0` rewritten as a
/// quadratic in the prey diagonal entry `J11`, then mapped back to `r`.
///
/// The printed version of this map carries a sign slip on the second
/// consumption term, so both the consistent and the literal mapping are
/// reported. The quadratic is evaluated at a fixed equilibrium; it is a
/// diagnostic, not the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcClosedFormDiagnostic<T> {
    /// Quadratic coefficients: `h1 J11^2 + h2 J11 + h3 = 0`.
    pub h1: T,
    pub h2: T,
    pub h3: T,
    pub discriminant: T,
    /// Real roots for the critical `J11`, if any.
    pub j11_roots: Vec<T>,
    /// Growth rates recovered from each root via the `J11` definition.
    pub r_candidates: Vec<T>,
    /// Same map with the literal (sign-slipped) second consumption term.
    pub r_candidates_printed_variant: Vec<T>,
    /// The candidate whose root gives `k1 > 0`, when unique.
    pub preferred_rc: Option<T>,
}

impl<T: Real> RcClosedFormDiagnostic<T> {
    /// Residual of the quadratic at a given `J11`.
    pub fn residual_at(&self, j11: T) -> T {
        (self.h1 * j11 + self.h2) * j11 + self.h3
    }
}

pub fn rc_closed_form_diagnostic<T: Real>(
    p: &Params<T>,
    x_star: &State<T>,
) -> Result<RcClosedFormDiagnostic<T>> {
    // All entries except J11 are r-free, so any r gives the same values.
    let j = jacobian(p, x_star)?;
    let (j12, j13) = (j.get(0, 1), j.get(0, 2));
    let (j21, j22) = (j.get(1, 0), j.get(1, 1));
    let (j31, j33) = (j.get(2, 0), j.get(2, 2));

    let h1 = j22 + j33;
    let h2 = (j22 + j33) * (j22 + j33) - j12 * j21 - j13 * j31;
    let h3 = j22 * j33 * (j22 + j33) - j22 * j12 * j21 - j33 * j13 * j31;
    let disc = h2 * h2 - T::lit(4.0) * h1 * h3;

    let mut j11_roots = Vec::new();
    if disc >= T::zero() {
        let sq = disc.sqrt();
        let two = T::lit(2.0);
        j11_roots.push((-h2 + sq) / (two * h1));
        j11_roots.push((-h2 - sq) / (two * h1));
        j11_roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }

    let terms = |s: &State<T>| {
        let d1 = p.a1 + s.x1 + p.b1 * s.x2;
        let d2 = p.a2 + s.x1 + p.b2 * s.x3;
        let t1 = p.c1 * s.x2 * (p.a1 + p.b1 * s.x2) / (d1 * d1);
        let t2 = p.c2 * s.x3 * (p.a2 + p.b2 * s.x3) / (d2 * d2);
        (t1, t2)
    };
    let (t1, t2) = terms(x_star);
    let xk = x_star.x1 + p.k;
    let front = xk * xk / (p.k * p.k);

    let r_candidates: Vec<T> = j11_roots.iter().map(|&j11| front * (j11 + t1 + t2)).collect();
    let r_candidates_printed_variant: Vec<T> =
        j11_roots.iter().map(|&j11| front * (j11 + t1 - t2)).collect();

    // k1 > 0 requires J11 < -(J22 + J33); usually exactly one root obeys it.
    let admissible: Vec<usize> = j11_roots
        .iter()
        .enumerate()
        .filter(|(_, &root)| root < -h1)
        .map(|(i, _)| i)
        .collect();
    let preferred_rc = if admissible.len() == 1 {
        Some(r_candidates[admissible[0]])
    } else {
        None
    };

    Ok(RcClosedFormDiagnostic {
        h1,
        h2,
        h3,
        discriminant: disc,
        j11_roots,
        r_candidates,
        r_candidates_printed_variant,
        preferred_rc,
    })
}

/// Real eigenbasis at a Hopf point: columns are (Im v, Re v, u3) for the
/// complex eigenvector v of +i sqrt(k2) and the real eigenvector u3 of
/// -k1, normalized by their printed closed forms. Returns `(P, Q = P^-1)`.
pub fn eigenbasis<T: Real>(j: &Mat3<T>, cp: &CharPoly<T>) -> Result<(Mat3<T>, Mat3<T>)> {
    if cp.k2 <= T::zero() {
        return Err(Error::SingularBasis(format!(
            "k2 = {} <= 0: no imaginary eigenvalue pair",
            cp.k2
        )));
    }
    let w = cp.k2.sqrt();
    let (j21, j22) = (j.get(1, 0), j.get(1, 1));
    let (j31, j33) = (j.get(2, 0), j.get(2, 2));
    let guard = T::lit(1e-12);
    for (name, v) in [
        ("J22^2 + k2", j22 * j22 + cp.k2),
        ("J33^2 + k2", j33 * j33 + cp.k2),
        ("J22 + k1", j22 + cp.k1),
        ("J33 + k1", j33 + cp.k1),
    ] {
        if v.abs() < guard {
            return Err(Error::SingularBasis(format!("|{name}| = {} < 1e-12", v.abs())));
        }
    }
    let d2 = j22 * j22 + cp.k2;
    let d3 = j33 * j33 + cp.k2;
    let p_mat = Mat3([
        [T::zero(), T::one(), T::one()],
        [-j21 * w / d2, -j21 * j22 / d2, -j21 / (j22 + cp.k1)],
        [-j31 * w / d3, -j31 * j33 / d3, -j31 / (j33 + cp.k1)],
    ]);
    let q_mat = p_mat
        .inverse()
        .ok_or_else(|| Error::SingularBasis("det(P) = 0".into()))?;
    Ok((p_mat, q_mat))
}

/// Direction of the Hopf bifurcation as decided by the sign of `Pi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmDirection {
    /// `Pi < 0`: the bifurcating cycle is stable.
    Supercritical,
    /// `Pi > 0`: the bifurcating cycle is unstable.
    Subcritical,
}

/// The ten second- and third-order derivatives of the reduced planar field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FDerivatives<T> {
    pub f1_11: T,
    pub f1_12: T,
    pub f1_22: T,
    pub f1_111: T,
    pub f1_122: T,
    pub f2_11: T,
    pub f2_12: T,
    pub f2_22: T,
    pub f2_112: T,
    pub f2_222: T,
}

impl<T: Real> FDerivatives<T> {
    pub fn as_named(&self) -> [(&'static str, T); 10] {
        [
            ("F1_11", self.f1_11),
            ("F1_12", self.f1_12),
            ("F1_22", self.f1_22),
            ("F1_111", self.f1_111),
            ("F1_122", self.f1_122),
            ("F2_11", self.f2_11),
            ("F2_12", self.f2_12),
            ("F2_22", self.f2_22),
            ("F2_112", self.f2_112),
            ("F2_222", self.f2_222),
        ]
    }
}

/// A derivative whose literal transcription disagrees with the consistent
/// bilinear form beyond 1e-4 relative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaMismatch<T> {
    pub name: String,
    pub consistent: T,
    pub printed: T,
    pub relative_gap: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterManifoldReport<T> {
    pub r_c: T,
    pub equilibrium: State<T>,
    pub charpoly: CharPoly<T>,
    pub p_matrix: Mat3<T>,
    pub q_matrix: Mat3<T>,
    /// `max |Q J P - blockdiag([[0, -w],[w, 0]], -k1)|`.
    pub block_diag_residual: T,
    /// Quadratic projection coefficients of the third coordinate equation.
    pub omega: [T; 3],
    /// Center-manifold coefficients `(b11, b12, b22)` from the closed forms.
    pub b_coeffs: [T; 3],
    /// `max |closed form - direct linear solve|`.
    pub b_closed_form_vs_solve: T,
    /// `max |A b - omega|` after back-substitution.
    pub back_substitution_residual: T,
    pub f_derivs: FDerivatives<T>,
    /// The same ten values from the literal transcription.
    pub f_derivs_printed: FDerivatives<T>,
    pub printed_mismatches: Vec<FormulaMismatch<T>>,
    /// Stability quantity; positive means the bifurcating cycle is unstable.
    pub pi: T,
    /// `Pi` recomputed with the literal transcription, for the audit trail.
    pub pi_printed_variant: T,
    pub direction: CmDirection,
}

/// Full center-manifold reduction at a Hopf point.
pub fn center_manifold<T: Real>(p: &Params<T>, r_c: T) -> Result<CenterManifoldReport<T>> {
    center_manifold_scaled(p, r_c, T::one())
}

/// Same reduction with the oscillatory basis columns multiplied by
/// `basis_scale`; the printed normalization is `basis_scale = 1`. Exposed
/// so the scaling behaviour of `Pi` can be measured: `Pi` scales like the
/// square of this factor, so its magnitude is normalization-dependent
/// while its sign is not.
pub fn center_manifold_scaled<T: Real>(
    p: &Params<T>,
    r_c: T,
    basis_scale: T,
) -> Result<CenterManifoldReport<T>> {
    let (estar, j, cp) = interior_linearization(p, r_c)?;
    let scale = cp.scale();
    if cp.c2.abs() > T::lit(1e-6) * scale {
        return Err(Error::Usage(format!(
            "center manifold requires C2 ~ 0 (a Hopf point); C2({r_c}) = {}",
            cp.c2
        )));
    }
    if cp.k1.abs() < T::lit(1e-12) * scale {
        return Err(Error::DegenerateHopf { k1: cp.k1.as_f64() });
    }
    let w = cp.k2.sqrt();

    let (mut p_mat, _) = eigenbasis(&j, &cp)?;
    if basis_scale != T::one() {
        for row in 0..3 {
            p_mat.0[row][0] = p_mat.0[row][0] * basis_scale;
            p_mat.0[row][1] = p_mat.0[row][1] * basis_scale;
        }
    }
    let q_mat = p_mat
        .inverse()
        .ok_or_else(|| Error::SingularBasis("det(P) = 0".into()))?;

    // Block-diagonalization residual.
    let target = Mat3([
        [T::zero(), -w, T::zero()],
        [w, T::zero(), T::zero()],
        [T::zero(), T::zero(), -cp.k1],
    ]);
    let block_diag_residual = q_mat.mul_mat(&j).mul_mat(&p_mat).sub(&target).max_abs();

    let h = hessian(p, &estar.coords)?;
    let c1v = p_mat.col(0);
    let c2v = p_mat.col(1);
    let c3v = p_mat.col(2);
    let big_g = |i: usize, u: &[T; 3], v: &[T; 3]| h.bilinear(i, u, v);
    let proj = |q_row: [T; 3], u: &[T; 3], v: &[T; 3]| {
        q_row[0] * big_g(0, u, v) + q_row[1] * big_g(1, u, v) + q_row[2] * big_g(2, u, v)
    };

    let q1 = q_mat.row(0);
    let q2 = q_mat.row(1);
    let q3 = q_mat.row(2);

    let two = T::lit(2.0);
    let omega = [
        proj(q3, &c1v, &c1v),
        two * proj(q3, &c1v, &c2v),
        proj(q3, &c2v, &c2v),
    ];

    // Quadratic-coefficient system for (b11, b12, b22).
    let half_k1 = cp.k1 * T::lit(0.5);
    let a_cm = Mat3([
        [half_k1, w, T::zero()],
        [-w, cp.k1, w],
        [T::zero(), -w, half_k1],
    ]);
    let b_solved = a_cm
        .solve(&omega)
        .ok_or(Error::DegenerateHopf { k1: cp.k1.as_f64() })?;

    // Printed closed forms, checked against the direct solve.
    let den = cp.k1 * cp.k1 * cp.k1 / T::lit(4.0) + cp.k1 * cp.k2;
    let b11 = (cp.k2 * (omega[0] + omega[2]) - half_k1 * (w * omega[1] - cp.k1 * omega[0])) / den;
    let b12 = (cp.k1 * cp.k1 * omega[1] / T::lit(4.0) - half_k1 * w * (omega[2] - omega[0])) / den;
    let b22 =
        (cp.k2 * (omega[0] + omega[2]) + cp.k1 * cp.k1 * omega[2] * T::lit(0.5) + half_k1 * w * omega[1])
            / den;
    let b_coeffs = [b11, b12, b22];
    let b_closed_form_vs_solve = b_coeffs
        .iter()
        .zip(&b_solved)
        .map(|(a, b)| (*a - *b).abs())
        .fold(T::zero(), T::max);
    let back = a_cm.mul_vec(&b_coeffs);
    let back_substitution_residual = back
        .iter()
        .zip(&omega)
        .map(|(a, b)| (*a - *b).abs())
        .fold(T::zero(), T::max);

    // Consistent second/third derivatives of the reduced planar field.
    let d1 = proj(q1, &c1v, &c3v);
    let e1 = proj(q1, &c2v, &c3v);
    let d2 = proj(q2, &c1v, &c3v);
    let e2 = proj(q2, &c2v, &c3v);
    let six = T::lit(6.0);
    let f_derivs = FDerivatives {
        f1_11: two * proj(q1, &c1v, &c1v),
        f1_12: two * proj(q1, &c1v, &c2v),
        f1_22: two * proj(q1, &c2v, &c2v),
        f1_111: six * d1 * b11,
        f1_122: two * (two * e1 * b12 + d1 * b22),
        f2_11: two * proj(q2, &c1v, &c1v),
        f2_12: two * proj(q2, &c1v, &c2v),
        f2_22: two * proj(q2, &c2v, &c2v),
        f2_112: two * (e2 * b11 + two * d2 * b12),
        f2_222: six * e2 * b22,
    };

    let f_derivs_printed = printed_f_derivatives(&h, &p_mat, &q_mat, b_coeffs);

    let mut printed_mismatches = Vec::new();
    for ((name, c), (_, lit)) in f_derivs
        .as_named()
        .iter()
        .zip(f_derivs_printed.as_named().iter())
    {
        let denom = c.abs().max(lit.abs()).max(T::lit(1e-300));
        let gap = (*c - *lit).abs() / denom;
        if gap > T::lit(1e-4) {
            printed_mismatches.push(FormulaMismatch {
                name: name.to_string(),
                consistent: *c,
                printed: *lit,
                relative_gap: gap,
            });
        }
    }

    let pi_of = |f: &FDerivatives<T>| {
        f.f1_111
            + f.f2_112
            + f.f1_122
            + f.f2_222
            + (f.f1_12 * (f.f1_11 + f.f1_22) - f.f2_12 * (f.f2_11 + f.f2_22)
                - f.f1_11 * f.f2_11
                + f.f1_22 * f.f2_22)
                / w
    };
    let pi = pi_of(&f_derivs);
    let pi_printed_variant = pi_of(&f_derivs_printed);
    let direction = if pi > T::zero() {
        CmDirection::Subcritical
    } else {
        CmDirection::Supercritical
    };

    Ok(CenterManifoldReport {
        r_c,
        equilibrium: estar.coords,
        charpoly: cp,
        p_matrix: p_mat,
        q_matrix: q_mat,
        block_diag_residual,
        omega,
        b_coeffs,
        b_closed_form_vs_solve,
        back_substitution_residual,
        f_derivs,
        f_derivs_printed,
        printed_mismatches,
        pi,
        pi_printed_variant,
        direction,
    })
}

/// The ten derivative formulas exactly as printed in the source lists,
/// including their transcription slips (a `p22 p33` where the derivation
/// demands `p22 p23`, a dropped factor 2 on two cross terms, and a
/// `p12 p13` for `p12 p33`). Kept verbatim so the audit can quantify each
/// slip against the consistent bilinear forms.
#[allow(clippy::too_many_lines)]
fn printed_f_derivatives<T: Real>(
    h: &crate::model::HessianTensor<T>,
    p_mat: &Mat3<T>,
    q_mat: &Mat3<T>,
    b: [T; 3],
) -> FDerivatives<T> {
    let f = |i: usize, j: usize, k: usize| h.get(i, j, k);
    let [p11, p12, p13] = p_mat.row(0);
    let [p21, p22, p23] = p_mat.row(1);
    let [p31, p32, p33] = p_mat.row(2);
    let [b11, b12, b22] = b;
    let two = T::lit(2.0);
    let six = T::lit(6.0);

    // Second derivatives, one bracket per row of Q.
    let second = |q: [T; 3], u1: T, u2: T, u3: T, v1: T, v2: T, v3: T, drop_2_on_f3_31: bool| {
        let sym = |a: T, b_: T, c: T, d: T| a * d + b_ * c; // u_i v_j + u_j v_i
        let bracket1 = f(0, 0, 0) * u1 * v1
            + f(0, 1, 1) * u2 * v2
            + f(0, 2, 2) * u3 * v3
            + f(0, 2, 0) * sym(u1, u3, v1, v3)
            + f(0, 0, 1) * sym(u1, u2, v1, v2);
        let bracket2 =
            f(1, 0, 0) * u1 * v1 + f(1, 1, 1) * u2 * v2 + f(1, 0, 1) * sym(u1, u2, v1, v2);
        let cross3 = if drop_2_on_f3_31 {
            // The printed quadratic-in-z2 brackets lose the factor 2 here.
            f(2, 2, 0) * u1 * v3
        } else {
            f(2, 2, 0) * sym(u1, u3, v1, v3)
        };
        let bracket3 = f(2, 0, 0) * u1 * v1 + f(2, 2, 2) * u3 * v3 + cross3;
        two * (q[0] * bracket1 + q[1] * bracket2 + q[2] * bracket3)
    };

    let q1 = q_mat.row(0);
    let q2 = q_mat.row(1);

    let f1_11 = second(q1, p11, p21, p31, p11, p21, p31, false);
    let f1_12 = second(q1, p11, p21, p31, p12, p22, p32, false);
    let f1_22 = second(q1, p12, p22, p32, p12, p22, p32, true);
    let f2_11 = second(q2, p11, p21, p31, p11, p21, p31, false);
    let f2_12 = second(q2, p11, p21, p31, p12, p22, p32, false);
    let f2_22 = second(q2, p12, p22, p32, p12, p22, p32, true);

    // F1_111 = 6 b11 (q . G(col1, col3)).
    let f1_111 = six
        * b11
        * (q1[0]
            * (f(0, 0, 0) * p11 * p13
                + f(0, 1, 1) * p21 * p23
                + f(0, 2, 2) * p31 * p33
                + f(0, 2, 0) * (p11 * p33 + p13 * p31)
                + f(0, 0, 1) * (p11 * p23 + p21 * p13))
            + q1[1]
                * (f(1, 0, 0) * p11 * p13
                    + f(1, 1, 1) * p21 * p23
                    + f(1, 0, 1) * (p11 * p23 + p13 * p21))
            + q1[2]
                * (f(2, 0, 0) * p11 * p13
                    + f(2, 2, 2) * p31 * p33
                    + f(2, 2, 0) * (p11 * p33 + p13 * p31)));

    // F1_122 as printed, with the p22*p33 and p12*p13 slips.
    let f1_122 = two
        * (q1[0]
            * (f(0, 0, 0) * (two * p12 * p13 * b12 + p11 * p13 * b22)
                + f(0, 1, 1) * (two * p22 * p33 * b12 + p21 * p23 * b22)
                + f(0, 2, 2) * (two * p32 * p33 * b12 + p31 * p33 * b22)
                + f(0, 2, 0)
                    * (two * p13 * p32 * b12 + p11 * p33 * b22 + p13 * p31 * b22 + two * p12 * p33 * b12)
                + f(0, 0, 1)
                    * (two * p12 * p23 * b12 + p13 * p21 * b22 + p11 * p23 * b22 + two * p22 * p13 * b12))
            + q1[1]
                * (f(1, 0, 0) * (two * p12 * p13 * b12 + p11 * p13 * b22)
                    + f(1, 1, 1) * (two * p22 * p23 * b12 + p21 * p23 * b22)
                    + f(1, 0, 1)
                        * (two * p12 * p23 * b12
                            + p11 * p23 * b22
                            + two * p13 * p22 * b12
                            + p13 * p21 * b22))
            + q1[2]
                * (f(2, 0, 0) * (two * p13 * p12 * b12 + p11 * p13 * b22)
                    + f(2, 2, 2) * (two * p32 * p33 * b12 + p31 * p33 * b22)
                    + f(2, 2, 0)
                        * (two * p32 * p13 * b12
                            + p31 * p13 * b22
                            + two * p12 * p13 * b12
                            + p33 * p11 * b22)));

    // F2_112 as printed (no slips).
    let f2_112 = two
        * (q2[0]
            * (f(0, 0, 0) * (two * p11 * p13 * b12 + p12 * p13 * b11)
                + f(0, 1, 1) * (two * p21 * p23 * b12 + p22 * p23 * b11)
                + f(0, 2, 2) * (two * p31 * p33 * b12 + p32 * p33 * b11)
                + f(0, 2, 0)
                    * (two * p11 * p33 * b12 + p13 * p32 * b11 + p12 * p33 * b11 + two * p13 * p31 * b12)
                + f(0, 0, 1)
                    * (two * p13 * p21 * b12 + p12 * p23 * b11 + two * p11 * p23 * b12 + p22 * p13 * b11))
            + q2[1]
                * (f(1, 0, 0) * (two * p11 * p13 * b12 + p12 * p13 * b11)
                    + f(1, 1, 1) * (two * p21 * p23 * b12 + p22 * p23 * b11)
                    + f(1, 0, 1)
                        * (two * p11 * p23 * b12
                            + p12 * p23 * b11
                            + two * p13 * p21 * b12
                            + p13 * p22 * b11))
            + q2[2]
                * (f(2, 0, 0) * (two * p11 * p13 * b12 + p12 * p13 * b11)
                    + f(2, 2, 2) * (two * p31 * p33 * b12 + p32 * p33 * b11)
                    + f(2, 2, 0)
                        * (two * p31 * p13 * b12
                            + p33 * p12 * b11
                            + two * p11 * p33 * b12
                            + p32 * p13 * b11)));

    // F2_222 = 6 b22 (q2 . G(col2, col3)).
    let f2_222 = six
        * b22
        * (q2[0]
            * (f(0, 0, 0) * p12 * p13
                + f(0, 1, 1) * p22 * p23
                + f(0, 2, 2) * p32 * p33
                + f(0, 2, 0) * (p12 * p33 + p13 * p32)
                + f(0, 0, 1) * (p12 * p23 + p13 * p22))
            + q2[1]
                * (f(1, 0, 0) * p12 * p13
                    + f(1, 1, 1) * p22 * p23
                    + f(1, 0, 1) * (p12 * p23 + p13 * p22))
            + q2[2]
                * (f(2, 0, 0) * p12 * p13
                    + f(2, 2, 2) * p32 * p33
                    + f(2, 2, 0) * (p12 * p33 + p13 * p32)));

    FDerivatives {
        f1_11,
        f1_12,
        f1_22,
        f1_111,
        f1_122,
        f2_11,
        f2_12,
        f2_22,
        f2_112,
        f2_222,
    }
}

/// Fixed constants of the direction-validation experiment.
pub const DIRECTION_DELTA_R: f64 = 0.05;
pub const DIRECTION_RADII: [f64; 3] = [0.005, 0.05, 0.20];
pub const DIRECTION_T_END: f64 = 6000.0;
pub const DIRECTION_N_SAMPLES: usize = 12_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryClass {
    /// Final deviation fell below a tenth of the initial one.
    Converging,
    /// Sustained post-transient amplitude.
    Oscillating,
    Diverging,
    Undetermined,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionRun<T> {
    pub r: T,
    /// Perturbation radius as a fraction of |E*|.
    pub radius: T,
    pub class: TrajectoryClass,
    /// Final deviation from E*, relative to the initial deviation.
    pub deviation_ratio: Option<T>,
    /// Largest post-transient relative amplitude across components.
    pub max_rel_amplitude: Option<T>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionValidation<T> {
    pub r_c: T,
    pub r_below: T,
    pub r_above: T,
    pub claimed_direction: CmDirection,
    pub runs: Vec<DirectionRun<T>>,
    /// Side of the bifurcation where the smallest perturbation decays:
    /// -1 below, +1 above, None if ambiguous.
    pub stable_side: Option<i8>,
    /// Small perturbations decay on exactly one side and oscillate on the
    /// other: the observable signature of the Hopf transition.
    pub consistent: bool,
    pub notes: String,
}

/// Simulate both sides of the Hopf point at the fixed radii and compare
/// the observed classes with the claimed direction. Trajectories are
/// independent and run in parallel.
pub fn validate_direction<T: Real>(
    p: &Params<T>,
    r_c: T,
    claimed_direction: CmDirection,
) -> Result<DirectionValidation<T>> {
    let delta = T::lit(DIRECTION_DELTA_R);
    let r_below = r_c - delta;
    let r_above = r_c + delta;

    let mut tasks = Vec::new();
    for &side in &[r_below, r_above] {
        for &radius in &DIRECTION_RADII {
            tasks.push((side, T::lit(radius)));
        }
    }

    let runs: Vec<DirectionRun<T>> = tasks
        .par_iter()
        .map(|&(r, radius)| direction_run(p, r, radius))
        .collect();

    let small = T::lit(DIRECTION_RADII[0]);
    let class_at = |r: T| {
        runs.iter()
            .find(|run| run.r == r && run.radius == small)
            .map(|run| run.class)
    };
    let below = class_at(r_below);
    let above = class_at(r_above);
    let stable_side = match (below, above) {
        (Some(TrajectoryClass::Converging), Some(c)) if c != TrajectoryClass::Converging => {
            Some(-1)
        }
        (Some(c), Some(TrajectoryClass::Converging)) if c != TrajectoryClass::Converging => Some(1),
        _ => None,
    };
    let consistent = matches!(
        (below, above),
        (
            Some(TrajectoryClass::Converging),
            Some(TrajectoryClass::Oscillating)
        ) | (
            Some(TrajectoryClass::Oscillating),
            Some(TrajectoryClass::Converging)
        )
    );

    let largest_converging_on_stable_side = stable_side.and_then(|side| {
        let r = if side < 0 { r_below } else { r_above };
        runs.iter()
            .filter(|run| run.r == r && run.class == TrajectoryClass::Converging)
            .map(|run| run.radius)
            .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))))
    });
    let notes = match (claimed_direction, largest_converging_on_stable_side) {
        (CmDirection::Subcritical, Some(rad)) => format!(
            "claimed subcritical (unstable cycle on the stable side); perturbations up to \
             {rad} of |E*| still returned, so any unstable cycle lies beyond the tested radii"
        ),
        (CmDirection::Supercritical, _) => {
            "claimed supercritical (stable cycle on the oscillatory side)".to_string()
        }
        (CmDirection::Subcritical, None) => "claimed subcritical; stable side ambiguous".to_string(),
    };

    Ok(DirectionValidation {
        r_c,
        r_below,
        r_above,
        claimed_direction,
        runs,
        stable_side,
        consistent,
        notes,
    })
}

fn direction_run<T: Real>(p: &Params<T>, r: T, radius: T) -> DirectionRun<T> {
    let pr = p.with_r(r);
    let estar = match equilibria::feasible_interior(&pr) {
        Ok(e) => e,
        Err(e) => {
            return DirectionRun {
                r,
                radius,
                class: TrajectoryClass::Undetermined,
                deviation_ratio: None,
                max_rel_amplitude: None,
                error: Some(e.to_string()),
            }
        }
    };
    let target = estar.coords.as_array();
    let norm = vec_norm(&target);
    let eps = radius * norm / T::lit(3.0).sqrt();
    let init = State::new(target[0] + eps, target[1] + eps, target[2] + eps);

    let cfg = IntegratorConfig::for_params(&pr)
        .with_t_end(T::lit(DIRECTION_T_END), DIRECTION_N_SAMPLES);
    let traj = match dynamics::integrate(&pr, &init, &cfg) {
        Ok(t) => t,
        Err(f) => {
            let class = if f.kind == dynamics::FailureKind::NonFiniteState {
                TrajectoryClass::Diverging
            } else {
                TrajectoryClass::Undetermined
            };
            return DirectionRun {
                r,
                radius,
                class,
                deviation_ratio: None,
                max_rel_amplitude: None,
                error: Some(f.to_string()),
            };
        }
    };

    let initial_dev = vec_norm(&vec_sub(&init.as_array(), &target));
    let final_dev = traj
        .last_state()
        .map(|s| vec_norm(&vec_sub(&s.as_array(), &target)))
        .unwrap_or(T::infinity());
    let dev_ratio = if initial_dev > T::zero() {
        final_dev / initial_dev
    } else {
        T::zero()
    };

    let est = dynamics::detect_attractor(&traj, &cfg);
    let rel_amp = (0..3)
        .map(|j| est.amplitude[j] / target[j].abs().max(cfg.extinction_threshold))
        .fold(T::zero(), T::max);

    let converged = final_dev <= (T::lit(0.1) * initial_dev).max(T::lit(1e-6) * norm);
    let class = if est.class == AttractorClass::Diverged {
        TrajectoryClass::Diverging
    } else if converged {
        TrajectoryClass::Converging
    } else if rel_amp >= cfg.amplitude_rel_threshold {
        TrajectoryClass::Oscillating
    } else {
        TrajectoryClass::Undetermined
    };

    DirectionRun {
        r,
        radius,
        class,
        deviation_ratio: Some(dev_ratio),
        max_rel_amplitude: Some(rel_amp),
        error: None,
    }
}
