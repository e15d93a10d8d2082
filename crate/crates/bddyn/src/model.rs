//! The three-species vector field and its first and second derivatives.
//!
//! One prey `x1` feeds two predators `x2`, `x3`. The prey grows
//! quasi-linearly, `r k x1 / (x1 + k)`, and each predator consumes prey
//! through a Beddington-DeAngelis response
//! `c_i x1 x_pred / (a_i + x1 + b_i x_pred)`.
//!
//! All derivatives are hand-coded closed forms; the test suite checks them
//! against central finite differences of the level below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::scalar::Real;

/// The twelve positive model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    /// Prey growth rate (1/time).
    pub r: T,
    /// Prey growth half-saturation constant (biomass).
    pub k: T,
    /// Predation half-saturation constants (biomass).
    pub a1: T,
    pub a2: T,
    /// Mutual-interference coefficients (1/biomass).
    pub b1: T,
    pub b2: T,
    /// Search rates (1/time).
    pub c1: T,
    pub c2: T,
    /// Predator death rates (1/time).
    pub delta1: T,
    pub delta2: T,
    /// Conversion factors, in (0, 1).
    pub e1: T,
    pub e2: T,
}

impl<T: Real> Params<T> {
    /// Check every domain constraint, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive: [(&str, T); 12] = [
            ("r", self.r),
            ("k", self.k),
            ("a1", self.a1),
            ("a2", self.a2),
            ("b1", self.b1),
            ("b2", self.b2),
            ("c1", self.c1),
            ("c2", self.c2),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("e1", self.e1),
            ("e2", self.e2),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::InvalidParams(format!(
                    "{name}: must be a finite, strictly positive number, got {v}"
                )));
            }
        }
        for (name, v) in [("e1", self.e1), ("e2", self.e2)] {
            if v >= T::one() {
                return Err(Error::InvalidParams(format!(
                    "{name}: conversion factor must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Same parameters with a different prey growth rate.
    pub fn with_r(mut self, r: T) -> Self {
        self.r = r;
        self
    }
}

/// Population volumes; the model lives on the closed positive octant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State<T> {
    pub x1: T,
    pub x2: T,
    pub x3: T,
}

impl<T: Real> State<T> {
    pub fn new(x1: T, x2: T, x3: T) -> Self {
        State { x1, x2, x3 }
    }

    pub fn from_array(a: [T; 3]) -> Self {
        State { x1: a[0], x2: a[1], x3: a[2] }
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    fn check_octant(&self, op: &'static str) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite(op));
        }
        if self.x1 < T::zero() || self.x2 < T::zero() || self.x3 < T::zero() {
            return Err(Error::NegativeState(format!(
                "{op} requires the closed positive octant, got ({}, {}, {})",
                self.x1, self.x2, self.x3
            )));
        }
        Ok(())
    }
}

/// Time derivatives of the three populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deriv<T> {
    pub dx1: T,
    pub dx2: T,
    pub dx3: T,
}

impl<T: Real> Deriv<T> {
    pub fn as_array(&self) -> [T; 3] {
        [self.dx1, self.dx2, self.dx3]
    }

    pub fn max_abs(&self) -> T {
        self.dx1.abs().max(self.dx2.abs()).max(self.dx3.abs())
    }
}

/// Jacobian of the vector field; entries `J[i][j] = df_i/dx_j`.
///
/// For this model `J[1][2]` and `J[2][1]` (0-based) vanish identically:
/// the two predators interact only through the prey.
pub type Jacobian3<T> = Mat3<T>;

/// Which predator a response evaluation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredatorIndex {
    First,
    Second,
}

impl TryFrom<u8> for PredatorIndex {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(PredatorIndex::First),
            2 => Ok(PredatorIndex::Second),
            other => Err(Error::Usage(format!(
                "predator index must be 1 or 2, got {other}"
            ))),
        }
    }
}

/// All second partials: `H[i][j][k] = d^2 f_i / dx_j dx_k`, symmetric in
/// the last two indices. `component(i)` is the symmetric matrix of f_i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianTensor<T> {
    pub components: [Mat3<T>; 3],
}

impl<T: Real> HessianTensor<T> {
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.components[i].0[j][k]
    }

    /// The bilinear form `u^T H[i] v`.
    pub fn bilinear(&self, i: usize, u: &[T; 3], v: &[T; 3]) -> T {
        let hu = self.components[i].mul_vec(v);
        crate::linalg::vec_dot(u, &hu)
    }
}

/// Right-hand side of the model, without domain checks.
///
/// The adaptive integrator evaluates internal stages that may leave the
/// octant by a tolerance-sized margin, which is legal there; public callers
/// should use [`rhs`].
pub fn rhs_raw<T: Real>(p: &Params<T>, s: &[T; 3]) -> [T; 3] {
    let [x1, x2, x3] = *s;
    let d1 = p.a1 + x1 + p.b1 * x2;
    let d2 = p.a2 + x1 + p.b2 * x3;
    // Growth written as r k x1 / (x1 + k): algebraically identical to the
    // logistic-like form but avoids cancellation in 1 - x1/(x1+k).
    let growth = p.r * p.k * x1 / (x1 + p.k);
    [
        growth - p.c1 * x1 * x2 / d1 - p.c2 * x1 * x3 / d2,
        -p.delta1 * x2 + p.c1 * p.e1 * x1 * x2 / d1,
        -p.delta2 * x3 + p.c2 * p.e2 * x1 * x3 / d2,
    ]
}

/// Exact right-hand side of the model at a state in the closed octant.
pub fn rhs<T: Real>(p: &Params<T>, s: &State<T>) -> Result<Deriv<T>> {
    s.check_octant("rhs")?;
    let d = rhs_raw(p, &s.as_array());
    Ok(Deriv { dx1: d[0], dx2: d[1], dx3: d[2] })
}

/// Beddington-DeAngelis consumption rate of the chosen predator.
pub fn response<T: Real>(p: &Params<T>, s: &State<T>, which: PredatorIndex) -> Result<T> {
    s.check_octant("response")?;
    Ok(match which {
        PredatorIndex::First => p.c1 * s.x1 * s.x2 / (p.a1 + s.x1 + p.b1 * s.x2),
        PredatorIndex::Second => p.c2 * s.x1 * s.x3 / (p.a2 + s.x1 + p.b2 * s.x3),
    })
}

/// Jacobian of the vector field at a state in the closed octant.
pub fn jacobian<T: Real>(p: &Params<T>, s: &State<T>) -> Result<Jacobian3<T>> {
    s.check_octant("jacobian")?;
    let (x1, x2, x3) = (s.x1, s.x2, s.x3);
    let d1 = p.a1 + x1 + p.b1 * x2;
    let d2 = p.a2 + x1 + p.b2 * x3;
    let d1_sq = d1 * d1;
    let d2_sq = d2 * d2;
    let xk = x1 + p.k;

    let j11 = p.r * p.k * p.k / (xk * xk)
        - p.c1 * x2 * (p.a1 + p.b1 * x2) / d1_sq
        - p.c2 * x3 * (p.a2 + p.b2 * x3) / d2_sq;
    let j12 = -p.c1 * x1 * (p.a1 + x1) / d1_sq;
    let j13 = -p.c2 * x1 * (p.a2 + x1) / d2_sq;
    let j21 = p.c1 * p.e1 * x2 * (p.a1 + p.b1 * x2) / d1_sq;
    let j22 = -p.delta1 + p.c1 * p.e1 * x1 * (p.a1 + x1) / d1_sq;
    let j31 = p.c2 * p.e2 * x3 * (p.a2 + p.b2 * x3) / d2_sq;
    let j33 = -p.delta2 + p.c2 * p.e2 * x1 * (p.a2 + x1) / d2_sq;

    let z = T::zero();
    Ok(Mat3([[j11, j12, j13], [j21, j22, z], [j31, z, j33]]))
}

/// Hessian tensor of the vector field at a state in the closed octant.
pub fn hessian<T: Real>(p: &Params<T>, s: &State<T>) -> Result<HessianTensor<T>> {
    s.check_octant("hessian")?;
    let (x1, x2, x3) = (s.x1, s.x2, s.x3);
    let two = T::lit(2.0);
    let d1 = p.a1 + x1 + p.b1 * x2;
    let d2 = p.a2 + x1 + p.b2 * x3;
    let d1_cu = d1 * d1 * d1;
    let d2_cu = d2 * d2 * d2;
    let xk = x1 + p.k;

    let f1_11 = -two * p.r * p.k * p.k / (xk * xk * xk)
        + two * p.c1 * x2 * (p.a1 + p.b1 * x2) / d1_cu
        + two * p.c2 * x3 * (p.a2 + p.b2 * x3) / d2_cu;
    let f1_22 = two * p.b1 * p.c1 * x1 * (p.a1 + x1) / d1_cu;
    let f1_33 = two * p.b2 * p.c2 * x1 * (p.a2 + x1) / d2_cu;
    let f1_12 = -(p.c1 * p.a1 * d1 + two * p.b1 * p.c1 * x1 * x2) / d1_cu;
    let f1_13 = -(p.c2 * p.a2 * d2 + two * p.b2 * p.c2 * x3 * x1) / d2_cu;

    let f2_11 = -two * p.c1 * p.e1 * x2 * (p.a1 + p.b1 * x2) / d1_cu;
    let f2_22 = -two * p.b1 * p.c1 * p.e1 * x1 * (p.a1 + x1) / d1_cu;
    let f2_12 = (p.a1 * p.c1 * p.e1 * d1 + two * p.b1 * p.c1 * p.e1 * x1 * x2) / d1_cu;

    let f3_11 = -two * p.c2 * p.e2 * x3 * (p.a2 + p.b2 * x3) / d2_cu;
    let f3_33 = -two * p.b2 * p.c2 * p.e2 * x1 * (p.a2 + x1) / d2_cu;
    let f3_13 = (p.a2 * p.c2 * p.e2 * d2 + two * p.b2 * p.c2 * p.e2 * x1 * x3) / d2_cu;

    let z = T::zero();
    Ok(HessianTensor {
        components: [
            Mat3([[f1_11, f1_12, f1_13], [f1_12, f1_22, z], [f1_13, z, f1_33]]),
            Mat3([[f2_11, f2_12, z], [f2_12, f2_22, z], [z, z, z]]),
            Mat3([[f3_11, z, f3_13], [z, z, z], [f3_13, z, f3_33]]),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn base(r: f64) -> Params<f64> {
        presets::table2(r)
    }

    /// Central finite-difference Jacobian of `rhs`, step 1e-5 * max(1, |x_j|).
    fn fd_jacobian(p: &Params<f64>, s: &State<f64>) -> Mat3<f64> {
        let x = s.as_array();
        let mut j = Mat3::zeros();
        for col in 0..3 {
            let h = 1e-5 * x[col].abs().max(1.0);
            let mut xp = x;
            xp[col] += h;
            let mut xm = x;
            xm[col] -= h;
            let fp = rhs_raw(p, &xp);
            let fm = rhs_raw(p, &xm);
            for row in 0..3 {
                j.0[row][col] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        j
    }

    /// Central finite-difference Hessian from the analytic Jacobian.
    fn fd_hessian(p: &Params<f64>, s: &State<f64>) -> [Mat3<f64>; 3] {
        let x = s.as_array();
        let mut h = [Mat3::zeros(); 3];
        for col in 0..3 {
            let step = 1e-5 * x[col].abs().max(1.0);
            let mut xp = x;
            xp[col] += step;
            let mut xm = x;
            xm[col] -= step;
            let jp = jacobian(p, &State::from_array(xp)).unwrap();
            let jm = jacobian(p, &State::from_array(xm)).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    h[i].0[j][col] = (jp.0[i][j] - jm.0[i][j]) / (2.0 * step);
                }
            }
        }
        h
    }

    #[test]
    fn rhs_is_exactly_zero_at_origin() {
        let p = base(1.37);
        let d = rhs(&p, &State::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(d.as_array(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn rhs_matches_term_by_term_arithmetic() {
        // Frozen from an independent term-by-term evaluation at the default
        // parameter set, r = 1.37, state (100, 50, 50): growth = 274/3,
        // both consumption terms = 9000/225 = 40, conversion terms
        // 32.572 and 25 exactly.
        let p = base(1.37);
        let d = rhs(&p, &State::new(100.0, 50.0, 50.0)).unwrap();
        assert!((d.dx1 - 1.13333333333333286e1).abs() < 1e-13);
        assert!((d.dx2 - -8.42799999999999727e0).abs() < 1e-13);
        assert_eq!(d.dx3, -6.0);
    }

    #[test]
    fn response_vanishes_without_prey_or_predator() {
        let p = base(1.37);
        assert_eq!(
            response(&p, &State::new(0.0, 50.0, 20.0), PredatorIndex::First).unwrap(),
            0.0
        );
        assert_eq!(
            response(&p, &State::new(80.0, 0.0, 20.0), PredatorIndex::First).unwrap(),
            0.0
        );
        assert_eq!(
            response(&p, &State::new(80.0, 50.0, 0.0), PredatorIndex::Second).unwrap(),
            0.0
        );
    }

    #[test]
    fn response_matches_single_fraction_oracle() {
        let p = base(1.37);
        let v = response(&p, &State::new(100.0, 50.0, 50.0), PredatorIndex::First).unwrap();
        assert_eq!(v, 40.0); // 1.8 * 100 * 50 / 225
    }

    #[test]
    fn invalid_predator_index_is_rejected() {
        assert!(PredatorIndex::try_from(3).is_err());
        assert_eq!(PredatorIndex::try_from(1).unwrap(), PredatorIndex::First);
    }

    #[test]
    fn non_finite_and_negative_inputs_are_rejected() {
        let p = base(1.37);
        assert!(rhs(&p, &State::new(f64::NAN, 1.0, 1.0)).is_err());
        assert!(rhs(&p, &State::new(1.0, -0.5, 1.0)).is_err());
        assert!(jacobian(&p, &State::new(1.0, 1.0, f64::INFINITY)).is_err());
        assert!(hessian(&p, &State::new(-1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn jacobian_at_origin_is_diagonal() {
        let p = base(1.37);
        let j = jacobian(&p, &State::new(0.0, 0.0, 0.0)).unwrap();
        let expected = Mat3::from_diagonal([p.r, -p.delta1, -p.delta2]);
        assert_eq!(j, expected);
    }

    #[test]
    fn jacobian_structural_zeros() {
        let p = base(1.37);
        let j = jacobian(&p, &State::new(123.0, 45.0, 67.0)).unwrap();
        assert_eq!(j.get(1, 2), 0.0);
        assert_eq!(j.get(2, 1), 0.0);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = base(1.37);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let s = State::new(
                rng.gen_range(0.5..400.0),
                rng.gen_range(0.5..200.0),
                rng.gen_range(0.5..200.0),
            );
            let j = jacobian(&p, &s).unwrap();
            let fd = fd_jacobian(&p, &s);
            let err = j.sub(&fd).max_abs() / j.max_abs();
            assert!(err < 1e-6, "relative error {err} at {s:?}");
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let p = base(1.37);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let s = State::new(
                rng.gen_range(0.5..400.0),
                rng.gen_range(0.5..200.0),
                rng.gen_range(0.5..200.0),
            );
            let h = hessian(&p, &s).unwrap();
            let fd = fd_hessian(&p, &s);
            let scale = h.components.iter().map(Mat3::max_abs).fold(0.0, f64::max);
            let err = h
                .components
                .iter()
                .zip(&fd)
                .map(|(a, b)| a.sub(b).max_abs())
                .fold(0.0, f64::max)
                / scale;
            assert!(err < 1e-5, "relative error {err} at {s:?}");
        }
    }

    #[test]
    fn hessian_structural_zeros_hold_exactly() {
        let p = base(1.37);
        let h = hessian(&p, &State::new(211.0, 37.0, 19.0)).unwrap();
        // (i, j, k) triples that vanish identically, 0-based.
        let zeros = [
            (0, 1, 2),
            (1, 2, 2),
            (1, 1, 2),
            (1, 2, 0),
            (2, 1, 1),
            (2, 1, 2),
            (2, 0, 1),
        ];
        for (i, j, k) in zeros {
            assert_eq!(h.get(i, j, k), 0.0, "H[{i}][{j}][{k}]");
            assert_eq!(h.get(i, k, j), 0.0, "H[{i}][{k}][{j}]");
        }
    }

    proptest! {
        #[test]
        fn hessian_is_symmetric_in_trailing_indices(
            x1 in 0.1f64..500.0,
            x2 in 0.1f64..250.0,
            x3 in 0.1f64..250.0,
        ) {
            let p = base(1.37);
            let h = hessian(&p, &State::new(x1, x2, x3)).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        prop_assert_eq!(h.get(i, j, k), h.get(i, k, j));
                    }
                }
            }
        }

        #[test]
        fn outputs_are_finite_on_the_octant(
            x1 in 0.0f64..1e6,
            x2 in 0.0f64..1e6,
            x3 in 0.0f64..1e6,
        ) {
            let p = base(1.37);
            let s = State::new(x1, x2, x3);
            let d = rhs(&p, &s).unwrap();
            prop_assert!(d.as_array().iter().all(|v| v.is_finite()));
            prop_assert!(jacobian(&p, &s).unwrap().is_finite());
        }
    }

    #[test]
    fn generic_scalar_path_agrees_with_f64() {
        let p64 = base(1.37);
        let p32 = Params::<f32> {
            r: 1.37,
            k: 200.0,
            a1: 100.0,
            a2: 100.0,
            b1: 0.5,
            b2: 0.5,
            c1: 1.8,
            c2: 1.8,
            delta1: 0.82,
            delta2: 0.62,
            e1: 0.8143,
            e2: 0.625,
        };
        let d64 = rhs(&p64, &State::new(100.0, 50.0, 50.0)).unwrap();
        let d32 = rhs(&p32, &State::new(100.0f32, 50.0, 50.0)).unwrap();
        for (a, b) in d64.as_array().iter().zip(d32.as_array()) {
            assert!((a - b as f64).abs() < 1e-4, "{a} vs {b}");
        }
    }
}
