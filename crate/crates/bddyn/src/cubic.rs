//! Closed-form roots of a real monic cubic, with a Newton polish.
//!
//! A 3x3 spectrum does not warrant an iterative eigensolver: the
//! trigonometric branch handles three real roots, Cardano handles the
//! single-real-root case, and one guarded Newton step per root restores
//! the accuracy lost near repeated roots.

use num_complex::Complex;

use crate::scalar::Real;

/// Roots of `x^3 + k1 x^2 + k2 x + k3`, complex roots in conjugate pairs.
///
/// Output is sorted by (real part, imaginary part) so callers get a
/// deterministic order.
pub fn roots_monic<T: Real>(k1: T, k2: T, k3: T) -> [Complex<T>; 3] {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let half = T::lit(0.5);

    // Depressed form: x = t - k1/3, t^3 + p t + q = 0.
    let shift = -k1 / three;
    let p = k2 - k1 * k1 / three;
    let q = two * k1 * k1 * k1 / T::lit(27.0) - k1 * k2 / three + k3;

    let disc = -(T::lit(4.0) * p * p * p + T::lit(27.0) * q * q);

    let scale = one + k1.abs() + k2.abs() + k3.abs();
    let tiny = T::epsilon() * scale;

    let mut roots: [Complex<T>; 3];
    if p.abs() <= tiny && q.abs() <= tiny * tiny {
        // Triple (or near-triple) root.
        let r = Complex::new(shift, T::zero());
        roots = [r, r, r];
    } else if disc >= T::zero() {
        // Three real roots (trigonometric form).
        let m = two * (-p / three).sqrt();
        let cos_arg = if m.abs() <= tiny {
            T::zero()
        } else {
            (three * q / (p * m)).max(-one).min(one)
        };
        let theta = cos_arg.acos() / three;
        let two_pi_3 = T::lit(2.0943951023931953);
        let mut rs = [
            m * theta.cos() + shift,
            m * (theta - two_pi_3).cos() + shift,
            m * (theta + two_pi_3).cos() + shift,
        ];
        for r in rs.iter_mut() {
            *r = polish_real(*r, k1, k2, k3);
        }
        roots = [
            Complex::new(rs[0], T::zero()),
            Complex::new(rs[1], T::zero()),
            Complex::new(rs[2], T::zero()),
        ];
    } else {
        // One real root via Cardano, then the conjugate pair from the
        // deflated quadratic.
        let sqrt_term = (q * q / T::lit(4.0) + p * p * p / T::lit(27.0)).sqrt();
        let u = (-q * half + sqrt_term).cbrt();
        let v = (-q * half - sqrt_term).cbrt();
        let real = polish_real(u + v + shift, k1, k2, k3);

        // x^3 + k1 x^2 + k2 x + k3 = (x - real)(x^2 + b x + c)
        let b = k1 + real;
        let c = k2 + real * b;
        let d = b * b - T::lit(4.0) * c;
        if d < T::zero() {
            let re = -b * half;
            let im = (-d).sqrt() * half;
            roots = [
                Complex::new(re, -im),
                Complex::new(re, im),
                Complex::new(real, T::zero()),
            ];
        } else {
            // Deflation pushed a borderline pair onto the real axis.
            let sd = d.sqrt();
            roots = [
                Complex::new((-b - sd) * half, T::zero()),
                Complex::new((-b + sd) * half, T::zero()),
                Complex::new(real, T::zero()),
            ];
        }
    }

    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    roots
}

/// One Newton step on the original cubic, kept only if it reduces the
/// residual.
fn polish_real<T: Real>(x: T, k1: T, k2: T, k3: T) -> T {
    let f = |x: T| ((x + k1) * x + k2) * x + k3;
    let df = |x: T| (T::lit(3.0) * x + T::lit(2.0) * k1) * x + k2;
    let fx = f(x);
    let dfx = df(x);
    if dfx == T::zero() {
        return x;
    }
    let x_new = x - fx / dfx;
    if f(x_new).abs() < fx.abs() {
        x_new
    } else {
        x
    }
}

/// Residual `|x^3 + k1 x^2 + k2 x + k3|` at a complex point.
pub fn residual<T: Real>(x: Complex<T>, k1: T, k2: T, k3: T) -> T {
    let k1c = Complex::new(k1, T::zero());
    let k2c = Complex::new(k2, T::zero());
    let k3c = Complex::new(k3, T::zero());
    (((x + k1c) * x + k2c) * x + k3c).norm()
}
