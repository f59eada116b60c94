//! Deterministic closed-form solver for real monic cubics.
//!
//! Three real roots go through the trigonometric form, a single real root
//! through Cardano. One Newton step against the original polynomial polishes
//! each root. Roots are returned sorted by descending real part, ties broken
//! by descending imaginary part, so downstream code sees a stable order.

use num_complex::Complex64;

/// Roots of `x^3 + c2 x^2 + c1 x + c0`.
pub fn solve_monic_cubic(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    let shift = -c2 / 3.0;
    // Depressed form t^3 + p t + q with x = t + shift.
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let discriminant = -4.0 * p * p * p - 27.0 * q * q;

    let mut roots = if discriminant >= 0.0 {
        // Three real roots. p <= 0 is guaranteed here up to rounding.
        let r = (-p / 3.0).max(0.0).sqrt();
        let cos_arg = if r < 1e-300 {
            0.0
        } else {
            (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0)
        };
        let theta = cos_arg.acos() / 3.0;
        let two_r = 2.0 * r;
        let third = 2.0 * std::f64::consts::PI / 3.0;
        [
            Complex64::new(two_r * theta.cos() + shift, 0.0),
            Complex64::new(two_r * (theta - third).cos() + shift, 0.0),
            Complex64::new(two_r * (theta + third).cos() + shift, 0.0),
        ]
    } else {
        // One real root via Cardano, then the conjugate pair from the
        // deflated quadratic t^2 + t1 t + (t1^2 + p).
        let half_q = q / 2.0;
        let sqrt_disc = (half_q * half_q + p * p * p / 27.0).max(0.0).sqrt();
        let u = (-half_q + sqrt_disc).cbrt();
        let v = (-half_q - sqrt_disc).cbrt();
        let t1 = u + v;
        let imag_sq = 3.0 * t1 * t1 / 4.0 + p;
        let imag = imag_sq.max(0.0).sqrt();
        [
            Complex64::new(t1 + shift, 0.0),
            Complex64::new(-t1 / 2.0 + shift, imag),
            Complex64::new(-t1 / 2.0 + shift, -imag),
        ]
    };

    for root in roots.iter_mut() {
        *root = polish(*root, c2, c1, c0);
    }
    // Keep the complex pair exactly conjugate after polishing.
    if roots[1].im != 0.0 {
        roots[2] = roots[1].conj();
    }

    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    roots
}

/// One Newton step on the original cubic; skipped near critical points.
fn polish(z: Complex64, c2: f64, c1: f64, c0: f64) -> Complex64 {
    let value = ((z + c2) * z + c1) * z + c0;
    let derivative = (3.0 * z + 2.0 * c2) * z + c1;
    let scale = 1.0 + z.norm_sqr();
    if derivative.norm_sqr() <= 1e-24 * scale * scale {
        return z;
    }
    let step = value / derivative;
    // A genuine Newton correction near a root is tiny; a large step means
    // we are near a critical point and polishing would do harm.
    if step.norm_sqr() > 1e-2 * scale {
        return z;
    }
    let polished = z - step;
    if z.im == 0.0 {
        Complex64::new(polished.re, 0.0)
    } else {
        polished
    }
}
