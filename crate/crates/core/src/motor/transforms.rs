//! Park-Clarke transform (amplitude invariant, 2/3 scaling) and its inverse.

use std::f64::consts::{PI, TAU};

const TWO_THIRDS_PI: f64 = 2.0 * PI / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AbcTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AbcTriple {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dq0 {
    pub d: f64,
    pub q: f64,
    pub zero: f64,
}

/// Wraps an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub fn electrical_angle(theta_m: f64, pole_pairs: u32) -> f64 {
    wrap_angle(f64::from(pole_pairs) * theta_m)
}

pub fn abc_to_dq0(f: AbcTriple, theta_e: f64) -> Dq0 {
    let (s0, c0) = theta_e.sin_cos();
    let (s1, c1) = (theta_e - TWO_THIRDS_PI).sin_cos();
    let (s2, c2) = (theta_e + TWO_THIRDS_PI).sin_cos();
    let k = 2.0 / 3.0;
    Dq0 {
        d: k * (c0 * f.a + c1 * f.b + c2 * f.c),
        q: -k * (s0 * f.a + s1 * f.b + s2 * f.c),
        zero: k * 0.5 * (f.a + f.b + f.c),
    }
}

/// Inverse of [`abc_to_dq0`] for a zero zero-sequence component.
pub fn dq_to_abc(d: f64, q: f64, theta_e: f64) -> AbcTriple {
    let (s0, c0) = theta_e.sin_cos();
    let (s1, c1) = (theta_e - TWO_THIRDS_PI).sin_cos();
    let (s2, c2) = (theta_e + TWO_THIRDS_PI).sin_cos();
    AbcTriple {
        a: c0 * d - s0 * q,
        b: c1 * d - s1 * q,
        c: c2 * d - s2 * q,
    }
}

/// Rotating dq vector to the stationary αβ frame.
pub fn dq_to_alpha_beta(d: f64, q: f64, theta_e: f64) -> (f64, f64) {
    let (s, c) = theta_e.sin_cos();
    (c * d - s * q, s * d + c * q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn electrical_angle_examples() {
        assert_eq!(electrical_angle(0.0, 5), 0.0);
        assert!(close(electrical_angle(0.1, 5), 0.5, 1e-15));
        let wrapped = electrical_angle(TAU, 5);
        assert!(wrapped < 1e-9 || (TAU - wrapped) < 1e-9);
        assert!(wrapped < TAU);
        assert!(wrap_angle(-1e-18) < TAU);
    }

    #[test]
    fn zero_and_common_mode() {
        let z = abc_to_dq0(AbcTriple::default(), 0.7);
        assert_eq!((z.d, z.q, z.zero), (0.0, 0.0, 0.0));
        for theta in [0.0, 0.3, 2.0, 5.9] {
            let r = abc_to_dq0(AbcTriple::new(1.7, 1.7, 1.7), theta);
            assert!(r.d.abs() < 1e-12 && r.q.abs() < 1e-12);
            assert!(close(r.zero, 1.7, 1e-15));
        }
    }

    #[test]
    fn clarke_columns_at_zero_angle() {
        // Hand-evaluated matrix at θe = 0:
        // 2/3 * [[1, -1/2, -1/2], [0, √3/2, -√3/2], [1/2, 1/2, 1/2]]
        let h = 3f64.sqrt() / 2.0;
        let expect = [
            (2.0 / 3.0, 0.0, 1.0 / 3.0),
            (-1.0 / 3.0, -2.0 / 3.0 * -h, 1.0 / 3.0),
            (-1.0 / 3.0, -2.0 / 3.0 * h, 1.0 / 3.0),
        ];
        let basis = [
            AbcTriple::new(1.0, 0.0, 0.0),
            AbcTriple::new(0.0, 1.0, 0.0),
            AbcTriple::new(0.0, 0.0, 1.0),
        ];
        for (col, (d, q, z)) in basis.into_iter().zip(expect) {
            let r = abc_to_dq0(col, 0.0);
            assert!(close(r.d, d, 1e-15) && close(r.q, q, 1e-15) && close(r.zero, z, 1e-15));
        }
        let r = abc_to_dq0(AbcTriple::new(1.0, -0.5, -0.5), 0.0);
        assert!(close(r.d, 1.0, 1e-15) && r.q.abs() < 1e-15 && r.zero.abs() < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        let z = dq_to_abc(0.0, 0.0, 1.0);
        assert_eq!((z.a, z.b, z.c), (0.0, 0.0, 0.0));
        let r = dq_to_abc(1.0, 0.0, 0.0);
        assert!(close(r.a, 1.0, 1e-15) && close(r.b, -0.5, 1e-15) && close(r.c, -0.5, 1e-15));
        let back = abc_to_dq0(dq_to_abc(0.3, -0.7, 1.234), 1.234);
        assert!(close(back.d, 0.3, 1e-12) && close(back.q, -0.7, 1e-12) && back.zero.abs() < 1e-12);
    }

    #[test]
    fn alpha_beta_agrees_with_abc_path() {
        let (d, q, th) = (0.4, -1.1, 2.2);
        let abc = dq_to_abc(d, q, th);
        let alpha = (2.0 / 3.0) * (abc.a - 0.5 * abc.b - 0.5 * abc.c);
        let beta = (abc.b - abc.c) / 3f64.sqrt();
        let (a2, b2) = dq_to_alpha_beta(d, q, th);
        assert!(close(alpha, a2, 1e-12) && close(beta, b2, 1e-12));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip(d in -100.0f64..100.0, q in -100.0f64..100.0, th in -20.0f64..20.0) {
            let r = abc_to_dq0(dq_to_abc(d, q, th), th);
            let scale = d.abs().max(q.abs()).max(1.0);
            prop_assert!((r.d - d).abs() <= 1e-12 * scale);
            prop_assert!((r.q - q).abs() <= 1e-12 * scale);
            prop_assert!(r.zero.abs() <= 1e-12 * scale);
        }
    }
}
