//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

pub mod props;

pub type M2 = [[f64; 2]; 2];

pub fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn transpose(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn add(a: &M2, b: &M2) -> M2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn scale(a: &M2, s: f64) -> M2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn inv(a: &M2) -> M2 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]
}

/// Discounted discrete Riccati solution by iterating
/// `P ← Q + γAᵀPA − γ²AᵀPB(R + γBᵀPB)⁻¹BᵀPA` from `P = 0` until the
/// relative change is below 1e-12. Returns `(P, K)` with `u = −Kx`.
pub fn discounted_dare(a: &M2, b: &M2, q: &M2, r: &M2, gamma: f64) -> (M2, M2) {
    let at = transpose(a);
    let bt = transpose(b);
    let mut p = [[0.0; 2]; 2];
    for _ in 0..1_000_000 {
        let pa = mul(&p, a);
        let pb = mul(&p, b);
        let s = add(r, &scale(&mul(&bt, &pb), gamma));
        let k = scale(&mul(&inv(&s), &mul(&bt, &pa)), gamma);
        let next = add(q, &add(&scale(&mul(&at, &pa), gamma), &scale(&mul(&mul(&at, &pb), &k), -gamma)));
        let norm = next.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        let diff = next.iter().flatten().zip(p.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        p = next;
        if diff <= 1e-12 * norm.max(f64::MIN_POSITIVE) {
            let pa = mul(&p, a);
            let pb = mul(&p, b);
            let s = add(r, &scale(&mul(&bt, &pb), gamma));
            let k = scale(&mul(&inv(&s), &mul(&bt, &pa)), gamma);
            return (p, k);
        }
    }
    panic!("Riccati iteration did not converge");
}

/// Smallest value of `cost(v_d, v_q)` over a square grid of pitch `pitch`
/// clipped to the disk of radius `radius`.
pub fn grid_min(radius: f64, pitch: f64, cost: impl Fn(f64, f64) -> f64) -> (f64, (f64, f64)) {
    let n = (radius / pitch).floor() as i64;
    let mut best = (f64::INFINITY, (0.0, 0.0));
    for i in -n..=n {
        for j in -n..=n {
            let (x, y) = (i as f64 * pitch, j as f64 * pitch);
            if x * x + y * y > radius * radius {
                continue;
            }
            let c = cost(x, y);
            if c < best.0 {
                best = (c, (x, y));
            }
        }
    }
    best
}

/// Relative error `|a − b| / |b|`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
