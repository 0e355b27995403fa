//! Independent radial shooting oracle for the cubic Navier problem
//! `Δ²u = u³` in the unit disk, `u(1) = Δu(1) = 0`.
//!
//! Scaling: if `v` solves `Δ²v = v³` on the disk of radius `R` with
//! `v(R) = Δv(R) = 0`, then `u(r) = R² v(R r)` solves the unit problem. Fix
//! `v(0) = 1`, shoot on `a = Δv(0) < 0`, and bisect on which of `v` and `Δv`
//! vanishes first.

#![allow(dead_code)]

type State = [f64; 4]; // v, v', w = Δv, w'

fn rhs(r: f64, y: &State) -> State {
    [y[1], y[2] - y[1] / r, y[3], y[0] * y[0] * y[0] - y[3] / r]
}

fn rk4(r: f64, y: &State, h: f64) -> State {
    let add = |a: &State, k: &State, s: f64| -> State {
        [a[0] + s * k[0], a[1] + s * k[1], a[2] + s * k[2], a[3] + s * k[3]]
    };
    let k1 = rhs(r, y);
    let k2 = rhs(r + h / 2.0, &add(y, &k1, h / 2.0));
    let k3 = rhs(r + h / 2.0, &add(y, &k2, h / 2.0));
    let k4 = rhs(r + h, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

const R0: f64 = 1e-5;
const H: f64 = 2e-4;
const R_MAX: f64 = 100.0;

/// Taylor start at `r = R0`: `v = 1 + a r²/4 + r⁴/64`, `w = a + r²/4`.
fn start(a: f64) -> State {
    let r = R0;
    [
        1.0 + a * r * r / 4.0 + r.powi(4) / 64.0,
        a * r / 2.0 + r.powi(3) / 16.0,
        a + r * r / 4.0 + 3.0 * a * r.powi(4) / 64.0,
        r / 2.0 + 3.0 * a * r.powi(3) / 16.0,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    /// `v` reached zero first, at this radius.
    VZero(f64),
    /// `w` reached zero first.
    WZero,
}

/// Offset of the first sign change of component `c` inside the step from
/// `(r, y)`, which must contain one.
fn refine(r: f64, y: &State, h: f64, c: usize) -> f64 {
    let sign = y[c].signum();
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if rk4(r, y, mid)[c] * sign > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn shoot(a: f64) -> Event {
    let mut r = R0;
    let mut y = start(a);
    while r < R_MAX {
        let next = rk4(r, &y, H);
        let v_hit = (next[0] <= 0.0).then(|| refine(r, &y, H, 0));
        let w_hit = (next[2] >= 0.0).then(|| refine(r, &y, H, 2));
        match (v_hit, w_hit) {
            (Some(v), Some(w)) if w < v => return Event::WZero,
            (Some(v), _) => return Event::VZero(r + v),
            (None, Some(_)) => return Event::WZero,
            (None, None) => {}
        }
        y = next;
        r += H;
    }
    Event::WZero
}

/// Values of `v` at ascending radii `targets` for shooting parameter `a`.
fn profile(a: f64, targets: &[f64]) -> Vec<f64> {
    let mut r = R0;
    let mut y = start(a);
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        if t <= R0 {
            out.push(1.0 + a * t * t / 4.0);
            continue;
        }
        while r < t {
            let h = H.min(t - r);
            y = rk4(r, &y, h);
            r += h;
        }
        out.push(y[0]);
    }
    out
}

/// The positive radial solution of the unit Navier problem at the radii
/// `nodes` (ascending, in `[0, 1]`).
pub fn navier_cubic(nodes: &[f64]) -> Vec<f64> {
    // bracket: a ≈ 0 lets w vanish first, a ≪ 0 lets v vanish first
    let mut hi = -1e-3;
    assert_eq!(shoot(hi), Event::WZero);
    let mut lo = -1.0;
    while shoot(lo) == Event::WZero {
        lo *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        match shoot(mid) {
            Event::WZero => hi = mid,
            Event::VZero(_) => lo = mid,
        }
    }
    let a = lo;
    let radius = match shoot(a) {
        Event::VZero(r) => r,
        Event::WZero => unreachable!("lower bracket end always hits v = 0 first"),
    };
    let scaled: Vec<f64> = nodes.iter().map(|r| r * radius).collect();
    profile(a, &scaled)
        .into_iter()
        .map(|v| radius * radius * v)
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
