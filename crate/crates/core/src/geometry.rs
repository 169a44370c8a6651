//! Planar polygon utilities used by mesh construction and sector averaging.

use crate::vec2::{self, Vec2};

/// Signed area (positive for counterclockwise vertex order).
pub fn polygon_area(p: &[Vec2]) -> f64 {
    let n = p.len();
    let mut a = 0.0;
    for i in 0..n {
        a += vec2::cross(p[i], p[(i + 1) % n]);
    }
    0.5 * a
}

pub fn polygon_centroid(p: &[Vec2]) -> Vec2 {
    let n = p.len();
    let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
    // shift to the first vertex to limit cancellation
    let o = p[0];
    for i in 0..n {
        let u = vec2::sub(p[i], o);
        let w = vec2::sub(p[(i + 1) % n], o);
        let c = vec2::cross(u, w);
        a += c;
        cx += (u[0] + w[0]) * c;
        cy += (u[1] + w[1]) * c;
    }
    if a == 0.0 {
        let s = p.iter().fold([0.0, 0.0], |s, q| vec2::add(s, *q));
        return vec2::scale(s, 1.0 / n as f64);
    }
    [o[0] + cx / (3.0 * a), o[1] + cy / (3.0 * a)]
}

pub fn polygon_perimeter(p: &[Vec2]) -> f64 {
    let n = p.len();
    (0..n).map(|i| vec2::norm(vec2::sub(p[(i + 1) % n], p[i]))).sum()
}

/// Clips a polygon to the half-plane `{x : cross(dir, x - origin) >= 0}`
/// (the left side of the directed line through `origin` along `dir`).
pub fn clip_left_of(poly: &[Vec2], origin: Vec2, dir: Vec2) -> Vec<Vec2> {
    let side = |p: Vec2| vec2::cross(dir, vec2::sub(p, origin));
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let (sa, sb) = (side(a), side(b));
        if sa >= 0.0 {
            out.push(a);
        }
        if (sa >= 0.0) != (sb >= 0.0) {
            let s = sa / (sa - sb);
            out.push(vec2::lerp(a, b, s));
        }
    }
    out
}

/// Area of the intersection of a polygon with the cone of directions
/// `[theta0, theta1]` (apex at the origin, opening at most pi).
pub fn cone_intersection_area(poly: &[Vec2], theta0: f64, theta1: f64) -> f64 {
    debug_assert!(theta1 - theta0 <= std::f64::consts::PI + 1e-12);
    if theta1 <= theta0 {
        return 0.0;
    }
    let a = clip_left_of(poly, [0.0, 0.0], vec2::unit_from_angle(theta0));
    if a.len() < 3 {
        return 0.0;
    }
    let b = clip_left_of(&a, [0.0, 0.0], vec2::scale(vec2::unit_from_angle(theta1), -1.0));
    if b.len() < 3 {
        return 0.0;
    }
    polygon_area(&b).max(0.0)
}

/// Parameter `s >= 0` where the ray `s * dir` leaves a convex polygon that
/// contains the origin.
pub fn ray_exit(poly: &[Vec2], dir: Vec2) -> Option<f64> {
    let n = poly.len();
    let mut best: Option<f64> = None;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = vec2::sub(b, a);
        let denom = vec2::cross(dir, e);
        if denom.abs() < 1e-300 {
            continue;
        }
        // s dir = a + u e
        let s = vec2::cross(a, e) / denom;
        let u = vec2::cross(a, dir) / denom;
        if s > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u) {
            best = Some(best.map_or(s, |b: f64| b.min(s)));
        }
    }
    best
}

/// Parameter `u` in `[0, 1]` where the segment `a + u (b - a)` crosses the
/// ray from the origin along `dir`, if it does.
pub fn segment_ray_crossing(a: Vec2, b: Vec2, dir: Vec2) -> Option<f64> {
    let e = vec2::sub(b, a);
    let denom = vec2::cross(dir, e);
    if denom.abs() < 1e-300 {
        return None;
    }
    let s = vec2::cross(a, e) / denom;
    let u = vec2::cross(a, dir) / denom;
    (s > 0.0 && (0.0..=1.0).contains(&u)).then_some(u)
}

/// Whether `p` lies in the closed convex polygon (counterclockwise).
pub fn convex_contains(poly: &[Vec2], p: Vec2, tol: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = vec2::sub(b, a);
        vec2::cross(e, vec2::sub(p, a)) >= -tol * vec2::norm(e)
    })
}
