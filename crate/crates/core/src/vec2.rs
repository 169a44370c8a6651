//! Small helpers for plane vectors stored as `[f64; 2]`.

pub type Vec2 = [f64; 2];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// z-component of the cross product.
#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: Vec2, s: f64) -> Vec2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn lerp(a: Vec2, b: Vec2, s: f64) -> Vec2 {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

#[inline]
pub fn unit_from_angle(theta: f64) -> Vec2 {
    [theta.cos(), theta.sin()]
}

/// Counterclockwise quarter turn.
#[inline]
pub fn perp(a: Vec2) -> Vec2 {
    [-a[1], a[0]]
}

/// Components of `v` in the orthonormal frame `(n, perp(n))`.
#[inline]
pub fn to_frame(v: Vec2, n: Vec2) -> Vec2 {
    [dot(v, n), cross(n, v)]
}

/// Inverse of [`to_frame`].
#[inline]
pub fn from_frame(v: Vec2, n: Vec2) -> Vec2 {
    [v[0] * n[0] - v[1] * n[1], v[0] * n[1] + v[1] * n[0]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_round_trip() {
        let n = unit_from_angle(0.7);
        let v = [3.0, -2.0];
        let back = from_frame(to_frame(v, n), n);
        assert!((back[0] - v[0]).abs() < 1e-15 && (back[1] - v[1]).abs() < 1e-15);
        assert!((to_frame(n, n)[0] - 1.0).abs() < 1e-15);
    }
}
