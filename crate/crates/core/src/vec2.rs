//! Plain `[f64; 2]` helpers. Gradients and points are bare arrays throughout
//! the crate; these free functions keep call sites short without dragging in
//! a linear-algebra dependency for two components.

pub type Vec2 = [f64; 2];

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm_sq(a: Vec2) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(s: f64, a: Vec2) -> Vec2 {
    [s * a[0], s * a[1]]
}
