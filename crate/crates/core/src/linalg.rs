//! Fixed-size 3-vectors and 3x3 matrices.
//!
//! A [`Vec3`] carries no runtime tag for what it represents. By convention the
//! crate uses it for raw sensor triples, calibrated measured values, affine
//! coordinates in the oblique sensor frame, and orthonormal coordinates.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zeros() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn scale(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }

    /// Component-wise product.
    pub fn component_mul(self, other: Self) -> Self {
        Self::new(self.x * other.x, self.y * other.y, self.z * other.z)
    }

    /// Component-wise reciprocal.
    pub fn recip(self) -> Self {
        Self::new(self.x.recip(), self.y.recip(), self.z.recip())
    }

    /// Component-wise quotient.
    pub fn component_div(self, other: Self) -> Self {
        Self::new(self.x / other.x, self.y / other.y, self.z / other.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs_diff(self, other: Self) -> T {
        (self - other).max_abs()
    }

    pub fn cast<U: Scalar>(self) -> Vec3<U> {
        let c = |v: T| U::from(v).expect("finite scalar conversion");
        Vec3::new(c(self.x), c(self.y), c(self.z))
    }
}

impl<T: Scalar> Index<usize> for Vec3<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<T: Scalar> AddAssign for Vec3<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        self.scale(k)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Scalar> Mat3<T> {
    pub const fn from_rows(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn zeros() -> Self {
        Self {
            m: [[T::zero(); 3]; 3],
        }
    }

    pub fn identity() -> Self {
        Self::diagonal(Vec3::new(T::one(), T::one(), T::one()))
    }

    pub fn diagonal(d: Vec3<T>) -> Self {
        let mut out = Self::zeros();
        out.m[0][0] = d.x;
        out.m[1][1] = d.y;
        out.m[2][2] = d.z;
        out
    }

    pub fn row(&self, i: usize) -> Vec3<T> {
        Vec3::from_array(self.m[i])
    }

    pub fn col(&self, j: usize) -> Vec3<T> {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[j][i];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.row(i).dot(other.col(j));
            }
        }
        out
    }

    /// Quadratic form `vᵀ M v`.
    pub fn quadratic_form(&self, v: Vec3<T>) -> T {
        v.dot(self.mul_vec(v))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.m[1][0] == T::zero() && self.m[2][0] == T::zero() && self.m[2][1] == T::zero()
    }

    /// Solves `U x = b` for upper-triangular `U` by back substitution.
    ///
    /// Returns `None` when a diagonal entry is zero.
    pub fn solve_upper(&self, b: Vec3<T>) -> Option<Vec3<T>> {
        let u = &self.m;
        if u[0][0] == T::zero() || u[1][1] == T::zero() || u[2][2] == T::zero() {
            return None;
        }
        let z = b.z / u[2][2];
        let y = (b.y - u[1][2] * z) / u[1][1];
        let x = (b.x - u[0][1] * y - u[0][2] * z) / u[0][0];
        Some(Vec3::new(x, y, z))
    }
}

impl<T: Scalar> Index<(usize, usize)> for Mat3<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.m[i][j]
    }
}

impl<T: Scalar> Mul<Vec3<T>> for Mat3<T> {
    type Output = Vec3<T>;
    fn mul(self, v: Vec3<T>) -> Vec3<T> {
        self.mul_vec(v)
    }
}

impl<T: Scalar> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_mat(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_neutral() {
        let a = Mat3::from_rows([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]]);
        assert_eq!(a * Mat3::identity(), a);
        assert_eq!(Mat3::identity() * a, a);
        assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn back_substitution() {
        let u = Mat3::from_rows([[2.0, 1.0, -1.0], [0.0, 3.0, 0.5], [0.0, 0.0, 4.0]]);
        let x = Vec3::new(1.0, -2.0, 0.25);
        let b = u * x;
        let got = u.solve_upper(b).unwrap();
        assert!(got.max_abs_diff(x) < 1e-15);

        let singular = Mat3::from_rows([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(singular.solve_upper(b).is_none());
    }

    #[test]
    fn vector_helpers() {
        let v = Vec3::new(3.0_f64, -4.0, 0.0);
        assert_eq!(v.norm(), 5.0);
        assert_eq!(v.max_abs(), 4.0);
        assert_eq!(v[1], -4.0);
        assert_eq!((v - v), Vec3::zeros());
    }
}
