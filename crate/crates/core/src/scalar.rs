//! Scalar abstraction shared by every numerical module.
//!
//! All algorithms are written against [`Real`], which is satisfied by `f32`
//! and `f64`. Complex amplitudes and matrix entries are `Complex<T>`.

use std::fmt::{Debug, Display};

use nalgebra::{Complex, ComplexField, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable throughout the crate.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion to `f64` for reporting and serialization.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon of the scalar type.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Complex scalar over `T`.
pub type Cx<T> = Complex<T>;
/// Dense complex matrix over `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex column vector over `T`.
pub type CVector<T> = DVector<Complex<T>>;

#[inline]
pub fn cx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn cr<T: Real>(re: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::zero())
}

/// `exp(i·theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(ComplexField::cos(theta), ComplexField::sin(theta))
}

#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi<T: Real>(x: T) -> T {
    let two_pi = T::two_pi();
    let mut r = x % two_pi;
    if r < T::zero() {
        r += two_pi;
    }
    if r >= two_pi {
        r -= two_pi;
    }
    r
}

pub fn deg_to_rad<T: Real>(deg: T) -> T {
    deg * T::pi() / T::lit(180.0)
}

pub fn rad_to_deg<T: Real>(rad: T) -> T {
    rad * T::lit(180.0) / T::pi()
}

/// Converts a complex matrix between scalar precisions.
pub fn cast_matrix<A: Real, B: Real>(m: &CMatrix<A>) -> CMatrix<B> {
    m.map(|z| Complex::new(B::lit(z.re.to_f64_lossy()), B::lit(z.im.to_f64_lossy())))
}

/// Converts a complex vector between scalar precisions.
pub fn cast_vector<A: Real, B: Real>(v: &CVector<A>) -> CVector<B> {
    v.map(|z| Complex::new(B::lit(z.re.to_f64_lossy()), B::lit(z.im.to_f64_lossy())))
}

/// Embeds a real matrix into the complex field.
pub fn complexify<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

/// Largest elementwise modulus.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max(cabs(*x - *y)))
}
