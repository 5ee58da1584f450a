//! Scalar abstractions.
//!
//! Floating-point numerics (simulation, evaluation, inversion) are generic over
//! [`Real`]; anything that has to certify an exact zero uses [`Rational`] and
//! [`GaussianRational`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, One, ToPrimitive, Zero};

/// f32 or f64.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from f64, used for literal constants.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Arbitrary-precision rational.
pub type Rational = BigRational;

/// Exact complex number with rational parts (a Gaussian rational).
pub type GaussianRational = Complex<BigRational>;

/// Exact complex number with integer parts.
pub type GaussianInteger = Complex<BigInt>;

pub fn rational_from_int(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact rational value of a finite float (floats are dyadic rationals).
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    BigRational::from_float(v)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator overflowed f64 individually
        let (n, d) = (r.numer(), r.denom());
        let shift = n.bits().max(d.bits()).saturating_sub(900);
        let n = (n >> shift).to_f64().unwrap_or(0.0);
        let d = (d >> shift).to_f64().unwrap_or(1.0);
        n / d
    })
}

pub fn gaussian_to_complex<F: Real>(z: &GaussianRational) -> Complex<F> {
    Complex::new(
        F::lit(rational_to_f64(&z.re)),
        F::lit(rational_to_f64(&z.im)),
    )
}

pub fn gaussian_from_i(re: i64, im: i64) -> GaussianRational {
    Complex::new(rational_from_int(re), rational_from_int(im))
}

/// `i^power` as an exact Gaussian rational.
pub fn i_power(power: u8) -> GaussianRational {
    match power % 4 {
        0 => gaussian_from_i(1, 0),
        1 => gaussian_from_i(0, 1),
        2 => gaussian_from_i(-1, 0),
        _ => gaussian_from_i(0, -1),
    }
}

pub fn is_gaussian_zero(z: &GaussianRational) -> bool {
    z.re.is_zero() && z.im.is_zero()
}

/// `2^-exp` as a rational.
pub fn inverse_power_of_two(exp: u32) -> Rational {
    BigRational::new(BigInt::one(), BigInt::one() << exp)
}
