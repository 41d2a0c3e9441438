//! Scalar fields supported by the solvers.
//!
//! Everything in this crate is generic over [`Field`], which is implemented
//! for `f64` (real symmetric problems) and `Complex<f64>` (complex Hermitian
//! problems). All tolerances are stated for double precision.

use std::fmt::{Debug, Display};

use nalgebra::ComplexField;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::block::DenseMatrix;
use crate::error::Result;
use crate::pencil::faer_hermitian_eigh;

pub trait Field: ComplexField<RealField = f64> + Copy + Debug + Display + Send + Sync + 'static {
    const IS_COMPLEX: bool;

    /// Standard normal sample; complex values get independent real and
    /// imaginary parts with total variance one.
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn from_parts(re: f64, im: f64) -> Self;

    fn parts(self) -> (f64, f64);

    /// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
    fn hermitian_eigh(m: &DenseMatrix<Self>) -> Result<(Vec<f64>, DenseMatrix<Self>)>;
}

impl Field for f64 {
    const IS_COMPLEX: bool = false;

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }

    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }

    fn hermitian_eigh(m: &DenseMatrix<Self>) -> Result<(Vec<f64>, DenseMatrix<Self>)> {
        faer_hermitian_eigh(m)
    }
}

impl Field for Complex64 {
    const IS_COMPLEX: bool = true;

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }

    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }

    fn hermitian_eigh(m: &DenseMatrix<Self>) -> Result<(Vec<f64>, DenseMatrix<Self>)> {
        faer_hermitian_eigh(m)
    }
}
