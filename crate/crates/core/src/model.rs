//! Rank-1-plus-noise matrices `A = sigma * u * v^* + E` and the random
//! generators behind them.

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{cnorm, max_modulus, norm2, DenseMatrix};
use crate::scalar::{Field, Scalar};

const UNIT_NORM_TOL: f64 = 1e-12;

/// A structured matrix `A = sigma * u * v^* + E` together with its parts.
#[derive(Debug, Clone)]
pub struct RankOneModel<T> {
    sigma: f64,
    u: Vec<T>,
    v: Vec<T>,
    noise: DenseMatrix<T>,
    matrix: DenseMatrix<T>,
    delta: f64,
    epsilon: f64,
}

impl<T: Scalar> RankOneModel<T> {
    /// Assembles a model from its factors. `delta` and `epsilon` are computed
    /// from the noise, never supplied.
    pub fn from_parts(sigma: f64, u: Vec<T>, v: Vec<T>, noise: DenseMatrix<T>) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
        }
        if u.len() != noise.rows() || v.len() != noise.cols() {
            return Err(Error::InvalidDimension(format!(
                "u has {} entries and v has {}, noise is {}x{}",
                u.len(),
                v.len(),
                noise.rows(),
                noise.cols()
            )));
        }
        for (name, w) in [("u", &u), ("v", &v)] {
            let norm = norm2(w);
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::param(name, format!("must be a unit vector, norm is {norm}")));
            }
        }
        let matrix = DenseMatrix::from_fn(noise.rows(), noise.cols(), |i, j| {
            u[i].scale(sigma) * v[j].conj() + noise.get(i, j)
        })?;
        let delta = cnorm(&noise);
        let epsilon = delta / (sigma * max_modulus(&u) * max_modulus(&v));
        Ok(Self {
            sigma,
            u,
            v,
            noise,
            matrix,
            delta,
            epsilon,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn u(&self) -> &[T] {
        &self.u
    }
    pub fn v(&self) -> &[T] {
        &self.v
    }
    pub fn noise(&self) -> &DenseMatrix<T> {
        &self.noise
    }
    /// The materialized matrix `A`.
    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }
    /// `delta = ||E||_C`.
    pub fn delta(&self) -> f64 {
        self.delta
    }
    /// `epsilon = delta / (sigma ||u||_inf ||v||_inf)`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn u_inf(&self) -> f64 {
        max_modulus(&self.u)
    }
    pub fn v_inf(&self) -> f64 {
        max_modulus(&self.v)
    }
    /// `sigma ||u||_inf ||v||_inf`, the C-norm of the rank-1 part.
    pub fn signal_scale(&self) -> f64 {
        self.sigma * self.u_inf() * self.v_inf()
    }
    /// Realized ratio `x = sigma ||u||_inf ||v||_inf / delta`.
    pub fn ratio(&self) -> f64 {
        self.signal_scale() / self.delta
    }
}

/// Request for a ratio-controlled random model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularSpectrumSpec {
    pub ratio: f64,
    pub rows: usize,
    pub cols: usize,
    pub field: Field,
}

impl SingularSpectrumSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio.is_finite()) {
            return Err(Error::param("ratio", format!("must be positive, got {}", self.ratio)));
        }
        if self.rows.min(self.cols) < 2 {
            return Err(Error::InvalidDimension(format!(
                "need min(m, n) >= 2 to form a noise part, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

/// Uniform random unit vector in `R^n` or `C^n`.
pub fn sample_sphere_vector<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::InvalidDimension("sphere dimension must be >= 1".into()));
    }
    loop {
        let mut x: Vec<T> = (0..n).map(|_| T::sample_gaussian(rng)).collect();
        let norm = norm2(&x);
        if norm > 0.0 {
            for xi in &mut x {
                *xi = xi.scale(1.0 / norm);
            }
            return Ok(x);
        }
    }
}

/// Haar-distributed orthogonal (real) or unitary (complex) `n x n` matrix.
///
/// Orthonormalizes a Gaussian matrix column by column with two passes of
/// Gram-Schmidt. The implied triangular factor has a positive real diagonal,
/// which is the sign/phase normalization that makes `Q` Haar.
pub fn sample_haar_orthonormal<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<DenseMatrix<T>> {
    if n == 0 {
        return Err(Error::InvalidDimension("Haar dimension must be >= 1".into()));
    }
    // Column-major working copy.
    let mut cols: Vec<Vec<T>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut x: Vec<T> = (0..n).map(|_| T::sample_gaussian(rng)).collect();
        for _ in 0..2 {
            for q in &cols {
                let proj = q
                    .iter()
                    .zip(&x)
                    .fold(T::zero(), |acc, (&qi, &xi)| acc + qi.conj() * xi);
                for (xi, &qi) in x.iter_mut().zip(q) {
                    *xi = *xi - qi * proj;
                }
            }
        }
        let norm = norm2(&x);
        // A Gaussian column lies in the span of the previous ones with
        // probability zero; redraw if rounding says otherwise.
        if norm <= 1e-8 {
            continue;
        }
        for xi in &mut x {
            *xi = xi.scale(1.0 / norm);
        }
        cols.push(x);
    }
    DenseMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Random model whose leading singular value is solved from the ratio
/// `x = sigma ||u||_inf ||v||_inf / delta`; every other singular value is 1.
pub fn build_ratio_model<T: Scalar, R: Rng + ?Sized>(
    spec: &SingularSpectrumSpec,
    rng: &mut R,
) -> Result<RankOneModel<T>> {
    spec.validate()?;
    if spec.field != T::FIELD {
        return Err(Error::param(
            "field",
            format!("spec asks for {} but the scalar type is {}", spec.field, T::FIELD),
        ));
    }
    let (m, n) = (spec.rows, spec.cols);
    let left = sample_haar_orthonormal::<T, _>(m, rng)?;
    let right = sample_haar_orthonormal::<T, _>(n, rng)?;
    let rank = m.min(n);

    // A = U diag(sigma, 1, ..., 1) V with V's rows the right singular vectors.
    let u = left.column(0);
    let v: Vec<T> = right.row(0).iter().map(|x| x.conj()).collect();
    let mut noise = DenseMatrix::<T>::zeros(m, n)?;
    let mut acc = vec![T::zero(); n];
    for i in 0..m {
        acc.iter_mut().for_each(|x| *x = T::zero());
        for l in 1..rank {
            let uil = left.get(i, l);
            for (a, &r) in acc.iter_mut().zip(right.row(l)) {
                *a = *a + uil * r;
            }
        }
        for (j, &a) in acc.iter().enumerate() {
            noise.set(i, j, a);
        }
    }
    let delta = cnorm(&noise);
    if delta == 0.0 {
        return Err(Error::Domain("drawn noise part is identically zero".into()));
    }
    let sigma = spec.ratio * delta / (max_modulus(&u) * max_modulus(&v));
    RankOneModel::from_parts(sigma, u, v, noise)
}

/// Real model with sphere-uniform `u`, `v` and independent noise entries whose
/// moduli are uniform on `[0, delta]` with independent random signs.
pub fn build_independent_noise_model<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    sigma: f64,
    delta: f64,
    rng: &mut R,
) -> Result<RankOneModel<f64>> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidDimension(format!(
            "need m, n >= 2, got {rows}x{cols}"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
    }
    let u = sample_sphere_vector::<f64, _>(rows, rng)?;
    let v = sample_sphere_vector::<f64, _>(cols, rng)?;
    let noise = DenseMatrix::from_fn(rows, cols, |_, _| {
        let magnitude = delta * rng.random::<f64>();
        if rng.random::<bool>() {
            -magnitude
        } else {
            magnitude
        }
    })?;
    RankOneModel::from_parts(sigma, u, v, noise)
}
