//! Rate-matrix generators acting on population vectors, `dp/dt = L p`.

use nalgebra::{DMatrix, SMatrix, SVector};

use crate::error::{Error, Result};

/// Tolerance on `Σp − 1` for a population vector to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A square real generator. Column `j` holds the rates out of state `j`;
/// off-diagonal entries are nonnegative and every column sums to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator<const N: usize> {
    matrix: SMatrix<f64, N, N>,
}

impl<const N: usize> Generator<N> {
    /// Wraps a matrix without checking the generator invariants. Used for
    /// derivative matrices, which are linear images of signed rate sets.
    pub fn from_matrix_unchecked(matrix: SMatrix<f64, N, N>) -> Self {
        Generator { matrix }
    }

    pub fn matrix(&self) -> &SMatrix<f64, N, N> {
        &self.matrix
    }

    pub fn column_sums(&self) -> [f64; N] {
        std::array::from_fn(|j| self.matrix.column(j).iter().sum())
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest absolute column sum (induced 1-norm).
    pub fn norm1(&self) -> f64 {
        (0..N)
            .map(|j| self.matrix.column(j).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn min_off_diagonal(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..N {
            for j in 0..N {
                if i != j {
                    m = m.min(self.matrix[(i, j)]);
                }
            }
        }
        m
    }

    pub fn apply(&self, p: &[f64; N]) -> [f64; N] {
        let v = self.matrix * SVector::<f64, N>::from_column_slice(p);
        std::array::from_fn(|i| v[i])
    }

    /// `exp(L t)` by scaling and squaring with a Padé approximant.
    pub fn propagator(&self, t: f64) -> SMatrix<f64, N, N> {
        let e = (self.dynamic() * t).exp();
        SMatrix::from_column_slice(e.as_slice())
    }

    fn dynamic(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(N, N, self.matrix.as_slice())
    }

    /// `exp(L t) p0` with no clamping. `t = 0` returns `p0` unchanged.
    pub fn evolve_raw(&self, p0: &[f64; N], t: f64) -> Result<[f64; N]> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(*p0);
        }
        let v = self.propagator(t) * SVector::<f64, N>::from_column_slice(p0);
        Ok(std::array::from_fn(|i| v[i]))
    }

    /// Complex eigenvalues via the real Schur form.
    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        self.dynamic()
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect()
    }
}

/// A probability distribution over the `N` model states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations<const N: usize>([f64; N]);

impl<const N: usize> Populations<N> {
    pub fn new(values: [f64; N]) -> Result<Self> {
        for (i, &p) in values.iter().enumerate() {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(Error::Domain(format!(
                    "population {i} must lie in [0, 1], got {p}"
                )));
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Domain(format!(
                "populations must sum to 1 within {NORMALIZATION_TOL:e}, got {sum}"
            )));
        }
        Ok(Populations(values))
    }

    /// All weight on one state.
    pub fn basis(state: usize) -> Self {
        assert!(state < N, "basis state {state} out of range for {N} states");
        Populations(std::array::from_fn(|i| if i == state { 1.0 } else { 0.0 }))
    }

    /// Accepts components in `[-window, 1 + window]` and clamps them into
    /// `[0, 1]`; anything further out is a genuine negativity error.
    pub(crate) fn from_clamped(values: [f64; N], window: f64) -> Result<Self> {
        let mut out = values;
        for (i, p) in out.iter_mut().enumerate() {
            if !p.is_finite() || *p < -window || *p > 1.0 + window {
                return Err(Error::NegativePopulation { state: i, value: *p });
            }
            *p = p.clamp(0.0, 1.0);
        }
        Ok(Populations(out))
    }

    pub fn values(&self) -> &[f64; N] {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl<const N: usize> std::ops::Index<usize> for Populations<N> {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_state_exponential_matches_closed_form() {
        // L = [[-a, b], [a, -b]]: p1(t) = b/(a+b) + (p1(0) - b/(a+b)) e^{-(a+b)t}
        let (a, b) = (0.3, 0.9);
        let gen = Generator::from_matrix_unchecked(SMatrix::<f64, 2, 2>::new(-a, b, a, -b));
        let p = gen.evolve_raw(&[1.0, 0.0], 2.5).unwrap();
        let ss = b / (a + b);
        let expected = ss + (1.0 - ss) * (-(a + b) * 2.5f64).exp();
        assert_relative_eq!(p[0], expected, max_relative = 1e-13);
        assert_relative_eq!(p[0] + p[1], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let gen = Generator::from_matrix_unchecked(SMatrix::<f64, 2, 2>::new(-1.0, 2.0, 1.0, -2.0));
        assert_eq!(gen.evolve_raw(&[0.25, 0.75], 0.0).unwrap(), [0.25, 0.75]);
        assert!(gen.evolve_raw(&[0.25, 0.75], -1.0).is_err());
    }

    #[test]
    fn populations_validation() {
        assert!(Populations::new([0.5, 0.5]).is_ok());
        assert!(Populations::new([0.6, 0.5]).is_err());
        assert!(Populations::new([-0.1, 1.1]).is_err());
        assert!(Populations::<2>::from_clamped([-1e-14, 1.0 + 1e-14], 1e-13).is_ok());
        assert!(matches!(
            Populations::<2>::from_clamped([-1e-9, 1.0], 1e-13),
            Err(Error::NegativePopulation { state: 0, .. })
        ));
    }
}
