//! Companion-form chains of the n-th order first stage and their Lyapunov matrices.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalues with real part above this are treated as non-Hurwitz.
pub const HURWITZ_MARGIN: f64 = -1e-12;

/// `A_α = J_n − a e_nᵀ` together with `M_α = A_α ⊗ I₃`.
#[derive(Clone, Debug)]
pub struct CompanionSystem {
    alphas: Vec<f64>,
    a_alpha: DMatrix<f64>,
    m_alpha: DMatrix<f64>,
    eigenvalues: Vec<Complex<f64>>,
}

/// Builds the companion system of `sⁿ + α_n sⁿ⁻¹ + … + α₂ s + α₁`
/// and rejects gain vectors whose polynomial is not Hurwitz.
pub fn companion(alphas: &[f64]) -> Result<CompanionSystem> {
    let n = alphas.len();
    if n == 0 {
        return Err(Error::InvalidParameter("companion system needs at least one gain".into()));
    }
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter("non-finite companion gain".into()));
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for (j, alpha) in alphas.iter().enumerate() {
        a[(n - 1, j)] = -alpha;
    }
    let eigenvalues: Vec<Complex<f64>> = a.clone().complex_eigenvalues().iter().copied().collect();
    let max_re = eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if !(max_re < HURWITZ_MARGIN) {
        return Err(Error::NotHurwitz(max_re));
    }
    let m = a.kronecker(&DMatrix::<f64>::identity(3, 3));
    Ok(CompanionSystem { alphas: alphas.to_vec(), a_alpha: a, m_alpha: m, eigenvalues })
}

impl CompanionSystem {
    pub fn order(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn a_alpha(&self) -> &DMatrix<f64> {
        &self.a_alpha
    }

    pub fn m_alpha(&self) -> &DMatrix<f64> {
        &self.m_alpha
    }

    pub fn eigenvalues(&self) -> &[Complex<f64>] {
        &self.eigenvalues
    }

    /// Slowest decay rate: min over eigenvalues of `−Re λ`.
    pub fn re_alpha(&self) -> f64 {
        self.eigenvalues.iter().map(|l| -l.re).fold(f64::INFINITY, f64::min)
    }
}

/// Solves `M_αᵀ P + P M_α = −I` for the 3n×3n matrix `P`.
///
/// `M_α = A_α ⊗ I₃` so `P = X ⊗ I₃` with `A_αᵀ X + X A_α = −I_n`; the small
/// n×n equation is solved in vectorized form.
pub fn solve_lyapunov(sys: &CompanionSystem) -> Result<DMatrix<f64>> {
    let n = sys.order();
    let a = sys.a_alpha();
    let at = a.transpose();
    let eye = DMatrix::<f64>::identity(n, n);
    // vec(AᵀX) = (I ⊗ Aᵀ) vec X, vec(XA) = (Aᵀ ⊗ I) vec X (column-major vec).
    let op = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = -DVector::from_column_slice(eye.as_slice());
    let sol = op.lu().solve(&rhs).ok_or_else(|| Error::NotHurwitz(sys.re_alpha()))?;
    let x = DMatrix::from_column_slice(n, n, sol.as_slice());
    let x = (&x + x.transpose()) * 0.5;
    let p = x.kronecker(&DMatrix::<f64>::identity(3, 3));
    if p.clone().cholesky().is_none() {
        return Err(Error::NotHurwitz(-sys.re_alpha()));
    }
    Ok(p)
}

/// ‖M_αᵀP + P M_α + I‖_F.
pub fn lyapunov_residual(sys: &CompanionSystem, p: &DMatrix<f64>) -> f64 {
    let m = sys.m_alpha();
    let k = m.nrows();
    (m.transpose() * p + p * m + DMatrix::<f64>::identity(k, k)).norm()
}

/// Gains of `(s + pole)ⁿ`: `α_i = C(n, i−1) pole^{n−i+1}`.
pub fn binomial_gains(order: usize, pole: f64) -> Vec<f64> {
    (1..=order)
        .map(|i| {
            let k = i - 1;
            binomial(order, k) * pole.powi((order - k) as i32)
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}
