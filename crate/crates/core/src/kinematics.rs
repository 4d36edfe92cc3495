//! Pointwise continuum-mechanics kernels and material constants.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{FpsiError, Result};
use crate::tensor::{det, inverse, sym, Tensor, Vector};

/// Deformations with `J` at or below this value are rejected.
pub const J_MIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationState<const D: usize> {
    pub f: Tensor<D>,
    pub j: f64,
    pub f_inv: Tensor<D>,
    pub f_inv_t: Tensor<D>,
}

impl<const D: usize> DeformationState<D> {
    pub fn identity() -> Self {
        DeformationState {
            f: Tensor::identity(),
            j: 1.0,
            f_inv: Tensor::identity(),
            f_inv_t: Tensor::identity(),
        }
    }

    /// Cofactor `J F^{-T}`.
    pub fn cofactor(&self) -> Tensor<D> {
        self.f_inv_t * self.j
    }
}

/// `F = I + ∇u`, rejecting `J ≤ J_MIN`.
pub fn deformation_state<const D: usize>(grad_u: &Tensor<D>) -> Result<DeformationState<D>> {
    let f = Tensor::<D>::identity() + grad_u;
    let j = det(&f);
    if !(j > J_MIN) {
        return Err(FpsiError::DegenerateDeformation { cell: None, jacobian: j });
    }
    let f_inv = inverse(&f).ok_or(FpsiError::DegenerateDeformation { cell: None, jacobian: j })?;
    Ok(DeformationState {
        f,
        j,
        f_inv,
        f_inv_t: f_inv.transpose(),
    })
}

/// Two-argument Green–Lagrange strain `½ sym(F1ᵀ F2 − I)` with `sym A = ½(A + Aᵀ)`.
pub fn green_lagrange<const D: usize>(f1: &Tensor<D>, f2: &Tensor<D>) -> Tensor<D> {
    sym(&(f1.transpose() * f2 - Tensor::<D>::identity())) * 0.5
}

/// Saint Venant–Kirchhoff second Piola–Kirchhoff stress.
pub fn svk_stress<const D: usize>(e: &Tensor<D>, lambda_s: f64, mu_s: f64) -> Tensor<D> {
    let s = Tensor::<D>::identity() * (lambda_s * e.trace()) + e * (2.0 * mu_s);
    debug_assert!((s - s.transpose()).abs().max() <= 1e-12 * s.abs().max().max(1.0));
    s
}

/// `D = sym(∇v F^{-1})`.
pub fn fluid_rate_of_strain<const D: usize>(grad_v: &Tensor<D>, f_inv: &Tensor<D>) -> Tensor<D> {
    sym(&(grad_v * f_inv))
}

/// Push a reference unit normal forward: returns the unit current normal and
/// the surface scaling `J |F^{-T} ñ|`.
pub fn pushforward_normal<const D: usize>(f_inv_t: &Tensor<D>, j: f64, n_ref: &Vector<D>) -> Result<(Vector<D>, f64)> {
    let m = f_inv_t * n_ref;
    let norm = m.norm();
    if !(norm > 0.0) || !(j > 0.0) {
        return Err(FpsiError::DegenerateDeformation { cell: None, jacobian: j });
    }
    Ok((m / norm, j * norm))
}

/// Scalar (isotropic) or full symmetric positive definite permeability, mm².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Permeability {
    Isotropic(f64),
    /// Row-major `d × d` tensor.
    Tensor(Vec<Vec<f64>>),
}

impl Permeability {
    fn tensor<const D: usize>(&self) -> Result<Tensor<D>> {
        match self {
            Permeability::Isotropic(k) => Ok(Tensor::<D>::identity() * *k),
            Permeability::Tensor(rows) => {
                if rows.len() != D || rows.iter().any(|r| r.len() != D) {
                    return Err(FpsiError::Material(format!("permeability tensor must be {D}×{D}")));
                }
                Ok(Tensor::<D>::from_fn(|i, j| rows[i][j]))
            }
        }
    }

    fn eigen<const D: usize>(&self) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
        let k = self.tensor::<D>()?;
        if (k - k.transpose()).abs().max() > 1e-12 * k.abs().max() {
            return Err(FpsiError::Material("permeability tensor is not symmetric".into()));
        }
        let eig = SymmetricEigen::new(DMatrix::from_fn(D, D, |i, j| k[(i, j)]));
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(FpsiError::Material("permeability must be positive definite".into()));
        }
        Ok(eig)
    }

    fn spectral<const D: usize>(&self, g: impl Fn(f64) -> f64) -> Result<Tensor<D>> {
        let eig = self.eigen::<D>()?;
        let lam = DMatrix::from_diagonal(&eig.eigenvalues.map(g));
        let m = &eig.eigenvectors * lam * eig.eigenvectors.transpose();
        Ok(Tensor::<D>::from_fn(|i, j| m[(i, j)]))
    }

    pub fn inverse<const D: usize>(&self) -> Result<Tensor<D>> {
        self.spectral(|l| 1.0 / l)
    }

    pub fn inverse_sqrt<const D: usize>(&self) -> Result<Tensor<D>> {
        self.spectral(|l| 1.0 / l.sqrt())
    }
}

/// Physical constants in the g–mm–s system. The Biot–Willis coefficient is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    pub rho_f: f64,
    pub rho_s: f64,
    pub mu_f: f64,
    pub lambda_s: f64,
    pub mu_s: f64,
    pub phi: f64,
    pub s0: f64,
    pub permeability: Permeability,
    pub gamma: f64,
}

/// Lamé constants `(λ, μ)` from Young's modulus and Poisson's ratio.
pub fn lame_from_young(e: f64, nu: f64) -> (f64, f64) {
    let mu = e / (2.0 * (1.0 + nu));
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    (lambda, mu)
}

impl MaterialParams {
    /// Channel defaults: blood-like fluid and a poroelastic wall.
    pub fn channel_defaults(permeability: f64) -> Self {
        let (lambda_s, mu_s) = lame_from_young(3e5, 0.3);
        MaterialParams {
            rho_f: 1e-3,
            rho_s: 1.2e-3,
            mu_f: 3e-3,
            lambda_s,
            mu_s,
            phi: 0.3,
            s0: 5e-5,
            permeability: Permeability::Isotropic(permeability),
            gamma: 1.0,
        }
    }

    pub fn validate<const D: usize>(&self) -> Result<()> {
        let positive = [
            ("rho_f", self.rho_f),
            ("rho_s", self.rho_s),
            ("mu_f", self.mu_f),
            ("mu_s", self.mu_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FpsiError::Material(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.lambda_s >= 0.0 && self.lambda_s.is_finite()) {
            return Err(FpsiError::Material(format!("lambda_s must be non-negative, got {}", self.lambda_s)));
        }
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(FpsiError::Material(format!("phi must lie in (0, 1), got {}", self.phi)));
        }
        if !(self.s0 >= 0.0 && self.s0.is_finite()) {
            return Err(FpsiError::Material(format!("s0 must be non-negative, got {}", self.s0)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(FpsiError::Material(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        self.permeability.eigen::<D>().map(|_| ())
    }

    pub fn mixture_density(&self) -> f64 {
        mixture_density(self)
    }

    pub fn k_inv<const D: usize>(&self) -> Result<Tensor<D>> {
        self.permeability.inverse()
    }

    pub fn k_inv_sqrt<const D: usize>(&self) -> Result<Tensor<D>> {
        self.permeability.inverse_sqrt()
    }
}

/// `ρ_p = ρ_s (1 − φ) + ρ_f φ`.
pub fn mixture_density(params: &MaterialParams) -> f64 {
    params.rho_s * (1.0 - params.phi) + params.rho_f * params.phi
}
