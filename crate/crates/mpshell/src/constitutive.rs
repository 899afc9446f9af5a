//! Micropolar neo-Hookean material: energy, material stress and couple
//! stress, and analytic fourth-order tangents.
//!
//! The energy density in the micropolar stretch `U` and wryness `G` is
//!
//! `psi = 1/2 (mu + eta) tr(U U^T) - 1/2 eta tr(U^2)
//!        + 1/2 lambda ln(J)^2 - mu ln(J) + 1/2 mu l^2 tr(G G^T)`,
//!
//! with `J = det U`. The `eta` terms penalize the skew part of `U`, i.e. the
//! relative rotation between the microstructure and the macro deformation;
//! `eta = 0` together with `l = 0` recovers the classical compressible
//! neo-Hookean law in `U`.

use crate::tensor::{boxtimes, odot, otimes, Mat3, Tensor4};
use thiserror::Error;

/// Determinant guard: element inversion must surface as an error, not as NaN.
pub const DET_GUARD: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ConstitutiveError {
    #[error("invalid material parameters: {0}")]
    InvalidParams(String),
    #[error("invalid state: det U = {det:.6e} is not positive")]
    InvalidState { det: f64 },
}

/// Parameters of the micropolar neo-Hookean law (SI units).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MaterialParams {
    /// First Lame parameter (Pa).
    pub lambda: f64,
    /// Shear modulus (Pa).
    pub mu: f64,
    /// Micropolar coupling modulus (Pa).
    pub eta: f64,
    /// Material length scale (m).
    pub length_scale: f64,
}

impl MaterialParams {
    pub fn new(lambda: f64, mu: f64, eta: f64, length_scale: f64) -> Result<Self, ConstitutiveError> {
        if !(mu > 0.0) {
            return Err(ConstitutiveError::InvalidParams(format!("mu = {mu} must be > 0")));
        }
        if !(lambda >= 0.0) {
            return Err(ConstitutiveError::InvalidParams(format!(
                "lambda = {lambda} must be >= 0"
            )));
        }
        if !(eta >= 0.0) {
            return Err(ConstitutiveError::InvalidParams(format!("eta = {eta} must be >= 0")));
        }
        if !(length_scale > 0.0) {
            return Err(ConstitutiveError::InvalidParams(format!(
                "length scale = {length_scale} must be > 0"
            )));
        }
        Ok(Self {
            lambda,
            mu,
            eta,
            length_scale,
        })
    }
}

fn checked_ln_det(u: &Mat3) -> Result<f64, ConstitutiveError> {
    let det = u.determinant();
    if det <= DET_GUARD {
        return Err(ConstitutiveError::InvalidState { det });
    }
    Ok(det.ln())
}

/// Strain energy per unit reference volume. The value retains the reference
/// offset `3 mu / 2` at the identity; reporting code subtracts it when a
/// zero-referenced energy is wanted.
pub fn energy_density(u: &Mat3, g: &Mat3, p: &MaterialParams) -> Result<f64, ConstitutiveError> {
    let ln_j = checked_ln_det(u)?;
    let tr_uut = (u * u.transpose()).trace();
    let tr_uu = (u * u).trace();
    let tr_ggt = (g * g.transpose()).trace();
    Ok(0.5 * (p.mu + p.eta) * tr_uut - 0.5 * p.eta * tr_uu + 0.5 * p.lambda * ln_j * ln_j
        - p.mu * ln_j
        + 0.5 * p.mu * p.length_scale * p.length_scale * tr_ggt)
}

/// Material stress and couple stress, the energy gradients in `(U, G)`:
/// `P = mu (U - U^{-T}) + eta (U - U^T) + lambda ln(J) U^{-T}`,
/// `M = mu l^2 G`.
///
/// The grouping makes the stress-free reference exact in floating point:
/// both parentheses vanish identically at `U = I`.
pub fn material_stresses(
    u: &Mat3,
    g: &Mat3,
    p: &MaterialParams,
) -> Result<(Mat3, Mat3), ConstitutiveError> {
    let ln_j = checked_ln_det(u)?;
    let u_inv_t = u
        .try_inverse()
        .ok_or(ConstitutiveError::InvalidState { det: 0.0 })?
        .transpose();
    let stress =
        (u - u_inv_t) * p.mu + (u - u.transpose()) * p.eta + u_inv_t * (p.lambda * ln_j);
    let couple = g * (p.mu * p.length_scale * p.length_scale);
    Ok((stress, couple))
}

/// Analytic fourth-order tangents in matrix form. Returns the stretch-stretch
/// block `C1` and the wryness-wryness block `C4`; the mixed blocks vanish for
/// this energy.
pub fn material_tangents(
    u: &Mat3,
    p: &MaterialParams,
) -> Result<(Tensor4, Tensor4), ConstitutiveError> {
    let ln_j = checked_ln_det(u)?;
    let id = Mat3::identity();
    let u_inv_t = u
        .try_inverse()
        .ok_or(ConstitutiveError::InvalidState { det: 0.0 })?
        .transpose();
    let c1 = odot(&id, &id) * (p.mu + p.eta) + otimes(&u_inv_t, &u_inv_t) * p.lambda
        - boxtimes(&id, &id) * p.eta
        - boxtimes(&u_inv_t, &u_inv_t) * (p.lambda * ln_j - p.mu);
    let c4 = odot(&id, &id) * (p.mu * p.length_scale * p.length_scale);
    Ok((c1, c4))
}

/// Push-forward of a material tangent to the shell tangent,
/// `C_iJkL = R_iP R_kQ Qi_JR Qi_LS Ct_PRQS` with `Qi` the inverse shifter.
pub fn pushforward_tangents(ctilde: &Tensor4, rotation: &Mat3, q_inv: &Mat3) -> Tensor4 {
    let t = odot(rotation, q_inv);
    t * ctilde * t.transpose()
}

/// Spatial (Cauchy) stress and couple stress for post-processing:
/// `sigma = J^{-1} (R P) F^T`, `m = J^{-1} (R M) F^T`.
pub fn recover_spatial_stresses(
    p_mat: &Mat3,
    m_mat: &Mat3,
    rotation: &Mat3,
    f: &Mat3,
) -> Result<(Mat3, Mat3), ConstitutiveError> {
    let det = f.determinant();
    if det <= DET_GUARD {
        return Err(ConstitutiveError::InvalidState { det });
    }
    let inv_j = 1.0 / det;
    Ok((
        rotation * p_mat * f.transpose() * inv_j,
        rotation * m_mat * f.transpose() * inv_j,
    ))
}
