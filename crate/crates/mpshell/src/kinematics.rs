//! Rotation-vector parameterization of the micro-rotation field.
//!
//! The micro-rotation tensor is always rebuilt from the stored pseudo-vector
//! `theta` (Euler-Rodrigues form), never accumulated as a matrix, so
//! orthonormality holds by construction. The tangent map `lambda` relates an
//! additive perturbation of the pseudo-vector to the spin of the rotation:
//! `dR = skew(lambda * dtheta) * R`. Its first and second directional
//! derivatives are needed for the consistent tangent of wryness-dependent
//! terms.

use crate::geometry::{GeometryError, SurfaceFrame};
use crate::tensor::{skew, Mat3, Vec3};
use std::f64::consts::PI;
use thiserror::Error;

/// Safety margin that keeps rotation angles away from the `pi` singularity of
/// the Rodrigues (tangent-of-half-angle) parameters.
pub const ROTATION_ANGLE_MARGIN: f64 = 0.1;

/// Angle below which the rotation coefficient functions switch to their
/// Taylor series. The closed forms lose precision through cancellation well
/// before the series truncation error becomes visible, so the switch sits at
/// 5e-2 rather than at the naive 0/0 guard; both branches agree to better
/// than 1e-12 there.
pub const SERIES_SWITCH_ANGLE: f64 = 0.05;

/// Switch angle for the derivative ratios. Their closed-form numerators
/// cancel to seventh order in the angle, so the series (7 terms) carries
/// much further.
pub const DERIV_SERIES_SWITCH_ANGLE: f64 = 0.6;

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("rotation update rejected: composed angle {angle:.4} rad within margin of pi")]
    StepRejected { angle: f64 },
    #[error("invalid configuration: det F = {det:.6e} is not positive")]
    NonPositiveDet { det: f64 },
}

/// Coefficients of the Euler-Rodrigues formula and of the tangent map:
/// `c1 = sin(t)/t`, `c2 = (1-cos(t))/t^2`, `c3 = (t-sin(t))/t^3`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RotCoeffs {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// First (`r_i = c_i'/t`) and second (`w_i = r_i'/t`) derivative ratios of
/// the coefficient functions; all smooth and finite at `t = 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RotCoeffDerivs {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

fn coeffs_series(angle: f64) -> RotCoeffs {
    let t = angle * angle;
    RotCoeffs {
        c1: 1.0 - t / 6.0 + t * t / 120.0 - t * t * t / 5040.0,
        c2: 0.5 - t / 24.0 + t * t / 720.0 - t * t * t / 40320.0,
        c3: 1.0 / 6.0 - t / 120.0 + t * t / 5040.0 - t * t * t / 362_880.0,
    }
}

fn coeffs_closed(angle: f64) -> RotCoeffs {
    let s = angle.sin();
    let half = (0.5 * angle).sin();
    RotCoeffs {
        c1: s / angle,
        c2: 2.0 * half * half / (angle * angle),
        c3: (angle - s) / (angle * angle * angle),
    }
}

pub(crate) fn rot_coeffs(angle: f64) -> RotCoeffs {
    if angle < SERIES_SWITCH_ANGLE {
        coeffs_series(angle)
    } else {
        coeffs_closed(angle)
    }
}

fn horner(t: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn coeff_derivs_series(angle: f64) -> RotCoeffDerivs {
    let t = angle * angle;
    RotCoeffDerivs {
        r1: horner(
            t,
            &[
                -1.0 / 3.0,
                1.0 / 30.0,
                -1.0 / 840.0,
                1.0 / 45360.0,
                -1.0 / 3_991_680.0,
                1.0 / 518_918_400.0,
                -1.0 / 93_405_312_000.0,
            ],
        ),
        r2: horner(
            t,
            &[
                -1.0 / 12.0,
                1.0 / 180.0,
                -1.0 / 6720.0,
                1.0 / 453_600.0,
                -1.0 / 47_900_160.0,
                1.0 / 7_264_857_600.0,
                -1.0 / 1_494_484_992_000.0,
            ],
        ),
        r3: horner(
            t,
            &[
                -1.0 / 60.0,
                1.0 / 1260.0,
                -1.0 / 60480.0,
                1.0 / 4_989_600.0,
                -1.0 / 622_702_080.0,
                1.0 / 108_972_864_000.0,
                -1.0 / 25_406_244_864_000.0,
            ],
        ),
        w1: horner(
            t,
            &[
                1.0 / 15.0,
                -1.0 / 210.0,
                1.0 / 7560.0,
                -1.0 / 498_960.0,
                1.0 / 51_891_840.0,
                -1.0 / 7_783_776_000.0,
                1.0 / 1_587_890_304_000.0,
            ],
        ),
        w2: horner(
            t,
            &[
                1.0 / 90.0,
                -1.0 / 1680.0,
                1.0 / 75600.0,
                -1.0 / 5_987_520.0,
                1.0 / 726_485_760.0,
                -1.0 / 124_540_416_000.0,
                1.0 / 28_582_025_472_000.0,
            ],
        ),
        w3: horner(
            t,
            &[
                1.0 / 630.0,
                -1.0 / 15120.0,
                1.0 / 831_600.0,
                -1.0 / 77_837_760.0,
                1.0 / 10_897_286_400.0,
                -1.0 / 2_117_187_072_000.0,
                1.0 / 543_058_483_968_000.0,
            ],
        ),
    }
}

fn coeff_derivs_closed(angle: f64) -> RotCoeffDerivs {
    let (s, c) = angle.sin_cos();
    let t2 = angle * angle;
    let t3 = t2 * angle;
    let t4 = t3 * angle;
    let t5 = t4 * angle;
    let t6 = t5 * angle;
    let t7 = t6 * angle;
    let one_m_cos = 2.0 * (0.5 * angle).sin().powi(2);
    RotCoeffDerivs {
        r1: (angle * c - s) / t3,
        r2: (angle * s - 2.0 * one_m_cos) / t4,
        r3: (angle * one_m_cos - 3.0 * (angle - s)) / t5,
        w1: (3.0 * s - 3.0 * angle * c - t2 * s) / t5,
        w2: (t2 * c - 5.0 * angle * s + 8.0 * one_m_cos) / t6,
        w3: (t2 * s + 7.0 * angle * c + 8.0 * angle - 15.0 * s) / t7,
    }
}

pub(crate) fn rot_coeff_derivs(angle: f64) -> RotCoeffDerivs {
    if angle < DERIV_SERIES_SWITCH_ANGLE {
        coeff_derivs_series(angle)
    } else {
        coeff_derivs_closed(angle)
    }
}

/// Micro-rotation tensor of the pseudo-vector `theta` (Euler-Rodrigues):
/// `R = I + sin(t)/t * skew(theta) + (1-cos(t))/t^2 * skew(theta)^2`.
pub fn rotation_from_vector(theta: &Vec3) -> Mat3 {
    let angle = theta.norm();
    let co = rot_coeffs(angle);
    let th = skew(theta);
    Mat3::identity() + th * co.c1 + th * th * co.c2
}

/// Tangent map of the rotation-vector parameterization:
/// `Lambda = sin(t)/t * I + (1-cos(t))/t^2 * skew(theta)
///           + (t-sin(t))/t^3 * theta theta^T`,
/// so that the directional derivative of [`rotation_from_vector`] along an
/// additive perturbation `a` is `skew(Lambda a) * R`. `Lambda * theta = theta`
/// for every `theta`.
pub fn lambda_tensor(theta: &Vec3) -> Mat3 {
    let angle = theta.norm();
    let co = rot_coeffs(angle);
    Mat3::identity() * co.c1 + skew(theta) * co.c2 + theta * theta.transpose() * co.c3
}

/// Directional derivative of [`lambda_tensor`] along `a`.
pub fn dlambda(theta: &Vec3, a: &Vec3) -> Mat3 {
    let angle = theta.norm();
    let co = rot_coeffs(angle);
    let de = rot_coeff_derivs(angle);
    let s = theta.dot(a);
    Mat3::identity() * (de.r1 * s)
        + skew(theta) * (de.r2 * s)
        + skew(a) * co.c2
        + theta * theta.transpose() * (de.r3 * s)
        + (a * theta.transpose() + theta * a.transpose()) * co.c3
}

/// Second directional derivative of [`lambda_tensor`] along `a` then `b`
/// (symmetric in the two directions).
pub fn d2lambda(theta: &Vec3, a: &Vec3, b: &Vec3) -> Mat3 {
    let angle = theta.norm();
    let co = rot_coeffs(angle);
    let de = rot_coeff_derivs(angle);
    let sa = theta.dot(a);
    let sb = theta.dot(b);
    let ab = a.dot(b);
    Mat3::identity() * (de.w1 * sa * sb + de.r1 * ab)
        + skew(theta) * (de.w2 * sa * sb + de.r2 * ab)
        + skew(b) * (de.r2 * sa)
        + skew(a) * (de.r2 * sb)
        + theta * theta.transpose() * (de.w3 * sa * sb + de.r3 * ab)
        + (b * theta.transpose() + theta * b.transpose()) * (de.r3 * sa)
        + (a * theta.transpose() + theta * a.transpose()) * (de.r3 * sb)
        + (a * b.transpose() + b * a.transpose()) * co.c3
}

/// Micro-rotation pseudo-vector together with the derived rotation tensor and
/// tangent map, rebuilt from `theta` on construction.
#[derive(Debug, Clone)]
pub struct RotationState {
    pub theta: Vec3,
    pub rotation: Mat3,
    pub lambda: Mat3,
}

impl RotationState {
    pub fn from_vector(theta: Vec3) -> Self {
        Self {
            theta,
            rotation: rotation_from_vector(&theta),
            lambda: lambda_tensor(&theta),
        }
    }
}

/// Micropolar stretch `U = R^T F` (generally asymmetric; `det U = det F`).
pub fn micropolar_stretch(f: &Mat3, rotation: &Mat3) -> Result<Mat3, KinematicsError> {
    let det = f.determinant();
    if det <= 0.0 {
        return Err(KinematicsError::NonPositiveDet { det });
    }
    Ok(rotation.transpose() * f)
}

/// Material wryness of the shell: with `G = sum_a theta_{,a} (x) A^a` the
/// referential surface gradient of the pseudo-vector,
/// `Gamma = R^T Lambda G Q^{-1}`.
///
/// The sign convention is fixed by the small-rotation limit
/// `Gamma -> Grad theta` (for a flat reference surface).
pub fn shell_wryness(
    rotation: &RotationState,
    theta_grad: &[Vec3; 2],
    frame: &SurfaceFrame,
    z: f64,
) -> Result<Mat3, GeometryError> {
    let q_inv = frame.shifter_inverse(z)?;
    let grad = frame.surface_gradient(theta_grad);
    Ok(rotation.rotation.transpose() * rotation.lambda * grad * q_inv)
}

fn gibbs_vector(theta: &Vec3) -> Vec3 {
    let angle = theta.norm();
    // tan(t/2)/t, series below the switch angle
    let g = if angle < 1e-4 {
        0.5 + angle * angle / 24.0
    } else {
        (0.5 * angle).tan() / angle
    };
    theta * g
}

/// Composes the stored rotation `theta` with an increment `delta` so that
/// `rotation_from_vector(result) = rotation_from_vector(delta) * rotation_from_vector(theta)`,
/// using the Rodrigues-parameter composition rule. Steps whose composed angle
/// comes within [`ROTATION_ANGLE_MARGIN`] of `pi` are rejected so the caller
/// can cut the load step.
pub fn update_rotation(theta: &Vec3, delta: &Vec3) -> Result<Vec3, KinematicsError> {
    let limit = PI - ROTATION_ANGLE_MARGIN;
    if theta.norm() >= limit {
        return Err(KinematicsError::StepRejected { angle: theta.norm() });
    }
    if delta.norm() >= limit {
        return Err(KinematicsError::StepRejected { angle: delta.norm() });
    }
    let g_old = gibbs_vector(theta);
    let g_inc = gibbs_vector(delta);
    let denom = 1.0 - g_old.dot(&g_inc);
    if denom <= 0.0 {
        return Err(KinematicsError::StepRejected { angle: PI });
    }
    let g_new = (g_old + g_inc + g_inc.cross(&g_old)) / denom;
    let norm = g_new.norm();
    let angle = 2.0 * norm.atan();
    if angle >= limit {
        return Err(KinematicsError::StepRejected { angle });
    }
    if norm < 1e-12 {
        return Ok(g_new * 2.0);
    }
    Ok(g_new * (angle / norm))
}
