//! Hard-magnetic loading: remnant flux push-forward, the magnetic body
//! couple, and the element-level follower force with its unsymmetric load
//! stiffness.
//!
//! The external flux is spatially uniform and the remnant flux is piecewise
//! constant (one referential vector per mesh block), so no field equations
//! are solved; the entire magnetic effect is the distributed couple
//! `p = (F B_rem) x B_ext / mu_0` per unit reference volume, work-conjugate
//! to the micro-rotation.

use crate::element::{dof_theta, FullMatrix, FullVector, KinematicMatrix, N_CORNERS};
use crate::kinematics::KinematicsError;
use crate::tensor::{unvec9, Mat3, Vec3};

/// Free-space magnetic permeability (N/A^2).
pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Magnetization program of a model: per-block referential remnant flux plus
/// the external flux schedule. All flux densities in tesla.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct MagneticProgram {
    /// Remnant flux per mesh block (referential, constant inside a block).
    pub block_remnant: Vec<Vec3>,
    /// Unit direction of the external flux.
    pub external_direction: Vec3,
    /// Magnitude of the external flux at load factor one (T).
    pub external_max: f64,
}

impl MagneticProgram {
    pub fn external_at(&self, load_factor: f64) -> Vec3 {
        self.external_direction * (self.external_max * load_factor)
    }

    pub fn remnant_of_block(&self, block: usize) -> Vec3 {
        self.block_remnant[block]
    }
}

/// Push-forward of the referential remnant flux to the current
/// configuration, `b = J^{-1} F B_rem`.
pub fn remnant_current(f: &Mat3, brem_ref: &Vec3) -> Result<Vec3, KinematicsError> {
    let det = f.determinant();
    if det <= 0.0 {
        return Err(KinematicsError::NonPositiveDet { det });
    }
    Ok(f * brem_ref / det)
}

/// Body couple per unit reference volume, `p = (F B_rem) x B_ext / mu_0`.
pub fn body_couple(f: &Mat3, brem_ref: &Vec3, bext: &Vec3) -> Vec3 {
    (f * brem_ref).cross(bext) / MU_0
}

/// Accumulates the external force of one quadrature point into the element
/// vector. Only micro-rotation slots receive entries; the couple density is
/// evaluated with the shell deformation gradient `F* Q^{-1}`.
pub fn element_external_force(
    fstar: &Mat3,
    q_inv: &Mat3,
    brem_ref: &Vec3,
    bext: &Vec3,
    n_theta: &[f64; N_CORNERS],
    weight: f64,
    out: &mut FullVector,
) {
    let p_star = body_couple(&(fstar * q_inv), brem_ref, bext);
    for k in 0..3 {
        for a in 0..N_CORNERS {
            out[dof_theta(k, a)] += weight * p_star[k] * n_theta[a];
        }
    }
}

/// Accumulates the load stiffness of one quadrature point,
/// `K_load = d F_ext / d(dofs)`. Rows are micro-rotation slots; columns run
/// over every degree of freedom that moves `F*` (displacement, director,
/// thickness stretch and enhancement modes), making the element tangent
/// unsymmetric.
pub fn element_load_stiffness(
    b_kinematic: &KinematicMatrix,
    q_inv: &Mat3,
    brem_ref: &Vec3,
    bext: &Vec3,
    n_theta: &[f64; N_CORNERS],
    weight: f64,
    k_load: &mut FullMatrix,
) {
    let beta = q_inv * brem_ref;
    let scale = weight / MU_0;
    for col in 0..b_kinematic.ncols() {
        let dfstar = unvec9(&b_kinematic.column(col).into_owned());
        let lv = (dfstar * beta).cross(bext);
        if lv == Vec3::zeros() {
            continue;
        }
        for k in 0..3 {
            for a in 0..N_CORNERS {
                k_load[(dof_theta(k, a), col)] += scale * n_theta[a] * lv[k];
            }
        }
    }
}
