//! The 8-node quadrilateral 10-parameter micropolar shell element.
//!
//! All eight nodes carry the mid-surface displacement `u`; only the four
//! corner nodes carry the director displacement `w`, the micro-rotation
//! pseudo-vector `theta` and the thickness stretch `phi`. Six incompatible
//! enhancement modes augment the membrane part of the deformation gradient
//! and are condensed out at element level.
//!
//! The element generalized vector is ordered component-major,
//! `{U1, U2, U3, W1, W2, W3, T1, T2, T3, Phi}` with `U_i` holding the eight
//! nodal values of `u_i`, giving `3*8 + 3*4 + 3*4 + 4 = 52` slots, plus six
//! enhancement parameters for a 58-wide element system.

use crate::constitutive::{self, ConstitutiveError, MaterialParams, DET_GUARD};
use crate::geometry::{self, GeometryError, SurfaceFrame};
use crate::kinematics::{d2lambda, dlambda, KinematicsError, RotationState};
use crate::magnetics;
use crate::tensor::{skew, unvec9, vec9, Mat3, Vec3, COMPONENT_ORDER};
use nalgebra::{SMatrix, SVector};
use thiserror::Error;

pub const N_NODES: usize = 8;
pub const N_CORNERS: usize = 4;
/// Kinematic DOFs per element.
pub const DOF_V: usize = 52;
/// Enhancement parameters per element.
pub const DOF_ALPHA: usize = 6;
/// Width of the coupled element system.
pub const DOF_TOTAL: usize = DOF_V + DOF_ALPHA;

pub type VVector = SVector<f64, DOF_V>;
pub type VMatrix = SMatrix<f64, DOF_V, DOF_V>;
pub type AlphaVector = SVector<f64, DOF_ALPHA>;
pub type FullVector = SVector<f64, DOF_TOTAL>;
pub type FullMatrix = SMatrix<f64, DOF_TOTAL, DOF_TOTAL>;
/// 9 x 58 strain-displacement matrix in the crate component order.
pub type KinematicMatrix = SMatrix<f64, 9, DOF_TOTAL>;
type EasMatrix = SMatrix<f64, 9, DOF_ALPHA>;

#[inline]
pub fn dof_u(i: usize, a: usize) -> usize {
    i * N_NODES + a
}
#[inline]
pub fn dof_w(i: usize, a: usize) -> usize {
    24 + i * N_CORNERS + a
}
#[inline]
pub fn dof_theta(p: usize, a: usize) -> usize {
    36 + p * N_CORNERS + a
}
#[inline]
pub fn dof_phi(a: usize) -> usize {
    48 + a
}
#[inline]
pub fn dof_alpha(m: usize) -> usize {
    DOF_V + m
}

#[derive(Debug, Error)]
pub enum ElementError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("singular enhancement Jacobian at element center")]
    SingularEasJacobian,
    #[error("singular enhancement stiffness block")]
    SingularEasStiffness,
}

/// Shape function values and parent derivatives at one surface point.
/// `n_u` is the 8-node serendipity family, `n_c` the bilinear corner family
/// shared by the director displacement, micro-rotation and thickness stretch.
#[derive(Debug, Clone)]
pub struct ShapePoint {
    pub xi: f64,
    pub eta: f64,
    pub n_u: [f64; N_NODES],
    pub dn_u: [[f64; 2]; N_NODES],
    pub n_c: [f64; N_CORNERS],
    pub dn_c: [[f64; 2]; N_CORNERS],
}

const CORNER_XI: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
const CORNER_ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

pub fn shape_point(xi: f64, eta: f64) -> ShapePoint {
    let mut n_u = [0.0; N_NODES];
    let mut dn_u = [[0.0; 2]; N_NODES];
    for a in 0..4 {
        let sx = CORNER_XI[a];
        let sy = CORNER_ETA[a];
        let x = sx * xi;
        let y = sy * eta;
        n_u[a] = 0.25 * (1.0 + x) * (1.0 + y) * (x + y - 1.0);
        dn_u[a][0] = 0.25 * sx * (1.0 + y) * (2.0 * x + y);
        dn_u[a][1] = 0.25 * sy * (1.0 + x) * (x + 2.0 * y);
    }
    // midside nodes: 4 on eta = -1, 5 on xi = +1, 6 on eta = +1, 7 on xi = -1
    let mid = [(0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)];
    for (m, &(sx, sy)) in mid.iter().enumerate() {
        let a = 4 + m;
        if sx == 0.0 {
            n_u[a] = 0.5 * (1.0 - xi * xi) * (1.0 + sy * eta);
            dn_u[a][0] = -xi * (1.0 + sy * eta);
            dn_u[a][1] = 0.5 * sy * (1.0 - xi * xi);
        } else {
            n_u[a] = 0.5 * (1.0 + sx * xi) * (1.0 - eta * eta);
            dn_u[a][0] = 0.5 * sx * (1.0 - eta * eta);
            dn_u[a][1] = -eta * (1.0 + sx * xi);
        }
    }
    let mut n_c = [0.0; N_CORNERS];
    let mut dn_c = [[0.0; 2]; N_CORNERS];
    for a in 0..4 {
        let sx = CORNER_XI[a];
        let sy = CORNER_ETA[a];
        n_c[a] = 0.25 * (1.0 + sx * xi) * (1.0 + sy * eta);
        dn_c[a][0] = 0.25 * sx * (1.0 + sy * eta);
        dn_c[a][1] = 0.25 * sy * (1.0 + sx * xi);
    }
    ShapePoint {
        xi,
        eta,
        n_u,
        dn_u,
        n_c,
        dn_c,
    }
}

/// 2x2 Gauss-Legendre rule on the surface combined with a two-point rule
/// through the thickness (`z = +-h / (2 sqrt(3))`). Surface weights are one;
/// the volume element contributes `sqrt(A) det Q (h/2)` per point.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub surface: [(f64, f64); 4],
    /// Thickness points as fractions of `h/2`, with unit weights.
    pub thickness: [f64; 2],
}

impl QuadratureRule {
    pub fn standard() -> Self {
        let g = 1.0 / 3.0_f64.sqrt();
        Self {
            surface: [(-g, -g), (g, -g), (g, g), (-g, g)],
            thickness: [-g, g],
        }
    }
}

/// Per-element enhancement state: current modes plus the last converged set
/// for warm starts after a rejected load step.
#[derive(Debug, Clone, Default)]
pub struct EasState {
    pub alpha: AlphaVector,
    pub alpha_converged: AlphaVector,
}

/// Precomputed reference data of one element.
#[derive(Debug, Clone)]
pub struct ElementRef {
    pub coords: [Vec3; N_NODES],
    pub directors: [Vec3; N_CORNERS],
    pub thickness: f64,
    pub shapes: Vec<ShapePoint>,
    pub frames: Vec<SurfaceFrame>,
    pub thickness_points: [f64; 2],
    /// Inverse transpose of the parent->physical Jacobi map at the element
    /// center, held constant over the element for the enhancement modes.
    pub j0_inv_t: Mat3,
    /// Characteristic length (diagonal of the node bounding box).
    pub diameter: f64,
}

impl ElementRef {
    pub fn new(
        coords: [Vec3; N_NODES],
        directors: [Vec3; N_CORNERS],
        thickness: f64,
    ) -> Result<Self, ElementError> {
        let rule = QuadratureRule::standard();
        let mut shapes = Vec::with_capacity(4);
        let mut frames = Vec::with_capacity(4);
        for &(xi, eta) in &rule.surface {
            let sp = shape_point(xi, eta);
            let frame = geometry::surface_frame_at(&coords, &sp.dn_u, &directors, &sp.n_c, &sp.dn_c)?;
            shapes.push(sp);
            frames.push(frame);
        }
        let center = shape_point(0.0, 0.0);
        let fc = geometry::surface_frame_at(&coords, &center.dn_u, &directors, &center.n_c, &center.dn_c)?;
        let j0 = Mat3::from_columns(&[fc.a_cov[0], fc.a_cov[1], fc.director]);
        let j0_inv_t = j0
            .try_inverse()
            .ok_or(ElementError::SingularEasJacobian)?
            .transpose();
        let mut lo = coords[0];
        let mut hi = coords[0];
        for c in coords.iter() {
            lo = lo.inf(c);
            hi = hi.sup(c);
        }
        Ok(Self {
            coords,
            directors,
            thickness,
            shapes,
            frames,
            thickness_points: rule.thickness,
            j0_inv_t,
            diameter: (hi - lo).norm(),
        })
    }
}

/// Kinematic state of one element, gathered from the global vectors.
#[derive(Debug, Clone)]
pub struct ElementState {
    pub u: [Vec3; N_NODES],
    pub w: [Vec3; N_CORNERS],
    pub theta: [Vec3; N_CORNERS],
    pub phi: [f64; N_CORNERS],
    pub alpha: AlphaVector,
}

impl ElementState {
    pub fn zero() -> Self {
        Self {
            u: [Vec3::zeros(); N_NODES],
            w: [Vec3::zeros(); N_CORNERS],
            theta: [Vec3::zeros(); N_CORNERS],
            phi: [0.0; N_CORNERS],
            alpha: AlphaVector::zeros(),
        }
    }

    /// Reads the state from a 58-wide vector in the element DOF order.
    pub fn from_vector(v: &FullVector) -> Self {
        let mut s = Self::zero();
        for i in 0..3 {
            for a in 0..N_NODES {
                s.u[a][i] = v[dof_u(i, a)];
            }
            for a in 0..N_CORNERS {
                s.w[a][i] = v[dof_w(i, a)];
                s.theta[a][i] = v[dof_theta(i, a)];
            }
        }
        for a in 0..N_CORNERS {
            s.phi[a] = v[dof_phi(a)];
        }
        for m in 0..DOF_ALPHA {
            s.alpha[m] = v[dof_alpha(m)];
        }
        s
    }

    pub fn to_vector(&self) -> FullVector {
        let mut v = FullVector::zeros();
        for i in 0..3 {
            for a in 0..N_NODES {
                v[dof_u(i, a)] = self.u[a][i];
            }
            for a in 0..N_CORNERS {
                v[dof_w(i, a)] = self.w[a][i];
                v[dof_theta(i, a)] = self.theta[a][i];
            }
        }
        for a in 0..N_CORNERS {
            v[dof_phi(a)] = self.phi[a];
        }
        for m in 0..DOF_ALPHA {
            v[dof_alpha(m)] = self.alpha[m];
        }
        v
    }
}

/// Magnetic data of one element (SI tesla).
#[derive(Debug, Clone, Copy)]
pub struct MagneticLoad {
    pub remnant: Vec3,
    pub external: Vec3,
}

/// Enhancement-mode strain matrix at a parent point: the reference modes are
/// linear in `(xi, eta)`, live in the third column of the reference tensor
/// and vanish at the element center; they are mapped with the (fixed) center
/// Jacobian, `Fbar = J0^{-T} Fbar_ref J0^{-1}`.
pub fn eas_b_matrix(xi: f64, eta: f64, j0_inv_t: &Mat3) -> EasMatrix {
    let mut b = EasMatrix::zeros();
    for (r, &(i, j)) in COMPONENT_ORDER.iter().enumerate() {
        for m in 0..DOF_ALPHA {
            let fac = if m % 2 == 0 { xi } else { eta };
            b[(r, m)] = fac * j0_inv_t[(i, m / 2)] * j0_inv_t[(j, 2)];
        }
    }
    b
}

/// Enhancing deformation gradient for given modes.
pub fn eas_gradient(alpha: &AlphaVector, xi: f64, eta: f64, j0_inv_t: &Mat3) -> Mat3 {
    unvec9(&(eas_b_matrix(xi, eta, j0_inv_t) * alpha))
}

/// Result of one element evaluation. `residual` is internal minus external
/// force; `tangent` the consistent derivative of the residual including the
/// (unsymmetric) load stiffness.
#[derive(Debug, Clone)]
pub struct ElementOutput {
    pub residual: FullVector,
    pub tangent: Option<FullMatrix>,
    pub energy: f64,
    /// External (magnetic) force alone, for convergence scaling.
    pub external: FullVector,
}

#[inline]
fn col3<const C: usize>(m: &SMatrix<f64, 3, C>, j: usize) -> Vec3 {
    Vec3::new(m[(0, j)], m[(1, j)], m[(2, j)])
}

/// Evaluates internal force, external force, energy and (optionally) the
/// consistent tangent of one element.
pub fn element_system(
    elref: &ElementRef,
    state: &ElementState,
    material: &MaterialParams,
    load: Option<&MagneticLoad>,
    want_tangent: bool,
) -> Result<ElementOutput, ElementError> {
    let mut residual = FullVector::zeros();
    let mut external = FullVector::zeros();
    let mut energy = 0.0;
    let mut k = if want_tangent {
        Some(FullMatrix::zeros())
    } else {
        None
    };
    let mut k_load = if want_tangent && load.is_some() {
        Some(FullMatrix::zeros())
    } else {
        None
    };
    let half_h = 0.5 * elref.thickness;

    for (sp, frame) in elref.shapes.iter().zip(elref.frames.iter()) {
        // interpolated fields and their convective partials
        let mut u_partials = [Vec3::zeros(); 2];
        for a in 0..N_NODES {
            u_partials[0] += state.u[a] * sp.dn_u[a][0];
            u_partials[1] += state.u[a] * sp.dn_u[a][1];
        }
        let mut w_val = Vec3::zeros();
        let mut w_partials = [Vec3::zeros(); 2];
        let mut theta_val = Vec3::zeros();
        let mut theta_partials = [Vec3::zeros(); 2];
        let mut phi_val = 0.0;
        for a in 0..N_CORNERS {
            w_val += state.w[a] * sp.n_c[a];
            theta_val += state.theta[a] * sp.n_c[a];
            phi_val += state.phi[a] * sp.n_c[a];
            for al in 0..2 {
                w_partials[al] += state.w[a] * sp.dn_c[a][al];
                theta_partials[al] += state.theta[a] * sp.dn_c[a][al];
            }
        }

        let rot = RotationState::from_vector(theta_val);
        let lam = rot.lambda;
        let rmat = rot.rotation;
        let dlam_e = [
            dlambda(&theta_val, &Vec3::x()),
            dlambda(&theta_val, &Vec3::y()),
            dlambda(&theta_val, &Vec3::z()),
        ];
        let dlam_g = [
            dlambda(&theta_val, &theta_partials[0]),
            dlambda(&theta_val, &theta_partials[1]),
        ];

        let (f0, f1) =
            geometry::deformation_gradient_parts(&u_partials, &w_val, &w_partials, phi_val, frame);
        let bbar = eas_b_matrix(sp.xi, sp.eta, &elref.j0_inv_t);
        let fbar = unvec9(&(bbar * state.alpha));
        let theta_grad = frame.surface_gradient(&theta_partials);
        let dstar = frame.director_dual;
        let dcur = frame.director + w_val;

        // per-node surface gradient vectors
        let mut gu = [Vec3::zeros(); N_NODES];
        for a in 0..N_NODES {
            gu[a] = frame.a_con[0] * sp.dn_u[a][0] + frame.a_con[1] * sp.dn_u[a][1];
        }
        let mut gw = [Vec3::zeros(); N_CORNERS];
        for a in 0..N_CORNERS {
            gw[a] = frame.a_con[0] * sp.dn_c[a][0] + frame.a_con[1] * sp.dn_c[a][1];
        }

        let sqrt_a = frame.metric_det.sqrt();

        for &zeta in &elref.thickness_points {
            let z = zeta * half_h;
            let q_det = frame.shifter_det(z);
            let q_inv = frame.shifter_inverse(z)?;
            let fstar = f0 + fbar + f1 * z;
            let f = fstar * q_inv;
            let det_f = f.determinant();
            if det_f <= DET_GUARD {
                return Err(GeometryError::NonPositiveJacobian { det: det_f }.into());
            }
            let u_tilde = rmat.transpose() * f;
            let gamma = rmat.transpose() * lam * theta_grad * q_inv;
            let (p_til, m_til) = constitutive::material_stresses(&u_tilde, &gamma, material)?;
            let q_inv_t = q_inv.transpose();
            let p0 = rmat * p_til * q_inv_t;
            let m0 = rmat * m_til * q_inv_t;
            let pv = vec9(&p0);
            let mv = vec9(&m0);

            let wgt = sqrt_a * half_h * q_det;
            energy += wgt * constitutive::energy_density(&u_tilde, &gamma, material)?;

            // kinematic matrix for dF* and the full strain matrices
            let mut bku = KinematicMatrix::zeros();
            let mut b2 = KinematicMatrix::zeros();
            for (r, &(i, jj)) in COMPONENT_ORDER.iter().enumerate() {
                for a in 0..N_NODES {
                    bku[(r, dof_u(i, a))] = gu[a][jj];
                }
                for a in 0..N_CORNERS {
                    bku[(r, dof_w(i, a))] = sp.n_c[a] * dstar[jj]
                        + z * (gw[a][jj] + 2.0 * phi_val * sp.n_c[a] * dstar[jj]);
                    bku[(r, dof_phi(a))] = z * 2.0 * dcur[i] * dstar[jj] * sp.n_c[a];
                }
                for m in 0..DOF_ALPHA {
                    bku[(r, dof_alpha(m))] = bbar[(r, m)];
                }
                for p in 0..3 {
                    for a in 0..N_CORNERS {
                        b2[(r, dof_theta(p, a))] = frame.a_con[0][jj]
                            * (dlam_g[0][(i, p)] * sp.n_c[a] + lam[(i, p)] * sp.dn_c[a][0])
                            + frame.a_con[1][jj]
                                * (dlam_g[1][(i, p)] * sp.n_c[a] + lam[(i, p)] * sp.dn_c[a][1]);
                    }
                }
            }
            // spin coupling block: rows of the strain matrix for the
            // micro-rotation slots, (F*_col_J x Lambda_col_p) per component
            let mut btilde = bku;
            let mut cp = [[Vec3::zeros(); 3]; 3];
            for jj in 0..3 {
                for p in 0..3 {
                    cp[jj][p] = col3(&fstar, jj).cross(&col3(&lam, p));
                }
            }
            for (r, &(i, jj)) in COMPONENT_ORDER.iter().enumerate() {
                for p in 0..3 {
                    for a in 0..N_CORNERS {
                        btilde[(r, dof_theta(p, a))] = sp.n_c[a] * cp[jj][p][i];
                    }
                }
            }

            residual += (btilde.transpose() * pv + b2.transpose() * mv) * wgt;

            if let Some(ld) = load {
                magnetics::element_external_force(
                    &fstar,
                    &q_inv,
                    &ld.remnant,
                    &ld.external,
                    &sp.n_c,
                    wgt,
                    &mut external,
                );
                if let Some(kl) = k_load.as_mut() {
                    magnetics::element_load_stiffness(
                        &bku,
                        &q_inv,
                        &ld.remnant,
                        &ld.external,
                        &sp.n_c,
                        wgt,
                        kl,
                    );
                }
            }

            if let Some(kmat) = k.as_mut() {
                // material part
                let (c1t, c4t) = constitutive::material_tangents(&u_tilde, material)?;
                let c1 = constitutive::pushforward_tangents(&c1t, &rmat, &q_inv);
                let c4 = constitutive::pushforward_tangents(&c4t, &rmat, &q_inv);
                *kmat += (btilde.transpose() * (c1 * btilde) + b2.transpose() * (c4 * b2)) * wgt;

                // stress rotation: d(P0, M0) from the spin of the rotation
                for q in 0..3 {
                    let sk = skew(&col3(&lam, q));
                    let colv =
                        btilde.transpose() * vec9(&(sk * p0)) + b2.transpose() * vec9(&(sk * m0));
                    for c in 0..N_CORNERS {
                        let col = dof_theta(q, c);
                        for rix in 0..DOF_TOTAL {
                            kmat[(rix, col)] += wgt * sp.n_c[c] * colv[rix];
                        }
                    }
                }

                // spin-coupling rows differentiated through F*
                for col in 0..DOF_TOTAL {
                    let xc = unvec9(&bku.column(col).into_owned());
                    if xc == Mat3::zeros() {
                        continue;
                    }
                    let mut t = Vec3::zeros();
                    for jj in 0..3 {
                        t += col3(&p0, jj).cross(&col3(&xc, jj));
                    }
                    let lt = lam.transpose() * t;
                    for p in 0..3 {
                        for b in 0..N_CORNERS {
                            kmat[(dof_theta(p, b), col)] += wgt * sp.n_c[b] * lt[p];
                        }
                    }
                }

                // spin-coupling rows differentiated through Lambda
                let mut t_fstar = Vec3::zeros();
                for jj in 0..3 {
                    t_fstar += col3(&p0, jj).cross(&col3(&fstar, jj));
                }
                for q in 0..3 {
                    let vq = dlam_e[q].transpose() * t_fstar;
                    for p in 0..3 {
                        for b in 0..N_CORNERS {
                            for c in 0..N_CORNERS {
                                kmat[(dof_theta(p, b), dof_theta(q, c))] +=
                                    wgt * sp.n_c[b] * sp.n_c[c] * vq[p];
                            }
                        }
                    }
                }

                // wryness rows differentiated through Lambda and its gradient
                let m_al = [m0 * frame.a_con[0], m0 * frame.a_con[1]];
                for q in 0..3 {
                    let eq = Vec3::from_fn(|r, _| if r == q { 1.0 } else { 0.0 });
                    let mut s_q = [Vec3::zeros(); 2];
                    let mut z_q = [Vec3::zeros(); 2];
                    for al in 0..2 {
                        s_q[al] = dlam_e[q].transpose() * m_al[al];
                        z_q[al] =
                            d2lambda(&theta_val, &theta_partials[al], &eq).transpose() * m_al[al];
                    }
                    for p in 0..3 {
                        for b in 0..N_CORNERS {
                            for c in 0..N_CORNERS {
                                let mut val = 0.0;
                                for al in 0..2 {
                                    val += sp.n_c[b] * sp.n_c[c] * z_q[al][p]
                                        + (sp.n_c[b] * sp.dn_c[c][al]
                                            + sp.dn_c[b][al] * sp.n_c[c])
                                            * s_q[al][p];
                                }
                                kmat[(dof_theta(p, b), dof_theta(q, c))] += wgt * val;
                            }
                        }
                    }
                }

                // director-stretch coupling from the z-linear strain rows
                let pd = p0 * dstar;
                for i in 0..3 {
                    for b in 0..N_CORNERS {
                        for c in 0..N_CORNERS {
                            let val = wgt * z * 2.0 * sp.n_c[b] * sp.n_c[c] * pd[i];
                            kmat[(dof_w(i, b), dof_phi(c))] += val;
                            kmat[(dof_phi(c), dof_w(i, b))] += val;
                        }
                    }
                }
            }
        }
    }

    residual -= external;
    if let (Some(kmat), Some(kl)) = (k.as_mut(), k_load.as_ref()) {
        *kmat -= kl;
    }

    Ok(ElementOutput {
        residual,
        tangent: k,
        energy,
        external,
    })
}

/// Internal force alone (no magnetic load), split into kinematic and
/// enhancement parts.
pub fn element_internal_force(
    elref: &ElementRef,
    state: &ElementState,
    material: &MaterialParams,
) -> Result<(VVector, AlphaVector), ElementError> {
    let out = element_system(elref, state, material, None, false)?;
    Ok((
        out.residual.fixed_rows::<DOF_V>(0).into_owned(),
        out.residual.fixed_rows::<DOF_ALPHA>(DOF_V).into_owned(),
    ))
}

/// Static condensation of the enhancement block. Stores what is needed to
/// recover the enhancement increment after the global solve.
#[derive(Debug, Clone)]
pub struct Condensation {
    pub k_cond: VMatrix,
    pub r_cond: VVector,
    kaa_inv: SMatrix<f64, DOF_ALPHA, DOF_ALPHA>,
    kav: SMatrix<f64, DOF_ALPHA, DOF_V>,
    r_alpha: AlphaVector,
}

impl Condensation {
    /// `d_alpha = -Kaa^{-1} (r_alpha + Kav dv)`
    pub fn recover_alpha(&self, dv: &VVector) -> AlphaVector {
        -(self.kaa_inv * (self.r_alpha + self.kav * dv))
    }
}

pub fn condense_eas(k: &FullMatrix, r: &FullVector) -> Result<Condensation, ElementError> {
    let kvv = k.fixed_view::<DOF_V, DOF_V>(0, 0).into_owned();
    let kva = k.fixed_view::<DOF_V, DOF_ALPHA>(0, DOF_V).into_owned();
    let kav = k.fixed_view::<DOF_ALPHA, DOF_V>(DOF_V, 0).into_owned();
    let kaa = k
        .fixed_view::<DOF_ALPHA, DOF_ALPHA>(DOF_V, DOF_V)
        .into_owned();
    let rv = r.fixed_rows::<DOF_V>(0).into_owned();
    let ra = r.fixed_rows::<DOF_ALPHA>(DOF_V).into_owned();
    let kaa_inv = kaa
        .try_inverse()
        .ok_or(ElementError::SingularEasStiffness)?;
    let k_cond = kvv - kva * kaa_inv * kav;
    let r_cond = rv - kva * (kaa_inv * ra);
    Ok(Condensation {
        k_cond,
        r_cond,
        kaa_inv,
        kav,
        r_alpha: ra,
    })
}

/// Finite-difference verification of the element tangent, shared by the
/// test suite and the command-line `verify-tangent` check.
pub mod verify {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[derive(Debug, Clone)]
    pub struct TangentCheck {
        pub max_rel_error: f64,
        pub worst_row_field: &'static str,
        pub worst_col_field: &'static str,
    }

    const FIELD_NAMES: [&str; 5] = ["u", "w", "theta", "phi", "alpha"];

    fn field_of_slot(i: usize) -> usize {
        if i < 24 {
            0
        } else if i < 36 {
            1
        } else if i < 48 {
            2
        } else if i < DOF_V {
            3
        } else {
            4
        }
    }

    /// Characteristic magnitude per field: membrane displacements scale with
    /// the element size, director displacements and rotations are order one,
    /// the thickness stretch with 1/h and the enhancement modes with the
    /// squared element size (they are divided by two Jacobians).
    pub fn field_scales(elref: &ElementRef) -> [f64; 5] {
        let d = elref.diameter;
        [d, 1.0, 1.0, 1.0 / elref.thickness, 0.5 * d]
    }

    /// A deterministic random state with moderate deformation, safe against
    /// element inversion.
    pub fn random_moderate_state(elref: &ElementRef, seed: u64) -> ElementState {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = field_scales(elref);
        let mut r3 = |scale: f64| Vec3::from_fn(|_, _| rng.gen_range(-scale..scale));
        let mut st = ElementState::zero();
        for a in 0..N_NODES {
            st.u[a] = r3(0.03 * s[0]);
        }
        for a in 0..N_CORNERS {
            st.w[a] = r3(0.08 * s[1]);
            st.theta[a] = r3(0.25 * s[2]);
        }
        let mut rng2 = StdRng::seed_from_u64(seed ^ 0x9e37_79b9);
        for a in 0..N_CORNERS {
            st.phi[a] = rng2.gen_range(-0.05..0.05) * s[3];
        }
        for m in 0..DOF_ALPHA {
            st.alpha[m] = rng2.gen_range(-0.05..0.05) * s[4];
        }
        st
    }

    /// Central finite difference of the element residual against the
    /// analytic tangent. The error of each field-pair block is measured
    /// relative to the largest entry of that block.
    pub fn tangent_vs_fd(
        elref: &ElementRef,
        state: &ElementState,
        material: &MaterialParams,
        load: Option<&MagneticLoad>,
    ) -> Result<TangentCheck, ElementError> {
        let out = element_system(elref, state, material, load, true)?;
        let k = out.tangent.expect("tangent requested");
        let v0 = state.to_vector();
        let scales = field_scales(elref);
        let mut kfd = FullMatrix::zeros();
        for col in 0..DOF_TOTAL {
            let h = 1e-6 * scales[field_of_slot(col)];
            let mut vp = v0;
            vp[col] += h;
            let mut vm = v0;
            vm[col] -= h;
            let rp = element_system(elref, &ElementState::from_vector(&vp), material, load, false)?
                .residual;
            let rm = element_system(elref, &ElementState::from_vector(&vm), material, load, false)?
                .residual;
            kfd.set_column(col, &((rp - rm) / (2.0 * h)));
        }
        // block scales
        let mut block_scale = [[0.0_f64; 5]; 5];
        let mut global: f64 = 0.0;
        for i in 0..DOF_TOTAL {
            for j in 0..DOF_TOTAL {
                let v = kfd[(i, j)].abs();
                block_scale[field_of_slot(i)][field_of_slot(j)] =
                    block_scale[field_of_slot(i)][field_of_slot(j)].max(v);
                global = global.max(v);
            }
        }
        let mut worst = (0usize, 0usize);
        let mut max_rel: f64 = 0.0;
        for i in 0..DOF_TOTAL {
            for j in 0..DOF_TOTAL {
                let (fi, fj) = (field_of_slot(i), field_of_slot(j));
                let scale = block_scale[fi][fj];
                if scale < 1e-12 * global {
                    continue;
                }
                let rel = (k[(i, j)] - kfd[(i, j)]).abs() / scale;
                if rel > max_rel {
                    max_rel = rel;
                    worst = (fi, fj);
                }
            }
        }
        Ok(TangentCheck {
            max_rel_error: max_rel,
            worst_row_field: FIELD_NAMES[worst.0],
            worst_col_field: FIELD_NAMES[worst.1],
        })
    }
}
