//! Discrete differential geometry of the reference mid-surface.
//!
//! A [`SurfaceFrame`] collects everything the element needs at one surface
//! point: covariant/contravariant bases, metric determinant, unit normal,
//! the interpolated director and the curvature tensor. The curvature is
//! built from derivatives of the interpolated nodal director field, the same
//! interpolation that enters the director kinematics, which keeps the
//! undeformed state exactly stress-free and rigid motions exactly force-free
//! on curved meshes.

use crate::tensor::{Mat3, Vec3};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("degenerate element: surface metric determinant {det:.6e} is not positive")]
    DegenerateMetric { det: f64 },
    #[error("singular shifter: det Q = {det:.6e} at z = {z:.6e}")]
    SingularShifter { det: f64, z: f64 },
    #[error("invalid configuration: det F = {det:.6e} is not positive")]
    NonPositiveJacobian { det: f64 },
}

/// Reference surface data at a single point of an element.
///
/// The triad `{A_1, A_2, D}` (with `D` the interpolated nodal director) and
/// its dual `{A^1, A^2, D*}` carry the kinematics. Using the dual triad
/// instead of the orthonormal completion keeps rigid motions exactly
/// force-free on curved meshes, where the interpolated director deviates
/// slightly from the unit normal.
#[derive(Debug, Clone)]
pub struct SurfaceFrame {
    /// Covariant basis `A_alpha = dX/dzeta^alpha`.
    pub a_cov: [Vec3; 2],
    /// In-plane members of the dual triad, `A_alpha . A^beta = delta`,
    /// `A^beta . D = 0`.
    pub a_con: [Vec3; 2],
    /// Unit isoparametric normal `A_1 x A_2 / |A_1 x A_2|`.
    pub normal: Vec3,
    /// Interpolated nodal director (close to, but not exactly, the normal on
    /// curved meshes).
    pub director: Vec3,
    /// Dual of the director within the triad: `D* . A_alpha = 0`,
    /// `D* . D = 1`.
    pub director_dual: Vec3,
    /// Determinant of the covariant surface metric.
    pub metric_det: f64,
    /// Curvature tensor `B = -sum_a D_a (x) Grad N_a` from the nodal
    /// director field.
    pub curvature: Mat3,
}

impl SurfaceFrame {
    /// Shifter tensor `Q(z) = I - z B`; `Q(0) = I` exactly.
    pub fn shifter(&self, z: f64) -> Mat3 {
        Mat3::identity() - self.curvature * z
    }

    pub fn shifter_det(&self, z: f64) -> f64 {
        self.shifter(z).determinant()
    }

    pub fn shifter_inverse(&self, z: f64) -> Result<Mat3, GeometryError> {
        let q = self.shifter(z);
        let det = q.determinant();
        if det <= 0.0 {
            return Err(GeometryError::SingularShifter { det, z });
        }
        Ok(q.try_inverse()
            .expect("shifter with positive determinant is invertible"))
    }

    /// Referential surface gradient `sum_alpha p_alpha (x) A^alpha` of a
    /// vector field with convective partial derivatives `partials`.
    pub fn surface_gradient(&self, partials: &[Vec3; 2]) -> Mat3 {
        partials[0] * self.a_con[0].transpose() + partials[1] * self.a_con[1].transpose()
    }
}

/// Builds the surface frame at one parent-coordinate point of an 8-node
/// element.
///
/// * `coords` - referential node positions,
/// * `dn_u` - parent derivatives of the 8-node shape functions there,
/// * `directors` - nodal directors at the four corners,
/// * `n_c`, `dn_c` - bilinear (corner) shape values and parent derivatives.
pub fn surface_frame_at(
    coords: &[Vec3; 8],
    dn_u: &[[f64; 2]; 8],
    directors: &[Vec3; 4],
    n_c: &[f64; 4],
    dn_c: &[[f64; 2]; 4],
) -> Result<SurfaceFrame, GeometryError> {
    let mut a_cov = [Vec3::zeros(); 2];
    for a in 0..8 {
        a_cov[0] += coords[a] * dn_u[a][0];
        a_cov[1] += coords[a] * dn_u[a][1];
    }
    let m11 = a_cov[0].dot(&a_cov[0]);
    let m12 = a_cov[0].dot(&a_cov[1]);
    let m22 = a_cov[1].dot(&a_cov[1]);
    let metric_det = m11 * m22 - m12 * m12;
    if metric_det <= 0.0 {
        return Err(GeometryError::DegenerateMetric { det: metric_det });
    }
    let normal = a_cov[0].cross(&a_cov[1]) / metric_det.sqrt();

    let mut director = Vec3::zeros();
    let mut d_grad = [Vec3::zeros(); 2];
    for a in 0..4 {
        director += directors[a] * n_c[a];
        d_grad[0] += directors[a] * dn_c[a][0];
        d_grad[1] += directors[a] * dn_c[a][1];
    }
    // dual triad of {A_1, A_2, D}
    let triad = Mat3::from_columns(&[a_cov[0], a_cov[1], director]);
    let dual = triad
        .try_inverse()
        .ok_or(GeometryError::DegenerateMetric { det: metric_det })?
        .transpose();
    let a_con = [dual.column(0).into_owned(), dual.column(1).into_owned()];
    let director_dual = dual.column(2).into_owned();
    let curvature = -(d_grad[0] * a_con[0].transpose() + d_grad[1] * a_con[1].transpose());

    Ok(SurfaceFrame {
        a_cov,
        a_con,
        normal,
        director,
        director_dual,
        metric_det,
        curvature,
    })
}

/// The two-term thickness expansion of the shell deformation gradient.
///
/// With `u`, `w` the mid-surface and director displacements, `phi` the
/// thickness stretch, `D` the interpolated reference director and `B` the
/// curvature:
/// `F0 = I + Grad u + w (x) D`,
/// `F1 = Grad w + 2 phi (D + w) (x) D - B`.
pub fn deformation_gradient_parts(
    u_partials: &[Vec3; 2],
    w: &Vec3,
    w_partials: &[Vec3; 2],
    phi: f64,
    frame: &SurfaceFrame,
) -> (Mat3, Mat3) {
    let d_star = frame.director_dual;
    let grad_u = frame.surface_gradient(u_partials);
    let grad_w = frame.surface_gradient(w_partials);
    let f0 = Mat3::identity() + grad_u + w * d_star.transpose();
    let f1 =
        grad_w + (frame.director + w) * d_star.transpose() * (2.0 * phi) - frame.curvature;
    (f0, f1)
}

/// Total deformation gradient `F = (F0 + Fbar + z F1) Q^{-1}` at thickness
/// coordinate `z`. Fails when the configuration is inverted.
pub fn total_deformation_gradient(
    f0: &Mat3,
    f1: &Mat3,
    fbar: &Mat3,
    z: f64,
    frame: &SurfaceFrame,
) -> Result<Mat3, GeometryError> {
    let q_inv = frame.shifter_inverse(z)?;
    let f = (f0 + fbar + f1 * z) * q_inv;
    let det = f.determinant();
    if det <= 0.0 {
        return Err(GeometryError::NonPositiveJacobian { det });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::shape_point;
    use approx::assert_relative_eq;

    /// Frame of a flat rectangular element in the X1X2 plane.
    fn flat_frame(xi: f64, eta: f64) -> SurfaceFrame {
        let coords = rect_coords(2.0, 1.0);
        let sp = shape_point(xi, eta);
        let directors = [Vec3::z(); 4];
        surface_frame_at(&coords, &sp.dn_u, &directors, &sp.n_c, &sp.dn_c).unwrap()
    }

    fn rect_coords(lx: f64, ly: f64) -> [Vec3; 8] {
        let corners = [
            (0.0, 0.0),
            (lx, 0.0),
            (lx, ly),
            (0.0, ly),
            (lx / 2.0, 0.0),
            (lx, ly / 2.0),
            (lx / 2.0, ly),
            (0.0, ly / 2.0),
        ];
        core::array::from_fn(|i| Vec3::new(corners[i].0, corners[i].1, 0.0))
    }

    #[test]
    fn flat_plate_frame() {
        let f = flat_frame(0.3, -0.4);
        assert_relative_eq!(f.normal, Vec3::z(), epsilon = 1e-14);
        assert_relative_eq!(f.director, Vec3::z(), epsilon = 1e-14);
        assert_relative_eq!(f.curvature, Mat3::zeros(), epsilon = 1e-14);
        assert_relative_eq!(f.shifter(0.3), Mat3::identity(), epsilon = 1e-14);
        // duality and orthogonality
        for alpha in 0..2 {
            for beta in 0..2 {
                let expected = if alpha == beta { 1.0 } else { 0.0 };
                assert_relative_eq!(f.a_cov[alpha].dot(&f.a_con[beta]), expected, epsilon = 1e-13);
            }
            assert_relative_eq!(f.normal.dot(&f.a_cov[alpha]), 0.0, epsilon = 1e-14);
        }
    }

    /// Single element on a cylinder: curvature should approach 1/R as the
    /// element shrinks.
    fn cylinder_curvature_error(half_angle: f64, radius: f64) -> f64 {
        let len = radius * half_angle; // axial half-length, same scale
        let pos = |phi: f64, y: f64| Vec3::new(radius * phi.cos(), y, radius * phi.sin());
        let nrm = |phi: f64| Vec3::new(phi.cos(), 0.0, phi.sin());
        // corner order: (-a,-l), (a,-l), (a,l), (-a,l), then midsides
        let coords = [
            pos(-half_angle, -len),
            pos(half_angle, -len),
            pos(half_angle, len),
            pos(-half_angle, len),
            pos(0.0, -len),
            pos(half_angle, 0.0),
            pos(0.0, len),
            pos(-half_angle, 0.0),
        ];
        let directors = [
            nrm(-half_angle),
            nrm(half_angle),
            nrm(half_angle),
            nrm(-half_angle),
        ];
        let sp = shape_point(0.2, -0.3);
        let f = surface_frame_at(&coords, &sp.dn_u, &directors, &sp.n_c, &sp.dn_c).unwrap();
        // one principal curvature of magnitude 1/R, the other 0
        let eig = (0.5 * (f.curvature + f.curvature.transpose())).symmetric_eigenvalues();
        let mut mags: Vec<f64> = eig.iter().map(|v| v.abs()).collect();
        mags.sort_by(f64::total_cmp);
        (mags[2] - 1.0 / radius).abs() * radius
    }

    #[test]
    fn cylinder_curvature_converges() {
        let radius = 22.9e-3;
        let coarse = cylinder_curvature_error(0.2, radius);
        let mut half_angle = 0.2;
        loop {
            let err = cylinder_curvature_error(half_angle, radius);
            if err < 0.01 {
                break;
            }
            half_angle *= 0.5;
            assert!(half_angle > 1e-4, "curvature did not converge, coarse err {coarse}");
        }
    }

    /// Single element on a sphere: both principal curvatures approach 1/R.
    #[test]
    fn sphere_curvatures_converge() {
        let radius = 10.0e-3;
        let pos = |th: f64, ph: f64| {
            Vec3::new(
                radius * th.sin() * ph.cos(),
                radius * th.sin() * ph.sin(),
                radius * th.cos(),
            )
        };
        let nrm = |th: f64, ph: f64| pos(th, ph) / radius;
        let mut span = 0.2_f64;
        loop {
            let t0 = 1.0; // polar center
            let corners = [
                (t0 - span, -span),
                (t0 + span, -span),
                (t0 + span, span),
                (t0 - span, span),
            ];
            let mids = [
                (t0, -span),
                (t0 + span, 0.0),
                (t0, span),
                (t0 - span, 0.0),
            ];
            let coords: [Vec3; 8] = core::array::from_fn(|i| {
                let (t, p) = if i < 4 { corners[i] } else { mids[i - 4] };
                pos(t, p)
            });
            let directors: [Vec3; 4] = core::array::from_fn(|i| nrm(corners[i].0, corners[i].1));
            let sp = shape_point(-0.1, 0.25);
            let f = surface_frame_at(&coords, &sp.dn_u, &directors, &sp.n_c, &sp.dn_c).unwrap();
            let eig = (0.5 * (f.curvature + f.curvature.transpose())).symmetric_eigenvalues();
            let mut mags: Vec<f64> = eig.iter().map(|v| v.abs()).collect();
            mags.sort_by(f64::total_cmp);
            // the out-of-plane eigenvalue is zero; both principal curvatures
            // should approach 1/R
            let err = ((mags[1] - 1.0 / radius).abs() * radius)
                .max((mags[2] - 1.0 / radius).abs() * radius);
            if err < 0.01 {
                break;
            }
            span *= 0.5;
            assert!(span > 1e-4, "sphere curvature did not converge");
        }
    }

    #[test]
    fn undeformed_state_recovers_identity() {
        let f = flat_frame(-0.7, 0.1);
        let zero = [Vec3::zeros(); 2];
        let (f0, f1) = deformation_gradient_parts(&zero, &Vec3::zeros(), &zero, 0.0, &f);
        assert_relative_eq!(f0, Mat3::identity(), epsilon = 1e-14);
        assert_relative_eq!(f1, -f.curvature, epsilon = 1e-14);
        let total = total_deformation_gradient(&f0, &f1, &Mat3::zeros(), 0.2, &f).unwrap();
        assert_relative_eq!(total, Mat3::identity(), epsilon = 1e-13);
    }

    #[test]
    fn translation_leaves_gradients_unchanged() {
        let f = flat_frame(0.0, 0.0);
        let zero = [Vec3::zeros(); 2];
        let (f0, f1) =
            deformation_gradient_parts(&zero, &Vec3::zeros(), &zero, 0.0, &f);
        // a rigid translation changes u but not its surface gradient
        assert_relative_eq!(f0, Mat3::identity(), epsilon = 1e-14);
        assert_relative_eq!(f1, -f.curvature, epsilon = 1e-14);
    }

    #[test]
    fn inverted_thickness_stretch_is_caught() {
        let f = flat_frame(0.0, 0.0);
        let zero = [Vec3::zeros(); 2];
        let z = 0.5e-3;
        // phi < -1/(2z) degenerates the through-thickness fiber
        let phi = -1.0 / (2.0 * z) * 1.5;
        let (f0, f1) = deformation_gradient_parts(&zero, &Vec3::zeros(), &zero, phi, &f);
        assert!(matches!(
            total_deformation_gradient(&f0, &f1, &Mat3::zeros(), z, &f),
            Err(GeometryError::NonPositiveJacobian { .. })
        ));
    }
}
