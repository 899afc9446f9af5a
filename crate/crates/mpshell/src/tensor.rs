//! Fixed-size 3-vector / 3x3-tensor algebra and the 9-component matrix form
//! used for fourth-order tensors.
//!
//! All fourth-order objects are stored as 9x9 matrices acting on the
//! vectorized form of a second-order tensor. The component order is fixed
//! crate-wide to `{11, 22, 33, 12, 21, 13, 31, 23, 32}` so that constitutive
//! tangents and element B-matrices can be multiplied without any bookkeeping.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Vec9 = SVector<f64, 9>;
/// Fourth-order tensor in 9x9 matrix form, `C[(ij),(kl)] = C_ijkl`.
pub type Tensor4 = SMatrix<f64, 9, 9>;

/// Row/column order of the 9-component vectorization (0-based index pairs).
pub const COMPONENT_ORDER: [(usize, usize); 9] = [
    (0, 0),
    (1, 1),
    (2, 2),
    (0, 1),
    (1, 0),
    (0, 2),
    (2, 0),
    (1, 2),
    (2, 1),
];

/// Vectorize a second-order tensor in the crate component order.
#[inline]
pub fn vec9(a: &Mat3) -> Vec9 {
    let mut v = Vec9::zeros();
    for (r, &(i, j)) in COMPONENT_ORDER.iter().enumerate() {
        v[r] = a[(i, j)];
    }
    v
}

/// Inverse of [`vec9`].
#[inline]
pub fn unvec9(v: &Vec9) -> Mat3 {
    let mut a = Mat3::zeros();
    for (r, &(i, j)) in COMPONENT_ORDER.iter().enumerate() {
        a[(i, j)] = v[r];
    }
    a
}

/// Skew-symmetric tensor of the axial vector `v`: `skew(v) * w = v x w`.
#[inline]
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Axial vector of a skew-symmetric tensor; inverse of [`skew`].
#[inline]
pub fn axial(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Dyadic product, `(P (x) Q)_ijkl = P_ij Q_kl`.
pub fn otimes(p: &Mat3, q: &Mat3) -> Tensor4 {
    let vp = vec9(p);
    let vq = vec9(q);
    vp * vq.transpose()
}

/// Upper product, `(P (.) Q)_ijkl = P_ik Q_jl`. `odot(I, I)` is the identity
/// on second-order tensors.
pub fn odot(p: &Mat3, q: &Mat3) -> Tensor4 {
    let mut c = Tensor4::zeros();
    for (r, &(i, j)) in COMPONENT_ORDER.iter().enumerate() {
        for (s, &(k, l)) in COMPONENT_ORDER.iter().enumerate() {
            c[(r, s)] = p[(i, k)] * q[(j, l)];
        }
    }
    c
}

/// Crossed product, `(P [x] Q)_ijkl = P_il Q_kj`. `boxtimes(I, I)` maps a
/// tensor onto its transpose.
pub fn boxtimes(p: &Mat3, q: &Mat3) -> Tensor4 {
    let mut c = Tensor4::zeros();
    for (r, &(i, j)) in COMPONENT_ORDER.iter().enumerate() {
        for (s, &(k, l)) in COMPONENT_ORDER.iter().enumerate() {
            c[(r, s)] = p[(i, l)] * q[(k, j)];
        }
    }
    c
}

/// Double contraction of a fourth-order tensor with a second-order tensor,
/// `(C : A)_ij = C_ijkl A_kl`.
#[inline]
pub fn contract(c: &Tensor4, a: &Mat3) -> Mat3 {
    unvec9(&(c * vec9(a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_mat3(rng: &mut StdRng) -> Mat3 {
        Mat3::from_fn(|_, _| rng.gen_range(-1.0..1.0))
    }

    fn rand_vec3(rng: &mut StdRng) -> Vec3 {
        Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0))
    }

    /// Quadruple-loop reference for the three products.
    fn product_oracle(kind: u8, p: &Mat3, q: &Mat3, a: &Mat3) -> Mat3 {
        let mut out = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let c = match kind {
                            0 => p[(i, j)] * q[(k, l)],
                            1 => p[(i, k)] * q[(j, l)],
                            _ => p[(i, l)] * q[(k, j)],
                        };
                        out[(i, j)] += c * a[(k, l)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn skew_of_zero_is_zero() {
        assert_eq!(skew(&Vec3::zeros()), Mat3::zeros());
    }

    #[test]
    fn skew_of_e3() {
        let m = skew(&Vec3::z());
        let expected = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(m, expected);
    }

    #[test]
    fn skew_matches_cross_product() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..100 {
            let v = rand_vec3(&mut rng);
            let w = rand_vec3(&mut rng);
            assert_relative_eq!(skew(&v) * w, v.cross(&w), epsilon = 1e-14);
            // skew annihilates its own axis
            assert_relative_eq!(skew(&v) * v, Vec3::zeros(), epsilon = 1e-14);
        }
    }

    #[test]
    fn axial_inverts_skew() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..20 {
            let v = rand_vec3(&mut rng);
            assert_relative_eq!(axial(&skew(&v)), v, epsilon = 1e-15);
        }
    }

    #[test]
    fn vec9_of_identity() {
        let v = vec9(&Mat3::identity());
        assert_eq!(
            v.as_slice(),
            &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn odot_identity_acts_as_identity() {
        let mut rng = StdRng::seed_from_u64(3);
        let id = Mat3::identity();
        for _ in 0..20 {
            let a = rand_mat3(&mut rng);
            assert_relative_eq!(contract(&odot(&id, &id), &a), a, epsilon = 1e-14);
            assert_relative_eq!(
                contract(&boxtimes(&id, &id), &a),
                a.transpose(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn products_match_index_loop_oracle() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..30 {
            let p = rand_mat3(&mut rng);
            let q = rand_mat3(&mut rng);
            let a = rand_mat3(&mut rng);
            assert_relative_eq!(
                contract(&otimes(&p, &q), &a),
                product_oracle(0, &p, &q, &a),
                epsilon = 1e-13
            );
            assert_relative_eq!(
                contract(&odot(&p, &q), &a),
                product_oracle(1, &p, &q, &a),
                epsilon = 1e-13
            );
            assert_relative_eq!(
                contract(&boxtimes(&p, &q), &a),
                product_oracle(2, &p, &q, &a),
                epsilon = 1e-13
            );
            // (P (x) Q) : A = (Q : A) P
            let qa: f64 = (q.transpose() * a).trace();
            assert_relative_eq!(
                contract(&otimes(&p, &q), &a),
                p * qa,
                epsilon = 1e-13
            );
        }
    }

    proptest! {
        #[test]
        fn vec9_round_trips(entries in proptest::array::uniform9(-1e6f64..1e6)) {
            let v = Vec9::from_row_slice(&entries);
            let back = vec9(&unvec9(&v));
            prop_assert_eq!(v, back);
        }

        #[test]
        fn skew_is_linear(a in proptest::array::uniform3(-1e3f64..1e3),
                          b in proptest::array::uniform3(-1e3f64..1e3),
                          s in -10.0f64..10.0) {
            let va = Vec3::from_row_slice(&a);
            let vb = Vec3::from_row_slice(&b);
            let lhs = skew(&(va * s + vb));
            let rhs = skew(&va) * s + skew(&vb);
            prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
        }
    }
}
