//! Geometrically nonlinear finite elements for thin hard-magnetic soft shells.
//!
//! The library implements a 10-parameter micropolar shell model: every node
//! carries a mid-surface displacement `u`, a director displacement `w`, a
//! micro-rotation pseudo-vector `theta` and a thickness stretch `phi`. The
//! micro-rotation makes the stress tensor asymmetric, which is what an
//! external magnetic flux acting on a permanently magnetized (hard-magnetic)
//! elastomer produces: the loading is a distributed body couple rather than a
//! body force.
//!
//! Crate layout:
//! - [`tensor`]: small fixed-size tensor algebra and the 9-component
//!   vectorization used by the constitutive tangents,
//! - [`kinematics`]: rotation-vector parameterization, its tangent maps and
//!   the multiplicative rotation update,
//! - [`constitutive`]: micropolar neo-Hookean law with analytic tangents,
//! - [`geometry`]: discrete mid-surface differential geometry,
//! - [`mesh`]: unstructured 8-node quadrilateral shell meshes,
//! - [`magnetics`]: remnant flux push-forward, body couple, follower load,
//! - [`element`]: the 8-node enhanced-assumed-strain shell element,
//! - [`solver`]: assembly, constraints and load-stepped Newton iteration,
//! - [`model`]: configuration, built-in benchmark generators and result I/O.

pub mod constitutive;
pub mod element;
pub mod geometry;
pub mod kinematics;
pub mod magnetics;
pub mod mesh;
pub mod model;
pub mod solver;
pub mod tensor;
