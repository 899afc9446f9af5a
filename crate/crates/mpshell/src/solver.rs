//! Global solution machinery: DOF numbering, Dirichlet constraints, sparse
//! unsymmetric assembly of condensed element systems, and load-stepped
//! Newton iteration with the mixed additive/multiplicative update.

use crate::constitutive::MaterialParams;
use crate::element::{
    self, condense_eas, Condensation, EasState, ElementError, ElementRef, ElementState,
    MagneticLoad, DOF_ALPHA, DOF_V,
};
use crate::kinematics::{lambda_tensor, update_rotation, KinematicsError};
use crate::magnetics::MagneticProgram;
use crate::mesh::Mesh;
use crate::tensor::Vec3;
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Field {
    U,
    W,
    Theta,
    Phi,
}

/// Homogeneous kinematic constraints.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
pub enum Constraint {
    /// Fixes every unknown carried by the listed nodes.
    Clamp { nodes: Vec<usize> },
    /// Mirror symmetry about the plane with unit normal along `axis`:
    /// normal displacement components vanish and the micro-rotation axis is
    /// forced parallel to the plane normal.
    SymmetryPlane { axis: usize, nodes: Vec<usize> },
    /// Pins a single component of a single field at one node.
    Pin {
        node: usize,
        field: Field,
        component: usize,
    },
    /// Suppresses the thickness stretch everywhere (comparison runs).
    LockPhi,
}

/// Node-wise global DOF numbers; `None` marks an absent or constrained slot.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub u: Vec<[Option<usize>; 3]>,
    pub w: Vec<[Option<usize>; 3]>,
    pub theta: Vec<[Option<usize>; 3]>,
    pub phi: Vec<Option<usize>>,
    pub n_dofs: usize,
}

impl DofMap {
    pub fn build(mesh: &Mesh, constraints: &[Constraint]) -> Result<Self, SolveError> {
        let n = mesh.node_count();
        let corner = mesh.corner_flags();
        // existence flags
        let mut u = vec![[true; 3]; n];
        let mut w: Vec<[bool; 3]> = corner.iter().map(|&c| [c; 3]).collect();
        let mut theta = w.clone();
        let mut phi: Vec<bool> = corner.clone();

        let fix_node = |u: &mut Vec<[bool; 3]>,
                            w: &mut Vec<[bool; 3]>,
                            theta: &mut Vec<[bool; 3]>,
                            phi: &mut Vec<bool>,
                            node: usize| {
            u[node] = [false; 3];
            w[node] = [false; 3];
            theta[node] = [false; 3];
            phi[node] = false;
        };

        for c in constraints {
            match c {
                Constraint::Clamp { nodes } => {
                    for &nd in nodes {
                        if nd >= n {
                            return Err(SolveError::Constraint(format!(
                                "clamp references node {nd} outside the mesh"
                            )));
                        }
                        fix_node(&mut u, &mut w, &mut theta, &mut phi, nd);
                    }
                }
                Constraint::SymmetryPlane { axis, nodes } => {
                    if *axis > 2 {
                        return Err(SolveError::Constraint(format!(
                            "symmetry plane axis {axis} out of range"
                        )));
                    }
                    for &nd in nodes {
                        if nd >= n {
                            return Err(SolveError::Constraint(format!(
                                "symmetry plane references node {nd} outside the mesh"
                            )));
                        }
                        u[nd][*axis] = false;
                        if corner[nd] {
                            w[nd][*axis] = false;
                            for k in 0..3 {
                                if k != *axis {
                                    theta[nd][k] = false;
                                }
                            }
                        }
                    }
                }
                Constraint::Pin {
                    node,
                    field,
                    component,
                } => {
                    if *node >= n || *component > 2 {
                        return Err(SolveError::Constraint(format!(
                            "pin at node {node} component {component} is out of range"
                        )));
                    }
                    let exists = match field {
                        Field::U => true,
                        Field::W | Field::Theta => corner[*node],
                        Field::Phi => corner[*node] && *component == 0,
                    };
                    if !exists {
                        return Err(SolveError::Constraint(format!(
                            "pin of {field:?}[{component}] at node {node}: slot does not exist"
                        )));
                    }
                    match field {
                        Field::U => u[*node][*component] = false,
                        Field::W => w[*node][*component] = false,
                        Field::Theta => theta[*node][*component] = false,
                        Field::Phi => phi[*node] = false,
                    }
                }
                Constraint::LockPhi => {
                    for p in phi.iter_mut() {
                        *p = false;
                    }
                }
            }
        }

        let mut map = DofMap {
            u: vec![[None; 3]; n],
            w: vec![[None; 3]; n],
            theta: vec![[None; 3]; n],
            phi: vec![None; n],
            n_dofs: 0,
        };
        let mut next = 0usize;
        for nd in 0..n {
            for k in 0..3 {
                if u[nd][k] {
                    map.u[nd][k] = Some(next);
                    next += 1;
                }
            }
            for k in 0..3 {
                if w[nd][k] {
                    map.w[nd][k] = Some(next);
                    next += 1;
                }
            }
            for k in 0..3 {
                if theta[nd][k] {
                    map.theta[nd][k] = Some(next);
                    next += 1;
                }
            }
            if phi[nd] {
                map.phi[nd] = Some(next);
                next += 1;
            }
        }
        map.n_dofs = next;
        Ok(map)
    }
}

/// Global unknowns. Displacement-like fields update additively, the
/// micro-rotation multiplicatively, enhancement modes element-locally.
#[derive(Debug, Clone)]
pub struct SystemState {
    pub u: Vec<Vec3>,
    pub w: Vec<Vec3>,
    pub theta: Vec<Vec3>,
    pub phi: Vec<f64>,
    pub eas: Vec<EasState>,
    pub load_factor: f64,
}

impl SystemState {
    pub fn zero(mesh: &Mesh) -> Self {
        let n = mesh.node_count();
        Self {
            u: vec![Vec3::zeros(); n],
            w: vec![Vec3::zeros(); n],
            theta: vec![Vec3::zeros(); n],
            phi: vec![0.0; n],
            eas: vec![EasState::default(); mesh.element_count()],
            load_factor: 0.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("constraint error: {0}")]
    Constraint(String),
    #[error("model error: {0}")]
    Model(String),
    #[error(
        "load stepping failed: step size {step_size:.3e} fell below the minimum (last residual {residual:.3e})"
    )]
    NonConvergence { step_size: f64, residual: f64 },
}

/// Reasons a single load step gets cut.
#[derive(Debug, Error)]
pub enum StepFailure {
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error("singular linear system")]
    Singular,
    #[error("iteration limit reached, residual {0:.6e}")]
    IterationLimit(f64),
    #[error("rotation update: {0}")]
    Rotation(#[from] KinematicsError),
}

/// A ready-to-solve shell problem.
pub struct ShellModel {
    pub mesh: Mesh,
    pub material: MaterialParams,
    pub thickness: f64,
    pub program: MagneticProgram,
    pub constraints: Vec<Constraint>,
    pub elements: Vec<ElementRef>,
    pub dofs: DofMap,
    /// Absolute convergence floor `mu * h * sqrt(area)`.
    pub scale_floor: f64,
}

impl ShellModel {
    pub fn new(
        mesh: Mesh,
        material: MaterialParams,
        thickness: f64,
        program: MagneticProgram,
        constraints: Vec<Constraint>,
    ) -> Result<Self, SolveError> {
        if program.block_remnant.len() < mesh.block_count() {
            return Err(SolveError::Model(format!(
                "{} blocks in the mesh but only {} remnant vectors",
                mesh.block_count(),
                program.block_remnant.len()
            )));
        }
        let directors = mesh.nodal_directors();
        let mut elements = Vec::with_capacity(mesh.element_count());
        for conn in &mesh.elements {
            let coords: [Vec3; 8] = core::array::from_fn(|i| mesh.nodes[conn.nodes[i]]);
            let dirs: [Vec3; 4] = core::array::from_fn(|i| directors[conn.nodes[i]]);
            let elref = ElementRef::new(coords, dirs, thickness)
                .map_err(|e| SolveError::Model(format!("element setup: {e}")))?;
            elements.push(elref);
        }
        let dofs = DofMap::build(&mesh, &constraints)?;
        let scale_floor = material.mu * thickness * mesh.surface_area().sqrt();
        Ok(Self {
            mesh,
            material,
            thickness,
            program,
            constraints,
            elements,
            dofs,
            scale_floor,
        })
    }

    pub fn gather_state(&self, st: &SystemState, e: usize) -> ElementState {
        let conn = &self.mesh.elements[e];
        ElementState {
            u: core::array::from_fn(|i| st.u[conn.nodes[i]]),
            w: core::array::from_fn(|i| st.w[conn.nodes[i]]),
            theta: core::array::from_fn(|i| st.theta[conn.nodes[i]]),
            phi: core::array::from_fn(|i| st.phi[conn.nodes[i]]),
            alpha: st.eas[e].alpha,
        }
    }

    pub fn element_load(&self, e: usize, load_factor: f64) -> MagneticLoad {
        MagneticLoad {
            remnant: self.program.remnant_of_block(self.mesh.elements[e].block),
            external: self.program.external_at(load_factor),
        }
    }

    /// Local (52-wide) to global free-DOF map of one element.
    pub fn local_to_global(&self, e: usize) -> [Option<usize>; DOF_V] {
        let conn = &self.mesh.elements[e];
        let mut map = [None; DOF_V];
        for i in 0..3 {
            for a in 0..8 {
                map[element::dof_u(i, a)] = self.dofs.u[conn.nodes[a]][i];
            }
            for a in 0..4 {
                map[element::dof_w(i, a)] = self.dofs.w[conn.nodes[a]][i];
                map[element::dof_theta(i, a)] = self.dofs.theta[conn.nodes[a]][i];
            }
        }
        for a in 0..4 {
            map[element::dof_phi(a)] = self.dofs.phi[conn.nodes[a]];
        }
        map
    }
}

/// Right-multiplies the micro-rotation columns of an element tangent by
/// `Lambda(theta)^{-1}` per corner node. The element tangent is the
/// derivative with respect to additive pseudo-vector increments; the solver
/// iterates in composition increments (the update multiplies rotations), and
/// `d theta / d increment = Lambda^{-1}` at zero increment. With this column
/// transform the Newton loop is exactly consistent with the multiplicative
/// update and keeps its quadratic rate at large rotations.
fn composition_column_transform(
    thetas: &[crate::tensor::Vec3; 4],
    k: &mut element::FullMatrix,
) -> Result<(), StepFailure> {
    for a in 0..4 {
        let lam = lambda_tensor(&thetas[a]);
        let lam_inv = lam.try_inverse().ok_or(StepFailure::Singular)?;
        for row in 0..element::DOF_TOTAL {
            let old = [
                k[(row, element::dof_theta(0, a))],
                k[(row, element::dof_theta(1, a))],
                k[(row, element::dof_theta(2, a))],
            ];
            for p in 0..3 {
                k[(row, element::dof_theta(p, a))] = old[0] * lam_inv[(0, p)]
                    + old[1] * lam_inv[(1, p)]
                    + old[2] * lam_inv[(2, p)];
            }
        }
    }
    Ok(())
}

/// Assembled global system at a given state.
pub struct Assembled {
    pub k: Option<SparseColMat<usize, f64>>,
    pub residual: Vec<f64>,
    pub ext_norm: f64,
    pub energy: f64,
    pub condensations: Vec<Condensation>,
}

/// Assembles the condensed residual and (optionally) tangent over the free
/// DOFs. Dirichlet rows and columns are eliminated by never numbering them.
pub fn assemble(
    model: &ShellModel,
    state: &SystemState,
    want_tangent: bool,
) -> Result<Assembled, StepFailure> {
    let n = model.dofs.n_dofs;
    let mut residual = vec![0.0; n];
    let mut ext = vec![0.0; n];
    let mut energy = 0.0;
    let mut condensations = Vec::with_capacity(model.elements.len());
    let mut triplets: Vec<Triplet<usize, usize, f64>> = Vec::new();
    if want_tangent {
        triplets.reserve(model.elements.len() * DOF_V * DOF_V / 2);
    }

    for (e, elref) in model.elements.iter().enumerate() {
        let est = model.gather_state(state, e);
        let load = model.element_load(e, state.load_factor);
        let out = element::element_system(elref, &est, &model.material, Some(&load), want_tangent)?;
        energy += out.energy;
        let l2g = model.local_to_global(e);
        if want_tangent {
            let mut k = out.tangent.expect("tangent requested");
            composition_column_transform(&est.theta, &mut k)?;
            let cond = condense_eas(&k, &out.residual)?;
            for l in 0..DOF_V {
                if let Some(g) = l2g[l] {
                    residual[g] += cond.r_cond[l];
                    ext[g] += out.external[l];
                    for m in 0..DOF_V {
                        if let Some(h) = l2g[m] {
                            let v = cond.k_cond[(l, m)];
                            if v != 0.0 {
                                triplets.push(Triplet::new(g, h, v));
                            }
                        }
                    }
                }
            }
            condensations.push(cond);
        } else {
            // without a tangent the enhancement block cannot be condensed;
            // report the raw kinematic residual (callers use this for norms
            // at converged states where the alpha residual is already zero)
            for l in 0..DOF_V {
                if let Some(g) = l2g[l] {
                    residual[g] += out.residual[l];
                    ext[g] += out.external[l];
                }
            }
        }
    }

    let k = if want_tangent {
        Some(
            SparseColMat::try_new_from_triplets(n, n, &triplets)
                .map_err(|_| StepFailure::Singular)?,
        )
    } else {
        None
    };
    let ext_norm = ext.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(Assembled {
        k,
        residual,
        ext_norm,
        energy,
        condensations,
    })
}

/// Direct sparse LU solve of the (generally unsymmetric) system `K x = rhs`.
pub fn linear_solve(k: &SparseColMat<usize, f64>, rhs: &[f64]) -> Result<Vec<f64>, StepFailure> {
    let n = rhs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lu = k.sp_lu().map_err(|_| StepFailure::Singular)?;
    let b = faer::Mat::from_fn(n, 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(StepFailure::Singular);
    }
    Ok(out)
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Applies a Newton increment: additive for `u`, `w`, `phi`, multiplicative
/// for `theta`, element-local recovery for the enhancement modes.
pub fn apply_increment(
    model: &ShellModel,
    state: &mut SystemState,
    delta: &[f64],
    condensations: &[Condensation],
) -> Result<(), StepFailure> {
    for nd in 0..model.mesh.node_count() {
        for k in 0..3 {
            if let Some(g) = model.dofs.u[nd][k] {
                state.u[nd][k] += delta[g];
            }
            if let Some(g) = model.dofs.w[nd][k] {
                state.w[nd][k] += delta[g];
            }
        }
        let mut dtheta = Vec3::zeros();
        let mut has_theta = false;
        for k in 0..3 {
            if let Some(g) = model.dofs.theta[nd][k] {
                dtheta[k] = delta[g];
                has_theta = true;
            }
        }
        if has_theta && dtheta != Vec3::zeros() {
            state.theta[nd] = update_rotation(&state.theta[nd], &dtheta)?;
        }
        if let Some(g) = model.dofs.phi[nd] {
            state.phi[nd] += delta[g];
        }
    }
    for (e, cond) in condensations.iter().enumerate() {
        let l2g = model.local_to_global(e);
        let mut dv = element::VVector::zeros();
        for l in 0..DOF_V {
            if let Some(g) = l2g[l] {
                dv[l] = delta[g];
            }
        }
        let da = cond.recover_alpha(&dv);
        state.eas[e].alpha += da;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Number of uniform increments the load path is divided into.
    pub n_steps: usize,
    /// Relative residual tolerance against `max(|F_ext|, mu h sqrt(A))`.
    pub tol_rel: f64,
    pub max_iterations: usize,
    /// A step is "fast" when it converges within this many iterations; two
    /// fast steps in a row double the step size (capped at the schedule).
    pub fast_iterations: usize,
    /// Abort when adaptive halving pushes the step below
    /// `initial step / min_step_divisor`.
    pub min_step_divisor: f64,
    /// Assemble the enhancement modes into the global system instead of
    /// condensing them (cross-checking).
    pub coupled_eas: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            n_steps: 50,
            tol_rel: 1e-8,
            max_iterations: 25,
            fast_iterations: 5,
            min_step_divisor: 256.0,
            coupled_eas: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    pub load_factor: f64,
    pub iterations: usize,
    pub residual_norm: f64,
}

#[derive(Debug, Clone)]
pub struct IterRecord {
    pub step: usize,
    pub iteration: usize,
    pub load_factor: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Default)]
pub struct SolveReport {
    pub steps: Vec<StepRecord>,
    pub iterations: Vec<IterRecord>,
}

impl SolveReport {
    /// Line-oriented iteration log.
    pub fn log_lines(&self) -> Vec<String> {
        self.iterations
            .iter()
            .map(|r| {
                format!(
                    "step {:4}  iter {:2}  load {:10.6}  residual {:14.6e}",
                    r.step, r.iteration, r.load_factor, r.residual_norm
                )
            })
            .collect()
    }
}

/// Newton iteration at a fixed load factor. Returns the converged record or
/// the reason the step must be cut.
pub fn newton_at_factor(
    model: &ShellModel,
    state: &mut SystemState,
    load_factor: f64,
    opts: &SolverOptions,
    step_id: usize,
    report: &mut SolveReport,
) -> Result<StepRecord, StepFailure> {
    state.load_factor = load_factor;
    if opts.coupled_eas {
        return newton_at_factor_coupled(model, state, load_factor, opts, step_id, report);
    }
    for iter in 0..=opts.max_iterations {
        let asm = assemble(model, state, true)?;
        let rn = vec_norm(&asm.residual);
        report.iterations.push(IterRecord {
            step: step_id,
            iteration: iter,
            load_factor,
            residual_norm: rn,
        });
        let tol = opts.tol_rel * asm.ext_norm.max(model.scale_floor);
        if rn <= tol {
            for eas in state.eas.iter_mut() {
                eas.alpha_converged = eas.alpha;
            }
            let rec = StepRecord {
                step: step_id,
                load_factor,
                iterations: iter,
                residual_norm: rn,
            };
            report.steps.push(rec.clone());
            return Ok(rec);
        }
        if iter == opts.max_iterations {
            return Err(StepFailure::IterationLimit(rn));
        }
        let k = asm.k.as_ref().expect("tangent assembled");
        let rhs: Vec<f64> = asm.residual.iter().map(|v| -v).collect();
        let delta = linear_solve(k, &rhs)?;
        apply_increment(model, state, &delta, &asm.condensations)?;
    }
    unreachable!()
}

/// Variant of [`newton_at_factor`] that carries the enhancement modes as
/// global unknowns (no condensation); mathematically equivalent at every
/// iterate.
fn newton_at_factor_coupled(
    model: &ShellModel,
    state: &mut SystemState,
    load_factor: f64,
    opts: &SolverOptions,
    step_id: usize,
    report: &mut SolveReport,
) -> Result<StepRecord, StepFailure> {
    let n_free = model.dofs.n_dofs;
    let n_total = n_free + DOF_ALPHA * model.elements.len();
    for iter in 0..=opts.max_iterations {
        let mut residual = vec![0.0; n_total];
        let mut ext = vec![0.0; n_free];
        let mut triplets: Vec<Triplet<usize, usize, f64>> = Vec::new();
        for (e, elref) in model.elements.iter().enumerate() {
            let est = model.gather_state(state, e);
            let load = model.element_load(e, load_factor);
            let out = element::element_system(elref, &est, &model.material, Some(&load), true)?;
            let mut k = out.tangent.unwrap();
            composition_column_transform(&est.theta, &mut k)?;
            let l2g = model.local_to_global(e);
            let gidx = |l: usize| -> Option<usize> {
                if l < DOF_V {
                    l2g[l]
                } else {
                    Some(n_free + DOF_ALPHA * e + (l - DOF_V))
                }
            };
            for l in 0..DOF_V + DOF_ALPHA {
                if let Some(g) = gidx(l) {
                    residual[g] += out.residual[l];
                    if l < DOF_V {
                        ext[g] += out.external[l];
                    }
                    for m in 0..DOF_V + DOF_ALPHA {
                        if let Some(h) = gidx(m) {
                            let v = k[(l, m)];
                            if v != 0.0 {
                                triplets.push(Triplet::new(g, h, v));
                            }
                        }
                    }
                }
            }
        }
        // convergence measured on the kinematic residual, the alpha residual
        // is part of the same vector
        let rn = vec_norm(&residual);
        report.iterations.push(IterRecord {
            step: step_id,
            iteration: iter,
            load_factor,
            residual_norm: rn,
        });
        let tol = opts.tol_rel * vec_norm(&ext).max(model.scale_floor);
        if rn <= tol {
            for eas in state.eas.iter_mut() {
                eas.alpha_converged = eas.alpha;
            }
            let rec = StepRecord {
                step: step_id,
                load_factor,
                iterations: iter,
                residual_norm: rn,
            };
            report.steps.push(rec.clone());
            return Ok(rec);
        }
        if iter == opts.max_iterations {
            return Err(StepFailure::IterationLimit(rn));
        }
        let k = SparseColMat::try_new_from_triplets(n_total, n_total, &triplets)
            .map_err(|_| StepFailure::Singular)?;
        let rhs: Vec<f64> = residual.iter().map(|v| -v).collect();
        let delta = linear_solve(&k, &rhs)?;
        // kinematic update
        for nd in 0..model.mesh.node_count() {
            for kk in 0..3 {
                if let Some(g) = model.dofs.u[nd][kk] {
                    state.u[nd][kk] += delta[g];
                }
                if let Some(g) = model.dofs.w[nd][kk] {
                    state.w[nd][kk] += delta[g];
                }
            }
            let mut dtheta = Vec3::zeros();
            for kk in 0..3 {
                if let Some(g) = model.dofs.theta[nd][kk] {
                    dtheta[kk] = delta[g];
                }
            }
            if dtheta != Vec3::zeros() {
                state.theta[nd] = update_rotation(&state.theta[nd], &dtheta)?;
            }
            if let Some(g) = model.dofs.phi[nd] {
                state.phi[nd] += delta[g];
            }
        }
        for e in 0..model.elements.len() {
            for m in 0..DOF_ALPHA {
                state.eas[e].alpha[m] += delta[n_free + DOF_ALPHA * e + m];
            }
        }
    }
    unreachable!()
}

/// Load-stepped solve from the current load factor up to `target`, with
/// adaptive halving on failure and doubling after two fast steps. Invokes
/// `on_step` after every accepted step (streaming output).
pub fn newton_solve<F>(
    model: &ShellModel,
    state: &mut SystemState,
    target: f64,
    opts: &SolverOptions,
    mut on_step: F,
) -> Result<SolveReport, SolveError>
where
    F: FnMut(&ShellModel, &SystemState, &StepRecord),
{
    let mut report = SolveReport::default();
    let schedule_step = (target - state.load_factor) / opts.n_steps.max(1) as f64;
    if schedule_step <= 0.0 {
        return Ok(report);
    }
    let min_step = schedule_step / opts.min_step_divisor;
    let mut step_size = schedule_step;
    let mut fast_run = 0usize;
    let mut step_id = 0usize;
    let mut last_residual = f64::NAN;

    while state.load_factor < target - 1e-12 {
        let trial = (state.load_factor + step_size).min(target);
        let snapshot = state.clone();
        match newton_at_factor(model, state, trial, opts, step_id, &mut report) {
            Ok(rec) => {
                on_step(model, state, &rec);
                step_id += 1;
                if rec.iterations <= opts.fast_iterations {
                    fast_run += 1;
                    if fast_run >= 2 {
                        step_size = (step_size * 2.0).min(schedule_step);
                        fast_run = 0;
                    }
                } else {
                    fast_run = 0;
                }
            }
            Err(failure) => {
                if let StepFailure::IterationLimit(rn) = failure {
                    last_residual = rn;
                }
                *state = snapshot;
                step_size *= 0.5;
                if step_size < min_step {
                    return Err(SolveError::NonConvergence {
                        step_size,
                        residual: last_residual,
                    });
                }
            }
        }
    }
    Ok(report)
}
