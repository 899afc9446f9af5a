//! Unstructured meshes of 8-node quadrilateral shell elements.
//!
//! Node order inside an element: four corners counter-clockwise, then the
//! four midside nodes (bottom, right, top, left). Only corner nodes carry
//! director, micro-rotation and thickness-stretch unknowns. Every element
//! belongs to a block; blocks carry the piecewise-constant magnetization.

use crate::element::shape_point;
use crate::tensor::Vec3;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ElementConn {
    pub nodes: [usize; 8],
    pub block: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct Mesh {
    pub nodes: Vec<Vec3>,
    pub elements: Vec<ElementConn>,
    /// Named probe points mapped to node indices.
    pub probes: BTreeMap<String, usize>,
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn block_count(&self) -> usize {
        self.elements.iter().map(|e| e.block + 1).max().unwrap_or(0)
    }

    /// Marks nodes that appear as element corners (and therefore carry the
    /// full 10-parameter set).
    pub fn corner_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.nodes.len()];
        for e in &self.elements {
            for &n in &e.nodes[..4] {
                flags[n] = true;
            }
        }
        flags
    }

    fn element_normal_at(&self, conn: &ElementConn, xi: f64, eta: f64) -> Vec3 {
        let sp = shape_point(xi, eta);
        let mut a1 = Vec3::zeros();
        let mut a2 = Vec3::zeros();
        for a in 0..8 {
            let p = self.nodes[conn.nodes[a]];
            a1 += p * sp.dn_u[a][0];
            a2 += p * sp.dn_u[a][1];
        }
        a1.cross(&a2).normalize()
    }

    /// Element area from the 2x2 surface rule.
    pub fn element_area(&self, conn: &ElementConn) -> f64 {
        let g = 1.0 / 3.0_f64.sqrt();
        let mut area = 0.0;
        for &(xi, eta) in &[(-g, -g), (g, -g), (g, g), (-g, g)] {
            let sp = shape_point(xi, eta);
            let mut a1 = Vec3::zeros();
            let mut a2 = Vec3::zeros();
            for a in 0..8 {
                let p = self.nodes[conn.nodes[a]];
                a1 += p * sp.dn_u[a][0];
                a2 += p * sp.dn_u[a][1];
            }
            area += a1.cross(&a2).norm();
        }
        area
    }

    pub fn surface_area(&self) -> f64 {
        self.elements.iter().map(|e| self.element_area(e)).sum()
    }

    /// Nodal directors: area-weighted average of the adjacent element
    /// normals evaluated at the corner, normalized. Midside nodes get zeros
    /// (they carry no director unknowns).
    pub fn nodal_directors(&self) -> Vec<Vec3> {
        const CORNER_XI: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
        const CORNER_ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];
        let mut acc = vec![Vec3::zeros(); self.nodes.len()];
        for e in &self.elements {
            let area = self.element_area(e);
            for c in 0..4 {
                let n = self.element_normal_at(e, CORNER_XI[c], CORNER_ETA[c]);
                acc[e.nodes[c]] += n * area;
            }
        }
        for d in acc.iter_mut() {
            let norm = d.norm();
            if norm > 0.0 {
                *d /= norm;
            }
        }
        acc
    }

    /// Nodes selected by a coordinate predicate.
    pub fn nodes_where<F: Fn(&Vec3) -> bool>(&self, pred: F) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| pred(&self.nodes[i]))
            .collect()
    }

    pub fn nearest_node(&self, p: &Vec3) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, n) in self.nodes.iter().enumerate() {
            let d = (n - p).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best
    }
}

/// Builder that welds coincident nodes across patches.
pub struct MeshBuilder {
    tol: f64,
    nodes: Vec<Vec3>,
    index: HashMap<(i64, i64, i64), usize>,
    elements: Vec<ElementConn>,
    probes: BTreeMap<String, usize>,
}

impl MeshBuilder {
    pub fn new(weld_tolerance: f64) -> Self {
        Self {
            tol: weld_tolerance,
            nodes: Vec::new(),
            index: HashMap::new(),
            elements: Vec::new(),
            probes: BTreeMap::new(),
        }
    }

    fn key_of(&self, p: &Vec3) -> (i64, i64, i64) {
        (
            (p.x / self.tol).round() as i64,
            (p.y / self.tol).round() as i64,
            (p.z / self.tol).round() as i64,
        )
    }

    /// Inserts a node, welding it onto an existing one within tolerance.
    pub fn node(&mut self, p: Vec3) -> usize {
        let key = self.key_of(&p);
        for dx in -1..=1_i64 {
            for dy in -1..=1_i64 {
                for dz in -1..=1_i64 {
                    if let Some(&i) = self.index.get(&(key.0 + dx, key.1 + dy, key.2 + dz)) {
                        if (self.nodes[i] - p).norm() <= 2.0 * self.tol {
                            return i;
                        }
                    }
                }
            }
        }
        let i = self.nodes.len();
        self.nodes.push(p);
        self.index.insert(key, i);
        i
    }

    pub fn add_quad8(&mut self, pts: [Vec3; 8], block: usize) {
        let nodes = pts.map(|p| self.node(p));
        self.elements.push(ElementConn { nodes, block });
    }

    /// Adds an `nx` x `ny` structured patch of 8-node elements over the
    /// parameter square `[0,1]^2`. `map` takes parameter coordinates to
    /// physical space, `block_of` assigns a block id per element cell.
    pub fn add_structured_patch<F, B>(&mut self, nx: usize, ny: usize, map: F, block_of: B)
    where
        F: Fn(f64, f64) -> Vec3,
        B: Fn(usize, usize) -> usize,
    {
        let pt = |i: usize, j: usize| map(i as f64 / (2 * nx) as f64, j as f64 / (2 * ny) as f64);
        for e in 0..nx {
            for f in 0..ny {
                let (i0, j0) = (2 * e, 2 * f);
                let pts = [
                    pt(i0, j0),
                    pt(i0 + 2, j0),
                    pt(i0 + 2, j0 + 2),
                    pt(i0, j0 + 2),
                    pt(i0 + 1, j0),
                    pt(i0 + 2, j0 + 1),
                    pt(i0 + 1, j0 + 2),
                    pt(i0, j0 + 1),
                ];
                self.add_quad8(pts, block_of(e, f));
            }
        }
    }

    /// Registers a named probe at the node nearest to `p`; the node must lie
    /// within `tol`.
    pub fn probe(&mut self, name: &str, p: Vec3, tol: f64) -> Result<usize, String> {
        let mut best: Option<(usize, f64)> = None;
        for (i, n) in self.nodes.iter().enumerate() {
            let d = (n - p).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, d)) if d <= tol => {
                self.probes.insert(name.to_string(), i);
                Ok(i)
            }
            Some((_, d)) => Err(format!(
                "probe {name} at {p:?} misses the mesh (nearest node {d:.3e} away)"
            )),
            None => Err(format!("probe {name}: empty mesh")),
        }
    }

    pub fn build(self) -> Mesh {
        Mesh {
            nodes: self.nodes,
            elements: self.elements,
            probes: self.probes,
        }
    }
}
