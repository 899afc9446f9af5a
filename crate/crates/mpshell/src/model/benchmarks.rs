//! Built-in benchmark geometries with their magnetization patterns,
//! boundary conditions and probe points. All generators work in mm and
//! produce SI models.
//!
//! Quarter symmetry is used wherever the full structure admits it; the
//! magnetization patterns are mirror-equivariant so a quarter model
//! reproduces the full response (cross-checked in the test suite).
//!
//! Where the published record fixes dimensions only graphically (the hollow
//! cross block sizes), the generator exposes them as parameters; the
//! defaults are approximate figure readings.

use super::{BuiltModel, ConfigError, KPA, MM, MT};
use crate::constitutive::MaterialParams;
use crate::magnetics::MagneticProgram;
use crate::mesh::MeshBuilder;
use crate::solver::{Constraint, Field};
use crate::tensor::Vec3;
use std::collections::BTreeMap;
use std::f64::consts::PI;

type Params = BTreeMap<String, f64>;

fn get(params: &Params, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn get_usize(params: &Params, key: &str, default: usize) -> usize {
    params
        .get(key)
        .map(|v| v.round().max(1.0) as usize)
        .unwrap_or(default)
}

fn material(lambda_kpa: f64, mu_kpa: f64, thickness: f64) -> MaterialParams {
    let mu = mu_kpa * KPA;
    MaterialParams::new(lambda_kpa * KPA, mu, 0.1 * mu, 0.1 * thickness)
        .expect("benchmark material is valid")
}

pub fn benchmark_names() -> &'static [&'static str] {
    &[
        "strip",
        "hollow_cross",
        "cross",
        "h_structure",
        "cylinder",
        "gripper",
    ]
}

/// Builds a named benchmark model. Unknown parameters are ignored;
/// dimensions are mm, flux densities mT.
pub fn generate_benchmark(name: &str, params: &Params) -> Result<BuiltModel, ConfigError> {
    match name {
        "strip" => strip(params),
        "hollow_cross" => hollow_cross(params),
        "cross" => cross(params),
        "h_structure" => h_structure(params),
        "cylinder" => cylinder(params),
        "gripper" => gripper(params),
        other => Err(ConfigError::Invalid(format!(
            "unknown benchmark `{other}` (available: {})",
            benchmark_names().join(", ")
        ))),
    }
}

/// Cantilever strip, clamped at `x = 0`, remnant flux along the length,
/// external flux transverse. Mesh density defaults follow the converged
/// counts for the four studied aspect ratios.
fn strip(params: &Params) -> Result<BuiltModel, ConfigError> {
    let length = get(params, "length_mm", 11.0);
    let thickness = get(params, "thickness_mm", 1.1);
    let width = get(params, "width_mm", 5.0);
    if length <= 0.0 || thickness <= 0.0 || width <= 0.0 {
        return Err(ConfigError::Invalid(
            "strip: length_mm, thickness_mm and width_mm must be positive".into(),
        ));
    }
    let ar = length / thickness;
    let default_n = if ar <= 14.0 {
        10
    } else if ar <= 19.0 {
        15
    } else if ar <= 30.0 {
        30
    } else {
        40
    };
    let nx = get_usize(params, "elements_length", default_n);
    let ny = get_usize(params, "elements_width", 2);
    let remnant = get(params, "remnant_mt", 143.0);
    let bext = get(params, "external_max_mt", 50.0);

    let mut b = MeshBuilder::new(1e-9);
    b.add_structured_patch(
        nx,
        ny,
        |s, t| Vec3::new(s * length * MM, t * width * MM, 0.0),
        |_, _| 0,
    );
    b.probe("tip", Vec3::new(length * MM, 0.5 * width * MM, 0.0), 1e-6)
        .map_err(ConfigError::Invalid)?;
    let mesh = b.build();
    let clamped = mesh.nodes_where(|p| p.x.abs() < 1e-9);
    Ok(BuiltModel {
        name: "strip".into(),
        thickness: thickness * MM,
        material: material(7300.0, 303.0, thickness * MM),
        program: MagneticProgram {
            block_remnant: vec![Vec3::x() * remnant * MT],
            external_direction: Vec3::z(),
            external_max: bext * MT,
        },
        constraints: vec![Constraint::Clamp { nodes: clamped }],
        mesh,
    })
}

/// Thin cross of nine welded square blocks, quarter model. The arms along
/// `x` are magnetized outward, the arms along `y` inward, so opposite arm
/// pairs fold in opposite senses under a transverse flux; the center block
/// is unmagnetized. The vertical datum pins `u3` at the `y`-arm tip.
fn cross(params: &Params) -> Result<BuiltModel, ConfigError> {
    let block = get(params, "block_mm", 6.0);
    let thickness = get(params, "thickness_mm", 0.9);
    let npb = get_usize(params, "elements_per_block", 6);
    let remnant = get(params, "remnant_mt", 94.0) * MT;
    let bext = get(params, "external_max_mt", 40.0);
    if block <= 0.0 || thickness <= 0.0 {
        return Err(ConfigError::Invalid(
            "cross: block_mm and thickness_mm must be positive".into(),
        ));
    }
    let h = 0.5 * block * MM; // half block
    let tip = 2.5 * block * MM; // arm tip coordinate (center at origin)

    // blocks: 0 center, 1..2 x-arm, 3..4 y-arm
    let mut b = MeshBuilder::new(1e-9);
    let half = npb / 2;
    // center quarter [0,h]^2
    b.add_structured_patch(
        half.max(1),
        half.max(1),
        |s, t| Vec3::new(s * h, t * h, 0.0),
        |_, _| 0,
    );
    // x-arm [h, tip] x [0, h]
    b.add_structured_patch(
        2 * npb,
        half.max(1),
        |s, t| Vec3::new(h + s * (tip - h), t * h, 0.0),
        |e, _| if e < npb { 1 } else { 2 },
    );
    // y-arm [0, h] x [h, tip]
    b.add_structured_patch(
        half.max(1),
        2 * npb,
        |s, t| Vec3::new(s * h, h + t * (tip - h), 0.0),
        |_, f| if f < npb { 3 } else { 4 },
    );
    b.probe("A", Vec3::new(tip, 0.0, 0.0), 1e-6)
        .map_err(ConfigError::Invalid)?;
    b.probe("C", Vec3::zeros(), 1e-6).map_err(ConfigError::Invalid)?;
    let d = b
        .probe("D", Vec3::new(0.0, tip, 0.0), 1e-6)
        .map_err(ConfigError::Invalid)?;
    let mesh = b.build();

    let sym_x = mesh.nodes_where(|p| p.x.abs() < 1e-9);
    let sym_y = mesh.nodes_where(|p| p.y.abs() < 1e-9);
    Ok(BuiltModel {
        name: "cross".into(),
        thickness: thickness * MM,
        material: material(3250.0, 135.0, thickness * MM),
        program: MagneticProgram {
            block_remnant: vec![
                Vec3::zeros(),
                Vec3::x() * remnant,
                Vec3::x() * remnant,
                -Vec3::y() * remnant,
                -Vec3::y() * remnant,
            ],
            external_direction: Vec3::z(),
            external_max: bext * MT,
        },
        constraints: vec![
            Constraint::SymmetryPlane { axis: 0, nodes: sym_x },
            Constraint::SymmetryPlane { axis: 1, nodes: sym_y },
            Constraint::Pin {
                node: d,
                field: Field::U,
                component: 2,
            },
        ],
        mesh,
    })
}

/// H-shaped structure of fifteen square blocks (two five-block uprights
/// joined by a five-block crossbar), quarter model. All blocks are
/// magnetized toward their local center line, so the whole structure curls
/// toward `+z` under the (downward) external flux. Datum pins `u3` at the
/// structure center.
fn h_structure(params: &Params) -> Result<BuiltModel, ConfigError> {
    let block = get(params, "block_mm", 6.0);
    let thickness = get(params, "thickness_mm", 0.9);
    let npb = get_usize(params, "elements_per_block", 4);
    let remnant = get(params, "remnant_mt", 94.0) * MT;
    let bext = get(params, "external_max_mt", 50.0);
    let hb = 0.5 * block * MM;
    let bar_end = 2.5 * block * MM; // crossbar half-length
    let upright_x = 3.5 * block * MM; // outer edge of the upright
    let upright_y = 2.5 * block * MM; // upright half-height

    // blocks: 0 crossbar center, 1 crossbar inner, 2 crossbar outer,
    // 3 junction, 4 upright inner, 5 upright outer
    let mut b = MeshBuilder::new(1e-9);
    let half = (npb / 2).max(1);
    // crossbar [0, bar_end] x [0, hb]
    b.add_structured_patch(
        5 * npb / 2,
        half,
        |s, t| Vec3::new(s * bar_end, t * hb, 0.0),
        |e, _| {
            if e < half {
                0
            } else if e < half + npb {
                1
            } else {
                2
            }
        },
    );
    // upright [bar_end, upright_x] x [0, upright_y]
    b.add_structured_patch(
        npb,
        5 * npb / 2,
        |s, t| Vec3::new(bar_end + s * (upright_x - bar_end), t * upright_y, 0.0),
        |_, f| {
            if f < half {
                3
            } else if f < half + npb {
                4
            } else {
                5
            }
        },
    );
    b.probe("A", Vec3::new(upright_x, upright_y, 0.0), 1e-6)
        .map_err(ConfigError::Invalid)?;
    let d = b
        .probe("D", Vec3::zeros(), 1e-6)
        .map_err(ConfigError::Invalid)?;
    let mesh = b.build();

    let sym_x = mesh.nodes_where(|p| p.x.abs() < 1e-9);
    let sym_y = mesh.nodes_where(|p| p.y.abs() < 1e-9);
    Ok(BuiltModel {
        name: "h_structure".into(),
        thickness: thickness * MM,
        material: material(3250.0, 135.0, thickness * MM),
        program: MagneticProgram {
            block_remnant: vec![
                Vec3::zeros(),
                -Vec3::x() * remnant,
                -Vec3::x() * remnant,
                -Vec3::x() * remnant,
                -Vec3::y() * remnant,
                -Vec3::y() * remnant,
            ],
            external_direction: -Vec3::z(),
            external_max: bext * MT,
        },
        constraints: vec![
            Constraint::SymmetryPlane { axis: 0, nodes: sym_x },
            Constraint::SymmetryPlane { axis: 1, nodes: sym_y },
            Constraint::Pin {
                node: d,
                field: Field::U,
                component: 2,
            },
        ],
        mesh,
    })
}

/// Hollow cross: a closed band tracing a plus-sign outline, built from
/// trapezoid-like rectangular pieces (tips, sides, corners), quarter model.
/// The band is magnetized outward along each arm (diagonally at the
/// corners); under a downward flux the arms fold down, and with the tips
/// held the central ring rises. Dimensions default to approximate figure
/// readings and are fully parameterized.
fn hollow_cross(params: &Params) -> Result<BuiltModel, ConfigError> {
    let span = get(params, "span_mm", 34.0);
    let arm = get(params, "arm_width_mm", 12.0);
    let band = get(params, "band_mm", 2.5);
    let thickness = get(params, "thickness_mm", 0.41);
    let npb = get_usize(params, "elements_per_block", 6);
    let remnant = get(params, "remnant_mt", 102.0) * MT;
    let bext = get(params, "external_max_mt", 200.0);
    if span <= arm || arm <= 2.0 * band || band <= 0.0 {
        return Err(ConfigError::Invalid(
            "hollow_cross: need span_mm > arm_width_mm > 2 band_mm > 0".into(),
        ));
    }
    let s2 = 0.5 * span * MM;
    let a2 = 0.5 * arm * MM;
    let bb = band * MM;
    let side_len = s2 - bb - a2; // length of one arm side run
    let half = (npb / 2).max(1);
    let n_side = (((side_len / bb) * npb as f64 / 2.0).round() as usize).max(1);

    // blocks: 0 x-tip, 1 x-side outer, 2 x-side inner, 3 corner,
    // 4 y-side inner, 5 y-side outer, 6 y-tip
    let mut b = MeshBuilder::new(1e-9);
    // x tip piece [s2-bb, s2] x [0, a2]
    b.add_structured_patch(
        npb,
        half,
        |s, t| Vec3::new(s2 - bb + s * bb, t * a2, 0.0),
        |_, _| 0,
    );
    // x side piece [a2, s2-bb] x [a2-bb, a2]
    b.add_structured_patch(
        2 * n_side,
        npb,
        |s, t| Vec3::new(a2 + s * side_len, a2 - bb + t * bb, 0.0),
        |e, _| if e < n_side { 2 } else { 1 },
    );
    // corner piece [a2-bb, a2]^2
    b.add_structured_patch(
        npb,
        npb,
        |s, t| Vec3::new(a2 - bb + s * bb, a2 - bb + t * bb, 0.0),
        |_, _| 3,
    );
    // y side piece [a2-bb, a2] x [a2, s2-bb]
    b.add_structured_patch(
        npb,
        2 * n_side,
        |s, t| Vec3::new(a2 - bb + s * bb, a2 + t * side_len, 0.0),
        |_, f| if f < n_side { 4 } else { 5 },
    );
    // y tip piece [0, a2] x [s2-bb, s2]
    b.add_structured_patch(
        half,
        npb,
        |s, t| Vec3::new(s * a2, s2 - bb + t * bb, 0.0),
        |_, _| 6,
    );
    let a_node = b
        .probe("A", Vec3::new(s2, 0.0, 0.0), 1e-6)
        .map_err(ConfigError::Invalid)?;
    b.probe("C", Vec3::new(a2, a2, 0.0), 1e-6)
        .map_err(ConfigError::Invalid)?;
    b.probe("E", Vec3::new(a2 - bb, a2 - bb, 0.0), 1e-6)
        .map_err(ConfigError::Invalid)?;
    let g_node = b
        .probe("G", Vec3::new(0.0, s2, 0.0), 1e-6)
        .map_err(ConfigError::Invalid)?;
    let mesh = b.build();

    let sym_x = mesh.nodes_where(|p| p.x.abs() < 1e-9);
    let sym_y = mesh.nodes_where(|p| p.y.abs() < 1e-9);
    let diag = std::f64::consts::FRAC_1_SQRT_2;
    Ok(BuiltModel {
        name: "hollow_cross".into(),
        thickness: thickness * MM,
        material: material(7300.0, 303.0, thickness * MM),
        program: MagneticProgram {
            block_remnant: vec![
                Vec3::x() * remnant,
                Vec3::x() * remnant,
                Vec3::x() * remnant,
                Vec3::new(diag, diag, 0.0) * remnant,
                Vec3::y() * remnant,
                Vec3::y() * remnant,
                Vec3::y() * remnant,
            ],
            external_direction: -Vec3::z(),
            external_max: bext * MT,
        },
        constraints: vec![
            Constraint::SymmetryPlane { axis: 0, nodes: sym_x },
            Constraint::SymmetryPlane { axis: 1, nodes: sym_y },
            Constraint::Pin {
                node: a_node,
                field: Field::U,
                component: 2,
            },
            Constraint::Pin {
                node: g_node,
                field: Field::U,
                component: 2,
            },
        ],
        mesh,
    })
}

/// Cylindrical shell (magnetic pump), quarter model: half the circumference
/// (the `x >= 0` half) and half the length, clamped at the end `y = 0`.
/// The remnant flux is circumferential with a positive `z`-component,
/// flipping sign across the `x = 0` plane of the full structure.
fn cylinder(params: &Params) -> Result<BuiltModel, ConfigError> {
    let block = get(params, "block_mm", 6.0);
    let n_blocks_circ = get_usize(params, "blocks_circumference", 24);
    let n_blocks_len = get_usize(params, "blocks_length", 20);
    let thickness = get(params, "thickness_mm", 0.9);
    let npb = get_usize(params, "elements_per_block", 2);
    let remnant = get(params, "remnant_mt", 94.0) * MT;
    let bext = get(params, "external_max_mt", 150.0);

    let radius = n_blocks_circ as f64 * block * MM / (2.0 * PI);
    let length = n_blocks_len as f64 * block * MM;
    let half_len = 0.5 * length;
    // half circumference: angle from -pi/2 to +pi/2 measured from +x toward +z
    let nc = npb * n_blocks_circ / 2;
    let nl = npb * n_blocks_len / 2;
    let blocks_c = n_blocks_circ / 2;
    let blocks_l = n_blocks_len / 2;

    let mut b = MeshBuilder::new(1e-9);
    b.add_structured_patch(
        nc,
        nl,
        |s, t| {
            let psi = -0.5 * PI + s * PI;
            Vec3::new(radius * psi.cos(), t * half_len, radius * psi.sin())
        },
        |e, f| (e / npb) * blocks_l + (f / npb),
    );
    b.probe("A", Vec3::new(0.0, half_len, radius), 1e-6)
        .map_err(ConfigError::Invalid)?;
    b.probe("B", Vec3::new(radius, half_len, 0.0), 1e-6)
        .map_err(ConfigError::Invalid)?;
    let sq = std::f64::consts::FRAC_1_SQRT_2;
    b.probe("C", Vec3::new(radius * sq, half_len, radius * sq), 1e-6)
        .map_err(ConfigError::Invalid)?;
    let mesh = b.build();

    // block remnants from the block-center angle
    let mut block_remnant = vec![Vec3::zeros(); blocks_c * blocks_l];
    for e in 0..blocks_c {
        let s_mid = (e as f64 + 0.5) / blocks_c as f64;
        let psi = -0.5 * PI + s_mid * PI;
        let tangent = Vec3::new(-psi.sin(), 0.0, psi.cos());
        for f in 0..blocks_l {
            block_remnant[e * blocks_l + f] = tangent * remnant;
        }
    }

    let clamp = mesh.nodes_where(|p| p.y.abs() < 1e-9);
    let sym_mid = mesh.nodes_where(|p| (p.y - half_len).abs() < 1e-9);
    let sym_x = mesh.nodes_where(|p| p.x.abs() < 1e-9);
    Ok(BuiltModel {
        name: "cylinder".into(),
        thickness: thickness * MM,
        material: material(3250.0, 135.0, thickness * MM),
        program: MagneticProgram {
            block_remnant,
            external_direction: Vec3::z(),
            external_max: bext * MT,
        },
        constraints: vec![
            Constraint::Clamp { nodes: clamp },
            Constraint::SymmetryPlane { axis: 1, nodes: sym_mid },
            Constraint::SymmetryPlane { axis: 0, nodes: sym_x },
        ],
        mesh,
    })
}

/// One arm of the spherical gripper: a spherical rectangle clamped along its
/// topmost arc. The remnant flux follows the meridian tangent, flipping
/// sign at the equator (a block boundary).
fn gripper(params: &Params) -> Result<BuiltModel, ConfigError> {
    let arc_deg = get(params, "arm_arc_deg", 30.0);
    let arc_len = get(params, "equator_arc_mm", 12.0);
    let meridian_len = get(params, "meridian_mm", 60.0);
    let top_angle = get(params, "top_angle_deg", 15.0) * PI / 180.0;
    let thickness = get(params, "thickness_mm", 0.9);
    let n_az = get_usize(params, "elements_azimuth", 6);
    let n_po = get_usize(params, "elements_meridian", 30);
    let remnant = get(params, "remnant_mt", 94.0) * MT;
    let bext = get(params, "external_max_mt", 10.0);

    let radius = arc_len * MM / (arc_deg * PI / 180.0);
    let polar_span = meridian_len * MM / radius; // radians along the meridian
    let half_az = 0.5 * arc_deg * PI / 180.0;
    let pos = |polar: f64, az: f64| {
        Vec3::new(
            radius * polar.sin() * az.cos(),
            radius * polar.sin() * az.sin(),
            radius * polar.cos(),
        )
    };

    // blocks: meridian strips of equal angular extent, two across
    let block_arc = 15.0_f64.to_radians();
    let blocks_po = (polar_span / block_arc).round().max(1.0) as usize;
    let mut b = MeshBuilder::new(1e-9);
    b.add_structured_patch(
        n_az,
        n_po,
        |s, t| {
            let az = -half_az + s * 2.0 * half_az;
            let polar = top_angle + t * polar_span;
            pos(polar, az)
        },
        |e, f| {
            let strip = (f * blocks_po / n_po).min(blocks_po - 1);
            (e * 2 / n_az.max(1)).min(1) * blocks_po + strip
        },
    );
    b.probe("B", pos(0.5 * PI, 0.0), 1e-6)
        .map_err(ConfigError::Invalid)?;
    b.probe("C", pos(top_angle + polar_span, 0.0), 1e-6)
        .map_err(ConfigError::Invalid)?;
    let mesh = b.build();

    // meridian tangent at block centers; sign flips below the equator
    let mut block_remnant = vec![Vec3::zeros(); 2 * blocks_po];
    for az_half in 0..2 {
        let az = -half_az + (az_half as f64 + 0.5) * half_az;
        for s in 0..blocks_po {
            let polar = top_angle + (s as f64 + 0.5) / blocks_po as f64 * polar_span;
            let e_phi = Vec3::new(
                polar.cos() * az.cos(),
                polar.cos() * az.sin(),
                -polar.sin(),
            );
            let sign = if polar < 0.5 * PI { 1.0 } else { -1.0 };
            block_remnant[az_half * blocks_po + s] = e_phi * (sign * remnant);
        }
    }

    let clamp_radius = radius * top_angle.sin();
    let clamp_z = radius * top_angle.cos();
    let clamp = mesh.nodes_where(|p| {
        (p.z - clamp_z).abs() < 1e-8 && (p.x * p.x + p.y * p.y).sqrt() <= clamp_radius + 1e-8
    });
    if clamp.is_empty() {
        return Err(ConfigError::Invalid("gripper: empty clamp edge".into()));
    }
    Ok(BuiltModel {
        name: "gripper".into(),
        thickness: thickness * MM,
        material: material(3250.0, 135.0, thickness * MM),
        program: MagneticProgram {
            block_remnant,
            external_direction: Vec3::z(),
            external_max: bext * MT,
        },
        constraints: vec![Constraint::Clamp { nodes: clamp }],
        mesh,
    })
}
