use mpshell::constitutive::MaterialParams;
use mpshell::magnetics::MagneticProgram;
use mpshell::mesh::MeshBuilder;
use mpshell::solver::*;
use mpshell::tensor::Vec3;

fn run(nx: usize, ny: usize, tip_only: bool) -> f64 {
    let (lx, ly) = (11.0e-3, 5.0e-3);
    let mut b = MeshBuilder::new(1e-9);
    b.add_structured_patch(
        nx,
        ny,
        |s, t| Vec3::new(s * lx, t * ly, 0.0),
        |e, _| if tip_only && e + 1 == nx { 1 } else { 0 },
    );
    let mesh = b.build();
    let clamp = mesh.nodes_where(|p| p.x.abs() < 1e-12);
    let tip = mesh.nodes_where(|p| (p.x - lx).abs() < 1e-9 && (p.y - 0.5 * ly).abs() < 1e-9)[0];
    let remnants = if tip_only {
        vec![Vec3::zeros(), Vec3::x() * 0.143]
    } else {
        vec![Vec3::x() * 0.143]
    };
    let model = ShellModel::new(
        mesh,
        MaterialParams::new(7.3e6, 303e3, 30.3e3, 1.1e-4).unwrap(),
        1.1e-3,
        MagneticProgram {
            block_remnant: remnants,
            external_direction: Vec3::z(),
            external_max: 0.5e-3,
        },
        vec![Constraint::Clamp { nodes: clamp }],
    )
    .unwrap();
    let mut state = SystemState::zero(&model.mesh);
    let opts = SolverOptions {
        n_steps: 5,
        tol_rel: 1e-12,
        ..SolverOptions::default()
    };
    newton_solve(&model, &mut state, 1.0, &opts, |_, _, _| {}).unwrap();
    state.u[tip].z
}

#[test]
fn convergence_diag() {
    // tip couple: magnetized last column only; moment constant along the
    // strip, deflection quadratic
    println!("tip couple (last column magnetized):");
    for (nx, ny) in [(10, 2), (20, 4), (40, 8)] {
        println!("  {}x{}: {:.8e}", nx, ny, run(nx, ny, true));
    }
    println!("distributed couple:");
    for (nx, ny) in [(10, 2), (20, 4), (40, 8)] {
        println!("  {}x{}: {:.8e}", nx, ny, run(nx, ny, false));
    }
    panic!("diag only");
}
