//! Gap-field laws of the resonant eigenmodes: boundary values, continuity
//! across the interface, the -2/delta(x1) vertical-gradient law, the
//! C/(eps + lambda x1^2) profile bound, and monopole flatness.

use helmres2d::fields::{
    boundary_means, eigenmode_field, gap_center_gradient, gap_profile, normalize_mode,
};
use helmres2d::geometry::{discretize, make_pair, auto_node_count, CurveSpec};
use helmres2d::layerpot::{eval_gradient, eval_potential};
use helmres2d::resonance::{
    find_resonance, leading_order_omega1, leading_order_omega2, MediumParams, ModeClass,
};
use helmres2d::statics;
use num_complex::Complex64;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

struct Modes {
    mesh: helmres2d::Mesh,
    medium: MediumParams,
    dipole: helmres2d::ResonanceResult,
    monopole: helmres2d::ResonanceResult,
}

fn both_modes(eps: f64, delta: f64) -> Modes {
    let pair = make_pair(&CurveSpec::Disk { radius: 1.0 }, eps).unwrap();
    let n = auto_node_count(eps, pair.lambda);
    let mesh = discretize(&pair, n).unwrap();
    let medium = MediumParams::new(1.0, 1.0, delta, delta).unwrap();
    let zs = statics::solve_zeta(&mesh, c(statics::K_REF), c(statics::K_REF)).unwrap();
    let alpha = statics::compute_alpha(&mesh, &zs);
    let area = mesh.curves[0].area;
    let w1 = leading_order_omega1(&medium, area).unwrap();
    let w2 = leading_order_omega2(&medium, &alpha, area).unwrap();
    let monopole = find_resonance(&mesh, &medium, w1).unwrap();
    let dipole = find_resonance(&mesh, &medium, w2).unwrap();
    assert_eq!(monopole.mode, ModeClass::Monopole);
    assert_eq!(dipole.mode, ModeClass::Dipole);
    Modes { mesh, medium, dipole, monopole }
}

#[test]
fn eigenmode_boundary_values_and_continuity() {
    let m = both_modes(1e-2, 1e-4);

    // dipole boundary means are +-c with |c| = O(1); monopole means agree
    let md = boundary_means(&m.mesh, &m.medium, &m.dipole);
    assert!(
        (md[0] + md[1]).norm() <= 1e-2 * md[0].norm(),
        "dipole means not antisymmetric: {md:?}"
    );
    let mm = boundary_means(&m.mesh, &m.medium, &m.monopole);
    assert!(
        (mm[0] - mm[1]).norm() <= 1e-2 * mm[0].norm(),
        "monopole means differ: {mm:?}"
    );

    // continuity across the boundary at paired offsets +-1e-3 along nu,
    // at nodes away from the gap (inside it the field itself varies on the
    // eps scale, so +-1e-3 offsets straddle an O(1) genuine variation)
    let cmesh = &m.mesh.curves[0];
    let far_nodes: Vec<usize> = (0..cmesh.n).filter(|&j| cmesh.nodes[j][1] > 1.0).collect();
    assert!(far_nodes.len() >= 3);
    let picks = [
        far_nodes[0],
        far_nodes[far_nodes.len() / 2],
        far_nodes[far_nodes.len() - 1],
    ];
    for &j in &picks {
        let x = cmesh.nodes[j];
        let nu = cmesh.normal[j];
        let h = 1e-3;
        let pts = [
            [x[0] + h * nu[0], x[1] + h * nu[1]],
            [x[0] - h * nu[0], x[1] - h * nu[1]],
        ];
        let u = eigenmode_field(&m.mesh, &m.medium, &m.dipole, &pts).unwrap();
        let rel = (u[0] - u[1]).norm() / u[0].norm().max(1e-6);
        assert!(rel <= 1e-2, "node {j}: continuity mismatch {rel:.2e}");
    }
}

#[test]
fn dipole_vertical_gradient_law() {
    // |d_{x2} u_2 (0,0)| = (2 + o(1)) / eps after +-1 normalization;
    // at eps = 1e-2 within 15% of 200
    let eps = 1e-2;
    let m = both_modes(eps, 1e-4);
    let (_, psi) = normalize_mode(&m.mesh, &m.medium, &m.dipole);
    let k = m.medium.k(m.dipole.omega);
    let g = eval_gradient(&m.mesh, &psi, Some(k), [0.0, 0.0]).unwrap();
    let vertical = g[1].norm();
    let target = 2.0 / eps;
    assert!(
        (vertical - target).abs() <= 0.15 * target,
        "vertical gradient {vertical:.2} vs 2/eps = {target:.2}"
    );
    // the horizontal component is comparatively negligible at the center
    assert!(g[0].norm() <= 0.05 * vertical);
    // helper agrees
    let gc = gap_center_gradient(&m.mesh, &m.medium, &m.dipole).unwrap();
    assert!((gc - (g[0].norm_sqr() + g[1].norm_sqr()).sqrt()).abs() <= 1e-10 * gc);
}

#[test]
fn dipole_profile_bounded_by_gap_law() {
    // |grad u_2(x1, mid)| <= C / (eps + lambda x1^2) with one fitted C,
    // pointwise violation <= 5%
    let m = both_modes(1e-2, 1e-4);
    let profile = gap_profile(&m.mesh, &m.medium, &m.dipole, 40).unwrap();
    let mids = &profile.samples[..profile.n_midline];
    let deltas = &profile.delta_of_x1[..profile.n_midline];
    // fit C as the max of |grad| * delta (the law saturates at the center)
    let mut cfit = 0.0f64;
    for (s, d) in mids.iter().zip(deltas) {
        let g = (s.grad[0].norm_sqr() + s.grad[1].norm_sqr()).sqrt();
        cfit = cfit.max(g * d);
    }
    for (s, d) in mids.iter().zip(deltas) {
        let g = (s.grad[0].norm_sqr() + s.grad[1].norm_sqr()).sqrt();
        assert!(
            g <= 1.05 * cfit / d,
            "profile bound violated at x1 = {:.4}: {g:.3} vs {:.3}",
            s.x1,
            cfit / d
        );
    }
    // all samples lie strictly inside the narrow region
    let gap = m.mesh.gap.as_ref().unwrap();
    for s in &profile.samples {
        assert!(s.x1.abs() < 2.0 * gap.r0);
        let d = helmres2d::gap_width(gap, s.x1).unwrap();
        assert!(s.x2.abs() < d, "sample ({}, {}) outside the gap", s.x1, s.x2);
    }
}

#[test]
fn monopole_gap_field_is_flat() {
    // max gap |grad u_1| <= 0.1 max gap |grad u_2| at eps = 1e-3
    let m = both_modes(1e-3, 1e-4);
    let pd = gap_profile(&m.mesh, &m.medium, &m.dipole, 24).unwrap();
    let pm = gap_profile(&m.mesh, &m.medium, &m.monopole, 24).unwrap();
    let gmax = |p: &helmres2d::fields::GapProfile| {
        p.samples
            .iter()
            .map(|s| (s.grad[0].norm_sqr() + s.grad[1].norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    };
    let gd = gmax(&pd);
    let gm = gmax(&pm);
    assert!(gm <= 0.1 * gd, "monopole max gradient {gm:.2e} vs dipole {gd:.2e}");
}

#[test]
fn gradient_consistent_with_finite_differences_midgap() {
    let m = both_modes(1e-2, 1e-4);
    let (_, psi) = normalize_mode(&m.mesh, &m.medium, &m.dipole);
    let k = m.medium.k(m.dipole.omega);
    let x = [0.013, 0.0];
    let h = 1e-2 / 20.0;
    let g = eval_gradient(&m.mesh, &psi, Some(k), x).unwrap();
    let fdx = (eval_potential(&m.mesh, &psi, Some(k), [x[0] + h, x[1]]).unwrap()
        - eval_potential(&m.mesh, &psi, Some(k), [x[0] - h, x[1]]).unwrap())
        / (2.0 * h);
    let fdy = (eval_potential(&m.mesh, &psi, Some(k), [x[0], x[1] + h]).unwrap()
        - eval_potential(&m.mesh, &psi, Some(k), [x[0], x[1] - h]).unwrap())
        / (2.0 * h);
    let gn = (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
    // central differences carry an O(h^2 u''') error of their own on the
    // eps-scale field, so the agreement gate is 1e-3 relative
    assert!((g[0] - fdx).norm() <= 1e-3 * gn, "d/dx1 mismatch");
    assert!((g[1] - fdy).norm() <= 1e-3 * gn, "d/dx2 mismatch");
}
