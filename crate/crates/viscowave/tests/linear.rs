//! Integration tests for the linear solves and the surface norms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viscowave::field::{SurfaceField, VolumeField};
use viscowave::grid::HorizontalGrid;
use viscowave::linear::{
    check_overdetermined, compute_psi, solve_gravity_capillary, solve_navier, solve_stress,
    DataQuadruple, NavierData, SolutionTriple,
};
use viscowave::norms::{hdot_seminorm, hs_norm, split_low_high, xs_norm};
use viscowave::oracles::{forward_operator, forward_stress};
use viscowave::params::WaveParams;
use viscowave::quadrature::VerticalNodes;
use viscowave::symbols::{eval_symbols, rho_value};
use viscowave::Error;

/// Frozen regression bound for the measured operator constant of the surface
/// solve, `||eta||_{X^{s+5/2}} <= C ||data||`; observed 0.19 on the seeded
/// battery, stored with 2x headroom.
const SURFACE_OPERATOR_BOUND: f64 = 0.4;

fn setup_1d() -> (HorizontalGrid<f64>, VerticalNodes<f64>, WaveParams<f64>) {
    let grid = HorizontalGrid::new(1, 64, 16.0).unwrap();
    let nodes = VerticalNodes::new(40, 1.0);
    let params = WaveParams::new(1.0, 1.0, 1.0, 1).unwrap();
    (grid, nodes, params)
}

fn random_surface(grid: &HorizontalGrid<f64>, rng: &mut ChaCha8Rng, band: i64) -> SurfaceField<f64> {
    let mut field = SurfaceField::zeros(grid);
    for mode in 0..grid.num_modes() {
        if grid.is_nyquist(mode) {
            continue;
        }
        let k = grid.mode_k(mode);
        if k[0].abs() > band || k[1].abs() > band {
            continue;
        }
        let decay = 1.0 / (1.0 + (k[0] * k[0] + k[1] * k[1]) as f64).powf(1.5);
        field.coeffs[mode] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
    }
    // conjugate symmetry for real data
    for mode in 0..grid.num_modes() {
        if let Some(neg) = grid.negated_index(mode) {
            if neg > mode {
                let avg = (field.coeffs[mode] + field.coeffs[neg].conj()) * 0.5;
                field.coeffs[mode] = avg;
                field.coeffs[neg] = avg.conj();
            } else if neg == mode {
                field.coeffs[mode] = Complex64::new(field.coeffs[mode].re, 0.0);
            }
        }
    }
    field
}

fn random_volume(
    grid: &HorizontalGrid<f64>,
    nodes: &VerticalNodes<f64>,
    rng: &mut ChaCha8Rng,
    band: i64,
    vanish_bottom: bool,
) -> VolumeField<f64> {
    let horizontal = random_surface(grid, rng, band);
    let c: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let mut out = VolumeField::zeros(grid, nodes);
    for mode in 0..grid.num_modes() {
        let base = horizontal.coeffs[mode];
        for (node, &x) in nodes.nodes().iter().enumerate() {
            let t = x / nodes.b;
            let profile = if vanish_bottom {
                c[0] * t * t + c[1] * t * t * t + c[2] * t * (1.5 * t).sin()
            } else {
                c[0] + c[1] * t + c[2] * (1.5 * t).cos()
            };
            out.data[[mode, node]] = base * Complex64::new(profile, 0.0);
        }
    }
    out
}

fn random_compatible_data(
    grid: &HorizontalGrid<f64>,
    nodes: &VerticalNodes<f64>,
    rng: &mut ChaCha8Rng,
    n: usize,
    band: i64,
) -> DataQuadruple<f64> {
    let f: Vec<VolumeField<f64>> = (0..n).map(|_| random_volume(grid, nodes, rng, band, false)).collect();
    let g = random_volume(grid, nodes, rng, band, false);
    let mut h = random_surface(grid, rng, band);
    let k: Vec<SurfaceField<f64>> = (0..n).map(|_| random_surface(grid, rng, band)).collect();
    let gint = g.vertical_integral();
    h.set_zero_mode(gint.zero_mode());
    DataQuadruple::assemble(f, g, h, k, nodes)
}

#[test]
fn stress_solve_with_normal_load_reproduces_symbols() {
    // f = 0, g = 0, k = zeta e_n gives u_hat = zeta_hat V, p_hat = zeta_hat Q
    let (grid, nodes, params) = setup_1d();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let zeta = random_surface(&grid, &mut rng, 12);
    let zero_vol = VolumeField::zeros(&grid, &nodes);
    let f = vec![zero_vol.clone(), zero_vol.clone()];
    let k = vec![SurfaceField::zeros(&grid), zeta.clone()];
    let (u, p) = solve_stress(&f, &zero_vol, &zero_vol, &k, params.gamma, &params).unwrap();
    for mode in 0..grid.num_modes() {
        let xi = grid.frequency_at(mode);
        if grid.is_nyquist(mode) {
            continue;
        }
        let sample = eval_symbols(&xi, params.gamma, &params, nodes.nodes()).unwrap();
        let z = zeta.coeffs[mode];
        for node in 0..nodes.len() {
            let du = (u[0].data[[mode, node]] - z * sample.v_prime[node][0]).norm();
            let dn = (u[1].data[[mode, node]] - z * sample.v_n[node]).norm();
            let dp = (p.data[[mode, node]] - z * sample.q[node]).norm();
            assert!(du < 1e-11 && dn < 1e-11 && dp < 1e-11, "mode {mode} node {node}");
        }
    }
}

#[test]
fn manufactured_stress_solution_round_trip() {
    let (grid, nodes, params) = setup_1d();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let u_star: Vec<VolumeField<f64>> =
        (0..2).map(|_| random_volume(&grid, &nodes, &mut rng, 12, true)).collect();
    let p_star = random_volume(&grid, &nodes, &mut rng, 12, false);
    let (f, g, k) = forward_stress(&u_star, &p_star, &params);
    let g_dn = g.vertical_derivative();
    let (u, p) = solve_stress(&f, &g, &g_dn, &k, params.gamma, &params).unwrap();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for comp in 0..2 {
        for (a, b) in u[comp].data.iter().zip(u_star[comp].data.iter()) {
            worst = worst.max((a - b).norm());
            scale = scale.max(b.norm());
        }
    }
    for (a, b) in p.data.iter().zip(p_star.data.iter()) {
        worst = worst.max((a - b).norm());
        scale = scale.max(b.norm());
    }
    assert!(worst / scale < 1e-7, "manufactured solution recovery error {}", worst / scale);
}

#[test]
fn all_zero_data_gives_zero_solution() {
    let (grid, nodes, params) = setup_1d();
    let zero_vol = VolumeField::zeros(&grid, &nodes);
    let f = vec![zero_vol.clone(), zero_vol.clone()];
    let k = vec![SurfaceField::zeros(&grid), SurfaceField::zeros(&grid)];
    let (u, p) = solve_stress(&f, &zero_vol, &zero_vol, &k, params.gamma, &params).unwrap();
    assert!(u.iter().all(|c| c.data.iter().all(|v| v.norm() == 0.0)));
    assert!(p.data.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn psi_zero_data_and_conjugate_symmetry() {
    let (grid, nodes, params) = setup_1d();
    let zero = DataQuadruple::zeros(&grid, &nodes, 2);
    let psi = compute_psi(&zero, &params).unwrap();
    assert!(psi.coeffs.iter().all(|c| c.norm() == 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let data = random_compatible_data(&grid, &nodes, &mut rng, 2, 12);
    let psi = compute_psi(&data, &params).unwrap();
    assert!(psi.conjugate_symmetry_defect() < 1e-12);
}

#[test]
fn overdetermined_residual_vanishes_on_forward_data_and_tracks_perturbations() {
    let (grid, nodes, params) = setup_1d();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let u_star: Vec<VolumeField<f64>> =
        (0..2).map(|_| random_volume(&grid, &nodes, &mut rng, 12, true)).collect();
    let p_star = random_volume(&grid, &nodes, &mut rng, 12, false);
    let (f, g, k) = forward_stress(&u_star, &p_star, &params);
    let h = u_star[1].boundary_top();
    let data = DataQuadruple::assemble(f, g, h, k, &nodes);
    let psi = check_overdetermined(&data, &params).unwrap();
    let scale = 1.0 + data.y0_norm();
    assert!(psi.linf_coeff() / scale < 1e-7, "forward-data residual {}", psi.linf_coeff());

    // adding an incompatible single mode to h moves the residual at exactly
    // that mode by the perturbation (psi is linear with unit h-coefficient)
    let mut bumped = data.clone();
    let mode = grid.index_of([5, 0]);
    let bump = Complex64::new(0.3, -0.2);
    bumped.h.coeffs[mode] += bump;
    let psi_b = check_overdetermined(&bumped, &params).unwrap();
    assert!((psi_b.coeffs[mode] - psi.coeffs[mode] - bump).norm() < 1e-12);
}

#[test]
fn gravity_capillary_single_mode_surface_formula() {
    // data with only h supported on one mode pair: eta_hat = h_hat / rho
    let (grid, nodes, params) = setup_1d();
    let zero = DataQuadruple::zeros(&grid, &nodes, 2);
    let mut data = zero.clone();
    let mode = grid.index_of([3, 0]);
    let neg = grid.index_of([-3, 0]);
    let amp = Complex64::new(1.0, 0.5);
    data.h.coeffs[mode] = amp;
    data.h.coeffs[neg] = amp.conj();
    let data = DataQuadruple::assemble(data.f, data.g, data.h, data.k, &nodes);
    let solution = solve_gravity_capillary(&data, &params).unwrap();
    for &m in &[mode, neg] {
        let xi = grid.frequency_at(m);
        let rho = rho_value(&xi, &params).unwrap();
        let expect = data.h.coeffs[m] / rho;
        assert!(
            (solution.eta.coeffs[m] - expect).norm() < 1e-14 * expect.norm().max(1.0),
            "eta mismatch at mode {m}"
        );
    }
    // all other modes stay empty
    for m in 0..grid.num_modes() {
        if m != mode && m != neg {
            assert!(solution.eta.coeffs[m].norm() < 1e-14);
        }
    }
}

#[test]
fn gravity_capillary_is_linear() {
    let (grid, nodes, params) = setup_1d();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let d1 = random_compatible_data(&grid, &nodes, &mut rng, 2, 12);
    let d2 = random_compatible_data(&grid, &nodes, &mut rng, 2, 12);
    let (a, b) = (0.7, -1.3);
    let mut combo = d1.clone();
    combo.scale(a);
    combo.axpy(b, &d2);
    let s1 = solve_gravity_capillary(&d1, &params).unwrap();
    let s2 = solve_gravity_capillary(&d2, &params).unwrap();
    let sc = solve_gravity_capillary(&combo, &params).unwrap();
    let mut expect = s1.clone();
    expect.scale(a);
    expect.axpy(b, &s2);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for comp in 0..2 {
        for (x, y) in sc.u[comp].data.iter().zip(expect.u[comp].data.iter()) {
            worst = worst.max((x - y).norm());
            scale = scale.max(y.norm());
        }
    }
    for (x, y) in sc.eta.coeffs.iter().zip(expect.eta.coeffs.iter()) {
        worst = worst.max((x - y).norm());
        scale = scale.max(y.norm());
    }
    assert!(worst / scale < 1e-10, "linearity defect {}", worst / scale);
}

#[test]
fn real_data_round_trips_to_real_fields() {
    let (grid, nodes, params) = setup_1d();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let data = random_compatible_data(&grid, &nodes, &mut rng, 2, 12);
    let solution = solve_gravity_capillary(&data, &params).unwrap();
    let mut magnitude = 0.0f64;
    for comp in &solution.u {
        for v in comp.data.iter() {
            magnitude = magnitude.max(v.norm());
        }
    }
    for comp in &solution.u {
        assert!(comp.conjugate_symmetry_defect() < 1e-12 * magnitude.max(1.0));
        assert!(comp.max_imag_residual().unwrap() <= 1e-10 * magnitude.max(1.0));
    }
    assert!(solution.eta.max_imag_residual().unwrap() <= 1e-10 * magnitude.max(1.0));
}

#[test]
fn pressure_split_is_canonical() {
    let (grid, nodes, params) = setup_1d();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let data = random_compatible_data(&grid, &nodes, &mut rng, 2, 12);
    let solution = solve_gravity_capillary(&data, &params).unwrap();
    // p - lift(eta) = q identically by construction
    let p = solution.pressure();
    let mut q_again = p.clone();
    q_again.sub_assign(&solution.eta.lift(&nodes));
    for (a, b) in q_again.data.iter().zip(solution.q.data.iter()) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn solver_guards_reject_bad_inputs() {
    let (grid, nodes, _params) = setup_1d();
    let zero = DataQuadruple::zeros(&grid, &nodes, 2);
    // gamma = 0 rejected
    let params0 = WaveParams::new(0.0, 1.0, 1.0, 1).unwrap();
    assert!(matches!(solve_gravity_capillary(&zero, &params0), Err(Error::GammaZero)));
    // sigma = 0 with two horizontal dimensions rejected
    let params_bad = WaveParams::new(1.0, 0.0, 1.0, 2).unwrap();
    assert!(matches!(params_bad.check_solver_supported(), Err(Error::CapillaryDimension)));
    // zero-mode compatibility violation rejected with a typed error
    let params = WaveParams::new(1.0, 1.0, 1.0, 1).unwrap();
    let mut bad = zero.clone();
    bad.h.set_zero_mode(Complex64::new(1.0, 0.0));
    let bad = DataQuadruple::assemble(bad.f, bad.g, bad.h, bad.k, &nodes);
    assert!(matches!(
        solve_gravity_capillary(&bad, &params),
        Err(Error::CompatibilityViolated { .. })
    ));
}

#[test]
fn navier_zero_data_gives_zero() {
    let (grid, nodes, params) = setup_1d();
    let zero_vol = VolumeField::zeros(&grid, &nodes);
    let ndata = NavierData::assemble(
        vec![zero_vol.clone(), zero_vol.clone()],
        zero_vol.clone(),
        SurfaceField::zeros(&grid),
        vec![SurfaceField::zeros(&grid)],
    );
    let sol = solve_navier(&ndata, &params).unwrap();
    assert!(sol.u.iter().all(|c| c.data.iter().all(|v| v.norm() == 0.0)));
    assert!(sol.p.data.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn surface_operator_constant_within_frozen_bound() {
    let (measured, _) = viscowave::validation::surface_norm_regression();
    assert!(
        measured <= SURFACE_OPERATOR_BOUND,
        "operator ratio {measured} exceeds the frozen regression bound {SURFACE_OPERATOR_BOUND}"
    );
}

#[test]
fn round_trip_in_two_horizontal_dimensions() {
    let grid = HorizontalGrid::<f64>::new(2, 16, 8.0).unwrap();
    let nodes = VerticalNodes::<f64>::new(32, 1.0);
    let params = WaveParams::new(0.7, 0.5, 1.0, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let data = random_compatible_data(&grid, &nodes, &mut rng, 3, 4);
    let solution = solve_gravity_capillary(&data, &params).unwrap();
    let recovered = forward_operator(&solution, &params);
    let mut diff = recovered.clone();
    diff.axpy(-1.0, &data);
    let rel = diff.y0_norm() / data.y0_norm();
    assert!(rel < 1e-7, "2-d round trip defect {rel}");
}

#[test]
fn norm_checks_parseval_equivalence_and_derivative_bound() {
    let grid = HorizontalGrid::<f64>::new(1, 64, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let eta = random_surface(&grid, &mut rng, 24);
    // Parseval: physical L2 equals spectral l2 times the cell volumes
    let phys = eta.to_physical().unwrap();
    let dx = grid.length / grid.npts as f64;
    let phys_l2: f64 = phys.iter().map(|v| v * v * dx).sum();
    let spec_l2: f64 = eta.coeffs.iter().map(|c| c.norm_sqr() * grid.length).sum();
    assert!((phys_l2 - spec_l2).abs() <= 1e-10 * phys_l2.max(1.0));

    // one horizontal dimension: the anisotropic norm is equivalent to the
    // Sobolev norm within 2^max(1, s)
    for &s in &[0.5f64, 1.0, 2.5] {
        let xs = xs_norm(&eta, s).xs;
        let hs = hs_norm(&eta, s);
        let factor = 2.0f64.powf(s.max(1.0));
        assert!(xs <= factor * hs + 1e-12 && hs <= factor * xs + 1e-12, "s = {s}: {xs} vs {hs}");
    }

    // high-frequency split controls the Sobolev norm: ratio <= 2^(s/2 + 1)
    let s = 2.0;
    let (_, high) = split_low_high(&eta, 1.0);
    let ratio = hs_norm(&high, s) / xs_norm(&eta, s).xs.max(1e-300);
    assert!(ratio <= 2.0f64.powf(s / 2.0 + 1.0), "high-part ratio {ratio}");

    // first-derivative seminorm bound: |d1 eta|_{H^-1} <= 2 pi |eta coeffs|
    let d1 = eta.derivative(0);
    let seminorm = hdot_seminorm(&d1, -1.0, 1e-8).unwrap();
    let mu = grid.cell_measure();
    let l2: f64 = eta.coeffs.iter().map(|c| c.norm_sqr() * mu).sum::<f64>().sqrt();
    assert!(seminorm <= 2.0 * std::f64::consts::PI * l2 + 1e-12);
}

#[test]
fn zero_mode_compat_is_the_psi_zero_mode() {
    // the compatibility functional's zero mode equals h(0) - int g(0)
    let (grid, nodes, params) = setup_1d();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut data = random_compatible_data(&grid, &nodes, &mut rng, 2, 12);
    // break compatibility on purpose and watch psi(0) track it
    let bump = Complex64::new(0.25, 0.0);
    data.h.set_zero_mode(data.h.zero_mode() + bump);
    let psi = compute_psi(&data, &params).unwrap();
    assert!((psi.zero_mode() - (data.h.zero_mode() - data.g.vertical_integral().zero_mode())).norm() < 1e-12);
}

#[test]
fn solution_triple_zero_is_fixed_point_of_forward() {
    let (grid, nodes, params) = setup_1d();
    let state = SolutionTriple::zeros(&grid, &nodes, 2);
    let data = forward_operator(&state, &params);
    assert_eq!(data.y0_norm(), 0.0);
}

#[test]
fn forward_operator_matches_per_mode_hand_assembly() {
    // a single-mode state, pushed through the full forward operator, agrees
    // with the direct per-mode assembly of the same differential action
    let (grid, nodes, params) = setup_1d();
    let mut state = SolutionTriple::zeros(&grid, &nodes, 2);
    let kvec = [4i64, 0];
    let mode = grid.index_of(kvec);
    let neg = grid.index_of([-4, 0]);
    for (node, &x) in nodes.nodes().iter().enumerate() {
        let u1 = Complex64::new(0.3 * x * x, 0.1 * x);
        let u2 = Complex64::new(-0.2 * x * x * x, 0.05 * x * x);
        let q = Complex64::new(0.7 - 0.4 * x, 0.2);
        state.u[0].data[[mode, node]] = u1;
        state.u[0].data[[neg, node]] = u1.conj();
        state.u[1].data[[mode, node]] = u2;
        state.u[1].data[[neg, node]] = u2.conj();
        state.q.data[[mode, node]] = q;
        state.q.data[[neg, node]] = q.conj();
    }
    let data = forward_operator(&state, &params);
    let u_hat: Vec<Vec<Complex64>> = (0..2).map(|c| state.u[c].mode_profile(mode)).collect();
    let p_hat = state.q.mode_profile(mode); // eta = 0, so p = q on this mode
    let (f_direct, g_direct, k_direct) =
        viscowave::oracles::forward_single_mode(&grid, &nodes, kvec, &u_hat, &p_hat, params.gamma);
    for node in 0..nodes.len() {
        for comp in 0..2 {
            let got = data.f[comp].data[[mode, node]];
            assert!(
                (got - f_direct[comp][node]).norm() < 1e-10,
                "f component {comp} node {node}: {got} vs {}",
                f_direct[comp][node]
            );
        }
        assert!((data.g.data[[mode, node]] - g_direct[node]).norm() < 1e-10);
    }
    for comp in 0..2 {
        assert!((data.k[comp].coeffs[mode] - k_direct[comp]).norm() < 1e-10);
    }
}
