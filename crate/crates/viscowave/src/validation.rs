//! Acceptance checks, runnable from the test suite or the CLI.
//!
//! Each check returns a [`CriterionReport`] with the measured quantity and
//! its threshold; `run_all` executes the full battery with fixed seeds so
//! repeated runs are bit-reproducible.

use crate::field::{SurfaceField, VolumeField};
use crate::frequency_ode::{solve_coupled, FrequencyBvp};
use crate::grid::HorizontalGrid;
use crate::linear::{
    compute_w, solve_gravity_capillary, solve_navier, DataQuadruple, NavierData, SolutionTriple,
};
use crate::nonlinear::{nonlinear_residual, solve_traveling_wave, ForcingSpec, IterationConfig};
use crate::norms::dual_weight_integral;
use crate::oracles::{
    collocate_bvp_richardson, expm_numeric, forward_operator, forward_stress, OracleConfig,
};
use crate::params::{Frequency, WaveParams};
use crate::quadrature::VerticalNodes;
use crate::symbols::{
    eval_m, eval_y, m_asymptotic_infty, m_asymptotic_zero, m_kappa_zero, matrix_m, matrix_n,
    system_matrix_from_reparam, Reparam,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    /// Worst observed value of the measured quantity.
    pub observed: f64,
    /// The limit it must stay under (or inside, for ratio windows).
    pub threshold: f64,
    pub detail: String,
}

impl CriterionReport {
    fn new(id: usize, name: &'static str, pass: bool, observed: f64, threshold: f64, detail: String) -> Self {
        Self { id, name, pass, observed, threshold, detail }
    }

    pub fn one_line(&self) -> String {
        format!(
            "criterion {:2} [{}] {} observed {:.3e} vs threshold {:.3e} ({})",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.threshold,
            self.detail
        )
    }
}

/// Run every acceptance criterion in order.
pub fn run_all() -> Vec<CriterionReport> {
    vec![
        symbol_correctness(),
        sign_condition(),
        zero_asymptotics(),
        infinity_asymptotics(),
        kappa_zero_closed_form(),
        per_frequency_bvp(),
        linear_round_trip(),
        navier_round_trip(),
        weight_integral(),
        linearization_bound(),
        nonlinear_solve(),
        rigidity(),
    ]
}

/// 1. Closed-form `Y` against the numeric matrix exponential plus solve.
pub fn symbol_correctness() -> CriterionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE01);
    let b = 1.0f64;
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let r = rng.gen_range(1e-6..30.0f64).max(1e-6);
        let kappa = rng.gen_range(-2.0..2.0f64);
        let x_n = rng.gen_range(0.0..1.0f64);
        let rp = Reparam::from_r_kappa(r, kappa);
        let closed = eval_y(&rp, x_n, b).unwrap();
        // oracle: expm for exp(bA) and exp(x_n A), LU for B^{-1} e4
        let a = system_matrix_from_reparam(&rp);
        let exp_b = expm_numeric(&a.scale(Complex64::new(b, 0.0)));
        let bmat = matrix_m::<f64>().add(&matrix_n::<f64>(r).matmul(&exp_b));
        let e4 = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let y0 = bmat.solve(&e4).unwrap();
        let exp_x = expm_numeric(&a.scale(Complex64::new(x_n, 0.0)));
        let oracle = exp_x.matvec(&y0);
        let mut diff2 = 0.0;
        let mut scale2 = 0.0;
        for j in 0..4 {
            diff2 += (closed[j] - oracle[j]).norm_sqr();
            scale2 += oracle[j].norm_sqr();
        }
        let rel = (diff2 / scale2.max(1e-300)).sqrt();
        if rel > worst {
            worst = rel;
        }
    }
    CriterionReport::new(
        1,
        "symbol correctness (closed form vs expm oracle)",
        worst <= 1e-9,
        worst,
        1e-9,
        "max relative vector error over 500 random (r, kappa, x_n)".into(),
    )
}

/// 2. `Re m < 0` off zero frequency and `Re m(0) = 0` exactly.
pub fn sign_condition() -> CriterionReport {
    let mut worst = f64::NEG_INFINITY;
    let mut pass = true;
    let mut detail = String::new();
    for bi in [0.5f64, 1.0, 2.0] {
        for gamma in [-2.0f64, -1.0, 1.0, 2.0] {
            for k in 0..31 {
                let mag = 10f64.powf(-3.0 + 6.0 * k as f64 / 30.0);
                for &angle in &[0.0f64, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2] {
                    let xi = Frequency::new_2d(mag * angle.cos(), mag * angle.sin());
                    let m = eval_m(&xi, gamma, bi).unwrap();
                    if m.re >= 0.0 {
                        pass = false;
                        detail = format!("Re m = {} at |xi| = {mag}, gamma = {gamma}, b = {bi}", m.re);
                    }
                    if m.re > worst {
                        worst = m.re;
                    }
                }
            }
            let m0 = eval_m(&Frequency::new_1d(0.0), gamma, bi).unwrap();
            if m0.re != 0.0 || m0.im != 0.0 {
                pass = false;
                detail = format!("m(0) = {m0} not exactly zero");
            }
        }
    }
    if detail.is_empty() {
        detail = "sup Re m over the grid (must stay negative); m(0) exactly 0".into();
    }
    CriterionReport::new(2, "sign of Re m", pass, worst, 0.0, detail)
}

/// 3. Low-frequency development of `m`.
pub fn zero_asymptotics() -> CriterionReport {
    let params = WaveParams::new(1.0f64, 0.0, 1.0, 1).unwrap();
    let mut pass = true;
    let mut worst_dev = 0.0f64;
    for &(mag, window) in &[(1e-2f64, 0.1f64), (1e-3, 0.01)] {
        let xi = Frequency::new_1d(mag);
        let m = eval_m(&xi, 1.0, 1.0).unwrap();
        let ratio = (m / m_asymptotic_zero(&xi, &params)).re;
        let dev = (ratio - 1.0).abs();
        if dev > window {
            pass = false;
        }
        worst_dev = worst_dev.max(dev / window);
    }
    CriterionReport::new(
        3,
        "low-frequency asymptotics of m",
        pass,
        worst_dev,
        1.0,
        "|ratio - 1| / window at |xi| = 1e-2 (10%) and 1e-3 (1%)".into(),
    )
}

/// 4. Scaled residual of the high-frequency development stays bounded.
pub fn infinity_asymptotics() -> CriterionReport {
    let params = WaveParams::new(1.0f64, 0.0, 1.0, 1).unwrap();
    let mut values = Vec::new();
    for &mag in &[10.0f64, 30.0, 100.0] {
        let xi = Frequency::new_1d(mag);
        let m = eval_m(&xi, 1.0, 1.0).unwrap();
        values.push((m - m_asymptotic_infty(&xi, &params)).norm() * mag * mag);
    }
    let growth = values[2] / values[0].max(1e-300);
    let pass = growth <= 1.5 && values.iter().all(|v| v.is_finite());
    CriterionReport::new(
        4,
        "high-frequency asymptotics of m",
        pass,
        growth,
        1.5,
        format!("scaled residuals |xi|^2 |m + 1/(4 pi |xi|)| = {values:?}"),
    )
}

/// 5. The printed closed form of `m` on the `kappa = 0` slice, plus its own
/// limits toward the two asymptotic regimes.
pub fn kappa_zero_closed_form() -> CriterionReport {
    let b = 1.0f64;
    let mut worst = 0.0f64;
    for k in 0..200 {
        let r = 1e-3 + (20.0 - 1e-3) * (k as f64 + 0.5) / 200.0;
        let xi = Frequency::new_1d(r / (2.0 * std::f64::consts::PI));
        let m = eval_m(&xi, 0.0, b).unwrap();
        let printed = m_kappa_zero(r, b);
        let rel = (m.re - printed).abs() / printed.abs().max(1e-300) + m.im.abs();
        worst = worst.max(rel);
    }
    // r -> 0 limit reproduces the quadratic law, r -> infinity the -1/(2r) law
    let small = m_kappa_zero(1e-4, b) / (-(1e-4f64).powi(2) * b.powi(3) / 3.0);
    let tail = (m_kappa_zero(30.0, b) + 1.0 / 60.0).abs();
    let limits_ok = (small - 1.0).abs() < 1e-3 && tail < 1e-6;
    let pass = worst <= 1e-12 && limits_ok;
    CriterionReport::new(
        5,
        "kappa = 0 closed form of m",
        pass,
        worst,
        1e-12,
        format!("max relative defect on r in (0, 20]; limit checks: {small:.6}, {tail:.2e}"),
    )
}

/// Random smooth complex profile for the collocation comparison.
fn random_profile(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> Complex64 {
    let coeffs: Vec<Complex64> = (0..4)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    move |x: f64| {
        coeffs[0]
            + coeffs[1] * Complex64::new(x, 0.0)
            + coeffs[2] * Complex64::new((2.0 * x).sin(), 0.0)
            + coeffs[3] * Complex64::new((3.0 * x).cos(), 0.0)
    }
}

/// 6. Coupled two-point solve against the Richardson-extrapolated
/// finite-difference collocation oracle.
pub fn per_frequency_bvp() -> CriterionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE06);
    let b = 1.0f64;
    let nodes = VerticalNodes::<f64>::new(48, b);
    let mut worst = 0.0f64;
    let mut worst_bc = 0.0f64;
    for _ in 0..50 {
        let r = rng.gen_range(0.3..6.0f64);
        let kappa = rng.gen_range(-2.0..2.0f64);
        let f1 = random_profile(&mut rng);
        let f2 = random_profile(&mut rng);
        let g = random_profile(&mut rng);
        let k = [
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ];
        let rp = Reparam::from_r_kappa(r, kappa);
        // spectral data at the vertical nodes; dG analytic via differentiation
        let g_nodes: Vec<Complex64> = nodes.nodes().iter().map(|&x| g(x)).collect();
        let dg_nodes = nodes.differentiate(&g_nodes);
        let bvp = FrequencyBvp {
            rp,
            f1: nodes.nodes().iter().map(|&x| f1(x)).collect(),
            f2: nodes.nodes().iter().map(|&x| f2(x)).collect(),
            g: g_nodes.clone(),
            dg: dg_nodes,
            k,
        };
        let y = solve_coupled(&bvp, &nodes).unwrap();
        // the Richardson pair doubles up to the configured default point count
        let base_npts = OracleConfig::default().collocation_points / 2;
        let oracle = collocate_bvp_richardson(r, kappa, b, &f1, &f2, &g, k, base_npts).unwrap();
        // compare on the oracle's coarse uniform grid via barycentric interps
        let phi: Vec<Complex64> = y.iter().map(|row| row[0]).collect();
        let w: Vec<Complex64> = y.iter().map(|row| row[1]).collect();
        let q: Vec<Complex64> = y.iter().map(|row| row[2]).collect();
        let mut scale = 1.0f64;
        for j in 0..oracle.x.len() {
            scale = scale
                .max(oracle.phi[j].norm())
                .max(oracle.w[j].norm())
                .max(oracle.q[j].norm());
        }
        for (j, &x) in oracle.x.iter().enumerate() {
            let e1 = (nodes.interpolate(&phi, x) - oracle.phi[j]).norm();
            let e2 = (nodes.interpolate(&w, x) - oracle.w[j]).norm();
            let e3 = (nodes.interpolate(&q, x) - oracle.q[j]).norm();
            worst = worst.max(e1.max(e2).max(e3) / scale);
        }
        // boundary rows of the reduced system at x_n = b
        let y4: Vec<Complex64> = y.iter().map(|row| row[3]).collect();
        let g_b = nodes.interpolate(&g_nodes, b);
        let row1 = -nodes.interpolate(&y4, b) + Complex64::new(r, 0.0) * nodes.interpolate(&w, b) - k[0];
        let row2 = nodes.interpolate(&q, b) + Complex64::new(2.0 * r, 0.0) * nodes.interpolate(&phi, b)
            - (k[1] + Complex64::new(2.0, 0.0) * g_b);
        let kscale = 1.0 + k[0].norm() + k[1].norm() + g_b.norm();
        worst_bc = worst_bc.max(row1.norm().max(row2.norm()) / kscale);
    }
    let pass = worst <= 1e-6 && worst_bc <= 1e-8;
    CriterionReport::new(
        6,
        "per-frequency BVP vs collocation oracle",
        pass,
        worst,
        1e-6,
        format!("sup field error {worst:.3e} (tol 1e-6), boundary rows {worst_bc:.3e} (tol 1e-8)"),
    )
}

/// Random band-limited conjugate-symmetric surface spectrum.
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
        field.coeffs[mode] =
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
    }
    symmetrize_surface(&mut field);
    field
}

fn symmetrize_surface(field: &mut SurfaceField<f64>) {
    let grid = field.grid.clone();
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
}

/// Random band-limited volume field with a smooth vertical profile; when
/// `vanish_bottom` is set the profile has `f(0) = 0`.
fn random_volume(
    grid: &HorizontalGrid<f64>,
    nodes: &VerticalNodes<f64>,
    rng: &mut ChaCha8Rng,
    band: i64,
    vanish_bottom: bool,
) -> VolumeField<f64> {
    let b = nodes.b;
    let horizontal = random_surface(grid, rng, band);
    let c1: f64 = rng.gen_range(-1.0..1.0);
    let c2: f64 = rng.gen_range(-1.0..1.0);
    let c3: f64 = rng.gen_range(-1.0..1.0);
    let mut out = VolumeField::zeros(grid, nodes);
    for mode in 0..grid.num_modes() {
        let base = horizontal.coeffs[mode];
        for (node, &x) in nodes.nodes().iter().enumerate() {
            let t = x / b;
            let profile = if vanish_bottom {
                c1 * t * t + c2 * t * t * t + c3 * (t * (1.5 * t).sin())
            } else {
                c1 + c2 * t + c3 * (1.5 * t).cos()
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
    let f: Vec<VolumeField<f64>> =
        (0..n).map(|_| random_volume(grid, nodes, rng, band, false)).collect();
    let g = random_volume(grid, nodes, rng, band, false);
    let mut h = random_surface(grid, rng, band);
    let k: Vec<SurfaceField<f64>> = (0..n).map(|_| random_surface(grid, rng, band)).collect();
    // pin the zero mode of h to the vertical integral of g
    let gint = g.vertical_integral();
    h.set_zero_mode(gint.zero_mode());
    DataQuadruple::assemble(f, g, h, k, nodes)
}

/// Relative difference of two data quadruples in the base data norm.
fn data_relative_error(a: &DataQuadruple<f64>, b: &DataQuadruple<f64>) -> f64 {
    let mut diff = a.clone();
    diff.axpy(-1.0, b);
    let denom = b.y0_norm().max(1e-300);
    diff.y0_norm() / denom
}

/// 7. Linear isomorphism round trip and injectivity spot check.
pub fn linear_round_trip() -> CriterionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE07);
    let mut worst = 0.0f64;
    let mut pass = true;
    let mut detail = String::new();
    let cases: [(f64, usize, usize, f64, usize, i64); 3] = [
        // (sigma, d, npts, length, trials, band)
        (1.0, 1, 128, 16.0, 8, 24),
        (1.0, 2, 16, 8.0, 6, 4),
        (0.0, 1, 128, 16.0, 6, 24),
    ];
    for (sigma, d, npts, length, trials, band) in cases {
        let grid = HorizontalGrid::<f64>::new(d, npts, length).unwrap();
        let nodes = VerticalNodes::<f64>::new(40, 1.0);
        let params = WaveParams::new(1.0, sigma, 1.0, d).unwrap();
        let n = d + 1;
        for _ in 0..trials {
            let data = random_compatible_data(&grid, &nodes, &mut rng, n, band);
            let solution = solve_gravity_capillary(&data, &params).unwrap();
            let recovered = forward_operator(&solution, &params);
            let rel = data_relative_error(&recovered, &data);
            if rel > worst {
                worst = rel;
                detail = format!("worst at sigma = {sigma}, d = {d}");
            }
        }
        // injectivity: zero data give the exactly-zero triple
        let zero = DataQuadruple::zeros(&grid, &nodes, n);
        let sol = solve_gravity_capillary(&zero, &params).unwrap();
        if sol.linf_coeff() != 0.0 {
            pass = false;
            detail = format!("zero data produced nonzero solution at sigma = {sigma}, d = {d}");
        }
    }
    pass = pass && worst <= 1e-7;
    CriterionReport::new(
        7,
        "gravity-capillary round trip",
        pass,
        worst,
        1e-7,
        format!("max relative data-norm defect over 20 solves; {detail}"),
    )
}

/// 8. Navier-condition round trip with normal-stress reconstruction.
pub fn navier_round_trip() -> CriterionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE08);
    let grid = HorizontalGrid::<f64>::new(1, 128, 16.0).unwrap();
    let nodes = VerticalNodes::<f64>::new(40, 1.0);
    let params = WaveParams::new(0.8, 0.0, 1.0, 1).unwrap();
    let n = 2;
    let mut worst_state = 0.0f64;
    let mut worst_kn = 0.0f64;
    for _ in 0..8 {
        // manufactured (u*, p*) with u*(0) = 0; the pressure mean is shifted
        // so the manufactured normal stress has no zero mode, since on the
        // torus `W` carries no information about it (the solvable class)
        let u_star: Vec<VolumeField<f64>> =
            (0..n).map(|_| random_volume(&grid, &nodes, &mut rng, 24, true)).collect();
        let mut p_star = random_volume(&grid, &nodes, &mut rng, 24, false);
        {
            let (_, _, k_raw) = forward_stress(&u_star, &p_star, &params);
            let shift = k_raw[n - 1].zero_mode();
            let mut lift = SurfaceField::zeros(&grid);
            lift.set_zero_mode(shift);
            p_star.sub_assign(&lift.lift(&nodes));
        }
        let (f, g, k) = forward_stress(&u_star, &p_star, &params);
        let h = u_star[n - 1].boundary_top();
        let kprime = k[..n - 1].to_vec();
        let kn_star = k[n - 1].clone();
        let ndata = NavierData::assemble(f, g, h, kprime);
        let solution = solve_navier(&ndata, &params).unwrap();
        // state recovery
        let mut scale = 0.0f64;
        let mut diff = 0.0f64;
        for comp in 0..n {
            for (a, b) in solution.u[comp].data.iter().zip(u_star[comp].data.iter()) {
                diff = diff.max((a - b).norm());
                scale = scale.max(b.norm());
            }
        }
        for (a, b) in solution.p.data.iter().zip(p_star.data.iter()) {
            diff = diff.max((a - b).norm());
            scale = scale.max(b.norm());
        }
        worst_state = worst_state.max(diff / scale.max(1e-300));
        // per-mode normal stress reconstruction (mode 0 included: the
        // manufactured stress was placed in the class with no zero mode)
        for mode in 0..grid.num_modes() {
            if grid.is_nyquist(mode) {
                continue;
            }
            let defect = (solution.normal_stress.coeffs[mode] - kn_star.coeffs[mode]).norm();
            let local_scale = 1.0 + kn_star.coeffs[mode].norm();
            worst_kn = worst_kn.max(defect / local_scale);
        }
    }
    let pass = worst_state <= 1e-7 && worst_kn <= 1e-8;
    CriterionReport::new(
        8,
        "Navier-condition round trip",
        pass,
        worst_state,
        1e-7,
        format!("state recovery {worst_state:.3e} (tol 1e-7), k_n per mode {worst_kn:.3e} (tol 1e-8)"),
    )
}

/// 9. The dual weight integral against `2 pi arcsinh(1)`.
pub fn weight_integral() -> CriterionReport {
    let exact = 2.0 * std::f64::consts::PI * 1.0f64.asinh();
    let got = dual_weight_integral(1.0f64, 1e-8);
    let err = (got - exact).abs();
    CriterionReport::new(
        9,
        "anisotropic dual-weight integral",
        err <= 1e-6,
        err,
        1e-6,
        format!("quadrature {got:.9} vs 2 pi arcsinh(1) = {exact:.9}"),
    )
}

/// Random direction in the solution space (bottom-vanishing velocity).
fn random_direction(
    grid: &HorizontalGrid<f64>,
    nodes: &VerticalNodes<f64>,
    rng: &mut ChaCha8Rng,
    n: usize,
) -> SolutionTriple<f64> {
    let u: Vec<VolumeField<f64>> =
        (0..n).map(|_| random_volume(grid, nodes, rng, 12, true)).collect();
    let q = random_volume(grid, nodes, rng, 12, false);
    let mut eta = random_surface(grid, rng, 12);
    eta.set_zero_mode(Complex64::new(0.0, 0.0));
    SolutionTriple { u, q, eta }
}

/// 10. Quadratic remainder of the residual against the frozen linearization.
pub fn linearization_bound() -> CriterionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE10);
    let grid = HorizontalGrid::<f64>::new(1, 64, 16.0).unwrap();
    let nodes = VerticalNodes::<f64>::new(32, 1.0);
    let params = WaveParams::new(1.0, 1.0, 1.0, 1).unwrap();
    let forcing = ForcingSpec::none();
    let mut pass = true;
    let mut worst_growth = 0.0f64;
    for _ in 0..10 {
        let direction = random_direction(&grid, &nodes, &mut rng, 2);
        let linear = forward_operator(&direction, &params);
        let mut ratios = Vec::new();
        for &eps in &[1e-1f64, 1e-2, 1e-3] {
            let mut state = SolutionTriple::zeros(&grid, &nodes, 2);
            state.axpy(eps, &direction);
            let residual = nonlinear_residual(&state, &forcing, &params).unwrap();
            let mut defect = residual.clone();
            defect.axpy(-eps, &linear);
            ratios.push(defect.y0_norm() / (eps * eps));
        }
        // quadratic remainder: the ratio must not grow as eps shrinks
        let base = ratios[0].max(1e-9);
        for &r in &ratios[1..] {
            let growth = r / base;
            worst_growth = worst_growth.max(growth);
            if growth > 3.0 {
                pass = false;
            }
        }
    }
    CriterionReport::new(
        10,
        "frozen-Jacobian linearization",
        pass,
        worst_growth,
        3.0,
        "max growth of ||Xi(eps x) - eps Upsilon x||/eps^2 as eps shrinks 1e-1 -> 1e-3".into(),
    )
}

/// 11. The headline nonlinear solve: Gaussian-bump stress at desk scale.
pub fn nonlinear_solve() -> CriterionReport {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| {
        let start = std::time::Instant::now();
        let grid = HorizontalGrid::<f64>::new(1, 256, 32.0).unwrap();
        let nodes = VerticalNodes::<f64>::new(48, 1.0);
        let params = WaveParams::new(1.0, 1.0, 1.0, 1).unwrap();
        let amp = 1e-3;
        let width = grid.length / 16.0;
        let center = [grid.length / 2.0, 0.0];
        let cfg = IterationConfig { max_iters: 25, tol: 1e-11, damping: 1.0 };
        let forcing = ForcingSpec::gaussian_bump_stress(amp, width, center, 1);
        let solved = solve_traveling_wave(&forcing, &params, &grid, &nodes, &cfg);
        let (state, report) = match solved {
            Ok(v) => v,
            Err(e) => {
                return CriterionReport::new(
                    11,
                    "nonlinear Gaussian-bump solve",
                    false,
                    f64::NAN,
                    1e-8,
                    format!("solve failed: {e}"),
                )
            }
        };
        let wall = start.elapsed().as_secs_f64();
        let iterations = report.iterations.len();
        let energy = report.energy.unwrap();
        // amplitude halving should halve the surface norm within 5%
        let forcing_half = ForcingSpec::gaussian_bump_stress(amp / 2.0, width, center, 1);
        let (state_half, _) =
            solve_traveling_wave(&forcing_half, &params, &grid, &nodes, &cfg).unwrap();
        let x_full = crate::norms::xs_norm(&state.eta, 2.5).xs;
        let x_half = crate::norms::xs_norm(&state_half.eta, 2.5).xs;
        let ratio_dev = (x_full / (2.0 * x_half) - 1.0).abs();
        let pass = report.final_residual <= 1e-8
            && iterations <= 25
            && wall < 60.0
            && energy.relative_defect <= 1e-6
            && ratio_dev <= 0.05;
        CriterionReport::new(
            11,
            "nonlinear Gaussian-bump solve",
            pass,
            report.final_residual,
            1e-8,
            format!(
                "residual {:.2e} in {} iters, {:.1}s single-threaded, energy defect {:.2e}, halving deviation {:.2e}",
                report.final_residual, iterations, wall, energy.relative_defect, ratio_dev
            ),
        )
    })
}

/// 12. Zero forcing returns the zero triple in one iteration.
pub fn rigidity() -> CriterionReport {
    let grid = HorizontalGrid::<f64>::new(1, 64, 16.0).unwrap();
    let nodes = VerticalNodes::<f64>::new(32, 1.0);
    let params = WaveParams::new(1.0, 1.0, 1.0, 1).unwrap();
    let cfg = IterationConfig::default();
    match solve_traveling_wave(&ForcingSpec::none(), &params, &grid, &nodes, &cfg) {
        Ok((state, report)) => {
            let pass =
                report.iterations.len() == 1 && state.linf_coeff() == 0.0 && report.converged;
            CriterionReport::new(
                12,
                "zero forcing rigidity",
                pass,
                state.linf_coeff(),
                0.0,
                format!("{} iterations, max coefficient {}", report.iterations.len(), state.linf_coeff()),
            )
        }
        Err(e) => CriterionReport::new(12, "zero forcing rigidity", false, f64::NAN, 0.0, format!("{e}")),
    }
}

/// Auxiliary regression: measured operator constant of the surface solve,
/// `||eta||_{X^{s+5/2}} <= C ||data||`; kept as a recorded bound rather than
/// an acceptance criterion.
pub fn surface_norm_regression() -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE77);
    let grid = HorizontalGrid::<f64>::new(1, 128, 16.0).unwrap();
    let nodes = VerticalNodes::<f64>::new(40, 1.0);
    let params = WaveParams::new(1.0, 1.0, 1.0, 1).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let data = random_compatible_data(&grid, &nodes, &mut rng, 2, 24);
        let solution = solve_gravity_capillary(&data, &params).unwrap();
        let ratio = crate::norms::xs_norm(&solution.eta, 2.5).xs / data.y0_norm().max(1e-300);
        worst = worst.max(ratio);
    }
    // frozen bound measured at twice the observed headroom
    (worst, 2.0)
}

/// Extra integrity checks reused by the CLI validate command: the energy
/// identity for a boundary-driven homogeneous mode and the psi compatibility
/// for data generated by the forward operator. Returns the worst defect.
pub fn psi_vanishes_on_forward_data() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE55);
    let grid = HorizontalGrid::<f64>::new(1, 64, 16.0).unwrap();
    let nodes = VerticalNodes::<f64>::new(40, 1.0).clone();
    let params = WaveParams::new(1.1, 0.0, 1.0, 1).unwrap();
    let n = 2;
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let u_star: Vec<VolumeField<f64>> =
            (0..n).map(|_| random_volume(&grid, &nodes, &mut rng, 12, true)).collect();
        let p_star = random_volume(&grid, &nodes, &mut rng, 12, false);
        let (f, g, k) = forward_stress(&u_star, &p_star, &params);
        let h = u_star[n - 1].boundary_top();
        let data = DataQuadruple::assemble(f, g, h, k, &nodes);
        let psi = crate::linear::check_overdetermined(&data, &params).unwrap();
        let scale = 1.0 + data.y0_norm();
        worst = worst.max(psi.linf_coeff() / scale);
    }
    worst
}

/// Convenience wrapper: `W` functional consistency `W = conj(m) k_n` on
/// forward data, used in tests.
pub fn w_identity_defect() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE56);
    let grid = HorizontalGrid::<f64>::new(1, 64, 16.0).unwrap();
    let nodes = VerticalNodes::<f64>::new(40, 1.0);
    let params = WaveParams::new(0.9, 0.0, 1.0, 1).unwrap();
    let n = 2;
    let u_star: Vec<VolumeField<f64>> =
        (0..n).map(|_| random_volume(&grid, &nodes, &mut rng, 12, true)).collect();
    let p_star = random_volume(&grid, &nodes, &mut rng, 12, false);
    let (f, g, k) = forward_stress(&u_star, &p_star, &params);
    let h = u_star[n - 1].boundary_top();
    let kn = k[n - 1].clone();
    let ndata = NavierData::assemble(f, g, h, k[..n - 1].to_vec());
    let w = compute_w(&ndata, &params).unwrap();
    let mut worst = 0.0f64;
    for mode in 0..grid.num_modes() {
        let xi = grid.frequency_at(mode);
        if xi.is_zero() || grid.is_nyquist(mode) {
            continue;
        }
        let m = eval_m(&xi, -params.gamma, params.b).unwrap();
        let defect = (w.coeffs[mode] - kn.coeffs[mode] * m.conj()).norm();
        worst = worst.max(defect / (1.0 + kn.coeffs[mode].norm()));
    }
    worst
}
