//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture` to see them, and add
//! `--include-ignored` for the multi-hour Weibel run.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use vlasov_dg::basis::project_1d;
use vlasov_dg::driver::{parse_config, run_with, RunHooks};
use vlasov_dg::maxwell::{compute_current, maxwell_rhs, FieldState};
use vlasov_dg::time::{rk3_step, RkState};
use vlasov_dg::verify::{
    conservation_from_records, conservation_identities, exact_solution_table, max_relative_difference, oracle_maxwell_rhs,
    oracle_vlasov_terms, time_reversal_table, weibel_report, ConvergenceTable,
};
use vlasov_dg::vlasov::{vlasov_rhs, ForceField};
use vlasov_dg::{BasisFamily, CellCoefficients, Discretization, Domain1P2V, FluxKind, PhaseMesh, SolutionState};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("{} criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn random_state(disc: &Discretization, rng: &mut StdRng, field_offsets: [f64; 3], field_noise: f64) -> SolutionState {
    let mut f = CellCoefficients::zeros(disc.mesh.n_cells(), disc.n_modes());
    f.data.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    let mut fields = FieldState::zeros(disc.mesh.n_x, disc.n_field_modes());
    for (c, offset) in fields.components_mut().into_iter().zip(field_offsets) {
        *c = project_1d(|_| offset, &disc.mesh, disc.field_degree, disc.field_degree + 2).unwrap();
        c.data.iter_mut().for_each(|v| *v += field_noise * rng.random_range(-1.0..1.0));
    }
    SolutionState { f, fields, t: 0.0 }
}

fn small_disc(k: usize, family: BasisFamily) -> Discretization {
    let mesh = PhaseMesh::new(Domain1P2V::new(0.0, 3.0, 1.2, 1.2).unwrap(), 2, 2, 2).unwrap();
    Discretization::new(mesh, k, family).unwrap()
}

#[test]
fn criterion_1_operator_oracle() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for k in [1, 2] {
        for family in [BasisFamily::PType, BasisFamily::QType] {
            let disc = small_disc(k, family);
            // Field offsets keep a1 and a2 single-signed on every face so the
            // upwind integrands are polynomials and dense quadrature is exact.
            for (offsets, noise) in [([0.0; 3], 0.0), ([1.5, -1.5, 0.0], 0.2), ([-1.5, 1.5, 0.2], 0.3)] {
                let s = random_state(&disc, &mut rng, offsets, noise);
                let force = ForceField::new(&disc, &s.fields);
                let fast = vlasov_rhs(&disc, &s.f, &force).unwrap();
                let oracle = oracle_vlasov_terms(&disc, &s.f, &s.fields, k + 5).unwrap().total();
                worst = worst.max(max_relative_difference(&fast.data, &oracle.data));
                for flux in FluxKind::ALL {
                    let fast = maxwell_rhs(&disc, &s.fields, &compute_current(&disc, &s.f), flux);
                    let oracle = oracle_maxwell_rhs(&disc, &s.f, &s.fields, flux, k + 5).unwrap();
                    for (a, b) in fast.components().iter().zip(oracle.components()) {
                        worst = worst.max(max_relative_difference(&a.data, &b.data));
                    }
                }
            }
        }
    }
    let pass = worst <= 1e-12;
    report("1 (operator oracle)", pass, &format!("max relative deviation {worst:.2e} (tolerance 1e-12)"));
    assert!(pass);
}

#[test]
fn criterion_2_conservation_identities() {
    let mut rng = StdRng::seed_from_u64(11);
    let mesh = PhaseMesh::new(Domain1P2V::new(0.0, 2.0, 1.2, 1.2).unwrap(), 4, 4, 4).unwrap();
    let disc = Discretization::new(mesh, 2, BasisFamily::PType).unwrap();
    let mut worst: f64 = 0.0;
    let mut l2_sign_ok = true;
    let mut theta2_absent = true;
    for _ in 0..3 {
        let s = random_state(&disc, &mut rng, [0.0; 3], 1.0);
        for flux in FluxKind::ALL {
            let c = conservation_identities(&disc, &s, flux).unwrap();
            worst = worst.max(c.max_residual());
            l2_sign_ok &= c.l2.0 <= 1e-12;
            if !flux.is_dissipative() {
                let t = vlasov_dg::diagnostics::theta_terms(&disc, &s, flux);
                theta2_absent &= t.theta2 == 0.0;
            }
        }
    }
    let pass = worst <= 1e-11 && l2_sign_ok && theta2_absent;
    report(
        "2 (semi-discrete identities)",
        pass,
        &format!("max |lhs - rhs| {worst:.2e} (tolerance 1e-11), <rhs, f> <= 0: {l2_sign_ok}, Theta2 absent for non-upwind: {theta2_absent}"),
    );
    assert!(pass);
}

fn table_value(table: &ConvergenceTable, k: usize, n: usize, var: usize) -> (f64, f64) {
    let row = table.row(k, n).expect("row");
    let errors = row.errors.unwrap_or_else(|| panic!("run failed: {:?}", row.failure));
    (errors[var], row.orders.map(|o| o[var]).unwrap_or(f64::NAN))
}

#[test]
fn criterion_3_time_reversal_table() {
    let table = time_reversal_table(&[1, 2], &[20, 40], FluxKind::Upwind, 5.0).unwrap();
    println!("{}", table.to_text());
    let mut pass = true;
    let mut detail = Vec::new();
    for (k, ref_order, ref_error) in [(1, 1.82, 0.050), (2, 2.87, 0.0077)] {
        let (err, order) = table_value(&table, k, 40, 0);
        let ok = (order - ref_order).abs() <= 0.3 && err <= 3.0 * ref_error && err >= ref_error / 3.0;
        pass &= ok;
        detail.push(format!("k={k}: f-error {err:.3e} (reference {ref_error:.2e}), order {order:.2} (reference {ref_order})"));
    }
    report("3 (time-reversal convergence)", pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_4_central_flux_suboptimality() {
    let central = time_reversal_table(&[1], &[20, 40], FluxKind::Central, 5.0).unwrap();
    let alternating = time_reversal_table(&[1], &[20, 40], FluxKind::AlternatingEPlusBMinus, 5.0).unwrap();
    println!("{}{}", central.to_text(), alternating.to_text());
    let (_, central_order) = table_value(&central, 1, 40, 1);
    let (_, alternating_order) = table_value(&alternating, 1, 40, 1);
    let pass = central_order <= 1.2 && alternating_order >= 1.6;
    report(
        "4 (central-flux suboptimality)",
        pass,
        &format!("k=1 B3 order 20->40: central {central_order:.2} (<= 1.2, reference 0.66), alternating {alternating_order:.2} (>= 1.6, reference 1.90)"),
    );
    assert!(pass);
}

fn weibel_records(mesh: usize, t_end: f64, flux: FluxKind, every: usize) -> Vec<vlasov_dg::DiagnosticsRecord> {
    let cfl = if flux == FluxKind::AlternatingEPlusBMinus { 0.12 } else { 0.19 };
    let text = format!("scenario = weibel-choice1\nmesh = {mesh}\nt_end = {t_end}\ncfl = {cfl}\nflux = {}\ndiagnostics_every = {every}", flux.name());
    let cfg = parse_config(&text).unwrap();
    run_with(&cfg, RunHooks { in_memory: true, ..Default::default() }).unwrap().records
}

#[test]
fn criterion_5_conservation_drift() {
    let mut pass = true;
    let mut detail = Vec::new();
    let mut energy = std::collections::HashMap::new();
    for flux in [FluxKind::Upwind, FluxKind::Central, FluxKind::AlternatingEPlusBMinus] {
        let coarse = conservation_from_records(flux, &weibel_records(20, 50.0, flux, 10)).unwrap();
        let fine = conservation_from_records(flux, &weibel_records(40, 50.0, flux, 10)).unwrap();
        let energy_tol = if flux.is_dissipative() { 5e-3 } else { 1e-5 };
        let tightens = fine.energy_drift < coarse.energy_drift;
        let ok = fine.mass_drift <= 1e-8 && fine.energy_drift <= energy_tol && tightens;
        pass &= ok;
        energy.insert(flux, fine.energy_drift);
        detail.push(format!(
            "{flux}: mass {:.2e} (<= 1e-8), energy {:.2e} (<= {energy_tol:.0e}; 20^3 gave {:.2e})",
            fine.mass_drift, fine.energy_drift, coarse.energy_drift
        ));
    }
    let ordered = energy[&FluxKind::Upwind] > energy[&FluxKind::Central] && energy[&FluxKind::Upwind] > energy[&FluxKind::AlternatingEPlusBMinus];
    pass &= ordered;
    detail.push(format!("upwind drift largest: {ordered}"));
    report("5 (conservation drift, 40^3, T=50)", pass, &detail.join("; "));
    assert!(pass);
}

#[test]
#[ignore = "manual tier: 64^3 to T = 100 takes hours"]
fn criterion_6_weibel_physics() {
    let records = weibel_records(64, 100.0, FluxKind::Upwind, 5);
    let r = weibel_report(&records).unwrap();
    let ratio = r.e2_mode_rate / r.b3_mode_rate;
    let checks = [
        r.magnetic_rate.0 > 0.0 && r.magnetic_rate.1 > 0.99,
        (ratio - 2.0).abs() <= 0.3,
        (55.0..=85.0).contains(&r.electric_peak) && (55.0..=85.0).contains(&r.magnetic_peak),
        10.0 * r.p1_drift <= r.p2_drift,
    ];
    let pass = checks.iter().all(|c| *c);
    report(
        "6 (Weibel physics, 64^3)",
        pass,
        &format!(
            "magnetic rate {:.4} (R^2 {:.4}) over {:?}; E2/B3 mode rate ratio {ratio:.3}; peaks electric {:.1} magnetic {:.1}; P1 drift {:.2e} vs P2 drift {:.2e}; checks {checks:?}",
            r.magnetic_rate.0, r.magnetic_rate.1, r.window, r.electric_peak, r.magnetic_peak, r.p1_drift, r.p2_drift
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_exact_solution_convergence() {
    let mut pass = true;
    let mut detail = Vec::new();
    for flux in [FluxKind::Upwind, FluxKind::AlternatingEPlusBMinus] {
        let stream = exact_solution_table("free-stream", &[1, 2], &[16, 32], flux, 1.0, None).unwrap();
        let vacuum = exact_solution_table("vacuum-maxwell", &[1, 2], &[16, 32], flux, 1.0, Some(2)).unwrap();
        println!("{}{}", stream.to_text(), vacuum.to_text());
        for k in [1, 2] {
            let target = (k + 1) as f64;
            let orders = [
                ("f", table_value(&stream, k, 32, 0).1),
                ("B3", table_value(&vacuum, k, 32, 1).1),
                ("E1", table_value(&vacuum, k, 32, 2).1),
            ];
            for (name, order) in orders {
                pass &= (order - target).abs() <= 0.25;
                detail.push(format!("{flux} k={k} {name} {order:.2}"));
            }
        }
    }
    report("7 (exact-solution convergence, target k+1 +- 0.25)", pass, &detail.join(", "));
    assert!(pass);
}

/// `(u, t)` so a non-autonomous scalar ODE can go through the generic stepper.
#[derive(Clone, Copy)]
struct Augmented {
    u: f64,
    t: f64,
}

impl RkState for Augmented {
    type Derivative = (f64, f64);

    fn euler(&self, dt: f64, d: &(f64, f64)) -> Self {
        Augmented { u: self.u + dt * d.0, t: self.t + dt * d.1 }
    }

    fn blend(base: &Self, other: &Self, w: f64) -> Self {
        Augmented { u: base.u + w * (other.u - base.u), t: base.t + w * (other.t - base.t) }
    }

    fn is_finite(&self) -> bool {
        self.u.is_finite() && self.t.is_finite()
    }
}

#[test]
fn criterion_8_rk3_order() {
    // u' = u^2, u(0) = 1 has u(1/2) = 2
    let autonomous = |n: usize| {
        let dt = 0.5 / n as f64;
        let mut u = 1.0;
        for _ in 0..n {
            u = rk3_step(&u, dt, |u: &f64| Ok(u * u)).unwrap();
        }
        (u - 2.0f64).abs()
    };
    // u' = -u^3 + sin t against a much finer solution
    let forced = |n: usize| {
        let dt = 2.0 / n as f64;
        let mut s = Augmented { u: 1.0, t: 0.0 };
        for _ in 0..n {
            s = rk3_step(&s, dt, |s: &Augmented| Ok((-s.u.powi(3) + s.t.sin(), 1.0))).unwrap();
        }
        s.u
    };
    let reference = forced(40_000);
    let o1 = (autonomous(40) / autonomous(80)).log2();
    let o2 = ((forced(40) - reference).abs() / (forced(80) - reference).abs()).log2();
    let pass = (o1 - 3.0).abs() <= 0.05 && (o2 - 3.0).abs() <= 0.05;
    report("8 (RK3 order)", pass, &format!("u' = u^2: {o1:.3}; u' = -u^3 + sin t: {o2:.3} (target 3.0 +- 0.05)"));
    assert!(pass);
}
