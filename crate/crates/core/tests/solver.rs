use std::f64::consts::PI;

use muskat_core::initial;
use muskat_core::parallel::with_workers;
use muskat_core::stepper::default_schedule;
use muskat_core::*;

fn line(n: usize) -> GridSpec {
    GridSpec::new(1, 2.0 * PI, n).unwrap()
}

fn smooth_data(g: GridSpec) -> InterfaceField {
    InterfaceField::from_fn(g, |x| 0.3 * x[0].sin() + 0.1 * (2.0 * x[0]).cos()).unwrap()
}

fn march(solver: &Solver, f0: &InterfaceField, dt: f64, t: f64) -> InterfaceField {
    let steps = (t / dt).round() as usize;
    let mut s = SolverState::initial(f0.clone());
    for _ in 0..steps {
        s = solver.step(&s, dt).unwrap();
    }
    s.f
}

fn observed_orders(scheme: Scheme, dts: &[f64], t: f64) -> Vec<f64> {
    let g = line(32);
    let f0 = smooth_data(g);
    let mut cfg = SolverConfig::new(RegParams::new(0.1, 0.1).unwrap(), t);
    cfg.scheme = scheme;
    let solver = Solver::new(g, cfg.clone()).unwrap();
    let mut rk = cfg;
    rk.scheme = Scheme::Rk4;
    let reference = march(&Solver::new(g, rk).unwrap(), &f0, dts[dts.len() - 1] / 8.0, t);
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| march(&solver, &f0, dt, t).sub(&reference).unwrap().max_abs())
        .collect();
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn imex_is_first_order() {
    for p in observed_orders(Scheme::Imex1, &[0.02, 0.01, 0.005], 0.2) {
        assert!((p - 1.0).abs() <= 0.2, "order {p}");
    }
}

#[test]
fn rk4_is_fourth_order() {
    for p in observed_orders(Scheme::Rk4, &[0.04, 0.02, 0.01], 0.4) {
        assert!((p - 4.0).abs() <= 0.5, "order {p}");
    }
}

#[test]
fn rk4_and_imex_agree_as_dt_shrinks() {
    let g = line(32);
    let f0 = smooth_data(g);
    let mut cfg = SolverConfig::new(RegParams::new(0.1, 0.1).unwrap(), 0.1);
    let imex = Solver::new(g, cfg.clone()).unwrap();
    cfg.scheme = Scheme::Rk4;
    let rk = Solver::new(g, cfg).unwrap();
    let gap = |dt: f64| march(&imex, &f0, dt, 0.1).sub(&march(&rk, &f0, dt, 0.1)).unwrap().max_abs();
    let ratio = gap(0.01) / gap(0.005);
    assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn linear_regime_follows_the_oracle_table() {
    let g = line(128);
    let mu1 = 1e-2;
    let p = RegParams::new(mu1, RegParams::l2_mu2_limit(mu1)).unwrap();
    let f0 = InterfaceField::from_fn(g, |x| 1e-4 * ((2.0 * x[0]).cos() + (3.0 * x[0]).sin())).unwrap();
    let mut cfg = SolverConfig::new(p, 0.2);
    cfg.step = StepControl::Fixed { dt: 2e-4 };
    cfg.probes = ProbeSchedule::Uniform { count: 4 };
    let probes = [Probe::Mode { k: [2, 0] }, Probe::Mode { k: [3, 0] }];
    let r = run(&f0, &cfg, &probes).unwrap();
    let t = r.series.column("t").unwrap();
    for (k, col) in [(2, "mode_2"), (3, "mode_3")] {
        let amp = r.series.column(col).unwrap();
        for (ti, a) in t.iter().zip(&amp) {
            let oracle = semigroup_oracle(&f0, *ti, mu1).unwrap();
            let want = 2.0 * oracle.spectrum()[k].norm() / 128.0;
            assert!((a - want).abs() <= 1e-2 * want, "k={k} t={ti}: {a} vs {want}");
        }
    }
}

#[test]
fn small_step_matches_the_linear_factor() {
    let g = line(128);
    let mu1 = 1e-2;
    let p = RegParams::new(mu1, RegParams::l2_mu2_limit(mu1)).unwrap();
    let eps = 1e-5;
    let f0 = initial::cosine(g, 3.0, eps).unwrap();
    let solver = Solver::new(g, SolverConfig::new(p, 1.0)).unwrap();
    let c = linear_constant(1).unwrap();
    for dt in [1e-3, 5e-4] {
        let s = solver.step_imex(&SolverState::initial(f0.clone()), dt).unwrap();
        let amp = 2.0 * s.f.spectrum()[3].norm() / 128.0 / eps;
        let want = (-(c * 3.0 + mu1 * 9.0) * dt).exp();
        // O(dt^2) from the Euler/implicit split, plus the quadrature error of the symbol
        assert!((amp - want).abs() <= 60.0 * dt * dt + 2e-3 * (c * 3.0 * dt), "dt={dt}");
    }
}

#[test]
fn zero_final_time_returns_initial_probes() {
    let g = line(32);
    let f0 = smooth_data(g);
    let cfg = SolverConfig::new(RegParams::new(0.1, 0.1).unwrap(), 0.0);
    let r = run(&f0, &cfg, &[Probe::L2]).unwrap();
    assert_eq!(r.series.len(), 1);
    assert_eq!(r.final_state.f, f0);
}

#[test]
fn runs_are_deterministic_across_worker_counts() {
    let g = line(64);
    let f0 = initial::random_smooth(g, 5, 6, 1.0).unwrap();
    let cfg = SolverConfig::new(RegParams::new(0.1, 0.05).unwrap(), 0.1);
    let probes = [Probe::L2, Probe::Max, Probe::Lip, Probe::RhsSup];
    let a = with_workers(1, || run(&f0, &cfg, &probes).unwrap()).unwrap();
    let b = with_workers(3, || run(&f0, &cfg, &probes).unwrap()).unwrap();
    let c = run(&f0, &cfg, &probes).unwrap();
    assert_eq!(a.series, b.series);
    assert_eq!(a.series, c.series);
}

#[test]
fn adaptive_run_lands_on_probe_times() {
    let g = line(64);
    let f0 = smooth_data(g);
    let mut cfg = SolverConfig::new(RegParams::new(0.1, 0.05).unwrap(), 0.3);
    cfg.step = StepControl::adaptive_default();
    cfg.probes = ProbeSchedule::Uniform { count: 3 };
    let r = run(&f0, &cfg, &[Probe::L2]).unwrap();
    assert!(r.abort.is_none());
    let mut want = vec![0.0];
    want.extend(cfg.probes.times(0.3).unwrap());
    assert_eq!(r.series.column("t").unwrap(), want);
}

#[test]
fn vertical_translation_shifts_the_solution() {
    let g = line(64);
    let f0 = smooth_data(g);
    let cfg = SolverConfig::new(RegParams::new(0.1, 0.05).unwrap(), 0.2);
    let a = run(&f0, &cfg, &[]).unwrap();
    let b = run(&f0.map(|v| v + 0.7).unwrap(), &cfg, &[]).unwrap();
    let diff = b.final_state.f.sub(&a.final_state.f).unwrap();
    assert!(diff.values().iter().all(|v| (v - 0.7).abs() <= 1e-12));
}

#[test]
fn decomposed_run_with_zero_rough_part() {
    let g = line(64);
    let f2 = smooth_data(g);
    let zero = InterfaceField::zeros(g);
    let mut cfg = SolverConfig::new(RegParams::new(0.1, 0.05).unwrap(), 0.1);
    cfg.probes = ProbeSchedule::Uniform { count: 4 };
    let r = run_decomposed(&zero, &f2, &cfg).unwrap();
    assert!(r.abort.is_none());
    for a in r.series.column("A").unwrap() {
        assert!(a.abs() <= 1e-13);
    }
    assert_eq!(r.f_final.f, r.f2_final.f);
}

#[test]
fn decomposed_run_bounds_a_by_the_gradient() {
    let g = line(128);
    let f0 = initial::kink(g, 1.0, 2.0).unwrap();
    let dec = decompose(&f0, 0.05, 3.0).unwrap();
    let mut cfg = SolverConfig::new(RegParams::new(0.05, 0.01).unwrap(), 0.2);
    cfg.probes = ProbeSchedule::Geometric { first: 1e-3, count: 8 };
    let r = run_decomposed(&dec.rough, &dec.smooth, &cfg).unwrap();
    let a = r.series.column("A").unwrap();
    let bound = r.series.column("a_bound").unwrap();
    let (m, mm) = (r.series.column("M_1").unwrap(), r.series.column("m_1").unwrap());
    let grad = dec.rough.gradient().unwrap()[0].clone();
    let direct = grad.argmax().1.abs() + grad.argmin().1.abs();
    assert!((a[0] - direct).abs() <= 1e-14 * direct.max(1.0));
    for i in 0..a.len() {
        assert!(a[i] <= bound[i]);
        assert_eq!(a[i], m[i].abs() + mm[i].abs());
    }
    assert!(r.series.column("B_1").unwrap().iter().all(|b| b.is_finite()));
}

#[test]
fn far_band_contribution_scales_inversely_with_the_period() {
    // a fixed small bump sampled at fixed spacing on tori of period L and 2L
    let h = 2.0 * PI / 128.0;
    let mut contrib = Vec::new();
    for n in [128usize, 256] {
        let l = h * n as f64;
        let g = GridSpec::new(1, l, n).unwrap();
        let f = InterfaceField::from_fn(g, |x| 1e-2 * (-(x[0] - 1.0).powi(2) / 0.1).exp()).unwrap();
        let ev = SingularIntegral::exact(g, QuadratureSpec::truncated()).unwrap();
        let band = ev.band_contribution(&f, l / 4.0, l / 2.0).unwrap();
        let c = band.max_abs() * (l / 4.0) / f.max_abs();
        println!("far-band constant at L = {l:.4}: {c:.4}");
        assert!(c <= 2.0, "constant {c}");
        contrib.push(band.max_abs());
    }
    let ratio = contrib[0] / contrib[1];
    assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn continuation_edge_cases() {
    let g = line(64);
    let f0 = smooth_data(g);
    let cfg = SolverConfig::new(RegParams::new(0.05, 0.1).unwrap(), 0.1);
    let single = continuation(&f0, &cfg, &[(0.05, 0.1)], false).unwrap();
    assert!(single.differences.is_empty());
    let full = continuation(&f0, &cfg, &default_schedule(), true).unwrap();
    assert_eq!(full.differences.len(), default_schedule().len() - 1);
    assert!(full.mu2_shrink_min().unwrap() >= 1.5);
    assert_eq!(full.exact_within_bound(), Some(true));
}

#[test]
fn oracle_identity_and_eigenfunction() {
    let g = line(64);
    let f0 = smooth_data(g);
    assert!(semigroup_oracle(&f0, 0.0, 0.1).unwrap().sub(&f0).unwrap().max_abs() <= 1e-15);
    let c = linear_constant(1).unwrap();
    let cosk = initial::cosine(g, 3.0, 1.0).unwrap();
    let t = 0.3;
    let got = semigroup_oracle(&cosk, t, 0.1).unwrap();
    let want = cosk.scale((-(c * 3.0 + 0.1 * 9.0) * t).exp()).unwrap();
    assert!(got.sub(&want).unwrap().max_abs() <= 1e-13);
}
