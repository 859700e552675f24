//! Acceptance checks. Prints one PASS/FAIL line per check and exits non-zero
//! when any check fails.

use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use statrs::function::gamma::gamma;

use toa_core::kernel::{
    boundary_report, delta_table, harmonic_kernel_coefficient, linear_kernel_coefficient,
    pde_residual, printed_delta0_exact, printed_delta0_numeric, quartic_kernel_coefficient,
};
use toa_core::numeric::{
    closed_form_global, global_toa_quadrature, poisson_bracket_check, series_vs_quadrature,
    ClosedSystem, NumericConfig, PhasePoint,
};
use toa_core::ratseries::{int, rat, to_f64};
use toa_core::tables::{table1_markdown, table2_markdown};
use toa_core::toa_local::{closed_form_coefficient, quartic_printed_numeric};
use toa_core::transforms::{
    ambiguity_transform, classical_limit, t_hbar_transform, weyl_kernel, SystemClass,
};
use toa_core::{
    local_toa_series, solve_time_kernel, verify_correspondence, Arrival, Monomial,
    PolynomialPotential, Rational, Series, TableSystem, TimeKernel,
};

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: &str, name: &str, ok: bool, detail: impl AsRef<str>) {
        let status = if ok { "PASS" } else { "FAIL" };
        if !ok {
            self.failures += 1;
        }
        let detail = detail.as_ref();
        if detail.is_empty() {
            println!("[{status}] {id} {name}");
        } else {
            println!("[{status}] {id} {name}: {detail}");
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn origin_series(v: &PolynomialPotential, depth: u32) -> Series {
    local_toa_series(v, depth, &Arrival::origin())
        .unwrap()
        .series
}

fn lam(m: Monomial, mu: i32, l: i32, h: i32) -> Monomial {
    m.with_mu(mu).with_sym("lambda", l).with_hbar(h)
}

fn criterion_1(r: &mut Report) {
    let (ok, took) = timed(|| {
        let mut ok = true;
        for system in [TableSystem::Linear, TableSystem::Harmonic] {
            let series = origin_series(&system.potential(), 10);
            for k in 0..=10u32 {
                let printed = closed_form_coefficient(system, k).unwrap();
                // independent closed forms
                let expected = match system {
                    TableSystem::Linear => {
                        let mut num = int(1);
                        for j in 1..=2 * k as i64 {
                            num *= int(j);
                        }
                        let mut den = int(1);
                        for j in 1..=k as i64 {
                            den *= int(2) * int(j) * int(j + 1);
                        }
                        let sign = if k % 2 == 0 { 1 } else { -1 };
                        int(sign) * num / den
                    }
                    _ => rat(if k % 2 == 0 { 1 } else { -1 }, 2 * k as i64 + 1),
                };
                ok &= printed.value == expected;
                ok &= -series.coeff(&printed.monomial) == expected;
            }
        }
        ok
    });
    r.check(
        "1",
        "local series reproduce linear and harmonic closed forms, k <= 10",
        ok && took < Duration::from_secs(1),
        format!("{took:.2?}"),
    );
}

fn criterion_2(r: &mut Report) {
    let (lin_ok, t_lin) = timed(|| {
        let lin = solve_time_kernel(&PolynomialPotential::linear(), 20).unwrap();
        let harm = solve_time_kernel(&PolynomialPotential::harmonic(), 20).unwrap();
        (0..=10).all(|k| {
            let (c, m) = linear_kernel_coefficient(k);
            let (hc, hm) = harmonic_kernel_coefficient(k);
            lin.series.coeff(&m) == c && harm.series.coeff(&hm) == hc
        }) && lin.series.len() == 11
            && harm.series.len() == 11
    });
    r.check(
        "2a",
        "kernel reproduces linear and harmonic closed forms, k <= 10",
        lin_ok,
        format!("{t_lin:.2?}"),
    );
    let (quart_ok, t_quart) = timed(|| {
        let quart = solve_time_kernel(&PolynomialPotential::quartic(), 12).unwrap();
        let delta = delta_table(6).unwrap();
        let mut count = 0;
        let mut ok = true;
        for n in 0..=6 {
            for m in 0..=n / 2 {
                let (c, mono) = quartic_kernel_coefficient(&delta, m, n);
                ok &= quart.series.coeff(&mono) == c;
                count += 1;
            }
        }
        ok && quart.series.len() == count
    });
    r.check(
        "2b",
        "quartic kernel equals Delta-table form, n <= 6, N = 12",
        quart_ok && t_quart < Duration::from_secs(5),
        format!("{t_quart:.2?}"),
    );
}

fn criterion_3(r: &mut Report) {
    let mut ok = true;
    for v in [
        PolynomialPotential::linear(),
        PolynomialPotential::harmonic(),
    ] {
        for n in (0..=12).step_by(2) {
            let k = solve_time_kernel(&v, n).unwrap();
            ok &= t_hbar_transform(&k).unwrap() == origin_series(&v, n / 2);
        }
    }
    r.check(
        "3",
        "T_hbar(kernel) = t_0 exactly for linear and harmonic, N <= 12",
        ok,
        "",
    );
}

fn criterion_4(r: &mut Report) {
    let v = PolynomialPotential::quartic();
    let mut classical = true;
    let mut graded = true;
    for n in (0..=12).step_by(2) {
        let t = t_hbar_transform(&solve_time_kernel(&v, n).unwrap()).unwrap();
        classical &= classical_limit(&t).unwrap() == origin_series(&v, n / 2);
        graded &= t
            .iter()
            .all(|(m, _)| m.hbar() == 0 || (m.hbar() >= 2 && m.hbar() % 2 == 0));
    }
    r.check(
        "4a",
        "quartic classical limit of T_hbar equals t_0, N <= 12",
        classical,
        "",
    );
    r.check(
        "4b",
        "quartic non-classical terms carry even hbar powers >= 2",
        graded,
        "",
    );

    let t = t_hbar_transform(&solve_time_kernel(&v, 4).unwrap()).unwrap();
    let k2 = t.coeff(&lam(Monomial::phase(9, 0, 5), 3, 2, 0));
    let local = origin_series(&v, 2).coeff(&lam(Monomial::phase(9, 0, 5), 3, 2, 0));
    r.check(
        "4c",
        "quartic k=2 classical term -16/15 mu^3 lambda^2 q^9/p^5",
        k2 == rat(-16, 15) && local == k2,
        format!("kernel pipeline {k2}, recurrence pipeline {local}"),
    );
    let hbar2 = t.coeff(&lam(Monomial::phase(3, 0, 5), 2, 1, 2));
    r.check(
        "4d",
        "quartic hbar^2 term 8 mu^2 lambda hbar^2 q^3/p^5",
        hbar2 == int(8),
        format!("transform yields coefficient {hbar2}"),
    );
}

fn criterion_5(r: &mut Report) {
    let mut ok = true;
    for v in [
        PolynomialPotential::linear(),
        PolynomialPotential::harmonic(),
    ] {
        let k = solve_time_kernel(&v, 12).unwrap();
        ok &= weyl_kernel(&origin_series(&v, 6)).unwrap() == k.series;
        let report = verify_correspondence(&v, 12).unwrap();
        ok &= report.system_class == SystemClass::Exact && report.weyl_equals_kernel;
    }
    r.check(
        "5a",
        "Weyl kernel of t_0 equals solved kernel, linear and harmonic",
        ok,
        "",
    );

    let report = verify_correspondence(&PolynomialPotential::quartic(), 12).unwrap();
    let delta = &report.delta_series;
    let graded = delta.iter().all(|(m, _)| m.hbar() + m.v() >= 2);
    let kernel = solve_time_kernel(&PolynomialPotential::quartic(), 12).unwrap();
    let complement = kernel.series.filter(|m, _| m.hbar() + m.v() >= 2);
    r.check(
        "5b",
        "quartic delta is nonempty and is exactly the hbar + v >= 2 part",
        !delta.is_empty() && graded && *delta == complement && report.weyl_matches_leading_family,
        format!("{} terms", delta.len()),
    );
    let d = delta_table(2).unwrap();
    let (c, m) = quartic_kernel_coefficient(&d, 1, 2);
    let lowest = delta.iter().min_by_key(|(m, _)| (m.v(), m.u()));
    let expected_c = rat(1, 4) * rat(1, 6) * rat(1, 8);
    r.check(
        "5c",
        "lowest delta term (1/4) Delta_12 (mu lambda/8) hbar^-2 u^3 v^4, Delta_12 = 1/6",
        d.get(1, 2) == rat(1, 6)
            && c == expected_c
            && m == lam(Monomial::kernel(3, 4), 1, 1, -2)
            && lowest == Some((&m, &c)),
        format!("{:?}", lowest.map(|(m, c)| format!("{c} {m}"))),
    );
}

fn criterion_6(r: &mut Report) {
    let systems = [
        ("free", PolynomialPotential::free()),
        ("linear", PolynomialPotential::linear()),
        ("harmonic", PolynomialPotential::harmonic()),
        ("quartic", PolynomialPotential::quartic()),
    ];
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, v) in systems {
        let k = solve_time_kernel(&v, 12).unwrap();
        let residual = pde_residual(&k).unwrap().is_empty();
        let boundary = boundary_report(&k).unwrap();
        ok &= residual && boundary.passed();
        if !(residual && boundary.passed()) {
            detail.push(format!("{name}: residual {residual}, {boundary:?}"));
        }
    }
    let free = TimeKernel::free();
    ok &= pde_residual(&free).unwrap().is_empty() && boundary_report(&free).unwrap().passed();
    r.check(
        "6",
        "residual vanishes and all boundary conditions hold at N = 12",
        ok,
        detail.join("; "),
    );
}

fn criterion_7(r: &mut Report) {
    let mut ok = true;
    for c in [int(1), int(0), int(5), rat(-3, 7)] {
        let a = ambiguity_transform(&c);
        let expected = if c == int(0) {
            Series::zero(toa_core::Space::Phase)
        } else {
            Series::term(
                toa_core::Space::Phase,
                &c * int(-2),
                Monomial::phase(0, 0, 2).with_mu(1).with_hbar(1),
            )
            .unwrap()
        };
        ok &= a == expected && classical_limit(&a).unwrap().is_empty();
    }
    r.check(
        "7",
        "ambiguity term is -2 c mu hbar/p^2 and has no classical part",
        ok,
        "",
    );
}

fn random_points(
    rng: &mut StdRng,
    accept: impl Fn(&PhasePoint) -> bool,
    base: PhasePoint,
) -> Vec<PhasePoint> {
    let mut out = Vec::new();
    while out.len() < 100 {
        let q = rng.gen_range(-2.0..2.0);
        let mag = rng.gen_range(0.3..3.0);
        let p = if rng.gen_bool(0.5) { mag } else { -mag };
        let pt = base.at(q, p);
        if accept(&pt) {
            out.push(pt);
        }
    }
    out
}

fn criterion_8(r: &mut Report) {
    let cfg = NumericConfig::default();
    let mut rng = StdRng::seed_from_u64(20260415);
    let mut worst = 0.0f64;
    let mut quad_worst = 0.0f64;
    let mut ok = true;
    for system in [
        ClosedSystem::Free,
        ClosedSystem::Linear,
        ClosedSystem::Harmonic,
    ] {
        let base = PhasePoint::new(0.0, 1.0)
            .with_param("lambda", 0.7)
            .with_param("omega", 1.3);
        let v = system.potential();
        let pts = random_points(
            &mut rng,
            |pt| {
                // classically accessible and away from the linear branch point
                global_toa_quadrature(&v, pt, &cfg).is_ok()
                    && closed_form_global(system, pt).is_ok()
                    && 1.0 + 2.0 * 0.7 * pt.q / (pt.p * pt.p) > 0.1
            },
            base,
        );
        for pt in &pts {
            let f = |q: f64, p: f64| closed_form_global(system, &pt.at(q, p));
            match poisson_bracket_check(f, &v, pt, &cfg) {
                Ok(res) => worst = worst.max(res),
                Err(_) => ok = false,
            }
            let a = global_toa_quadrature(&v, pt, &cfg).unwrap();
            let b = closed_form_global(system, pt).unwrap();
            quad_worst = quad_worst.max((a - b).abs());
        }
    }
    r.check(
        "8a",
        "Poisson bracket {H, T} = 1 for closed forms at 300 random accessible points",
        ok && worst < 1e-6,
        format!("max residual {worst:.2e}"),
    );
    r.check(
        "8b",
        "quadrature matches closed forms at the same points",
        quad_worst < 1e-6,
        format!("max deviation {quad_worst:.2e}"),
    );

    let harm = PolynomialPotential::harmonic();
    let quart = PolynomialPotential::quartic();
    let mut max_err = 0.0f64;
    let mut in_region = true;
    for (q, p) in [(-1.0, 2.0), (0.5, 1.5), (-0.3, -1.0), (1.2, 3.0)] {
        let pt = PhasePoint::new(q, p).with_param("omega", 1.0);
        let c = series_vs_quadrature(&harm, &pt, 20, &cfg).unwrap();
        in_region &= c.in_region;
        max_err = max_err.max(c.abs_error);
    }
    for (q, p) in [(-0.5, 2.0), (0.4, 1.5), (-0.6, -2.5), (0.8, 3.0)] {
        let pt = PhasePoint::new(q, p).with_param("lambda", 1.0);
        let c = series_vs_quadrature(&quart, &pt, 15, &cfg).unwrap();
        in_region &= c.in_region;
        max_err = max_err.max(c.abs_error);
    }
    r.check(
        "8c",
        "series vs quadrature inside the region: harmonic K=20, quartic K=15",
        in_region && max_err < 1e-6,
        format!("max error {max_err:.2e}"),
    );

    let pt = PhasePoint::new(-1.0, 2.0).with_param("omega", 1.0);
    let h = global_toa_quadrature(&harm, &pt, &cfg).unwrap();
    let pt = PhasePoint::new(1.0, 2.0).with_param("lambda", 1.0);
    let l = global_toa_quadrature(&PolynomialPotential::linear(), &pt, &cfg).unwrap();
    r.check(
        "8d",
        "quadrature reference values 0.463648 (harmonic) and -0.449490 (linear)",
        (h - 0.463648).abs() < 1e-6 && (l + 0.449490).abs() < 1e-6,
        format!("{h:.9}, {l:.9}"),
    );
}

fn criterion_9(r: &mut Report) {
    let g = gamma(0.75).powi(2);
    let mut worst = 0.0f64;
    let mut exact = true;
    let series = origin_series(&PolynomialPotential::quartic(), 5);
    for k in 0..=5 {
        let c = closed_form_coefficient(TableSystem::Quartic, k).unwrap();
        let recurrence = -series.coeff(&c.monomial);
        exact &= c.printed_over_gamma_sq.as_ref() == Some(&recurrence);
        worst = worst.max((quartic_printed_numeric(k) / to_f64(&recurrence) - g).abs());
    }
    let md1 = table1_markdown(5).unwrap();
    r.check(
        "9a",
        "printed quartic coefficient / recurrence = Gamma(3/4)^2, k <= 5",
        exact && worst < 1e-9 && md1.contains("Gamma(3/4)^2"),
        format!("max deviation {worst:.2e}"),
    );

    let d = delta_table(5).unwrap();
    let mut ok = true;
    let mut worst = 0.0f64;
    for n in 0..=5 {
        let rec: Rational = d.get(0, n);
        ok &= printed_delta0_exact(n) == rat(-1, 4) * &rec;
        worst = worst.max((printed_delta0_numeric(n) / to_f64(&rec) + 0.25).abs());
    }
    let md2 = table2_markdown(10).unwrap();
    r.check(
        "9b",
        "printed Delta_0n = -1/4 x recurrence, n <= 5",
        ok && worst < 1e-9 && md2.contains("-1/4 times"),
        format!("max deviation {worst:.2e}"),
    );
}

fn main() {
    let mut r = Report { failures: 0 };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    if r.failures > 0 {
        println!("{} acceptance check(s) failed", r.failures);
        std::process::exit(1);
    }
    println!("all acceptance checks passed");
}
