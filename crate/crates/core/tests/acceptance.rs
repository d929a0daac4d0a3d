//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polyconfig_core::admissibility::{
    admissible, nonexistence_certificate, tangential_scan, CertificateConfig, Verdict,
};
use polyconfig_core::grid::GridSpec;
use polyconfig_core::lemmas::{height_gap_suite, radial_gap_suite, series_suite, sine_zero_suite};
use polyconfig_core::solver::{
    equal_size_height, existence_scan_b, solve_planar, SpatialOptions, SCAN_HEADER,
};
use polyconfig_core::{
    build, cc_residual, cc_residual_with_tolerance, centered_positions, constant_a,
    residual_vector, BodySystem, ThetaChoice, TwistedPairParams,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ngon(n: usize) -> BodySystem {
    let q = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [t.cos(), t.sin(), 0.0]
        })
        .collect();
    BodySystem::new(vec![1.0; n], q).unwrap()
}

fn regular_polygon_oracle() -> Outcome {
    let mut worst_res = 0.0_f64;
    let mut worst_lambda = 0.0_f64;
    for n in 2..=12 {
        let r = cc_residual(&ngon(n));
        worst_res = worst_res.max(r.max_residual_norm);
        worst_lambda = worst_lambda.max((r.lambda - constant_a(n)).abs() / constant_a(n));
    }
    outcome(
        worst_res < 1e-10 && worst_lambda < 1e-10,
        format!("max residual {worst_res:.2e}, max relative lambda error {worst_lambda:.2e}"),
    )
}

fn regular_double_polygon() -> Outcome {
    let mut central = 0.0_f64;
    let mut perturbed = f64::INFINITY;
    for n in 2..=12 {
        let p = TwistedPairParams::new(n, n, 1.0, 1.0, 0.0, PI / n as f64).unwrap();
        central = central.max(cc_residual(&build(&p).unwrap()).max_residual_norm);
        let q = TwistedPairParams::new(n, n, 1.0, 1.01, 0.0, PI / n as f64).unwrap();
        perturbed = perturbed.min(cc_residual(&build(&q).unwrap()).max_residual_norm);
    }
    outcome(
        central < 1e-10 && perturbed > 1e-4,
        format!("b = 1 residual {central:.2e}, b = 1.01 residual >= {perturbed:.2e}"),
    )
}

fn sine_zero_characterisation() -> Outcome {
    let report = sine_zero_suite(&(2..=10).collect::<Vec<_>>(), &[0.5, 1.0, 2.0], &[0.0, 0.5, 2.0], 8);
    outcome(
        report.passed(),
        format!(
            "{} zeros checked, max distance to j*pi/N {:.2e}, {} violations",
            report.evaluations,
            report.max,
            report.violations.len()
        ),
    )
}

fn planar_two_roots() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_product = 0.0_f64;
    for n in 3..=12 {
        for b in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let roots = match solve_planar(n, b, ThetaChoice::Aligned) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("N={n} b={b}: {e}"));
                    continue;
                }
            };
            let verified = roots.iter().all(|r| r.converged);
            let split = roots.len() == 2 && roots[0].params.a < 1.0 && roots[1].params.a > 1.0;
            if !(verified && split) {
                failures.push(format!(
                    "N={n} b={b}: {} roots {:?}",
                    roots.len(),
                    roots.iter().map(|r| (r.params.a, r.oracle_residual)).collect::<Vec<_>>()
                ));
                continue;
            }
            if b == 1.0 {
                let p = (roots[0].params.a * roots[1].params.a - 1.0).abs();
                worst_product = worst_product.max(p);
                if p > 1e-8 {
                    failures.push(format!("N={n}: a1*a2 - 1 = {p:e}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("worst |a1*a2 - 1| at b = 1: {worst_product:.2e}; failures: {failures:?}"),
    )
}

/// Raw four-body balance for two perpendicular unit segments at z = 0 and
/// z = h, solved for (h, λ) by Newton with a forward-difference Jacobian.
fn four_body_height() -> f64 {
    let residual = |h: f64, lambda: f64| {
        let q = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, h], [0.0, -1.0, h]];
        let c = [0.0, 0.0, h / 2.0];
        let mut f = [0.0; 3];
        for j in 1..4 {
            let d = [q[j][0] - q[0][0], q[j][1] - q[0][1], q[j][2] - q[0][2]];
            let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            for i in 0..3 {
                f[i] += d[i] / (r * r * r);
            }
        }
        [f[0] + lambda * (q[0][0] - c[0]), f[2] + lambda * (q[0][2] - c[2])]
    };
    let (mut h, mut lambda) = (1.0, 1.0);
    for _ in 0..60 {
        let r = residual(h, lambda);
        let e = 1e-7;
        let rh = residual(h + e, lambda);
        let rl = residual(h, lambda + e);
        let j = [
            [(rh[0] - r[0]) / e, (rl[0] - r[0]) / e],
            [(rh[1] - r[1]) / e, (rl[1] - r[1]) / e],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let dh = (-r[0] * j[1][1] + r[1] * j[0][1]) / det;
        let dl = (-r[1] * j[0][0] + r[0] * j[1][0]) / det;
        h += dh;
        lambda += dl;
        if dh.abs() < 1e-15 && dl.abs() < 1e-15 {
            break;
        }
    }
    h
}

fn equal_size_heights() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0_f64;
    for n in 2..=10 {
        for choice in ThetaChoice::ALL {
            match equal_size_height(n, choice) {
                Ok(h) => {
                    let p = TwistedPairParams::new(n, n, 1.0, 1.0, h, choice.angle(n)).unwrap();
                    let r = cc_residual_with_tolerance(&centered_positions(&p).unwrap(), 1e-8);
                    worst = worst.max(r.max_residual_norm);
                    if !r.is_central {
                        failures.push(format!("N={n} {choice:?}: oracle {:.2e}", r.max_residual_norm));
                    }
                }
                Err(e) => failures.push(format!("N={n} {choice:?}: {e}")),
            }
        }
    }
    let raw = four_body_height();
    let lib = equal_size_height(2, ThetaChoice::Staggered).unwrap_or(f64::NAN);
    let diff = (raw - lib).abs();
    outcome(
        failures.is_empty() && diff < 1e-8,
        format!(
            "worst oracle residual {worst:.2e}; four-body h = {raw:.15}, library h = {lib:.15}, diff {diff:.1e}; failures: {failures:?}"
        ),
    )
}

fn lemma_sign_suites() -> Outcome {
    let ns: Vec<usize> = (2..=12).collect();
    let radial = radial_gap_suite(&ns, &GridSpec::log(1e-2, 1e2, 200));
    let height = height_gap_suite(&ns, &GridSpec::log(0.05, 20.0, 200), &GridSpec::linear(0.0, 100.0, 50));
    let series = series_suite(&ns, 200, 0.5);
    let v = radial.violations.len() + height.violations.len() + series.violations.len();
    outcome(
        v == 0,
        format!(
            "radial gap {} evals (min signed {:.2e}), height gap {} evals (min signed {:.2e}), series {} coefficients (max {:.2e}); {v} violations",
            radial.evaluations, radial.min, height.evaluations, height.min, series.evaluations, series.max
        ),
    )
}

fn doubled_ring_nonexistence() -> Outcome {
    let config = CertificateConfig::default();
    let mut floor_ok = true;
    let mut random_ok = true;
    let mut lines = Vec::new();
    for n in 2..=8 {
        let c = nonexistence_certificate(n, &config).unwrap();
        floor_ok &= c.polished_minimum.max_residual >= 1e-3;
        random_ok &= c.random.below_threshold == 0 && c.height_gap.violations == 0 && c.radial_gap.violations == 0;
        lines.push(format!(
            "N={n}: polished min {:.2e} at (a={:.3}, b={:.3}, h={:.3}), random min {:.2e}",
            c.polished_minimum.max_residual,
            c.polished_minimum.a,
            c.polished_minimum.b,
            c.polished_minimum.h,
            c.random.best.max_residual
        ));
    }
    outcome(
        floor_ok && random_ok,
        format!(
            "floor >= 1e-3: {}; random draws and sign scans clean: {}; {}",
            if floor_ok { "yes" } else { "no" },
            if random_ok { "yes" } else { "no" },
            lines.join("; ")
        ),
    )
}

fn admissibility_table() -> Outcome {
    let mut mismatches = Vec::new();
    let mut inadmissible = Vec::new();
    for n in 2..=24 {
        for l in n..=24 {
            let r = admissible(n, l).unwrap();
            if (r.verdict != Verdict::Inadmissible) != (l == n || l == 2 * n) {
                mismatches.push((n, l));
            }
            if r.verdict == Verdict::Inadmissible {
                inadmissible.push((n, l));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sample: Vec<_> = inadmissible.choose_multiple(&mut rng, 20).copied().collect();
    let mut worst = f64::INFINITY;
    for &(n, l) in &sample {
        for (a, h) in [(0.9, 0.1), (1.0, 0.15), (1.0, 0.5)] {
            let s = tangential_scan(n, l, a, h).unwrap();
            worst = worst.min(s.min_max_tangential);
        }
    }
    outcome(
        mismatches.is_empty() && worst > 1e-6,
        format!(
            "{} inadmissible pairs, verdict mismatches {mismatches:?}; float scan over 20 pairs: smallest max tangential {worst:.2e}",
            inadmissible.len()
        ),
    )
}

fn existence_scans() -> Outcome {
    let grid = GridSpec::log(0.01, 100.0, 40).values();
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [100, 500] {
        let table = existence_scan_b(n, ThetaChoice::Aligned, &grid, &SpatialOptions::default()).unwrap();
        let csv = table.to_csv();
        let mut lines = csv.lines();
        let header_ok = lines.next() == Some(SCAN_HEADER);
        let rows_ok = lines.all(|l| l.split(',').count() == 7);
        let counts = table.counts();
        let complete = counts.len() == grid.len();
        let mut oracle_ok = table.oracle_failures == 0;
        for row in table.rows.iter().filter(|r| r.converged) {
            let p = TwistedPairParams::new(n, n, row.a.unwrap(), row.b, row.h.unwrap(), row.theta).unwrap();
            oracle_ok &= cc_residual_with_tolerance(&centered_positions(&p).unwrap(), 1e-8).is_central;
        }
        pass &= header_ok && rows_ok && complete && oracle_ok;
        let with_roots = counts.iter().filter(|c| c.1 > 0).count();
        parts.push(format!(
            "N={n}: {} rows, {with_roots}/{} mass ratios with roots, oracle {}",
            table.rows.len(),
            grid.len(),
            if oracle_ok { "ok" } else { "FAILED" }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn rotate_z(q: [f64; 3], t: f64) -> [f64; 3] {
    let (s, c) = t.sin_cos();
    [c * q[0] - s * q[1], s * q[0] + c * q[1], q[2]]
}

fn property_suite() -> Outcome {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 128,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let params = (2usize..=6, 0usize..=2, 0.3f64..3.0, 0.1f64..5.0, 0.0f64..2.0, 0.0f64..(2.0 * PI))
        .prop_filter_map("valid", |(n, extra, a, b, h, t)| {
            let p = TwistedPairParams::new(n, n + extra * n / 2, a, b, h, t).ok()?;
            build(&p).ok().map(|_| p)
        });
    let invariance = runner.run(&(params, 0.0f64..(2.0 * PI), 0.2f64..5.0, 0.1f64..10.0), |(p, angle, s, c)| {
        let sys = centered_positions(&p).unwrap();
        let base = cc_residual(&sys);
        let rotated = sys.map_positions(|q| rotate_z(q, angle)).unwrap();
        let r = cc_residual(&rotated);
        prop_assert!((r.lambda - base.lambda).abs() <= 1e-10 * base.lambda);
        prop_assert!((r.max_residual_norm - base.max_residual_norm).abs() <= 1e-9 * base.lambda);
        let scaled = sys.map_positions(|q| [s * q[0], s * q[1], s * q[2]]).unwrap();
        let r = cc_residual(&scaled);
        prop_assert!((r.lambda - base.lambda / (s * s * s)).abs() <= 1e-10 * r.lambda);
        let heavy = sys.scale_masses(c).unwrap();
        let r = cc_residual(&heavy);
        prop_assert!((r.lambda - c * base.lambda).abs() <= 1e-10 * r.lambda);
        Ok(())
    });

    // Equivalence needs central draws too: perturb solved configurations by
    // a random amount, including zero.
    let mut central_params = Vec::new();
    for n in 2..=6 {
        for choice in ThetaChoice::ALL {
            let h = equal_size_height(n, choice).unwrap();
            central_params.push(TwistedPairParams::new(n, n, 1.0, 1.0, h, choice.angle(n)).unwrap());
        }
        for r in solve_planar(n.max(3), 0.5, ThetaChoice::Aligned).unwrap() {
            central_params.push(r.params);
        }
    }
    let k = central_params.len();
    let equivalence = runner.run(&(0..k, prop_oneof![Just(0.0), 1e-6f64..1e-1]), |(i, eps)| {
        let p = central_params[i];
        let q = TwistedPairParams::new(p.n, p.l, p.a, p.b * (1.0 + eps), p.h, p.theta).unwrap();
        let reduced = residual_vector(&q).unwrap();
        let reduced_zero = reduced.max_abs() <= 1e-9 * reduced.mu_lower.abs().max(1.0);
        let oracle = cc_residual_with_tolerance(&centered_positions(&q).unwrap(), 1e-8).is_central;
        prop_assert_eq!(reduced_zero, oracle, "eps = {}", eps);
        prop_assert_eq!(oracle, eps == 0.0);
        Ok(())
    });
    let mut detail = String::from("128 draws each for invariance and equivalence");
    if let Err(e) = &invariance {
        detail.push_str(&format!("; invariance: {e}"));
    }
    if let Err(e) = &equivalence {
        detail.push_str(&format!("; equivalence: {e}"));
    }
    outcome(invariance.is_ok() && equivalence.is_ok(), detail)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("regular polygon oracle", regular_polygon_oracle),
        ("regular 2N-gon from two twisted N-gons", regular_double_polygon),
        ("tangential zero angles", sine_zero_characterisation),
        ("planar two-root structure", planar_two_roots),
        ("equal-size unique heights", equal_size_heights),
        ("lemma sign suites", lemma_sign_suites),
        ("L = 2N nonexistence", doubled_ring_nonexistence),
        ("admissibility", admissibility_table),
        ("existence scans over b", existence_scans),
        ("property suite", property_suite),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let elapsed: Duration = start.elapsed();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} [{:.2}s] {name}: {}", i + 1, elapsed.as_secs_f64(), o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
