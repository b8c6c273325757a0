//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use facmech::axioms::{
    check_anonymity, check_pareto, check_strategy_proofness, find_manipulation, verify_certificate,
    Certificate, SearchBudget, Witness,
};
use facmech::geometry::{
    coordinate_median, distance, geometric_median, smallest_enclosing_circle, total_distance,
    EvenMedian, Metric, Point,
};
use facmech::harness::bench::{run_bench, BenchConfig, Parity};
use facmech::mechanisms::{
    run_mechanism, AgentProfile, FacilitySpec, MechanismDescriptor, MechanismKind, Solution,
};
use facmech::scenarios::{run_scenario, scenario};
use facmech::welfare::{approximation_ratio, evaluate, optimal_welfare, Ratio, WelfareObjective};

type Check = Result<String, String>;

/// Every certificate produced anywhere in the suite, replayed by criterion 11.
static EMITTED: Mutex<Vec<Certificate>> = Mutex::new(Vec::new());

fn emit(cert: &Certificate) {
    EMITTED.lock().unwrap().push(cert.clone());
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn lib<T>(r: facmech::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn within(elapsed: Duration, limit: Duration) -> Check {
    ensure!(elapsed < limit, "took {elapsed:.2?}, limit {limit:?}");
    Ok(format!("{elapsed:.2?}"))
}

fn corners() -> AgentProfile {
    AgentProfile::planar(
        &[(0., 0.), (0., 2.), (12., 0.), (12., 2.)],
        Metric::Euclidean,
    )
    .unwrap()
}

fn random_profile(
    rng: &mut ChaCha8Rng,
    n: usize,
    side: f64,
    step: Option<f64>,
    metric: Metric,
) -> AgentProfile {
    let mut coord = || {
        let v = rng.random_range(0.0..=side);
        match step {
            Some(s) => (v / s).round() * s,
            None => v,
        }
    };
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (coord(), coord())).collect();
    AgentProfile::planar(&pts, metric).unwrap()
}

fn gm_arithmetic() -> Check {
    let start = Instant::now();
    let profile = corners();
    let gm = lib(geometric_median(profile.agents(), 1e-9))?;
    ensure!(gm.max_abs_diff(&Point::xy(6., 1.)) < 1e-6, "median {gm:?}");
    let at_gm = total_distance(profile.agents(), &gm, Metric::Euclidean);
    let exact = 4.0 * 37f64.sqrt();
    ensure!((at_gm - exact).abs() < 1e-9, "total {at_gm} vs {exact}");
    let offset = 2.0 * (50f64.sqrt() + 26f64.sqrt());
    for x in [5.0, 7.0] {
        let t = total_distance(profile.agents(), &Point::xy(x, 1.), Metric::Euclidean);
        ensure!((t - offset).abs() < 1e-9, "total at ({x}, 1) is {t}");
    }
    let ratio = offset / at_gm;
    ensure!(ratio > 1.0003 && ratio < 1.0004, "ratio {ratio}");
    let t = within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("ratio {ratio:.6}, {t}"))
}

fn gm_misreport() -> Check {
    let reported = AgentProfile::planar(
        &[(0., 0.), (0., 2.), (12., 2.), (12., 2.)],
        Metric::Euclidean,
    )
    .unwrap();
    let gm = lib(geometric_median(reported.agents(), 1e-9))?;
    ensure!(gm.max_abs_diff(&Point::xy(12., 2.)) < 1e-6, "median {gm:?}");
    let total = total_distance(reported.agents(), &gm, Metric::Euclidean);
    let exact = 12.0 + 2.0 * 37f64.sqrt();
    ensure!(
        (total - exact).abs() < 1e-6,
        "reported total {total} vs {exact}"
    );

    let desc = MechanismDescriptor::new(MechanismKind::GeometricMedian);
    let spec = FacilitySpec::uncapacitated(1);
    let budget = SearchBudget::default();
    let first = lib(check_strategy_proofness(&desc, &corners(), &spec, &budget))?
        .ok_or("checker found no manipulation")?;
    emit(&first);
    ensure!(
        first.improvement >= 4.0,
        "first certificate gain {}",
        first.improvement
    );
    let agent2 = lib(find_manipulation(&desc, &corners(), &spec, &budget, 2))?
        .ok_or("no manipulation for agent (12,0)")?;
    emit(&agent2);
    ensure!(
        agent2.improvement >= 4.0,
        "agent (12,0) gain {}",
        agent2.improvement
    );
    let first_agent = match &first.witness {
        Witness::Misreport { agent, .. } => *agent,
        _ => return Err("wrong witness".into()),
    };
    Ok(format!(
        "reported total {total:.6}; first certificate agent {first_agent} gain {:.4}; agent (12,0) gain {:.4}",
        first.improvement, agent2.improvement
    ))
}

fn onecentre_gain() -> Check {
    let profile = AgentProfile::planar(&[(0., 0.), (0., 0.), (0., 1.)], Metric::Euclidean).unwrap();
    let desc = MechanismDescriptor::new(MechanismKind::OneCentre);
    let cert = lib(check_strategy_proofness(
        &desc,
        &profile,
        &FacilitySpec::uncapacitated(1),
        &SearchBudget::default(),
    ))?
    .ok_or("no manipulation found")?;
    emit(&cert);
    ensure!(
        (cert.improvement - 0.5).abs() <= 1e-9,
        "gain {}",
        cert.improvement
    );
    Ok(format!("gain {}", cert.improvement))
}

fn median_in_circle() -> Check {
    let start = Instant::now();
    let sizes = [3usize, 5, 7, 9];
    let failures: usize = (0..10_000u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(t);
            let n = sizes[rng.random_range(0..sizes.len())];
            let profile = random_profile(&mut rng, n, 100.0, None, Metric::Euclidean);
            let med = coordinate_median(profile.agents(), EvenMedian::Lower).unwrap();
            let circle = smallest_enclosing_circle(profile.agents()).unwrap();
            let d = distance(&med, &circle.center, Metric::Euclidean).unwrap();
            usize::from(d > circle.radius + 1e-9)
        })
        .sum();
    ensure!(failures == 0, "{failures} medians outside the circle");
    let t = within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("10000 profiles, 0 failures, {t}"))
}

fn median_max_bench() -> Check {
    let config = BenchConfig {
        trials: 10_000,
        parity: Some(Parity::Odd),
        objective: WelfareObjective::Max,
        ..BenchConfig::default()
    };
    let s = lib(run_bench(&config, &MechanismDescriptor::multi_dim_median()))?;
    ensure!(s.evaluated == 10_000, "evaluated {} of 10000", s.evaluated);
    ensure!(s.infinite == 0, "{} infinite ratios", s.infinite);
    ensure!(s.max_ratio <= 2.0 + 1e-6, "max ratio {}", s.max_ratio);
    Ok(format!(
        "max ratio {:.6}, mean {:.6}",
        s.max_ratio, s.mean_ratio
    ))
}

fn median_total_bench() -> Check {
    let mut parts = Vec::new();
    for n in [3usize, 5, 7, 9] {
        let config = BenchConfig {
            trials: 2_500,
            n_min: n,
            n_max: n,
            seed: n as u64,
            objective: WelfareObjective::Total,
            ..BenchConfig::default()
        };
        let s = lib(run_bench(&config, &MechanismDescriptor::multi_dim_median()))?;
        let nf = n as f64;
        let bound = 2f64.sqrt() * (nf * nf + 1.0).sqrt() / (nf + 1.0);
        ensure!(s.evaluated == 2_500, "n={n}: evaluated {}", s.evaluated);
        ensure!(
            s.max_ratio <= bound + 1e-6,
            "n={n}: max {} > bound {bound}",
            s.max_ratio
        );
        parts.push(format!("n={n} {:.4}<={:.4}", s.max_ratio, bound));
    }
    Ok(parts.join(", "))
}

fn percentile_unbounded() -> Check {
    let expected = [
        ("thm4_case1", 2f64.sqrt()),
        ("thm4_case2", 2f64.sqrt()),
        ("thm4_case3", 1.0),
    ];
    let mut parts = Vec::new();
    for (name, mech_welfare) in expected {
        let sc = lib(scenario(name))?;
        let desc = sc.mechanism.as_ref().ok_or("fixture has no mechanism")?;
        let r = lib(approximation_ratio(
            desc,
            &sc.profile,
            &sc.spec,
            WelfareObjective::Max,
        ))?;
        ensure!(
            r.optimal_welfare.abs() < 1e-9,
            "{name}: optimum {}",
            r.optimal_welfare
        );
        ensure!(
            (r.mechanism_welfare - mech_welfare).abs() < 1e-9,
            "{name}: mechanism welfare {}",
            r.mechanism_welfare
        );
        ensure!(r.ratio == Ratio::Infinite, "{name}: ratio {:?}", r.ratio);
        ensure!(lib(run_scenario(name))?.passed(), "{name}: scenario failed");
        parts.push(format!("{name} {:.6}/0=inf", r.mechanism_welfare));
    }
    Ok(parts.join(", "))
}

fn manhattan_axioms() -> Check {
    let budget = SearchBudget {
        grid_resolution: 0.1,
        random_restarts: 0,
        seed: 0,
        bounding_box_pad: 0.5,
    };
    let spec = FacilitySpec::uncapacitated(1);
    let cases = [
        (
            MechanismDescriptor::new(MechanismKind::CoordinateMax),
            2usize,
        ),
        (MechanismDescriptor::new(MechanismKind::CoordinateMin), 2),
        (MechanismDescriptor::multi_dim_median(), 3),
    ];
    for (desc, n) in &cases {
        let found: Vec<Certificate> = (0..1_000u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(1_000_000 + t);
                let profile = random_profile(&mut rng, *n, 2.0, Some(0.1), Metric::Manhattan);
                let sol = run_mechanism(desc, &profile, &spec).unwrap();
                let pareto = check_pareto(&profile, &sol, &budget).unwrap();
                let sp = check_strategy_proofness(desc, &profile, &spec, &budget).unwrap();
                pareto.into_iter().chain(sp).collect::<Vec<_>>()
            })
            .flatten()
            .collect();
        found.iter().for_each(emit);
        ensure!(
            found.is_empty(),
            "{}: {} violations, first {:?}",
            desc.kind.as_str(),
            found.len(),
            found[0]
        );
    }

    let instances = [
        (vec![(0., 2.), (1., 0.), (2., 1.)], Point::xy(2., 2.)),
        (
            vec![(0., 2.), (1., 0.), (2., 1.), (3., 0.)],
            Point::xy(0., 0.),
        ),
    ];
    let mut found_at = Vec::new();
    for (agents, facility) in instances {
        let profile = AgentProfile::planar(&agents, Metric::Manhattan).unwrap();
        let sol = Solution {
            locations: vec![facility],
            assignment: vec![0; profile.len()],
        };
        let cert = lib(check_pareto(&profile, &sol, &budget))?.ok_or("no domination found")?;
        emit(&cert);
        let Witness::Dominating { dominating, .. } = &cert.witness else {
            return Err("wrong witness".into());
        };
        let at = &dominating.locations[0];
        ensure!(
            at.max_abs_diff(&Point::xy(1., 1.)) <= 0.1 + 1e-12,
            "dominated by {at:?}"
        );
        found_at.push(format!("({}, {})", at.x(), at.y()));
    }
    Ok(format!(
        "3000 profiles clean; dominating points {}",
        found_at.join(" ")
    ))
}

fn manhattan_median_optimal() -> Check {
    let spec = FacilitySpec::uncapacitated(1);
    let desc = MechanismDescriptor::multi_dim_median();
    let results: Vec<(f64, f64)> = (0..1_000u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(2_000_000 + t);
            let n = rng.random_range(1..=9);
            let profile = random_profile(&mut rng, n, 100.0, None, Metric::Manhattan);
            let sol = run_mechanism(&desc, &profile, &spec).unwrap();
            let total = evaluate(&profile, &sol, WelfareObjective::Total).unwrap();
            let (best, _) = optimal_welfare(&profile, &spec, WelfareObjective::Total).unwrap();
            let max = approximation_ratio(&desc, &profile, &spec, WelfareObjective::Max).unwrap();
            ((total - best).abs(), max.ratio.value())
        })
        .collect();
    let gap = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    ensure!(gap <= 1e-9, "total gap {gap}");
    ensure!(worst <= 2.0 + 1e-6, "max ratio {worst}");
    Ok(format!("total gap {gap:.2e}, max ratio {worst:.6}"))
}

/// Best placement of two facilities on a grid, agents to the nearer one.
fn grid_two_facilities(profile: &AgentProfile, objective: WelfareObjective, res: f64) -> f64 {
    let steps = (1.0 / res).round() as usize;
    let grid: Vec<Point> = (0..=steps)
        .flat_map(|i| (0..=steps).map(move |j| Point::xy(i as f64 * res, j as f64 * res)))
        .collect();
    let metric = profile.metric();
    let dist: Vec<Vec<f64>> = grid
        .iter()
        .map(|g| {
            profile
                .agents()
                .iter()
                .map(|a| distance(a, g, metric).unwrap())
                .collect()
        })
        .collect();
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            for j in i..grid.len() {
                let mut acc = 0.0;
                for k in 0..profile.len() {
                    let d = dist[i][k].min(dist[j][k]);
                    acc = match objective {
                        WelfareObjective::Total => acc + d,
                        WelfareObjective::Max => f64::max(acc, d),
                    };
                }
                best = best.min(acc);
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn oracle_vs_grid() -> Check {
    let start = Instant::now();
    let spec = FacilitySpec::uncapacitated(2);
    let combos = [
        (Metric::Euclidean, WelfareObjective::Total),
        (Metric::Euclidean, WelfareObjective::Max),
        (Metric::Manhattan, WelfareObjective::Total),
        (Metric::Manhattan, WelfareObjective::Max),
    ];
    let mut worst = (0.0f64, 0u64);
    let mut over = Vec::new();
    for t in 0..200u64 {
        let (metric, objective) = combos[t as usize % 4];
        let mut rng = ChaCha8Rng::seed_from_u64(3_000_000 + t);
        let n = rng.random_range(2..=8);
        let profile = random_profile(&mut rng, n, 1.0, None, metric);
        let (exact, sol) = lib(optimal_welfare(&profile, &spec, objective))?;
        let replayed = lib(evaluate(&profile, &sol, objective))?;
        ensure!(
            (replayed - exact).abs() < 1e-9,
            "instance {t}: oracle value {exact} vs its solution {replayed}"
        );
        let grid = grid_two_facilities(&profile, objective, 0.05);
        ensure!(
            exact <= grid + 1e-9,
            "instance {t}: oracle {exact} above grid {grid}"
        );
        if grid - exact > worst.0 {
            worst = (grid - exact, t);
        }
        if grid - exact > 0.08 {
            over.push(format!(
                "{t} ({} {} n={n}, gap {:.4})",
                metric.as_str(),
                objective.as_str(),
                grid - exact
            ));
        }
    }
    ensure!(
        over.is_empty(),
        "{} of 200 instances exceed 0.08: {}",
        over.len(),
        over.join(", ")
    );
    let t = within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "200 instances, largest gap {:.4} (instance {}), {t}",
        worst.0, worst.1
    ))
}

/// Runs all three checkers over random profiles and a spread of mechanisms.
fn fuzz_certificates() -> Vec<Certificate> {
    let mechanisms = vec![
        MechanismDescriptor::serial_dictatorship(None),
        MechanismDescriptor::new(MechanismKind::GeometricMedian),
        MechanismDescriptor::new(MechanismKind::OneCentre),
        MechanismDescriptor::new(MechanismKind::LexicographicFirstAgent),
        MechanismDescriptor::new(MechanismKind::CoordinateMax),
        MechanismDescriptor::percentile_multi_d(vec![vec![0.25, 0.75]]),
        MechanismDescriptor::multi_dim_median(),
    ];
    let budget = SearchBudget {
        grid_resolution: 1.0,
        random_restarts: 8,
        seed: 7,
        bounding_box_pad: 0.5,
    };
    (0..150u64)
        .into_par_iter()
        .flat_map_iter(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(4_000_000 + t);
            let n = rng.random_range(2..=5);
            let metric = if t % 2 == 0 {
                Metric::Euclidean
            } else {
                Metric::Manhattan
            };
            let profile = random_profile(&mut rng, n, 10.0, Some(0.5), metric);
            let mut out = Vec::new();
            for desc in &mechanisms {
                let m = if desc.kind == MechanismKind::SerialDictatorship && n > 2 {
                    2
                } else {
                    1
                };
                let spec = FacilitySpec::uncapacitated(m);
                let sol = run_mechanism(desc, &profile, &spec).unwrap();
                out.extend(check_anonymity(desc, &profile, &spec).unwrap());
                out.extend(check_pareto(&profile, &sol, &budget).unwrap());
                out.extend(check_strategy_proofness(desc, &profile, &spec, &budget).unwrap());
            }
            out
        })
        .collect()
}

fn certificate_soundness() -> Check {
    let fuzz = fuzz_certificates();
    let mut all = EMITTED.lock().unwrap().clone();
    let from_criteria = all.len();
    all.extend(fuzz);
    let failed: Vec<&Certificate> = all
        .par_iter()
        .filter(|c| !matches!(verify_certificate(c), Ok(true)))
        .collect();
    ensure!(all.len() > from_criteria, "fuzz produced no certificates");
    ensure!(
        failed.is_empty(),
        "{} of {} failed, first {:?}",
        failed.len(),
        all.len(),
        failed[0]
    );
    let kinds = |k: &str| {
        all.iter()
            .filter(|c| serde_json::to_value(c.kind).unwrap() == k)
            .count()
    };
    Ok(format!(
        "{} certificates verified (anonymity {}, pareto {}, manipulation {})",
        all.len(),
        kinds("anonymity_violation"),
        kinds("pareto_domination"),
        kinds("manipulation")
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        (
            "geometric median arithmetic on the four-corner profile",
            gm_arithmetic,
        ),
        ("geometric median misreport by agent (12,0)", gm_misreport),
        ("one-centre manipulation gain 0.5", onecentre_gain),
        (
            "coordinate median inside the enclosing circle",
            median_in_circle,
        ),
        ("median 2-approximates maximum distance", median_max_bench),
        ("median total-distance bound per n", median_total_bench),
        (
            "percentile mechanisms unbounded for maximum distance",
            percentile_unbounded,
        ),
        (
            "Manhattan mechanisms Pareto optimal and strategy proof",
            manhattan_axioms,
        ),
        (
            "Manhattan median optimal for total distance",
            manhattan_median_optimal,
        ),
        ("two-facility oracle matches dense grid", oracle_vs_grid),
        ("every emitted certificate verifies", certificate_soundness),
    ];
    let mut failures = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match result {
            Ok(detail) => println!("PASS criterion {:>2}: {title}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {:>2}: {title}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
