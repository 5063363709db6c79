//! End-to-end acceptance checks, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`). Criteria listed in
//! `KNOWN_FAILURES` are reported but do not fail the run; every other
//! failure does.

use std::f64::consts::SQRT_2;
use std::process::ExitCode;
use std::time::Instant;

use incompat_core::cglmp::LOCAL_BOUND;
use incompat_core::incompat::max_incompatibility;
use incompat_core::qrac::{classical_bound, quantum_bound, r2_from_chi2};
use incompat_core::random::{haar_pvm, random_density_matrix};
use incompat_core::*;

const SEED: u64 = 20240;
const KNOWN_FAILURES: &[u32] = &[8, 12];

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = (u32, &'static str, fn() -> Result<Outcome>);

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn c1() -> Result<Outcome> {
    let chi = chi_max(&CglmpSetting::mub(2)?)?.chi;
    let closed = chsh_closed_form(2.0, 2.0, SchattenP::INF)?;
    let t = 2.0 * SQRT_2;
    outcome((chi - t).abs() < 1e-8 && closed == t, format!("chi = {chi:.12}, closed form = {closed:.12}"))
}

fn c2() -> Result<Outcome> {
    let r = chi_max(&CglmpSetting::optimal_interferometric(3)?)?;
    let target = 1.0 + (11.0f64 / 3.0).sqrt();
    let sch = schmidt_and_entropy(&r.optimal_state, (3, 3))?;
    let gamma = optimize::mvs_gamma(&sch.coefficients).unwrap_or(f64::NAN);
    let g = (11f64.sqrt() - 3f64.sqrt()) / 2.0;
    outcome(
        (r.chi - target).abs() < 1e-6 && (gamma - g).abs() < 1e-4,
        format!("chi = {:.9}, gamma = {gamma:.7} (expected {g:.7})", r.chi),
    )
}

fn c3() -> Result<Outcome> {
    let s = CglmpSetting::optimal_interferometric(3)?;
    let top = 1.0 + (11.0f64 / 3.0).sqrt();
    let mut worst: f64 = 0.0;
    for k in 0..=10 {
        let eta = k as f64 / 10.0;
        let chi = noisy_chi(&s, eta, eta)?.chi;
        worst = worst.max((chi - top * eta * eta).abs());
    }
    outcome(worst < 1e-6, format!("max deviation {worst:.2e} over 11 points"))
}

fn c4() -> Result<Outcome> {
    let s = CglmpSetting::optimal_interferometric(3)?;
    let (a1, a2) = s.alice();
    let bound = robustness_upper_bound(a1, a2)?;
    let chi = noisy_chi(&s, 0.8, 0.8)?.chi;
    outcome(
        (bound - 0.75).abs() < 1e-3 && chi < LOCAL_BOUND,
        format!("robustness bound = {bound:.6}, chi at eta 0.8 = {chi:.6}"),
    )
}

fn c5() -> Result<Outcome> {
    let mut worst_mub: f64 = 0.0;
    for d in 2..=5 {
        let (a, b) = mub_pair(d)?;
        let v = incompatibility(&a, &b, SchattenP::INF)?.value;
        worst_mub = worst_mub.max((v - max_incompatibility(d, SchattenP::INF)).abs());
    }
    let mut worst_pair: f64 = 0.0;
    for i in 0..200 {
        let mut rng = stream(SEED, i);
        let a = haar_pvm(3, &mut rng)?;
        let b = haar_pvm(3, &mut rng)?;
        let full = incompatibility(&a, &b, SchattenP::INF)?.value;
        worst_pair = worst_pair.max((full - incompatibility_rank1(&a, &b, SchattenP::INF)?).abs());
    }
    outcome(
        worst_mub < 1e-8 && worst_pair < 1e-8,
        format!("MUB deviation {worst_mub:.2e}, rank-1 vs full {worst_pair:.2e}"),
    )
}

fn c6() -> Result<Outcome> {
    let mut max_lambda = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut evaluations = 0;
    for k in 0..20u64 {
        let mut rng = stream(SEED ^ 0xB0B, k);
        let b1: Povm = haar_pvm(3, &mut rng)?.into();
        let b2: Povm = haar_pvm(3, &mut rng)?.into();
        let r = verify_necessity((&b1, &b2), Party::Alice, 500, SEED + k)?;
        max_lambda = max_lambda.max(r.max_lambda);
        violations += r.violations;
        evaluations += r.evaluations;
    }
    outcome(
        violations == 0 && max_lambda <= 2.0 + 1e-9,
        format!("{evaluations} cases, max lambda = {max_lambda:.12}"),
    )
}

fn c7() -> Result<Outcome> {
    let cfg = RunConfig { d: 3, samples: 1000, seed: SEED, ..Default::default() };
    let out = run_sweep(&cfg)?;
    let violating = out.records.iter().filter(|r| r.is_ok() && r.chi > 2.0).count();
    let min = out.records.iter().map(|r| r.chi).fold(f64::INFINITY, f64::min);
    outcome(violating == 1000, format!("{violating}/1000 violate, min chi = {min:.6}"))
}

fn c8() -> Result<Outcome> {
    let base = ConstrainedProblem { seed: SEED, budget: 20_000, ..Default::default() };
    let at = constrained_chi_extremum(&ConstrainedProblem { i_target: Some(3.0 * SQRT_2), ..base.clone() })?;
    let free = constrained_chi_extremum(&base)?;
    let in_window = (2.80..=2.812).contains(&at.value);
    let witness = free.value > at.value && free.i_bob < at.i_bob;
    outcome(
        in_window && free.value >= 2.910 && witness,
        format!(
            "chi at 3*sqrt(2) = {:.6} (window [2.80, 2.812]), unconstrained {:.6} at I = {:.5}",
            at.value, free.value, free.i_bob
        ),
    )
}

fn c9() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut classical_exact = true;
    for d in 2..=4 {
        let (a, b) = mub_pair(d)?;
        worst = worst.max((qrac_success(&a, &b)?.success - quantum_bound(d)).abs());
        classical_exact &= qrac_success(&a, &a)?.success == classical_bound(d);
    }
    outcome(
        worst < 1e-8 && classical_exact,
        format!("MUB deviation {worst:.2e}, identical bases exact: {classical_exact}"),
    )
}

fn c10() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let mut rng = stream(SEED, 10_000 + i);
        let a = haar_pvm(2, &mut rng)?;
        let b = haar_pvm(2, &mut rng)?;
        let i_inf = incompatibility(&a, &b, SchattenP::INF)?.value;
        let closed = qrac_closed_form_d2(i_inf, SchattenP::INF)?;
        worst = worst.max((closed - qrac_success(&a, &b)?.success).abs());
    }
    let mut worst_identity: f64 = 0.0;
    for i in 0..50 {
        let mut rng = stream(SEED, 20_000 + i);
        let b1 = haar_pvm(2, &mut rng)?;
        let b2 = haar_pvm(2, &mut rng)?;
        let (a1, a2) = mub_pair(2)?;
        let s = CglmpSetting::new((a1.into(), a2.into()), (b1.clone().into(), b2.clone().into()))?;
        let chi = chi_max(&s)?.chi;
        worst_identity = worst_identity.max((r2_from_chi2(chi) - qrac_success(&b1, &b2)?.success).abs());
    }
    outcome(
        worst < 1e-8 && worst_identity < 1e-8,
        format!("closed form {worst:.2e}, 1/2 + chi/8 identity {worst_identity:.2e}"),
    )
}

fn c11() -> Result<Outcome> {
    let table = run_thresholds(&RunConfig { d_min: 2, d_max: 8, ..Default::default() })?;
    let expected = [
        (2, 0.707, 0.707),
        (3, 0.687, 0.75),
        (4, 0.673, 0.78),
        (5, 0.664, 0.802),
        (6, 0.656, 0.82),
        (7, 0.65, 0.834),
        (8, 0.645, 0.845),
    ];
    let mut worst: f64 = 0.0;
    for (row, (d, c, r)) in table.rows.iter().zip(expected) {
        assert_eq!(row.d, d);
        worst = worst.max((row.eta_c - c).abs()).max((row.eta_r - r).abs());
    }
    outcome(
        worst < 5e-3 && table.eta_r_increasing && table.eta_c_decreasing,
        format!(
            "max deviation {worst:.2e}, eta_r increasing: {}, eta_c decreasing: {}",
            table.eta_r_increasing, table.eta_c_decreasing
        ),
    )
}

fn ordering_violations(hits: &[ThresholdReport]) -> usize {
    let mut bad = 0;
    for (i, a) in hits.iter().enumerate() {
        for b in &hits[i + 1..] {
            let dr = a.qrac - b.qrac;
            let dc = a.chi - b.chi;
            if dr.abs() > 1e-6 && dc.abs() > 1e-6 && dr.signum() != dc.signum() {
                bad += 1;
            }
        }
    }
    bad
}

fn c12() -> Result<Outcome> {
    let three = equal_robustness_scan(2000, 3, 1e-3, SEED)?;
    let frac = three.hit_fraction();
    let two = equal_robustness_scan(2000, 2, 1e-3, SEED)?;
    let worst_d2 = two.hits.iter().map(|h| (h.i_bob - 2.0).abs()).fold(0.0, f64::max);
    let order = ordering_violations(&three.hits);
    outcome(
        !three.hits.is_empty() && (0.005..=0.05).contains(&frac) && worst_d2 <= 1e-2 && order == 0,
        format!(
            "d=3 hit fraction {:.2}% ({} hits), ordering violations {order}; d=2 max |I-2| = {worst_d2:.4} over {} hits",
            100.0 * frac,
            three.hits.len(),
            two.hits.len()
        ),
    )
}

fn c13() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for d in 2..=4 {
        for i in 0..100 {
            let s = sweep::haar_setting(d, SEED, 30_000 + i)?;
            let mut rng = stream(SEED, 40_000 + i);
            let rho = random_density_matrix(d * d, &mut rng);
            let prob = chi_of_state(&s, &rho)?;
            let op = cglmp_operator(&s).trace_product(&rho)?.re;
            worst = worst.max((prob - op).abs());
        }
    }
    outcome(worst < 1e-8, format!("max deviation {worst:.2e} over 300 pairs"))
}

fn c14() -> Result<Outcome> {
    let cfg = RunConfig { d: 3, samples: 200, seed: SEED, ..Default::default() };
    let first = sweep::sweep_table(&cfg, &run_sweep(&cfg)?).to_csv_string()?;
    let again = RunConfig { workers: Some(2), ..cfg.clone() };
    let second = sweep::sweep_table(&again, &run_sweep(&again)?).to_csv_string()?;
    let problem = ConstrainedProblem { i_target: Some(3.5), seed: SEED, budget: 4000, ..Default::default() };
    let a = serde_json::to_string(&constrained_chi_extremum(&problem)?)?;
    let b = serde_json::to_string(&constrained_chi_extremum(&problem)?)?;
    outcome(first == second && a == b, format!("sweep identical: {}, optimizer identical: {}", first == second, a == b))
}

fn main() -> ExitCode {
    let criteria: [Check; 14] = [
        (1, "Tsirelson regression", c1),
        (2, "qutrit CGLMP optimum and state", c2),
        (3, "noisy quadratic law", c3),
        (4, "incompatible but non-violating window", c4),
        (5, "incompatibility saturation and rank-1 shortcut", c5),
        (6, "necessity of incompatibility", c6),
        (7, "sufficiency on Haar sweep", c7),
        (8, "constrained optima", c8),
        (9, "QRAC benchmarks", c9),
        (10, "qubit QRAC closed form", c10),
        (11, "noise threshold table", c11),
        (12, "equal-robustness scan", c12),
        (13, "oracle equivalence", c13),
        (14, "determinism", c14),
    ];
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        if !pass && !known {
            unexpected += 1;
        }
        println!("{tag} criterion {id:>2} {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
