//! Acceptance gate: runs the ten criteria at their pinned tolerances, prints
//! one PASS/FAIL line each and exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use synlab::antilattice::{
    antilattice_suite, corner_descent, exchange_symmetry, existsk_construct,
    inf_zero_implies_product_zero_check, infimum_decide, AntilatticeVerdict, ExchangeDirection,
    InfimumReason, InfimumStatus, P_COEFF, P_PERP_COEFF, S_COEFF,
};
use synlab::cli::{dispatch, to_json_string, Command, InputSpec, RunConfig};
use synlab::order::{abs_and_parts, loewner_cmp, orderunit_norm, quadratic_map};
use synlab::projection::{orthocomplement, Projection, Symmetry};
use synlab::sampling;
use synlab::spectral::{find_subprojection, q_lambda_clause_check, spectral_bounds};
use synlab::structure::is_factor;
use synlab::{AlgebraSpec, Element, SymMatrix, Tolerances};

const SEED: u64 = 20_240_611;
const CATALOG: [&[usize]; 8] = [
    &[1],
    &[2],
    &[3],
    &[4],
    &[1, 1],
    &[2, 2],
    &[2, 3],
    &[1, 2, 3],
];

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

/// PSD slack and reconstruction residual both at `slack`.
fn tol_at(slack: f64) -> Tolerances {
    Tolerances {
        psd: slack,
        recon: slack,
        ..Tolerances::default()
    }
}

fn within(started: Instant, limit: Duration) -> bool {
    started.elapsed() < limit
}

fn c1_existsk() -> Outcome {
    let started = Instant::now();
    let tol = tol_at(1e-9);
    let p = Projection::new(&SymMatrix::from_diag(&[1.0, 0.0]), &tol).unwrap();
    let swap = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let s = Symmetry::new(&swap, &tol).unwrap();
    let r = existsk_construct(&p, &s, &tol).unwrap();

    let expected_k = swap.scale(2.0).shift(-25.0 / 16.0);
    let k_exact = r.k.distance(&expected_k).unwrap() == 0.0;
    let perp = orthocomplement(&p);
    let psd_a = common::loewner_leq(&r.k, p.matrix(), 1e-9);
    let psd_b = common::loewner_leq(&r.k, perp.matrix(), 1e-9);
    // [[c, b], [b, c]] has eigenvalues c ± b.
    let closed_form_max: f64 = -25.0 / 16.0 + 2.0;
    let max_ok = (r.k_max_eigenvalue - 7.0 / 16.0).abs() <= 1e-9
        && (closed_form_max - 7.0 / 16.0).abs() == 0.0;
    let oracle_max_ok = (common::max_eigenvalue(&r.k) - 7.0 / 16.0).abs() <= 1e-9;
    let d_rows = r.d.to_rows();
    let d2 = common::matmul(&d_rows, &d_rows);
    let identity_residual = common::frobenius_diff(&d2, &p.matrix().sub(&r.k).unwrap().to_rows());
    let exact = P_COEFF * P_COEFF - P_PERP_COEFF * P_PERP_COEFF == 1.0
        && (P_COEFF + P_PERP_COEFF) * S_COEFF == -2.0
        && P_PERP_COEFF * P_PERP_COEFF + S_COEFF * S_COEFF == 25.0 / 16.0
        && r.scalar_identities_exact;
    let fast = within(started, Duration::from_secs(1));
    outcome(
        k_exact && psd_a && psd_b && max_ok && oracle_max_ok && identity_residual <= 1e-9 && exact && fast,
        format!(
            "max eig k = {:.17}, ‖d² − (p − k)‖ = {identity_residual:.1e}, scalar identities exact = {exact}, {:?}",
            r.k_max_eigenvalue,
            started.elapsed()
        ),
    )
}

/// The 1000 positive samples shared by criteria 2 and 3.
fn positive_samples() -> Vec<SymMatrix> {
    (0..1000u64)
        .map(|i| {
            let mut rng = sampling::trial_rng(SEED, i);
            let n = rng.random_range(2..=8);
            let rank = rng.random_range(1..=n);
            sampling::psd(&mut rng, n, rank)
        })
        .collect()
}

fn c2_qlambda(samples: &[SymMatrix]) -> Outcome {
    let started = Instant::now();
    let tol = tol_at(1e-8);
    let mut failures = 0;
    let mut oracle_mismatch = 0;
    let mut worst = 0.0_f64;
    for (i, a) in samples.iter().enumerate() {
        let mut rng = sampling::trial_rng(SEED ^ 0xA5A5, i as u64);
        let probes: Vec<f64> = (0..8).map(|_| rng.random_range(0.01..0.99)).collect();
        let r = q_lambda_clause_check(a, &probes, &tol).unwrap();
        if !r.pass(1e-8) {
            failures += 1;
        }
        worst = worst
            .max(r.commutation)
            .max(r.lower_order)
            .max(r.upper_order)
            .max(r.below_part)
            .max(r.above_part);
        // rank q_λ = number of eigenvalues above λ
        let norm = orderunit_norm(a).unwrap();
        for t in &probes {
            let lambda = t * norm;
            let q = synlab::spectral::q_lambda(a, lambda, &tol).unwrap();
            let above = a.dim() - common::count_below(a, lambda + 1e-12 * norm.max(1.0));
            if q.rank() != above {
                oracle_mismatch += 1;
            }
        }
    }
    let fast = within(started, Duration::from_secs(30));
    outcome(
        failures == 0 && oracle_mismatch == 0 && fast,
        format!(
            "{} samples, {failures} clause failures, {oracle_mismatch} rank mismatches vs inertia oracle, worst residual {worst:.1e}, {:?}",
            samples.len(),
            started.elapsed()
        ),
    )
}

fn c3_subprojection(samples: &[SymMatrix]) -> Outcome {
    let tol = tol_at(1e-8);
    let mut failures = 0;
    for a in samples {
        let s = find_subprojection(a, &tol).unwrap();
        let ok = s.lambda > 0.0
            && !s.projection.is_zero()
            && common::loewner_leq(&s.projection.matrix().scale(s.lambda), a, 1e-8);
        if !ok {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{} samples, {failures} failures", samples.len()),
    )
}

/// Pairs whose infimum came out as 0, collected for criterion 5.
type ZeroPairs = Vec<(Element, Element)>;

fn c4_commuting(zero_pairs: &mut ZeroPairs) -> Outcome {
    let tol = tol_at(1e-8);
    let mut noncommuting_bad = 0;
    let mut commuting_bad = 0;
    let mut nested_bad = 0;
    let mut falsifiers_bad = 0;
    let mut tested = 0;
    for n in 2..=5usize {
        let factor = AlgebraSpec::new(vec![n]).unwrap();
        let diagonal = AlgebraSpec::new(vec![1; n]).unwrap();
        for i in 0..500u64 {
            let mut rng = sampling::trial_rng(SEED + n as u64, i);
            // noncommuting pair in the factor
            let (p, q) = loop {
                let (rp, rq) = (rng.random_range(1..n), rng.random_range(1..n));
                let p = sampling::projection(&mut rng, n, rp);
                let q = sampling::projection(&mut rng, n, rq);
                if synlab::order::commutator_norm(p.matrix(), q.matrix()).unwrap() > 1e-6 {
                    break (p, q);
                }
            };
            let pe = Element::new(&factor, p.matrix().clone(), &tol).unwrap();
            let qe = Element::new(&factor, q.matrix().clone(), &tol).unwrap();
            let v = infimum_decide(&pe, &qe, &tol).unwrap();
            if v.status != InfimumStatus::NotExists
                || v.reason != InfimumReason::NoncommutingProjections
            {
                noncommuting_bad += 1;
            }
            if !synlab::antilattice::falsifier_holds(&pe, &qe, &v, &tol).unwrap() {
                falsifiers_bad += 1;
            }

            // commuting pair: diagonal projections of the commutative algebra
            let dp: Vec<f64> = (0..n)
                .map(|_| f64::from(rng.random_range(0..2u8)))
                .collect();
            let dq: Vec<f64> = (0..n)
                .map(|_| f64::from(rng.random_range(0..2u8)))
                .collect();
            let pe = Element::new(&diagonal, SymMatrix::from_diag(&dp), &tol).unwrap();
            let qe = Element::new(&diagonal, SymMatrix::from_diag(&dq), &tol).unwrap();
            let pq: Vec<f64> = dp.iter().zip(&dq).map(|(a, b)| a * b).collect();
            let v = infimum_decide(&pe, &qe, &tol).unwrap();
            let ok = v.is_exists()
                && v.value
                    .as_ref()
                    .unwrap()
                    .matrix()
                    .distance(&SymMatrix::from_diag(&pq))
                    .unwrap()
                    <= 1e-8;
            if !ok {
                commuting_bad += 1;
            }
            if ok && pq.iter().all(|x| *x == 0.0) {
                zero_pairs.push((pe, qe));
            }

            // commuting nested pair q' ≤ p in the factor
            let basis = sampling::orthonormal(&mut rng, n, n);
            let big = rng.random_range(1..=n);
            let small = rng.random_range(0..=big);
            let proj = |k: usize| {
                Projection::from_basis(&synlab::linalg::SubspaceBasis {
                    ambient_dim: n,
                    columns: basis[..k].to_vec(),
                })
            };
            let (p, q) = (proj(big), proj(small));
            let pe = Element::new(&factor, p.matrix().clone(), &tol).unwrap();
            let qe = Element::new(&factor, q.matrix().clone(), &tol).unwrap();
            let product = p.matrix().mul(q.matrix()).unwrap().symmetric_part();
            let v = infimum_decide(&pe, &qe, &tol).unwrap();
            let ok = v.is_exists()
                && v.value
                    .as_ref()
                    .unwrap()
                    .matrix()
                    .distance(&product)
                    .unwrap()
                    <= 1e-8;
            if !ok {
                nested_bad += 1;
            }
            if ok && small == 0 {
                zero_pairs.push((pe, qe));
            }
            tested += 1;
        }
    }
    outcome(
        noncommuting_bad + commuting_bad + nested_bad + falsifiers_bad == 0,
        format!(
            "{tested} trials per family over n = 2..5: noncommuting→NotExists failures {noncommuting_bad}, falsifier failures {falsifiers_bad}, commuting (ℝⁿ)→pq failures {commuting_bad}, nested (Mₙ)→pq failures {nested_bad}"
        ),
    )
}

fn catalog_reports(
    trials: usize,
    seed: u64,
) -> Vec<(AlgebraSpec, synlab::antilattice::AntilatticeReport)> {
    let tol = Tolerances::default();
    CATALOG
        .iter()
        .map(|b| {
            let a = AlgebraSpec::new(b.to_vec()).unwrap();
            let r = antilattice_suite(&a, trials, seed, &tol).unwrap();
            (a, r)
        })
        .collect()
}

fn c6_catalog(zero_pairs: &mut ZeroPairs) -> Outcome {
    let started = Instant::now();
    let tol = Tolerances::default();
    let mut agree = 0;
    let mut problems = Vec::new();
    for (a, r) in catalog_reports(500, SEED) {
        let factor = is_factor(&a, &tol).unwrap().is_factor;
        let expected = if factor {
            AntilatticeVerdict::Antilattice
        } else {
            AntilatticeVerdict::NotAntilattice
        };
        if r.verdict == expected && r.is_factor == factor {
            agree += 1;
        }
        if factor {
            let f = &r.falsification;
            let ok = f.pairs_tested == 500
                && f.exists_on_incomparable == 0
                && f.falsifiers_verified == f.not_exists_verdicts
                && (a.total_dim() == 1 || f.incomparable_pairs > 0)
                && r.exchange.passed == r.exchange.pairs_tested;
            if !ok {
                problems.push(format!("{a}: {f:?}"));
            }
        } else {
            let ce = r.counterexample.as_ref().unwrap();
            let incomparable = !loewner_cmp(ce.c.matrix(), ce.d.matrix(), &tol)
                .unwrap()
                .comparable();
            let v = infimum_decide(&ce.c, &ce.d, &tol).unwrap();
            if !(incomparable && v.is_exists_zero(&tol) && ce.infimum.frobenius_norm() <= 1e-8) {
                problems.push(format!("{a}: counterexample not verified"));
            }
            zero_pairs.push((ce.c.clone(), ce.d.clone()));
        }
    }
    let fast = within(started, Duration::from_secs(120));
    outcome(
        agree == CATALOG.len() && problems.is_empty() && fast,
        format!(
            "{agree}/{} agree, {:?}, {:?}",
            CATALOG.len(),
            problems,
            started.elapsed()
        ),
    )
}

fn c5_zero_products(zero_pairs: &ZeroPairs) -> Outcome {
    let tol = tol_at(1e-8);
    let mut bad = 0;
    let mut worst = 0.0_f64;
    for (a, b) in zero_pairs {
        let r = inf_zero_implies_product_zero_check(a, b, &tol).unwrap();
        let ab = common::matmul(&a.matrix().to_rows(), &b.matrix().to_rows());
        let ab_norm = ab.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        let g = synlab::order::gen_infimum(a.matrix(), b.matrix(), &tol).unwrap();
        let below = common::loewner_leq(&g, &SymMatrix::zeros(g.dim()), 1e-8);
        worst = worst.max(ab_norm).max(r.ab_residual);
        if !(r.pass && ab_norm <= 1e-8 && below) {
            bad += 1;
        }
    }
    outcome(
        bad == 0 && !zero_pairs.is_empty(),
        format!(
            "{} Exists(0) verdicts, {bad} failures, worst ‖ab‖ = {worst:.1e}",
            zero_pairs.len()
        ),
    )
}

fn c7_exchange() -> Outcome {
    let tol = tol_at(1e-8);
    let mut bad = 0;
    let mut worst = 0.0_f64;
    let mut tested = 0;
    for n in 2..=6usize {
        let a = AlgebraSpec::new(vec![n]).unwrap();
        for i in 0..200u64 {
            let mut rng = sampling::trial_rng(SEED + 100 + n as u64, i);
            let rp = rng.random_range(1..n);
            let rq = rng.random_range(1..=n - rp);
            let vs = sampling::orthonormal(&mut rng, n, rp + rq);
            let mk = |cols: &[Vec<f64>]| {
                Projection::from_basis(&synlab::linalg::SubspaceBasis {
                    ambient_dim: n,
                    columns: cols.to_vec(),
                })
            };
            let (p, q) = (mk(&vs[..rp]), mk(&vs[rp..]));
            let ex = exchange_symmetry(&p, &q, &a, &tol).unwrap();
            let t = ex.symmetry.matrix();
            let rows = t.to_rows();
            let t2 = common::matmul(&rows, &rows);
            let residual = common::frobenius_diff(&t2, &SymMatrix::identity(n).to_rows());
            let one = SymMatrix::identity(n);
            let nontrivial =
                t.distance(&one).unwrap() > 1e-6 && t.distance(&one.scale(-1.0)).unwrap() > 1e-6;
            let ordered = match ex.direction {
                ExchangeDirection::PIntoQ => {
                    common::loewner_leq(&t.sandwich(p.matrix()).unwrap(), q.matrix(), 1e-8)
                }
                ExchangeDirection::QIntoP => {
                    common::loewner_leq(&t.sandwich(q.matrix()).unwrap(), p.matrix(), 1e-8)
                }
            };
            worst = worst.max(residual);
            if !(residual <= 1e-9 && nontrivial && ordered) {
                bad += 1;
            }
            tested += 1;
        }
    }
    outcome(
        bad == 0,
        format!("{tested} pairs over n = 2..6, {bad} failures, worst ‖t² − 1‖ = {worst:.1e}"),
    )
}

fn c8_corner_descent() -> Outcome {
    let tol = tol_at(1e-9);
    let a = AlgebraSpec::new(vec![3]).unwrap();
    let p = Projection::new(&SymMatrix::from_diag(&[1.0, 0.0, 0.0]), &tol).unwrap();
    let q = Projection::new(&SymMatrix::from_diag(&[0.0, 1.0, 1.0]), &tol).unwrap();
    let swap = SymMatrix::from_rows(&[
        vec![0.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ])
    .unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    let explicit = Symmetry::new(&swap, &tol).unwrap();
    let computed = exchange_symmetry(&p, &q, &a, &tol).unwrap().symmetry;
    for (label, t) in [("explicit swap", explicit), ("exchange_symmetry", computed)] {
        let r = corner_descent(&a, &p, &q, &t, &tol).unwrap();
        let tpt = r.tpt.matrix();
        let oracle_ok = common::loewner_leq(&r.k, p.matrix(), 1e-9)
            && common::loewner_leq(&r.k, tpt, 1e-9)
            && common::max_eigenvalue(&r.k) > 1e-6;
        let ok = r.s_squared_residual <= 1e-9
            && r.sps_residual <= 1e-9
            && r.k_below_p
            && r.k_below_tpt
            && r.k_max_eigenvalue > 1e-6
            && oracle_ok;
        pass &= ok;
        details.push(format!(
            "{label}: s² {:.1e}, sps {:.1e}, max eig k {:.6}",
            r.s_squared_residual, r.sps_residual, r.k_max_eigenvalue
        ));
    }
    outcome(pass, details.join("; "))
}

fn c9_order_basics() -> Outcome {
    let tol = tol_at(1e-8);
    let mut parts_bad = 0;
    let mut norm_bad = 0;
    let mut worst_parts = 0.0_f64;
    let mut worst_norm = 0.0_f64;
    for i in 0..1000u64 {
        let mut rng = sampling::trial_rng(SEED + 200, i);
        let n = rng.random_range(1..=8);
        let a = sampling::symmetric(&mut rng, n);
        let parts = abs_and_parts(&a, &tol).unwrap();
        let r1 = parts.pos.sub(&parts.neg).unwrap().distance(&a).unwrap();
        let r2 = parts
            .pos
            .add(&parts.neg)
            .unwrap()
            .distance(&parts.abs)
            .unwrap();
        let r3 = common::frobenius_diff(
            &common::matmul(&parts.pos.to_rows(), &parts.neg.to_rows()),
            &SymMatrix::zeros(n).to_rows(),
        );
        let r = r1.max(r2).max(r3);
        worst_parts = worst_parts.max(r);
        if r > 1e-8 {
            parts_bad += 1;
        }
        let b = spectral_bounds(&a).unwrap();
        let norm = orderunit_norm(&a).unwrap();
        let oracle = common::min_eigenvalue(&a)
            .abs()
            .max(common::max_eigenvalue(&a).abs());
        let d = (norm - b.lower.abs().max(b.upper.abs()))
            .abs()
            .max((norm - oracle).abs());
        worst_norm = worst_norm.max(d);
        if d > 1e-10 {
            norm_bad += 1;
        }
    }
    let mut order_bad = 0;
    for i in 0..500u64 {
        let mut rng = sampling::trial_rng(SEED + 300, i);
        let n = rng.random_range(1..=8);
        let a = sampling::symmetric(&mut rng, n);
        let x = sampling::symmetric(&mut rng, n);
        let rank = rng.random_range(1..=n);
        let y = x.add(&sampling::psd(&mut rng, n, rank)).unwrap();
        let axa = quadratic_map(&a, &x).unwrap();
        let aya = quadratic_map(&a, &y).unwrap();
        if !common::loewner_leq(&axa, &aya, 1e-8) {
            order_bad += 1;
        }
    }
    outcome(
        parts_bad + norm_bad + order_bad == 0,
        format!(
            "parts failures {parts_bad} (worst {worst_parts:.1e}), norm failures {norm_bad} (worst {worst_norm:.1e}), quadratic-map order failures {order_bad}/500"
        ),
    )
}

fn catalog_json(seed: u64) -> String {
    let mut out = String::new();
    for blocks in CATALOG {
        let spec = InputSpec {
            algebra: AlgebraSpec::new(blocks.to_vec()).unwrap(),
            elements: Default::default(),
        };
        let mut config = RunConfig::new(Command::Suite, "catalog.json");
        config.seed = seed;
        config.trials = 500;
        let report = dispatch(&config, &spec).unwrap();
        out.push_str(&report.to_json());
    }
    out
}

fn c10_determinism() -> Outcome {
    let first = catalog_json(SEED);
    let second = catalog_json(SEED);
    let direct = to_json_string(
        &catalog_reports(500, SEED)
            .into_iter()
            .map(|(_, r)| r)
            .collect::<Vec<_>>(),
        false,
    );
    let direct_again = to_json_string(
        &catalog_reports(500, SEED)
            .into_iter()
            .map(|(_, r)| r)
            .collect::<Vec<_>>(),
        false,
    );
    outcome(
        first == second && direct == direct_again,
        format!(
            "{} bytes of report JSON, identical = {}",
            first.len(),
            first == second
        ),
    )
}

fn main() {
    let samples = positive_samples();
    let mut zero_pairs = ZeroPairs::new();
    let c4 = c4_commuting(&mut zero_pairs);
    let c6 = c6_catalog(&mut zero_pairs);
    let c5 = c5_zero_products(&zero_pairs);
    let results = [
        ("1 explicit constants", c1_existsk()),
        ("2 q_λ clause suite", c2_qlambda(&samples)),
        ("3 subprojection", c3_subprojection(&samples)),
        ("4 infimum of projection pairs", c4),
        ("5 zero infimum forces zero product", c5),
        ("6 antilattice iff factor", c6),
        ("7 exchange symmetry", c7_exchange()),
        ("8 corner descent", c8_corner_descent()),
        ("9 order and spectral basics", c9_order_basics()),
        ("10 determinism", c10_determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status}  criterion {name}: {}", o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
