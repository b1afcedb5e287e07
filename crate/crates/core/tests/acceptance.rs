//! The acceptance gate: nine criteria, one printed line each.
//!
//! Run `cargo test -p eigenlab --test acceptance -- --nocapture` to watch
//! the lines as they complete.  Criteria fail on a bad check or a blown
//! time budget; every tolerance is pinned in `eigenlab::verify`.

use std::time::{Duration, Instant};

use eigenlab::verify::{all_pass, run_suite, CheckOutcome, Suite};

struct Criterion {
    number: u32,
    label: &'static str,
    limit: Duration,
    run: fn() -> eigenlab::Result<Vec<CheckOutcome>>,
}

fn orders() -> eigenlab::Result<Vec<CheckOutcome>> {
    run_suite(Suite::Orders, 1)
}

fn sampler() -> eigenlab::Result<Vec<CheckOutcome>> {
    run_suite(Suite::Sampler, 1)
}

fn spectrum() -> eigenlab::Result<Vec<CheckOutcome>> {
    // the time budget assumes a single worker, so hold it to that
    run_suite(Suite::Spectrum, 1)
}

fn hall() -> eigenlab::Result<Vec<CheckOutcome>> {
    run_suite(Suite::Hall, 1)
}

fn lemma() -> eigenlab::Result<Vec<CheckOutcome>> {
    run_suite(Suite::Lemma, 1)
}

fn levels() -> eigenlab::Result<Vec<CheckOutcome>> {
    let mut out = run_suite(Suite::Level0, 1)?;
    out.extend(run_suite(Suite::Level1, 1)?);
    Ok(out)
}

fn m2_examples() -> eigenlab::Result<Vec<CheckOutcome>> {
    run_suite(Suite::M2Examples, 1)
}

fn ranks() -> eigenlab::Result<Vec<CheckOutcome>> {
    Ok(run_suite(Suite::Weights, 1)?
        .into_iter()
        .filter(|c| c.name.starts_with("rank-"))
        .collect())
}

fn weight_sum() -> eigenlab::Result<Vec<CheckOutcome>> {
    Ok(run_suite(Suite::Weights, 1)?
        .into_iter()
        .filter(|c| c.name.starts_with("weight-sum"))
        .collect())
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        number: 1,
        label: "order formulas vs exhaustive counts",
        limit: Duration::from_secs(10),
        run: orders,
    },
    Criterion {
        number: 2,
        label: "sampler uniformity (chi-square, 99%)",
        limit: Duration::from_secs(60),
        run: sampler,
    },
    Criterion {
        number: 3,
        label: "spectrum at (2,3,m,8) vs limit law",
        limit: Duration::from_secs(600),
        run: spectrum,
    },
    Criterion {
        number: 4,
        label: "hall identity",
        limit: Duration::from_secs(60),
        run: hall,
    },
    Criterion {
        number: 5,
        label: "level-1 lemma with certified tail",
        limit: Duration::from_secs(60),
        run: lemma,
    },
    Criterion {
        number: 6,
        label: "u-step recursion vs closed forms",
        limit: Duration::from_secs(300),
        run: levels,
    },
    Criterion {
        number: 7,
        label: "level-2 example values",
        limit: Duration::from_secs(300),
        run: m2_examples,
    },
    Criterion {
        number: 8,
        label: "rank distribution",
        limit: Duration::from_secs(60),
        run: ranks,
    },
    Criterion {
        number: 9,
        label: "weight sum at p = 2",
        limit: Duration::from_secs(10),
        run: weight_sum,
    },
];

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let start = Instant::now();
        let outcomes = (c.run)().unwrap_or_else(|e| {
            vec![CheckOutcome { name: "error".into(), pass: false, detail: e.to_string() }]
        });
        let elapsed = start.elapsed();
        let ok = all_pass(&outcomes) && elapsed <= c.limit;
        let passed = outcomes.iter().filter(|o| o.pass).count();
        println!(
            "criterion {} ({}): {} | {}/{} checks in {:.2?}, limit {:?}",
            c.number,
            c.label,
            if ok { "pass" } else { "FAIL" },
            passed,
            outcomes.len(),
            elapsed,
            c.limit
        );
        for o in outcomes.iter().filter(|o| !o.pass) {
            println!("    failed: {}: {}", o.name, o.detail);
        }
        if !ok {
            failed.push(c.number);
        }
    }
    assert!(failed.is_empty(), "failed acceptance criteria: {failed:?}");
}
