//! One PASS/FAIL line per acceptance criterion. Exits nonzero when a gating
//! criterion fails; criterion 8 is reported but never gates.
//!
//! Criterion 8 runs with `EPITOPO_NODE_BUDGET` when set, otherwise with
//! `STRETCH_BUDGET` nodes.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use epitopo::complex::{invariants, AgentId, SimplicialModel};
use epitopo::del::{Morphism, Update};
use epitopo::duality::{roundtrip_kripke, roundtrip_simplicial, to_kripke, to_simplicial};
use epitopo::generators::{
    binary_inputs, builtins, random_formula, random_kripke, single_facet, strip, value_inputs,
};
use epitopo::kripke::satisfying_states;
use epitopo::logic::{satisfying_facets, Formula};
use epitopo::protocols::{ordered_partitions, protocol_model};
use epitopo::solver::{
    agreement_formula, connectivity_obstruction, logical_obstruction, solve, verify,
    verify_morphism, Certificate, SolveOptions, Status, NODE_BUDGET_VAR,
};
use epitopo::tasks::{approximate_agreement, consensus, k_set_agreement};

const LIMIT: usize = 1_000_000;
const STRETCH_BUDGET: u64 = 100_000;

struct Report {
    failed: bool,
}

impl Report {
    fn line(&mut self, n: usize, ok: bool, gating: bool, detail: String) {
        println!(
            "criterion {n}: {} {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        self.failed |= gating && !ok;
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn values(vs: &[&str]) -> Vec<String> {
    vs.iter().map(|v| v.to_string()).collect()
}

fn brute_force_partitions(n: usize) -> usize {
    (0..n.pow(n as u32))
        .filter(|code| {
            let used: BTreeSet<usize> = (0..n).map(|i| code / n.pow(i as u32) % n).collect();
            used.iter().copied().eq(0..used.len())
        })
        .count()
}

fn duality(r: &mut Report) {
    let ((ok, count), t) = timed(|| {
        let mut ok = true;
        let mut count = 0;
        for m in [binary_inputs(2), binary_inputs(3), strip()] {
            ok &= roundtrip_simplicial(&m) && roundtrip_kripke(&to_kripke(&m));
            count += 1;
        }
        let mut g = rng(1);
        for _ in 0..50 {
            let k = random_kripke(&mut g, 3, 12, 3);
            ok &= roundtrip_kripke(&k) && roundtrip_simplicial(&to_simplicial(&k).unwrap());
            count += 1;
        }
        (ok, count)
    });
    let ok = ok && t < Duration::from_secs(5);
    r.line(
        1,
        ok,
        true,
        format!("{count} models round-trip in {t:.2?} (< 5s)"),
    );
}

fn semantics(r: &mut Report) {
    let (mismatches, t) = timed(|| {
        let mut g = rng(2);
        let mut bad = 0;
        for _ in 0..500 {
            let k = random_kripke(&mut g, 3, 12, 3);
            let m = to_simplicial(&k).unwrap();
            let phi = random_formula(&mut g, m.agents(), 3, 3, false);
            let x = rand::Rng::gen_range(&mut g, 0..m.num_facets());
            let s = satisfying_facets(&m, &phi).unwrap()[x];
            let kk = satisfying_states(&k, &phi).unwrap()[x];
            bad += usize::from(s != kk);
        }
        bad
    });
    let ok = mismatches == 0 && t < Duration::from_secs(30);
    r.line(
        2,
        ok,
        true,
        format!("500 triples, {mismatches} mismatches, {t:.2?} (< 30s)"),
    );
}

fn s5_axioms(agents: &[AgentId], phi: &Formula, psi: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    for &a in agents {
        let k = |f: Formula| Formula::knows(a, f);
        out.push(Formula::implies(
            k(Formula::implies(phi.clone(), psi.clone())),
            Formula::implies(k(phi.clone()), k(psi.clone())),
        ));
        out.push(Formula::implies(k(phi.clone()), phi.clone()));
        out.push(Formula::implies(k(phi.clone()), k(k(phi.clone()))));
        out.push(Formula::implies(
            Formula::not(k(phi.clone())),
            k(Formula::not(k(phi.clone()))),
        ));
        for v in 0..3 {
            let p = Formula::atom(a, v.to_string());
            out.push(Formula::or(k(p.clone()), k(Formula::not(p))));
        }
    }
    out
}

fn s5(r: &mut Report) {
    let mut g = rng(3);
    let mut violations = 0;
    let instances = 200;
    for _ in 0..instances {
        let m = to_simplicial(&random_kripke(&mut g, 3, 12, 3)).unwrap();
        let phi = random_formula(&mut g, m.agents(), 3, 2, false);
        let psi = random_formula(&mut g, m.agents(), 3, 2, false);
        for ax in s5_axioms(&m.agents().all(), &phi, &psi) {
            violations += satisfying_facets(&m, &ax)
                .unwrap()
                .iter()
                .filter(|b| !**b)
                .count();
        }
    }
    r.line(
        3,
        violations == 0,
        true,
        format!("{instances} instances, {violations} violations"),
    );
}

fn snapshot_counts(r: &mut Report) {
    let ((ok, detail), t) = timed(|| {
        let counts: Vec<usize> = (1..=4)
            .map(|n| ordered_partitions(&(0..n).map(AgentId).collect::<Vec<_>>()).len())
            .collect();
        let oracle: Vec<usize> = (1..=4).map(brute_force_partitions).collect();
        let single = protocol_model(&single_facet(3), 1, LIMIT).unwrap();
        let si = invariants(single.model.complex());
        let bin = protocol_model(&binary_inputs(3), 1, LIMIT).unwrap();
        let bi = invariants(bin.model.complex());
        let ok = counts == oracle
            && counts == [1, 3, 13, 75]
            && si.counts[2] == 13
            && si.counts[0] == 12
            && si.euler_characteristic == 1
            && bi.counts[2] == 104
            && bi.euler_characteristic == 2
            && bi.pseudomanifold_with_boundary;
        let detail = format!(
            "partitions {counts:?}; single: {} facets, {} vertices, chi {}; binary: {} facets, chi {}, pseudomanifold {}",
            si.counts[2], si.counts[0], si.euler_characteristic, bi.counts[2], bi.euler_characteristic,
            bi.pseudomanifold_with_boundary
        );
        (ok, detail)
    });
    let ok = ok && t < Duration::from_secs(10);
    r.line(4, ok, true, format!("{detail}; {t:.2?} (< 10s)"));
}

fn topology(r: &mut Report) {
    let mut ok = true;
    let mut checked = Vec::new();
    for (name, m) in builtins() {
        let before = invariants(m.complex());
        for rounds in 1..=2 {
            let up = protocol_model(&m, rounds, LIMIT).unwrap();
            let after = invariants(up.model.complex());
            let same = after.euler_characteristic == before.euler_characteristic
                && after.pseudomanifold_with_boundary == before.pseudomanifold_with_boundary;
            if !same {
                println!(
                    "  {name} r={rounds}: chi {} -> {}",
                    before.euler_characteristic, after.euler_characteristic
                );
            }
            ok &= same;
        }
        checked.push(name);
    }
    r.line(
        5,
        ok,
        true,
        format!("r in {{1,2}} over {}", checked.join(", ")),
    );
}

fn setup(inputs: &SimplicialModel, rounds: usize, task: &Update) -> Update {
    let p = protocol_model(inputs, rounds, LIMIT).unwrap();
    assert_eq!(
        p.projection.target.as_ref(),
        task.projection.target.as_ref()
    );
    p
}

fn consensus_case(n: usize) -> Result<String, String> {
    let inputs = binary_inputs(n);
    let vals = values(&["0", "1"]);
    let task = consensus(&inputs, &vals).unwrap().model(&inputs).unwrap();
    let protocol = setup(&inputs, 1, &task);
    let limit = if n == 2 {
        Duration::from_secs(1)
    } else {
        Duration::from_secs(600)
    };
    let (res, t) = timed(|| solve(&protocol, &task, &SolveOptions::default()).unwrap());
    if !matches!(res.status, Status::Unsolvable(Certificate::Exhausted)) || t >= limit {
        return Err(format!("{n} agents: {} in {t:.2?}", res.status.label()));
    }
    if !verify(&res, &protocol, &task) {
        return Err(format!("{n} agents: exhaustive result not reproduced"));
    }
    let (cert, tc) = timed(|| connectivity_obstruction(&protocol, &task).unwrap());
    let conn_ok = cert.is_some_and(|c| {
        let r = epitopo::solver::SolveResult {
            status: Status::Unsolvable(Certificate::Connectivity(c)),
            stats: Default::default(),
        };
        verify(&r, &protocol, &task)
    });
    if !conn_ok || tc >= Duration::from_secs(5) {
        return Err(format!(
            "{n} agents: connectivity certificate missing or slow ({tc:.2?})"
        ));
    }
    let phi = agreement_formula(&inputs, &vals);
    let logical = logical_obstruction(&protocol, &task, &phi).unwrap();
    let log_ok = logical.is_some_and(|c| {
        let r = epitopo::solver::SolveResult {
            status: Status::Unsolvable(Certificate::Logical(c)),
            stats: Default::default(),
        };
        verify(&r, &protocol, &task)
    });
    if !log_ok {
        return Err(format!("{n} agents: no verified logical certificate"));
    }
    Ok(format!(
        "{n} agents exhaustive in {t:.2?} ({} nodes), connectivity in {tc:.2?}, logical verified",
        res.stats.nodes
    ))
}

fn consensus_impossibility(r: &mut Report) {
    let results: Vec<_> = [2, 3].into_iter().map(consensus_case).collect();
    let ok = results.iter().all(Result::is_ok);
    let detail: Vec<String> = results
        .into_iter()
        .map(|r| r.unwrap_or_else(|e| e))
        .collect();
    r.line(6, ok, true, detail.join("; "));
}

fn approx_case(n: u32, rounds: usize) -> (Status, bool, Update, Update) {
    let inputs = binary_inputs(2);
    let task = approximate_agreement(&inputs, n)
        .unwrap()
        .model(&inputs)
        .unwrap();
    let protocol = setup(&inputs, rounds, &task);
    let res = solve(&protocol, &task, &SolveOptions::default()).unwrap();
    let verified = verify(&res, &protocol, &task);
    (res.status, verified, protocol, task)
}

fn approximate(r: &mut Report, deltas: &mut Vec<(Morphism, Update, Update)>) {
    let mut ok = true;
    let mut detail = Vec::new();
    for (n, rounds, want) in [(3, 1, "SOLVABLE"), (9, 1, "UNSOLVABLE"), (9, 2, "SOLVABLE")] {
        let (status, verified, protocol, task) = approx_case(n, rounds);
        ok &= status.label() == want && verified;
        detail.push(format!(
            "N={n} r={rounds}: {} verified={verified}",
            status.label()
        ));
        if let Status::Solvable(d) = status {
            deltas.push((d, protocol, task));
        }
    }
    r.line(7, ok, true, detail.join("; "));
}

fn set_agreement(r: &mut Report) {
    let budget = std::env::var(NODE_BUDGET_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(STRETCH_BUDGET);
    let inputs = value_inputs(3, &["0", "1", "2"]);
    let task = k_set_agreement(&inputs, &values(&["0", "1", "2"]), 2)
        .unwrap()
        .model(&inputs)
        .unwrap();
    let protocol = setup(&inputs, 1, &task);
    let res = solve(
        &protocol,
        &task,
        &SolveOptions {
            node_budget: budget,
        },
    )
    .unwrap();
    let ok = !matches!(res.status, Status::Solvable(_));
    r.line(
        8,
        ok,
        false,
        format!(
            "(stretch) {} with node budget {budget}, {} nodes, {:.2?}",
            res.status.label(),
            res.stats.nodes,
            res.stats.elapsed
        ),
    );
}

fn knowledge_gain(r: &mut Report, deltas: &[(Morphism, Update, Update)]) {
    let mut g = rng(9);
    let mut violations = 0;
    let mut sound = true;
    for (delta, protocol, task) in deltas {
        let task_model = delta.target.as_ref();
        let image = delta.facet_map();
        for _ in 0..100 {
            let phi = random_formula(&mut g, task_model.agents(), 2, 3, true);
            let at_image = satisfying_facets(task_model, &phi).unwrap();
            let at_source = satisfying_facets(&protocol.model, &phi).unwrap();
            for (x, y) in image.iter().enumerate() {
                let y = y.expect("facet image");
                violations += usize::from(at_image[y] && !at_source[x]);
            }
        }
        sound &= verify_morphism(delta, protocol, task);
    }
    let ok = !deltas.is_empty() && violations == 0 && sound;
    r.line(
        9,
        ok,
        true,
        format!(
            "{} maps x 100 positive formulas, {violations} violations",
            deltas.len()
        ),
    );
}

fn main() -> ExitCode {
    let mut r = Report { failed: false };
    let mut deltas = Vec::new();
    duality(&mut r);
    semantics(&mut r);
    s5(&mut r);
    snapshot_counts(&mut r);
    topology(&mut r);
    consensus_impossibility(&mut r);
    approximate(&mut r, &mut deltas);
    set_agreement(&mut r);
    knowledge_gain(&mut r, &deltas);
    if r.failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
