//! One PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

mod oracle;

use std::fs;
use std::io;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::Duration as Days;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptc_core::analytics::{
    build_cohort_graph, cohort_stats, dup_days, help_seeking_delay_days, marginal_delays, percent,
    percent_tenths, total_pathway_days, CohortGraph, Epoch, NodeKey,
};
use ptc_core::codec::{deserialize_session, export_csv, parse_csv};
use ptc_core::fixture::{example123, EXAMPLE123_CSV};
use ptc_core::model::{rule_codes, validate, NewEvent};
use ptc_core::synth::{random_cohort, random_pathway, seed_defect, GenConfig};
use ptc_core::{NodeCategory, PathwayRecord, RuleCode};
use ptc_service::atomic::FaultHook;
use ptc_service::store::session_path;
use ptc_service::{Store, StoreConfig, StoreError};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_round_trip() -> Outcome {
    const LIMIT: Duration = Duration::from_secs(1);
    let start = Instant::now();
    let parsed = parse_csv(EXAMPLE123_CSV).map_err(|e| e.to_string())?;
    let again = export_csv(&parsed).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(again.as_bytes() == EXAMPLE123_CSV.as_bytes(), || {
        format!("re-export differs:\n{again}")
    })?;
    ensure(elapsed < LIMIT, || {
        format!("took {elapsed:?}, limit {LIMIT:?}")
    })?;
    Ok(format!(
        "{} bytes identical, {elapsed:?} < {LIMIT:?}",
        again.len()
    ))
}

fn fixture_analytics() -> Outcome {
    // Published values; the column-walk oracle must agree before the engine is consulted.
    let want_marginal = [67, 0, 27, 58, 0, 19, 155, 30];
    let want_demand = [true, true, true, true, false, false, false, false];
    let facts = oracle::facts_from_export(EXAMPLE123_CSV);
    ensure(
        facts.dup == Some(207) && facts.help_seeking == Some(103) && facts.total == 459,
        || "calendar oracle disagrees with the published fixture values".into(),
    )?;
    ensure(
        facts.marginal.iter().map(|m| m.2).eq(want_marginal)
            && facts.marginal.iter().map(|m| m.1).eq(want_demand),
        || format!("oracle marginal delays {:?}", facts.marginal),
    )?;

    let p = parse_csv(EXAMPLE123_CSV).map_err(|e| e.to_string())?;
    let got = (
        dup_days(&p),
        help_seeking_delay_days(&p),
        total_pathway_days(&p),
    );
    ensure(got == (Some(207), Some(103), 459), || {
        format!("engine (dup, hsd, total) = {got:?}")
    })?;
    let delays = marginal_delays(&p);
    let engine: Vec<(String, bool, i64)> = delays
        .iter()
        .map(|a| (a.code.clone(), a.epoch == Epoch::Demand, a.days))
        .collect();
    ensure(engine == facts.marginal, || {
        format!("engine marginal delays {engine:?}")
    })?;
    Ok("dup 207, help-seeking 103, total 459, marginal 67,0,27,58 | 0,19,155,30".into())
}

fn conservation() -> Outcome {
    const N: usize = 2000;
    const LIMIT: Duration = Duration::from_secs(10);
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let cfg = GenConfig::default();
    let mut with_encounters = 0;
    for i in 0..N {
        let p = random_pathway(&mut rng, format!("C{i}"), &cfg);
        let Some(hsd) = help_seeking_delay_days(&p) else {
            continue;
        };
        with_encounters += 1;
        let sum: i64 = marginal_delays(&p).iter().map(|a| a.days).sum();
        let total = total_pathway_days(&p);
        let oracle_total = oracle::chrono_day(p.admission) - oracle::chrono_day(p.onset);
        ensure(hsd + sum == total && total == oracle_total, || {
            format!(
                "{}: {hsd} + {sum} != {total} (oracle {oracle_total})",
                p.subject_id
            )
        })?;
    }
    let elapsed = start.elapsed();
    ensure(with_encounters >= 1000, || {
        format!("only {with_encounters} pathways had encounters")
    })?;
    ensure(elapsed < LIMIT, || {
        format!("took {elapsed:?}, limit {LIMIT:?}")
    })?;
    Ok(format!(
        "{with_encounters} pathways exact, {elapsed:?} < {LIMIT:?}"
    ))
}

fn published_percentages() -> Outcome {
    let cases = [(198, 1117, 177), (121, 156, 776), (255, 1117, 228)];
    for (part, whole, tenths) in cases {
        let got = percent_tenths(part, whole);
        ensure(got == tenths, || {
            format!("{part}/{whole} gave {got} tenths, want {tenths}")
        })?;
    }
    let printed = 22.78;
    let got = percent(255, 1117);
    ensure((got - printed).abs() <= 0.05, || {
        format!("255/1117 = {got}, printed {printed}")
    })?;
    Ok("17.7, 77.6, 22.8 (|22.8 - 22.78| <= 0.05)".into())
}

fn mutation_suite() -> Outcome {
    const MUTANTS: usize = 100;
    const VALID: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let cfg = GenConfig::default();
    for rule in RuleCode::ALL {
        for i in 0..MUTANTS {
            let p = random_pathway(&mut rng, format!("M{i}"), &cfg);
            let q = seed_defect(&mut rng, &p, rule);
            let codes = rule_codes(&validate(&q));
            ensure(codes == [rule], || {
                format!("{rule} mutant {i} reported {codes:?}")
            })?;
        }
    }
    for i in 0..VALID {
        let p = random_pathway(&mut rng, format!("V{i}"), &cfg);
        let v = validate(&p);
        ensure(v.is_empty(), || format!("false positive on V{i}: {v:?}"))?;
    }
    Ok(format!(
        "{} rules x {MUTANTS} mutants exact, 0 false positives on {VALID}",
        RuleCode::ALL.len()
    ))
}

fn key_name(k: &NodeKey) -> String {
    format!("{}/{}", k.category, k.code)
}

fn compare_graph(g: &CohortGraph, cohort: &[PathwayRecord]) -> Result<(), String> {
    let (nodes, edges) = oracle::naive_graph(cohort);
    ensure(
        g.nodes.len() == nodes.len() && g.edges.len() == edges.len(),
        || {
            format!(
                "graph size {}/{} vs {}/{}",
                g.nodes.len(),
                g.edges.len(),
                nodes.len(),
                edges.len()
            )
        },
    )?;
    for (k, &c) in &g.nodes {
        ensure(nodes.get(&key_name(k)) == Some(&c), || {
            format!("node {k:?} count {c}")
        })?;
    }
    for ((a, b), &c) in &g.edges {
        let key = (key_name(a), key_name(b));
        ensure(edges.get(&key) == Some(&c), || {
            format!("edge {key:?} count {c}")
        })?;
    }
    Ok(())
}

fn compare_stats(cohort: &[PathwayRecord]) -> Result<(), String> {
    let got = cohort_stats(cohort).map_err(|e| e.to_string())?;
    let want = oracle::naive_stats(cohort);
    let t = &got.totals;
    ensure(
        (
            t.participants,
            t.encounters,
            t.demand_encounters,
            t.supply_encounters,
        ) == (want.participants, want.encounters, want.demand, want.supply),
        || format!("totals {t:?}"),
    )?;
    ensure(
        t.community_encounters + t.clinical_encounters == want.encounters,
        || format!("category totals {t:?}"),
    )?;
    ensure(got.rows.len() == want.rows.len(), || {
        format!("{} rows vs {}", got.rows.len(), want.rows.len())
    })?;
    for (g, w) in got.rows.iter().zip(&want.rows) {
        let same = g.category.as_str() == w.category
            && g.code == w.code
            && g.total_encounters == w.total
            && g.pct_of_all_encounters == w.pct_all
            && g.unique_participants == w.unique
            && g.pct_of_participants == w.pct_participants
            && g.demand_count == w.demand.len() as u64
            && g.demand_median_days == oracle::median_of(&w.demand)
            && g.demand_min_days == w.demand.iter().min().copied()
            && g.demand_max_days == w.demand.iter().max().copied()
            && g.supply_count == w.supply.len() as u64
            && g.supply_median_days == oracle::median_of(&w.supply)
            && g.supply_min_days == w.supply.iter().min().copied()
            && g.supply_max_days == w.supply.iter().max().copied();
        ensure(same, || {
            format!("row mismatch\n engine {g:?}\n oracle {w:?}")
        })?;
    }
    Ok(())
}

fn cohort_oracles() -> Outcome {
    const TRIALS: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let cfg = GenConfig {
        max_events: 30,
        ..GenConfig::default()
    };
    let mut checked = 0;
    for trial in 0..TRIALS {
        let size = rng.random_range(0..=20);
        let cohort = random_cohort(&mut rng, size, &cfg);
        checked += cohort.len();
        compare_stats(&cohort).map_err(|e| format!("trial {trial}: {e}"))?;
        compare_graph(&build_cohort_graph(&cohort), &cohort)
            .map_err(|e| format!("trial {trial}: {e}"))?;
    }
    Ok(format!(
        "{TRIALS} trials, {checked} pathways, stats and graph exact"
    ))
}

fn graph_fixture() -> Outcome {
    let expected = [
        ("Onset", "Family"),
        ("Family", "Police"),
        ("Police", "ED"),
        ("ED", "Inpt"),
        ("Inpt", "Family"),
        ("Family", "Acute"),
        ("Acute", "Outpt"),
        ("Outpt", "Self"),
        ("Self", "STEP"),
    ];
    let mut want: Vec<(&str, &str)> = expected.to_vec();
    want.sort();
    for n in [1u64, 2, 5, 17] {
        let cohort: Vec<PathwayRecord> = (0..n)
            .map(|i| {
                let mut p = example123();
                p.subject_id = format!("Copy{i}");
                p
            })
            .collect();
        let g = build_cohort_graph(&cohort);
        let edges: Vec<(String, String, u64)> = g
            .sorted_edges()
            .into_iter()
            .map(|(a, b, c)| (a.id(), b.id(), c))
            .collect();
        let mut shape: Vec<(&str, &str)> = edges
            .iter()
            .map(|(a, b, _)| (a.as_str(), b.as_str()))
            .collect();
        shape.sort();
        ensure(shape == want, || format!("N={n}: edges {edges:?}"))?;
        ensure(edges.iter().all(|e| e.2 == n), || {
            format!("N={n}: weights {edges:?}")
        })?;
        let family = g.node_count(&NodeKey::new(NodeCategory::Community, "Family"));
        ensure(family == 2 * n, || format!("N={n}: Family count {family}"))?;
    }
    Ok("9 edges of weight 1; copies N = 2, 5, 17 scale every weight to N".into())
}

fn mutate<R: Rng>(rng: &mut R, p: &mut PathwayRecord) {
    let encounters: Vec<_> = p
        .events
        .iter()
        .filter(|e| e.is_encounter())
        .map(|e| e.id.clone())
        .collect();
    if !encounters.is_empty() && rng.random_bool(0.3) {
        let id = encounters.choose(rng).unwrap().clone();
        p.remove_event(&id).unwrap();
    } else {
        let span = (p.admission - p.onset).num_days();
        let date = p.onset + Days::days(rng.random_range(0..=span));
        let code = *["Family", "Police", "ED", "Inpt", "PCP", "Self"]
            .choose(rng)
            .unwrap();
        p.add_event(NewEvent::from_code(code, date)).unwrap();
    }
}

fn durability() -> Outcome {
    const CYCLES: usize = 100;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let kill = Arc::new(AtomicBool::new(false));
    let hook_flag = kill.clone();
    let hook: FaultHook = Arc::new(move |tmp, _| {
        if hook_flag.load(Ordering::SeqCst) {
            // Leave a torn temp file behind, as a crash mid-write would.
            let bytes = fs::read(tmp)?;
            fs::write(tmp, &bytes[..bytes.len() / 3])?;
            return Err(io::Error::other("killed between temp-write and rename"));
        }
        Ok(())
    });
    let open = |hook: &FaultHook| -> Result<Store, String> {
        Store::open(StoreConfig::new(dir.path()))
            .map(|s| s.with_fault_hook(hook.clone()))
            .map_err(|e| e.to_string())
    };

    let subjects: Vec<String> = (0..5).map(|i| format!("S{i}")).collect();
    let mut expected: Vec<PathwayRecord> = subjects
        .iter()
        .map(|id| {
            random_pathway(
                &mut rng,
                id.clone(),
                &GenConfig {
                    max_events: 8,
                    ..GenConfig::default()
                },
            )
        })
        .collect();
    let mut store = open(&hook)?;
    for p in &expected {
        store.put(p.clone(), None).map_err(|e| e.to_string())?;
    }
    for p in &mut expected {
        p.version = 1;
    }

    let mut kills = 0;
    for cycle in 0..CYCLES {
        let s = rng.random_range(0..subjects.len());
        let stored = store.get(&subjects[s]).map_err(|e| e.to_string())?.pathway;
        let mut next = stored.clone();
        mutate(&mut rng, &mut next);
        let killed = rng.random_bool(0.5);
        kill.store(killed, Ordering::SeqCst);
        let result = store.put(next.clone(), Some(stored.version));
        kill.store(false, Ordering::SeqCst);
        match (killed, result) {
            (true, Err(StoreError::Io(_))) => {
                kills += 1;
                // The process "dies": reopen from disk.
                store = open(&hook)?;
            }
            (false, Ok(v)) => {
                next.version = v;
                expected[s] = next;
            }
            (k, r) => return Err(format!("cycle {cycle}: killed={k} put returned {r:?}")),
        }

        ensure(store.quarantined().is_empty(), || {
            format!("cycle {cycle}: quarantined {:?}", store.quarantined())
        })?;
        for (i, id) in subjects.iter().enumerate() {
            let text = fs::read_to_string(session_path(dir.path(), id))
                .map_err(|e| format!("cycle {cycle}: {id}: {e}"))?;
            let on_disk = deserialize_session(&text)
                .map_err(|e| format!("cycle {cycle}: {id} unreadable: {e}"))?;
            ensure(validate(&on_disk).is_empty(), || {
                format!("cycle {cycle}: {id} invalid")
            })?;
            ensure(on_disk == expected[i], || {
                format!(
                    "cycle {cycle}: {id} on disk is v{}, want v{}",
                    on_disk.version, expected[i].version
                )
            })?;
            let served = store.get(id).map_err(|e| e.to_string())?.pathway;
            ensure(served == expected[i], || {
                format!("cycle {cycle}: {id} served stale record")
            })?;
        }
    }
    Ok(format!(
        "{CYCLES} cycles, {kills} kills, every record readable and valid"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("golden fixture round-trip", golden_round_trip),
        ("fixture analytics", fixture_analytics),
        ("conservation on random pathways", conservation),
        ("published percentage consistency", published_percentages),
        ("validator mutation suite", mutation_suite),
        ("cohort oracle equivalence", cohort_oracles),
        ("graph fixture and N-copy scaling", graph_fixture),
        ("store durability under injected kills", durability),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
