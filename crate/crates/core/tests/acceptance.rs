//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints its `PASS`/`FAIL` line; exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use macc::analysis::{
    compare_with_baseline, convex_envelope, corollary2_check, envelope_points, rate_ic, rate_new,
    subpacketization_ic, subpacketization_new, sweep, theorem2_check,
};
use macc::decoder::{
    lemma_decode, lemma_decode_map, peel_decode, verify_plan_consistency, CacheView,
};
use macc::delivery::{build_schedule, encode_payloads, schedule_rate};
use macc::harness::{end_to_end, randomized_trials, synthesize_files};
use macc::placement::place;
use macc::render::schedule_lines;
use macc::{DemandVector, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SMALL_INSTANCE_BUDGET: Duration = Duration::from_secs(1);
const RATE_EQUALITY_BUDGET: Duration = Duration::from_secs(60);
const END_TO_END_BUDGET: Duration = Duration::from_secs(120);
const RANDOM_TRIALS: usize = 100;

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: u32, name: &'static str, pass: bool, detail: &str) -> Verdict {
    Verdict {
        id,
        name,
        pass,
        detail: detail.to_string(),
    }
}

fn sources_for(params: &SystemParams, alpha: usize) -> Vec<(usize, usize, String)> {
    lemma_decode_map(alpha, params)
        .unwrap()
        .entries
        .iter()
        .map(|e| (e.subfile.get(), e.part, e.source.to_string()))
        .collect()
}

fn criterion_01_k5_listing_and_decoding() -> Verdict {
    let start = Instant::now();
    let (p, d) = k5_z2();
    let schedule = build_schedule(&p, &d).unwrap();
    let lines_match = schedule_lines(&schedule) == K5_LISTING;
    let report = end_to_end(&p, &d, 1, 1).unwrap();
    let rate_ok = report.measured_rate == q(3, 2) && rate_ic(5, 1, 2).unwrap() == q(9, 5);
    let elapsed = start.elapsed();
    verdict(
        1,
        "K=5 k=1 z=2 listing, decoding and rate",
        lines_match
            && report.success()
            && report.mismatches.is_empty()
            && rate_ok
            && elapsed < SMALL_INSTANCE_BUDGET,
        &format!(
            "listing {}, users decoded {:?}, measured rate {} vs baseline 9/5, {elapsed:?}",
            if lines_match { "matches" } else { "differs" },
            report.per_user_success,
            report.measured_rate
        ),
    )
}

fn criterion_02_k8_listing_and_sources() -> Verdict {
    let start = Instant::now();
    let (p, d) = k8_z4();
    let schedule = build_schedule(&p, &d).unwrap();
    let got: BTreeSet<String> = schedule_lines(&schedule).into_iter().collect();
    let want: BTreeSet<String> = K8_LISTING.iter().map(|s| s.to_string()).collect();
    let lines_match = schedule.symbol_count() == 24 && got == want;
    let report = end_to_end(&p, &d, 2, 1).unwrap();
    let want_u0: Vec<(usize, usize, String)> = K8_USER0_SOURCES
        .iter()
        .map(|&(s, l, t)| (s, l, t.to_string()))
        .collect();
    let u0_ok = sources_for(&p, 0) == want_u0;
    let elapsed = start.elapsed();
    verdict(
        2,
        "K=8 k=1 z=4 listing, rate and user 0 sources",
        lines_match
            && report.success()
            && report.measured_rate == q(5, 3)
            && u0_ok
            && elapsed < SMALL_INSTANCE_BUDGET,
        &format!(
            "{} symbols, listing {}, rate {}, U0 sources {}, {elapsed:?}",
            schedule.symbol_count(),
            if lines_match { "matches" } else { "differs" },
            report.measured_rate,
            if u0_ok { "match" } else { "differ" }
        ),
    )
}

fn criterion_03_k9_listing_and_rate() -> Verdict {
    let start = Instant::now();
    let (p, d) = k9_z2();
    let schedule = build_schedule(&p, &d).unwrap();
    let lines_match = schedule_lines(&schedule) == K9_LISTING;
    let report = end_to_end(&p, &d, 3, 1).unwrap();
    let want_u0: Vec<(usize, usize, String)> = K9_USER0_SOURCES
        .iter()
        .map(|&(s, l, t)| (s, l, t.to_string()))
        .collect();
    let u0_ok = sources_for(&p, 0) == want_u0;
    let baseline = rate_ic(9, 2, 2).unwrap();
    let elapsed = start.elapsed();
    verdict(
        3,
        "K=9 k=2 z=2 listing, rate and user 0 sources",
        lines_match
            && report.success()
            && report.measured_rate == q(7, 3)
            && baseline == q(25, 9)
            && u0_ok
            && elapsed < SMALL_INSTANCE_BUDGET,
        &format!(
            "{} symbols, listing {}, rate {} vs baseline {baseline}, U0 sources {}, {elapsed:?}",
            schedule.symbol_count(),
            if lines_match { "matches" } else { "differs" },
            report.measured_rate,
            if u0_ok { "match" } else { "differ" }
        ),
    )
}

fn criterion_04_decode_table_from_cli() -> Verdict {
    let out = Command::new(env!("CARGO_BIN_EXE_macc"))
        .args([
            "verify",
            "--users",
            "5",
            "--cache-subfiles",
            "1",
            "--access",
            "2",
        ])
        .env_remove(macc::cli::OUT_DIR_ENV)
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<(usize, usize, usize, String)> = text
        .lines()
        .skip(1)
        .take_while(|l| !l.is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split_whitespace().collect();
            let user = cols[0].trim_start_matches('U').parse().unwrap();
            let inner = cols[2].trim_start_matches("W[").split(']').next().unwrap();
            let (sub, part) = inner.split_once(',').unwrap();
            (
                user,
                sub.parse().unwrap(),
                part.parse().unwrap(),
                cols[3].to_string(),
            )
        })
        .collect();
    let want: Vec<(usize, usize, usize, String)> = K5_DECODE_TABLE
        .iter()
        .map(|&(u, s, l, t)| (u, s, l, t.to_string()))
        .collect();
    verdict(
        4,
        "K=5 decode table from the CLI",
        out.status.code() == Some(0) && rows == want,
        &format!(
            "{} rows emitted, {} expected, exit {:?}",
            rows.len(),
            want.len(),
            out.status.code()
        ),
    )
}

fn criterion_05_closed_form_equals_schedule() -> Verdict {
    let start = Instant::now();
    let mut checked = 0;
    let mut mismatched = Vec::new();
    for p in valid_instances(3..=20) {
        let mut rng = ChaCha8Rng::seed_from_u64(p.num_users() as u64);
        let d = DemandVector::worst_case(&p, &mut rng).unwrap();
        let measured = schedule_rate(&build_schedule(&p, &d).unwrap());
        if measured != rate_new(p.num_users(), p.cache_subfiles(), p.access_degree()).unwrap() {
            mismatched.push((p.num_users(), p.cache_subfiles(), p.access_degree()));
        }
        checked += 1;
    }
    let elapsed = start.elapsed();
    verdict(
        5,
        "closed form equals schedule rate",
        mismatched.is_empty() && elapsed < RATE_EQUALITY_BUDGET,
        &format!(
            "{checked} instances, {} mismatches {mismatched:?}, {elapsed:?}",
            mismatched.len()
        ),
    )
}

fn criterion_06_end_to_end() -> Verdict {
    let start = Instant::now();
    let mut cells = 0;
    let mut failures = Vec::new();
    for p in valid_instances(3..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(7 + p.num_users() as u64);
        for d in [
            DemandVector::identity(&p),
            DemandVector::worst_case(&p, &mut rng).unwrap(),
        ] {
            let r = end_to_end(&p, &d, cells as u64, 1).unwrap();
            if !(r.success() && r.mismatches.is_empty()) {
                failures.push((p.num_users(), p.cache_subfiles(), p.access_degree()));
            }
            cells += 1;
        }
    }
    let big = SystemParams::new(25, 25, 1, 3).unwrap();
    let agg = randomized_trials(&big, RANDOM_TRIALS, 2024).unwrap();
    let elapsed = start.elapsed();
    verdict(
        6,
        "end-to-end decoding",
        failures.is_empty()
            && agg.failures == 0
            && agg.distinct_demand_vectors_tested == RANDOM_TRIALS
            && elapsed < END_TO_END_BUDGET,
        &format!(
            "{cells} matrix runs with {} failures; K=25 k=1 z=3: {} trials, {} distinct demand vectors, {} failures; {elapsed:?}",
            failures.len(),
            agg.trials,
            agg.distinct_demand_vectors_tested,
            agg.failures
        ),
    )
}

fn criterion_07_never_worse_than_baseline() -> Verdict {
    let mut checked = 0;
    let mut violations = Vec::new();
    for p in valid_instances(2..=30) {
        if !theorem2_check(p.num_users(), p.cache_subfiles(), p.access_degree()).unwrap() {
            violations.push((p.num_users(), p.cache_subfiles(), p.access_degree()));
        }
        checked += 1;
    }
    let summary = compare_with_baseline(&sweep(25, None, None).unwrap());
    println!(
        "[INFO] K=25 sweep: {} points, {} strictly below the baseline, {} coinciding, {} above",
        summary.rows, summary.strictly_better, summary.coinciding, summary.worse
    );
    verdict(
        7,
        "rate never exceeds the baseline",
        violations.is_empty(),
        &format!("{checked} instances, violations {violations:?}"),
    )
}

fn criterion_08_access_degree_k_minus_1() -> Verdict {
    let mut bad = Vec::new();
    for users in 3..=30 {
        for k in 1..=users {
            if !corollary2_check(users, k).unwrap() {
                bad.push((users, k));
            }
        }
    }
    verdict(
        8,
        "z = K-1 gives 1/K for k = 1 and 0 for k >= 2",
        bad.is_empty(),
        &format!("K in 3..=30, all k; exceptions {bad:?}"),
    )
}

fn criterion_09_decoder_equivalence() -> Verdict {
    let mut users_checked = 0;
    let mut problems = Vec::new();
    for p in valid_instances(2..=12) {
        let d = DemandVector::identity(&p);
        let schedule = build_schedule(&p, &d).unwrap();
        let store = synthesize_files(&p, schedule.granularity(), 9, 1).unwrap();
        let encoded = encode_payloads(&schedule, &store, &p).unwrap();
        let contents = place(&p);
        for alpha in 0..p.num_users() {
            let view = CacheView::materialize(&store, alpha, &p, &contents).unwrap();
            let peeled = peel_decode(alpha, &p, &d, &encoded, &view).unwrap();
            let plan = lemma_decode_map(alpha, &p).unwrap();
            let replay = lemma_decode(&plan, &d, &encoded, &view).unwrap();
            // peeling may also learn parts of other users' files; compare on the demanded file
            let own = d.file_of(alpha);
            let same_keys = replay
                .keys()
                .eq(peeled.recovered.keys().filter(|k| k.file == own));
            let same_bytes = replay
                .iter()
                .all(|(k, b)| peeled.recovered.get(k).is_some_and(|r| &r.bytes == b));
            let consistent = verify_plan_consistency(&plan, &schedule, alpha, &p);
            if !(same_keys && same_bytes && consistent) {
                problems.push((p.num_users(), p.cache_subfiles(), p.access_degree(), alpha));
            }
            users_checked += 1;
        }
    }
    verdict(
        9,
        "explicit plan and peeling agree",
        problems.is_empty(),
        &format!(
            "{users_checked} (instance, user) pairs, {} disagreements, first {:?}",
            problems.len(),
            &problems[..problems.len().min(5)]
        ),
    )
}

fn criterion_10_envelope_omits_two_points() -> Verdict {
    let hull = convex_envelope(&envelope_points(25, 3).unwrap());
    let vertices: Vec<String> = hull.iter().map(|v| v.gamma.to_string()).collect();
    let omitted = !hull
        .iter()
        .any(|v| v.gamma == q(2, 25) || v.gamma == q(3, 25));
    verdict(
        10,
        "K=25 z=3 envelope omits 2/25 and 3/25",
        omitted && hull[0].gamma == q(0, 1),
        &format!("hull vertices at γ = {}", vertices.join(", ")),
    )
}

fn criterion_11_subpacketization_bound() -> Verdict {
    let mut over = Vec::new();
    let mut at_bound_when_tight = true;
    let mut worst = (0usize, 0usize, 0usize, 0usize);
    for users in 2..=30usize {
        for k in 1..=users {
            for z in 2..=users {
                let s = subpacketization_new(users, k, z).unwrap();
                let bound = users * (users - 1);
                if s.per_round_max > bound {
                    over.push((users, k, z));
                    if s.per_round_max - bound > worst.3 {
                        worst = (users, k, z, s.per_round_max - bound);
                    }
                }
                if k * z + 1 == users && s.per_round_max != bound {
                    at_bound_when_tight = false;
                }
            }
        }
    }
    for (users, k, z) in [(5, 1, 2), (9, 2, 2), (25, 1, 3), (11, 1, 10)] {
        println!(
            "[INFO] K={users} k={k} z={z}: scheme {} (per-round max), {} (payload lcm); baseline {}",
            subpacketization_new(users, k, z).unwrap().per_round_max,
            subpacketization_new(users, k, z).unwrap().payload_lcm,
            subpacketization_ic(users, k, z).unwrap()
        );
    }
    verdict(
        11,
        "per-round sub-packetization at most K(K-1), tight at kz = K-1",
        over.is_empty() && at_bound_when_tight,
        &format!(
            "{} instances exceed K(K-1) (largest excess {} at K={} k={} z={}); equality at kz = K-1: {at_bound_when_tight}",
            over.len(),
            worst.3,
            worst.0,
            worst.1,
            worst.2
        ),
    )
}

fn main() {
    let criteria: [fn() -> Verdict; 11] = [
        criterion_01_k5_listing_and_decoding,
        criterion_02_k8_listing_and_sources,
        criterion_03_k9_listing_and_rate,
        criterion_04_decode_table_from_cli,
        criterion_05_closed_form_equals_schedule,
        criterion_06_end_to_end,
        criterion_07_never_worse_than_baseline,
        criterion_08_access_degree_k_minus_1,
        criterion_09_decoder_equivalence,
        criterion_10_envelope_omits_two_points,
        criterion_11_subpacketization_bound,
    ];
    let mut failed = 0;
    for run in criteria {
        let v = run();
        println!(
            "[{}] criterion {:>2}: {}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.id,
            v.name,
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
