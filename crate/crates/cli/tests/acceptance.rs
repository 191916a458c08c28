//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use zerosum_core::decomposition::{self, Phi};
use zerosum_core::engine;
use zerosum_core::lemmas::{self, LemmaKind};
use zerosum_core::search;
use zerosum_core::structures::{self, cyclic, ClauseMatch, Letter};
use zerosum_core::{GroupSpec, Sequence};

const INVARIANT_BUDGET: Duration = Duration::from_secs(5 * 60);
const S_LEQ_BUDGET_EACH: Duration = Duration::from_secs(10 * 60);
const STRETCH_BUDGET_SECS: u64 = 60 * 60;
const ORACLE_TRIALS_PER_GROUP: usize = 10_000;
const ORACLE_MAX_LEN: usize = 14;
const ALLOWED_MISMATCHES: usize = 0;
const ALLOWED_COUNTEREXAMPLES: usize = 0;
const DECOMPOSITION_BUDGET: Duration = Duration::from_secs(10 * 60);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn spec(n: u64, m: u64) -> GroupSpec {
    GroupSpec::new(n, m).unwrap()
}

fn invariant_formulas() -> Verdict {
    let start = Instant::now();
    let mut bad = Vec::new();
    for (n, m) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1)] {
        let g = spec(n, m);
        let (mn, n) = ((n * m) as usize, n as usize);
        let d = search::davenport(g).unwrap();
        let eta = search::eta(g).unwrap();
        if d != mn + n - 1 {
            bad.push(format!("D({g}) = {d}"));
        }
        if eta != mn + 2 * n - 2 {
            bad.push(format!("eta({g}) = {eta}"));
        }
    }
    let t = start.elapsed();
    let pass = bad.is_empty() && t <= INVARIANT_BUDGET;
    verdict(pass, format!("6 groups, {:.2?} (budget {:?}) {}", t, INVARIANT_BUDGET, bad.join(" ")))
}

fn s_leq_formulas() -> Verdict {
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut count = 0;
    for (n, m) in [(3, 1), (3, 2), (4, 1)] {
        let g = spec(n, m);
        let base = (n * m + n - 1) as usize;
        for k in 0..n as usize {
            let start = Instant::now();
            let got = search::s_leq(g, base - k).unwrap();
            let t = start.elapsed();
            slowest = slowest.max(t);
            count += 1;
            if got != base + k || t > S_LEQ_BUDGET_EACH {
                bad.push(format!("{g} k={k}: {got} in {t:.2?}"));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("{count} values, slowest {slowest:.2?} (budget {S_LEQ_BUDGET_EACH:?} each) {}", bad.join(" ")),
    )
}

fn run_verify(group: &str, k: u32, extra: &[&str]) -> (Option<i32>, String) {
    let k = k.to_string();
    let mut args = vec!["verify-conjecture", "--group", group, "--k", &k];
    args.extend_from_slice(extra);
    let out = Command::new(env!("CARGO_BIN_EXE_zerosum"))
        .args(&args)
        .output()
        .expect("zerosum runs");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap_or_default();
    let orbits = report["results"]["orbits"].as_u64().unwrap_or(0);
    (out.status.code(), format!("{group} k={k}: {orbits} orbits"))
}

fn conjecture_campaigns() -> Verdict {
    let mut cases: Vec<(&str, u32)> = vec![("2,1", 1), ("2,2", 1)];
    cases.extend((0..3).map(|k| ("3,1", k)));
    cases.extend((0..4).map(|k| ("4,1", k)));
    cases.extend((0..3).map(|k| ("3,2", k)));
    let mut bad = Vec::new();
    let mut orbits = Vec::new();
    for (g, k) in cases.iter().copied() {
        let (code, info) = run_verify(g, k, &[]);
        if code != Some(0) {
            bad.push(format!("{info} exit {code:?}"));
        }
        orbits.push(info);
    }
    let secs = STRETCH_BUDGET_SECS.to_string();
    let start = Instant::now();
    let (code, info) = run_verify("4,2", 2, &["--max-seconds", &secs, "--jobs", "4"]);
    let stretch = if code == Some(0) {
        format!("stretch {info} in {:.2?}", start.elapsed())
    } else {
        bad.push(format!("stretch {info} exit {code:?}"));
        String::new()
    };
    verdict(
        bad.is_empty(),
        format!("{} campaigns exit 0; {stretch} {}", cases.len(), bad.join(" ")),
    )
}

/// Bit `ℓ` of entry `g`: some subset of size `ℓ` sums to `g`, by explicit
/// enumeration of all `2^|S|` subsets.
fn brute_reach(g: GroupSpec, terms: &[zerosum_core::Element]) -> Vec<u32> {
    let len = terms.len();
    let mut sums = vec![g.zero(); 1 << len];
    let mut reach = vec![0u32; g.cardinality()];
    reach[0] = 1;
    for mask in 1usize..1 << len {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = g.add(sums[mask & (mask - 1)], terms[low]);
        reach[g.linear_index(sums[mask])] |= 1 << mask.count_ones();
    }
    reach
}

fn engine_oracle() -> Verdict {
    let mut rng = StdRng::seed_from_u64(20_240_601);
    let mut mismatches = 0;
    let mut trials = 0;
    for g in [spec(3, 1), spec(2, 2)] {
        let card = g.cardinality() as u32;
        for _ in 0..ORACLE_TRIALS_PER_GROUP {
            let len = rng.gen_range(0..=ORACLE_MAX_LEN);
            let terms: Vec<_> = (0..len).map(|_| g.from_index(rng.gen_range(0..card) as usize)).collect();
            let s = Sequence::from_terms(g, terms.iter().copied()).unwrap();
            let table = engine::reach(&s).unwrap();
            let brute = brute_reach(g, &terms);
            let agree = g.elements().all(|e| {
                let row = brute[g.linear_index(e)];
                (0..=len).all(|l| table.get(e, l) == (row >> l & 1 == 1))
            });
            if !agree {
                mismatches += 1;
            }
            trials += 1;
        }
    }
    verdict(
        mismatches <= ALLOWED_MISMATCHES,
        format!("{trials} random sequences over C_3+C_3 and C_2+C_4, {mismatches} mismatches"),
    )
}

fn lemma_sweeps() -> Verdict {
    let plan = [
        (LemmaKind::Zs3, 2, 12),
        (LemmaKind::Xset, 2, 50),
        (LemmaKind::Length3, 2, 40),
        (LemmaKind::Pairsum, 2, 30),
        (LemmaKind::Claim1, 2, 30),
    ];
    let mut parts = Vec::new();
    let mut found = 0;
    for (lemma, lo, hi) in plan {
        let mut cases = 0;
        for n in lo..=hi {
            let r = lemmas::sweep(lemma, n).unwrap();
            cases += r.cases;
            found += r.counterexamples.len();
        }
        parts.push(format!("{lemma} n<={hi}: {cases} cases"));
    }
    verdict(
        found <= ALLOWED_COUNTEREXAMPLES,
        format!("{}; {found} counterexamples", parts.join(", ")),
    )
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn cyclic_oracle() -> Verdict {
    let mut bad = Vec::new();
    for n in 2..=8u32 {
        // independent enumeration: nondecreasing residue lists, all subset sums
        let mut found = BTreeSet::new();
        let mut idx = vec![0u32; n as usize];
        loop {
            let len = idx.len();
            let mut zero_lengths = BTreeSet::new();
            for mask in 1u32..1 << len {
                let sum: u32 = (0..len).filter(|i| mask >> i & 1 == 1).map(|i| idx[i]).sum();
                if sum % n == 0 {
                    zero_lengths.insert(mask.count_ones() as usize);
                }
            }
            if zero_lengths.len() == 1 && zero_lengths.contains(&len) {
                found.insert(idx.clone());
            }
            let mut i = len;
            while i > 0 && idx[i - 1] == n - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            let v = idx[i - 1];
            for x in idx.iter_mut().skip(i) {
                *x = v;
            }
        }
        let expected: BTreeSet<Vec<u32>> = (1..n)
            .filter(|&g| gcd(g, n) == 1)
            .map(|g| vec![g; n as usize])
            .collect();
        let library: BTreeSet<Vec<u32>> = cyclic::minimal_zero_sums(n, n as usize).into_iter().collect();
        if found != expected || library != expected {
            bad.push(format!("n={n}"));
        }
    }
    verdict(bad.is_empty(), format!("n in [2, 8] {}", bad.join(" ")))
}

/// Every part-3 construction at `(g, k)`, paired with its clause.
fn part3_constructions(g: GroupSpec, k: u32) -> Vec<(ClauseMatch, Sequence)> {
    let elems: Vec<_> = g.elements().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &u in &elems {
        for &v in &elems {
            let mut params: Vec<ClauseMatch> = (1..=g.m())
                .map(|s| ClauseMatch {
                    part: 3,
                    clause: Letter::A,
                    k,
                    pair: (u, v),
                    s: Some(s),
                    x_list: Vec::new(),
                    removed: None,
                })
                .collect();
            params.push(ClauseMatch {
                part: 3,
                clause: Letter::B,
                k,
                pair: (u, v),
                s: None,
                x_list: Vec::new(),
                removed: None,
            });
            for p in params {
                if let Ok(s) = structures::build_clause(&g, &p) {
                    if seen.insert((p.clause, s.index_list())) {
                        out.push((p, s));
                    }
                }
            }
        }
    }
    out
}

fn decomposition_pipeline() -> Verdict {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut decomps = 0usize;
    let mut bad = Vec::new();
    // (3,2) has no k in [2, n-2]; its part-3 displays at k = 1, 2 run in
    // boundary mode.
    for (g, k, boundary) in [(spec(3, 2), 1, true), (spec(3, 2), 2, true), (spec(4, 2), 2, false)] {
        let phi = Phi::canonical(g).unwrap();
        for (p, s) in part3_constructions(g, k) {
            checked += 1;
            match decomposition::check_all_decompositions(&s, k, &phi, boundary, 100_000) {
                Ok(reports) => {
                    decomps += reports.len();
                    for r in reports {
                        let reproduces = r.dichotomy.iter().any(|c| c.clause == p.clause);
                        if !r.passes() || !reproduces {
                            bad.push(format!("{g} k={k} {p}"));
                        }
                    }
                }
                Err(e) => bad.push(format!("{g} k={k} {p}: {e}")),
            }
        }
    }
    let t = start.elapsed();
    let pass = bad.is_empty() && checked > 0 && t <= DECOMPOSITION_BUDGET;
    bad.truncate(5);
    verdict(
        pass,
        format!("{checked} constructions, {decomps} block decompositions, {t:.2?} {}", bad.join("; ")),
    )
}

fn headless_integration() -> Verdict {
    // sharded campaign through the binary, merged, must equal the whole run
    let dir = std::env::temp_dir().join(format!("zerosum-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bin = env!("CARGO_BIN_EXE_zerosum");
    let mut files = Vec::new();
    let mut ok = true;
    for i in 1..=4 {
        let path = dir.join(format!("{i}.json"));
        let status = Command::new(bin)
            .args(["verify-conjecture", "--group", "3,2", "--k", "1", "--shard", &format!("{i}/4")])
            .arg("--out")
            .arg(&path)
            .status()
            .unwrap();
        ok &= status.code() == Some(0);
        files.push(path);
    }
    let merged = Command::new(bin).arg("merge").args(&files).output().unwrap();
    let whole = Command::new(bin)
        .args(["verify-conjecture", "--group", "3,2", "--k", "1"])
        .output()
        .unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    let m: serde_json::Value = serde_json::from_slice(&merged.stdout).unwrap_or_default();
    let w: serde_json::Value = serde_json::from_slice(&whole.stdout).unwrap_or_default();
    ok &= merged.status.code() == Some(0)
        && m["results"]["representatives"] == w["results"]["representatives"];
    verdict(ok, "sharded verify-conjecture (3,2) k=1 over 4 shards merges to the unsharded report")
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("invariant formulas", invariant_formulas),
        ("s_<=ell formulas", s_leq_formulas),
        ("conjecture campaigns", conjecture_campaigns),
        ("engine oracle", engine_oracle),
        ("lemma sweeps", lemma_sweeps),
        ("cyclic minimal zero-sums", cyclic_oracle),
        ("decomposition pipeline", decomposition_pipeline),
        ("headless integration", headless_integration),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {tag} {name}: {}", i + 1, v.detail.trim());
        if !v.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
