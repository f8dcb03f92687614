//! Acceptance gate. Each test checks one criterion and prints a single
//! `criterion N ... PASS|FAIL` line before asserting.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use tal_election::election::merge;
use tal_election::evaluation::{eligible, pairwise_os};
use tal_election::formats::{
    parse_config_str, parse_segments, parse_tensor, render_config, render_segments, render_tensor,
};
use tal_election::synthesis::{ablation_run, generate_corpus, CorpusSpec, Scenario, SimRng};
use tal_election::windowing::{accumulate_scores, coverage, schedule_windows};
use tal_election::{
    elect, evaluate_sets, match_bruteforce, match_optimal, ActionSegment, AggregatedSignal, Candidate,
    ElectionConfig, ProbabilityTensor, SegmentSet, ViewWeights, WindowSpec,
};

fn verdict(n: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {n:>2} {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn seg(c: usize, s: f64, e: f64) -> ActionSegment {
    ActionSegment::new(c, s, e).unwrap()
}

fn random_segments(rng: &mut SimRng, n: usize) -> Vec<ActionSegment> {
    (0..n)
        .map(|_| {
            // half-second grid so exact ties and boundary offsets occur often
            let s = rng.below(60) as f64 * 0.5;
            let len = 0.5 + rng.below(30) as f64 * 0.5;
            seg(rng.below(3), s, s + len)
        })
        .collect()
}

#[test]
fn criterion_01_metric_oracle_equivalence() {
    let mut rng = SimRng::new(0xACCE);
    let started = Instant::now();
    let mut mismatches = 0;
    let instances = 1000;
    for _ in 0..instances {
        let (ng, np) = (rng.below(9), rng.below(9));
        let gt = random_segments(&mut rng, ng);
        let pred = random_segments(&mut rng, np);
        let brute = match_bruteforce(&gt, &pred).unwrap();
        let fast = match_optimal(&gt, &pred);
        if brute.total_os.to_bits() != fast.total_os.to_bits() || brute.pair_list() != fast.pair_list() {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed();
    verdict(
        1,
        "metric oracle equivalence",
        mismatches == 0 && elapsed < Duration::from_secs(10),
        &format!("{instances} instances, {mismatches} mismatches, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_overlap_spot_checks() {
    let cases = [
        ((10.0, 20.0), (10.0, 20.0), 1.0),
        ((10.0, 20.0), (15.0, 25.0), 1.0 / 3.0),
        ((100.0, 130.0), (95.0, 125.0), 5.0 / 7.0),
    ];
    let worst = cases
        .iter()
        .map(|&((a, b), (c, d), want)| (pairwise_os(&seg(0, a, b), &seg(0, c, d)) - want).abs())
        .fold(0.0, f64::max);
    verdict(2, "overlap spot checks", worst <= 1e-12, &format!("max error {worst:e}"));
}

#[test]
fn criterion_03_eligibility_boundary() {
    let gt = seg(4, 100.0, 130.0);
    let on_start = seg(4, 110.0, 130.0);
    let on_end = seg(4, 100.0, 120.0);
    let past = seg(4, 110.001, 130.0);
    let matched = |p: &ActionSegment| match_optimal(&[gt], &[*p]).pairs.len() == 1;
    let ok = eligible(&gt, &on_start)
        && eligible(&gt, &on_end)
        && !eligible(&gt, &past)
        && matched(&on_start)
        && matched(&on_end)
        && !matched(&past);
    verdict(3, "eligibility boundary", ok, "10 s matches, 10.001 s does not");
}

#[test]
fn criterion_04_election_hand_trace() {
    let (k, c) = (16, 8);
    let p = ProbabilityTensor::from_fn(900, k, 3, |t, class, _| {
        if class == c && (150..450).contains(&t) { 1.0 } else { 0.0 }
    })
    .unwrap();
    let cfg = ElectionConfig::new(k, 3).unwrap();
    let out = elect(&p, &cfg, "v").unwrap();
    let got = out.segments.iter().find(|s| s.class_id == c).copied();
    verdict(
        4,
        "election hand trace",
        got == Some(seg(c, 5.0, 15.0)),
        &format!("class {c} -> {got:?}"),
    );
}

fn cand(start: usize, end: usize) -> Candidate {
    Candidate {
        class_id: 0,
        start_frame: start,
        end_frame: end,
        mean_score: 0.0,
    }
}

#[test]
fn criterion_05_merge_semantics() {
    let signal = AggregatedSignal::from_class_series(vec![vec![0.8; 300]]).unwrap();
    let gap = ElectionConfig::new(1, 1).unwrap().gap_frames();
    let joined = merge(&[cand(0, 100), cand(111, 200)], gap, &signal).unwrap();
    let apart = merge(&[cand(0, 100), cand(116, 200)], gap, &signal).unwrap();
    let boundary_ok = gap == 15
        && joined.len() == 1
        && (joined[0].start_frame, joined[0].end_frame) == (0, 200)
        && apart.len() == 2;

    let mut rng = SimRng::new(5);
    let mut failures = 0;
    for _ in 0..1000 {
        let frames = 50 + rng.below(400);
        let series: Vec<f64> = (0..frames).map(|_| rng.uniform()).collect();
        let signal = AggregatedSignal::from_class_series(vec![series]).unwrap();
        let mut cands = Vec::new();
        let mut t = rng.below(5);
        while t < frames {
            let end = (t + rng.below(20)).min(frames - 1);
            cands.push(cand(t, end));
            t = end + 1 + rng.below(25);
        }
        let gap = rng.below(30);
        let once = merge(&cands, gap, &signal).unwrap();
        let twice = merge(&once, gap, &signal).unwrap();
        let spaced = once.windows(2).all(|w| w[1].start_frame - w[0].end_frame > gap);
        if once != twice || !spaced {
            failures += 1;
        }
    }
    verdict(
        5,
        "merge semantics",
        boundary_ok && failures == 0,
        &format!("gap {gap} frames, boundary ok {boundary_ok}, {failures}/1000 idempotence failures"),
    );
}

#[test]
fn criterion_06_noiseless_recovery() {
    let started = Instant::now();
    let seeds: Vec<u64> = (0..10).collect();
    let videos = generate_corpus(&Scenario::noiseless(0), &seeds, "video", None).unwrap();
    let cfg = ElectionConfig::new(16, 3).unwrap();
    let gt: Vec<SegmentSet> = videos.iter().map(|v| v.gt.clone()).collect();
    let pred: Vec<SegmentSet> = videos
        .iter()
        .map(|v| elect(&v.tensor, &cfg, &v.video_id).unwrap())
        .collect();
    let score = evaluate_sets(&gt, &pred).unwrap().corpus_score;
    let elapsed = started.elapsed();
    verdict(
        6,
        "noiseless recovery",
        score >= 0.95 && elapsed < Duration::from_secs(30),
        &format!("score {score:.4} on 10 videos, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_07_ablation_ordering() {
    let started = Instant::now();
    let spec = CorpusSpec::standard(0);
    let test = spec.test_videos().unwrap();
    let tuning = spec.tuning_videos().unwrap();
    let report = ablation_run(&test, &tuning, spec.base.time_base).unwrap();
    let s = report.scores();
    let elapsed = started.elapsed();
    let increasing = s.windows(2).all(|w| w[1] >= w[0]);
    let gain = s[3] - s[0];
    verdict(
        7,
        "ablation ordering",
        test.len() == 20 && increasing && gain >= 0.05 && elapsed < Duration::from_secs(120),
        &format!(
            "SEL {:.4}, +FLTR {:.4}, +MRG {:.4}, +AGG {:.4}, gain {gain:.4}, {elapsed:.2?}",
            s[0], s[1], s[2], s[3]
        ),
    );
}

#[test]
fn criterion_08_windowing_coverage() {
    let mut rng = SimRng::new(8);
    let mut failures = Vec::new();
    for case in 0..500 {
        let (s, tau) = loop {
            let s = 1 + rng.below(16);
            let tau = 1 + rng.below(8);
            if (s * tau).is_multiple_of(4) {
                break (s, tau);
            }
        };
        let spec = WindowSpec::new(s, tau).unwrap();
        let frames = 1 + rng.below(6 * spec.span());
        let counts = coverage(frames, &spec);
        let span = spec.span();
        let covered = counts.iter().all(|&c| c >= 1);
        let interior = (span..frames.saturating_sub(span)).all(|t| counts[t] == 4);

        let (views, classes) = (1 + rng.below(3), 1 + rng.below(6));
        let table: Vec<Vec<f64>> = (0..views * schedule_windows(frames, &spec).len())
            .map(|_| {
                let raw: Vec<f64> = (0..classes).map(|_| rng.exponential()).collect();
                let sum: f64 = raw.iter().sum();
                raw.iter().map(|x| x / sum).collect()
            })
            .collect();
        let starts = schedule_windows(frames, &spec);
        let scorer = |_: &str, view: usize, start: usize, _: &WindowSpec| {
            let w = starts.iter().position(|&s| s == start).unwrap();
            Ok(table[view * starts.len() + w].clone())
        };
        let p = accumulate_scores("v", frames, views, classes, &spec, &scorer).unwrap();
        let simplex = (0..frames).all(|t| {
            (0..views).all(|m| ((0..classes).map(|c| p.get(t, c, m)).sum::<f64>() - 1.0).abs() <= 1e-6)
        });
        if !(covered && interior && simplex) {
            failures.push((case, frames, s, tau));
        }
    }
    verdict(
        8,
        "windowing coverage",
        failures.is_empty(),
        &format!("500 cases, failures {failures:?}"),
    );
}

fn run_cli(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_tal-election"))
        .args(args)
        .output()
        .unwrap();
    assert!(status.status.success(), "{args:?}: {}", String::from_utf8_lossy(&status.stderr));
}

fn pipeline(dir: &Path, scenario: &Path) -> Vec<(String, Vec<u8>)> {
    let sim = dir.join("sim");
    run_cli(&["simulate", "--scenario", scenario.to_str().unwrap(), "--out", sim.to_str().unwrap(), "--seed", "42"]);
    let cfg = sim.join("config.json");
    let mut preds = Vec::new();
    for i in 0..3 {
        let tensor = sim.join(format!("video_{i:03}.csv"));
        let out = dir.join(format!("pred_{i}.csv"));
        run_cli(&["elect", "--tensor", tensor.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        preds.push(fs::read_to_string(&out).unwrap());
    }
    // concatenate per-video predictions into one file (headers dropped after the first)
    let mut all = preds[0].clone();
    for p in &preds[1..] {
        all.extend(p.lines().skip(1).map(|l| format!("{l}\n")));
    }
    let pred = dir.join("pred.csv");
    fs::write(&pred, all).unwrap();
    let report = dir.join("report.json");
    run_cli(&["eval", "--gt", sim.join("gt.csv").to_str().unwrap(), "--pred", pred.to_str().unwrap(), "--out", report.to_str().unwrap()]);

    let mut files: Vec<_> = walk(dir)
        .into_iter()
        .map(|p| (p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

#[test]
fn criterion_09_determinism() {
    let root = tempfile::tempdir().unwrap();
    let scenario = root.path().join("scenario.json");
    fs::write(&scenario, r#"{"scenario": {"num_videos": 3, "video_len_s": 240, "duration_s": [5, 12]}}"#).unwrap();
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    let first = pipeline(&a, &scenario);
    let second = pipeline(&b, &scenario);
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    verdict(
        9,
        "determinism",
        first == second && names.len() >= 10,
        &format!("{} files compared byte for byte", names.len()),
    );
}

#[test]
fn criterion_10_throughput() {
    let mut rng = SimRng::new(10);
    let p = ProbabilityTensor::from_fn(14_400, 16, 3, |_, _, _| rng.uniform()).unwrap();
    let mut cfg = ElectionConfig::new(16, 3).unwrap();
    cfg.weights = ViewWeights::new((0..16).map(|c| vec![1.0 + c as f64, 2.0, 3.0]).collect()).unwrap();
    let started = Instant::now();
    let out = elect(&p, &cfg, "v").unwrap();
    let elapsed = started.elapsed();
    verdict(
        10,
        "throughput",
        out.segments.len() == 16 && elapsed < Duration::from_secs(1),
        &format!("T=14400 K=16 M=3 elected in {elapsed:.2?}"),
    );
}

fn random_id(rng: &mut SimRng) -> String {
    const CHARS: &[u8] = b"abcXYZ019_-, \"'";
    (0..1 + rng.below(8)).map(|_| CHARS[rng.below(CHARS.len())] as char).collect()
}

#[test]
fn criterion_11_round_trip() {
    let mut rng = SimRng::new(11);
    let mut failures = Vec::new();
    for case in 0..100 {
        let (t, k, m) = (1 + rng.below(30), 1 + rng.below(6), 1 + rng.below(4));
        let p = ProbabilityTensor::from_fn(t, k, m, |_, _, _| match rng.below(4) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.uniform(),
        })
        .unwrap();
        let first = render_tensor(&p);
        let second = render_tensor(&parse_tensor(&first, k, m).unwrap());
        if first != second {
            failures.push(("tensor", case));
        }

        let sets: Vec<SegmentSet> = (0..rng.below(4))
            .map(|i| {
                let segs = (0..rng.below(5))
                    .map(|_| {
                        let s = rng.range(0.0, 500.0);
                        seg(rng.below(16), s, s + rng.range(1e-3, 60.0))
                    })
                    .collect();
                SegmentSet::new(format!("{}{i}", random_id(&mut rng)), segs)
            })
            .collect();
        let first = render_segments(&sets).unwrap();
        let second = render_segments(&parse_segments(&first, None).unwrap()).unwrap();
        if first != second {
            failures.push(("segments", case));
        }

        let mut cfg = ElectionConfig::new(k, m).unwrap();
        cfg.weights =
            ViewWeights::new((0..k).map(|_| (0..m).map(|_| rng.range(0.01, 5.0)).collect()).collect()).unwrap();
        cfg.thresholds = (0..k).map(|_| rng.range(0.01, 0.99)).collect();
        cfg.merge_gap_s = rng.range(0.0, 3.0);
        let first = render_config(&cfg).unwrap();
        let second = render_config(&parse_config_str(&first).unwrap()).unwrap();
        if first != second {
            failures.push(("config", case));
        }
    }
    verdict(
        11,
        "round trip",
        failures.is_empty(),
        &format!("100 instances x 3 formats, failures {failures:?}"),
    );
}
