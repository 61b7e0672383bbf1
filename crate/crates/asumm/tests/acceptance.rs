//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero when any criterion fails.
//!
//! Every check is deterministic (fixed seeds) and runs offline.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use asumm::io::read_threads;
use asumm_core::classify::logreg::{
    balanced_class_weights, objective, stratified_folds, train_logreg, ParamLayout, TrainConfig,
};
use asumm_core::classify::{
    classify_aspect, classify_relevance, AspectBackend, AspectClassifier, PairClassifier,
    RelevanceBackend, ZsLabelMap, ZsVariant, CANDIDATE_LABELS,
};
use asumm_core::evalkit::{cohens_kappa, evaluate_summaries, rouge, RougeConfig};
use asumm_core::lingfeat::PatternLists;
use asumm_core::pipeline::{
    chunk_by_aspect, gold_extractive_summaries, summarize_chunks, FailurePolicy, LabelSource,
    SummarizerBackend, SummarizerSpec,
};
use asumm_core::sampler::{filter_by_answer_count, tukey_fences};
use asumm_core::textprep::{split_answer, CleanerConfig};
use asumm_core::{Aspect, BackendError, Relevance, SummarySet, Thread};
use common::workspace_root;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------------------
// Metric oracles

fn oracle_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

fn oracle_f(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn div(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Clipped n-gram overlap by linear counting over explicit n-gram lists.
fn oracle_rouge_n(c: &[String], r: &[String], n: usize) -> (f64, f64, f64) {
    let grams = |t: &[String]| -> Vec<Vec<String>> {
        if t.len() < n {
            Vec::new()
        } else {
            (0..=t.len() - n).map(|i| t[i..i + n].to_vec()).collect()
        }
    };
    let (cg, rg) = (grams(c), grams(r));
    let mut seen: Vec<&Vec<String>> = Vec::new();
    let mut matched = 0;
    for g in &cg {
        if seen.contains(&g) {
            continue;
        }
        seen.push(g);
        let in_c = cg.iter().filter(|x| *x == g).count();
        let in_r = rg.iter().filter(|x| *x == g).count();
        matched += in_c.min(in_r);
    }
    let (p, rc) = (div(matched, cg.len()), div(matched, rg.len()));
    (p, rc, oracle_f(p, rc))
}

/// LCS by the full suffix table.
fn oracle_lcs(a: &[String], b: &[String]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            t[i][j] = if a[i] == b[j] {
                1 + t[i + 1][j + 1]
            } else {
                t[i + 1][j].max(t[i][j + 1])
            };
        }
    }
    t[0][0]
}

fn oracle_kappa(a: &[u8], b: &[u8]) -> f64 {
    let labels: Vec<u8> = {
        let mut l: Vec<u8> = a.iter().chain(b).copied().collect();
        l.sort();
        l.dedup();
        l
    };
    let idx = |x: u8| labels.iter().position(|&l| l == x).unwrap();
    let k = labels.len();
    let mut table = vec![vec![0usize; k]; k];
    for (&x, &y) in a.iter().zip(b) {
        table[idx(x)][idx(y)] += 1;
    }
    let n = a.len() as f64;
    let p_o = (0..k).map(|i| table[i][i]).sum::<usize>() as f64 / n;
    let p_e = (0..k)
        .map(|i| {
            let row: usize = table[i].iter().sum();
            let col: usize = table.iter().map(|r| r[i]).sum();
            row as f64 * col as f64
        })
        .sum::<f64>()
        / (n * n);
    if p_e == 1.0 {
        1.0
    } else {
        (p_o - p_e) / (1.0 - p_e)
    }
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let vocab = [
        "the", "The", "cat", "cat,", "sat", "sat.", "on", "ON", "mat", "mat!", "a", "dog", "(dog)",
        "ran", "fast", "rest", "water", "2", "...", "B12",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let text = |rng: &mut ChaCha8Rng| {
            let len = rng.gen_range(0..=30);
            (0..len).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect::<Vec<_>>().join(" ")
        };
        let (c, r) = (text(&mut rng), text(&mut rng));
        let got = rouge(&c, &r);
        let (ct, rt) = (oracle_tokens(&c), oracle_tokens(&r));
        if rt.is_empty() {
            ensure!(got.empty_reference && got.r1.f1 == 0.0 && got.rl.f1 == 0.0, "case {case}: empty reference");
            continue;
        }
        let l = oracle_lcs(&ct, &rt);
        let (lp, lr) = (div(l, ct.len()), div(l, rt.len()));
        let expected = [
            oracle_rouge_n(&ct, &rt, 1),
            oracle_rouge_n(&ct, &rt, 2),
            (lp, lr, oracle_f(lp, lr)),
        ];
        for (name, prf, exp) in [("R1", got.r1, expected[0]), ("R2", got.r2, expected[1]), ("RL", got.rl, expected[2])] {
            for (x, y) in [(prf.precision, exp.0), (prf.recall, exp.1), (prf.f1, exp.2)] {
                worst = worst.max((x - y).abs());
                ensure!((x - y).abs() <= 1e-9, "case {case} {name}: {x} vs oracle {y}\n  c={c:?}\n  r={r:?}");
            }
        }
    }
    let mut kworst = 0.0f64;
    for case in 0..200 {
        let n = rng.gen_range(1..=120);
        let k = rng.gen_range(1..=5u8);
        let a: Vec<u8> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        // correlated second annotator
        let b: Vec<u8> = a
            .iter()
            .map(|&x| if rng.gen_bool(0.6) { x } else { rng.gen_range(0..k) })
            .collect();
        let got = cohens_kappa(&a, &b).map_err(|e| e.to_string())?;
        let exp = oracle_kappa(&a, &b);
        kworst = kworst.max((got - exp).abs());
        ensure!((got - exp).abs() <= 1e-12, "kappa case {case}: {got} vs oracle {exp}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure!(elapsed < 10.0, "took {elapsed:.2}s");
    Ok(format!(
        "200 ROUGE pairs max |err| {worst:.1e}, 200 kappa cases max |err| {kworst:.1e}, {elapsed:.2}s"
    ))
}

// ---------------------------------------------------------------------------
// Preprocessing golden suite

/// (rule exercised, raw text, expected sentences). Rules marked with `*`
/// are stated verbatim by the preprocessing description.
const GOLDEN: [(&str, &str, &[&str]); 25] = [
    ("line join", "I feel sick\nmaybe flu", &["I feel sick maybe flu."]),
    ("line break adds stop", "I feel sick\nMaybe flu", &["I feel sick.", "Maybe flu."]),
    ("terminated line", "It hurts.\nsee a doctor", &["It hurts.", "see a doctor."]),
    ("paragraph end stop", "Rest well\n\nDrink water", &["Rest well.", "Drink water."]),
    ("* '...' collapse", "Wait for it...", &["Wait for it."]),
    ("* '??' collapse", "Are you sure?? Yes.", &["Are you sure?", "Yes."]),
    ("* '!!!' collapse", "Get well soon!!! Really.", &["Get well soon!", "Really."]),
    ("ellipsis splits", "Hmm... maybe not", &["Hmm.", "maybe not."]),
    ("URL removal", "Read http://example.com/faq before you go.", &["Read before you go."]),
    ("www URL removal", "See www.nhs.uk for more", &["See for more."]),
    ("smiley removal", "Feel better :) You will!", &["Feel better You will!"]),
    ("winking smiley", "Take it easy ;)", &["Take it easy."]),
    ("symbol strip", "Use *warm* water (not hot) -- trust me", &["Use warm water not hot trust me."]),
    ("quote strip", "He said \"rest\" and 'sleep'.", &["He said rest and sleep."]),
    ("colon strip", "Note: drink water.", &["Note drink water."]),
    ("* 'dr.' guard", "See your dr. soon. Rest well.", &["See your dr. soon.", "Rest well."]),
    ("* 'i.e.' guard", "Use it i.e. daily. Then stop.", &["Use it i.e. daily.", "Then stop."]),
    ("* 'etc.' guard", "Buy soap, lotion etc. at the store.", &["Buy soap, lotion etc. at the store."]),
    ("* 'M.D.'/'P.S.' guards", "My M.D. agreed. P.S. it worked.", &["My M.D. agreed.", "P.S. it worked."]),
    ("* 'L.A.' guard", "We moved to L.A. last year.", &["We moved to L.A. last year."]),
    ("* numeral guard", "1. Rest a lot. 2. Drink water.", &["1. Rest a lot.", "2. Drink water."]),
    ("* <2 alnum drop", "k. Fine. ok.", &["Fine.", "ok."]),
    ("* punctuation-only drop", "!!! ?? a. Go now", &["Go now."]),
    ("glued full stop", "It helps.try washing daily", &["It helps.", "try washing daily."]),
    ("whitespace and final stop", "  Try   essential    oils  ", &["Try essential oils."]),
];

fn preprocessing_golden() -> Outcome {
    let cfg = CleanerConfig::default();
    let mut failures = Vec::new();
    for (rule, raw, expected) in GOLDEN {
        let got = split_answer(raw, &cfg);
        if got != expected {
            failures.push(format!("{rule}: {raw:?} -> {got:?}, expected {expected:?}"));
        }
    }
    ensure!(failures.is_empty(), "{}", failures.join("\n  "));
    let verbatim = GOLDEN.iter().filter(|g| g.0.starts_with('*')).count();
    Ok(format!("25/25 texts exact ({verbatim} on verbatim-stated rules)"))
}

// ---------------------------------------------------------------------------
// Tukey fences

/// Hinges by Tukey's depth rule: depth = (floor((n+1)/2) + 1) / 2.
fn hinge_oracle(values: &[i64]) -> (f64, f64) {
    let mut s = values.to_vec();
    s.sort();
    let n = s.len();
    let depth2 = n.div_ceil(2) + 1; // twice the hinge depth
    let at = |d2: usize, from_top: bool| {
        let lo = d2 / 2;
        let hi = d2.div_ceil(2);
        let pick = |d: usize| if from_top { s[n - d] } else { s[d - 1] };
        (pick(lo) + pick(hi)) as f64 / 2.0
    };
    (at(depth2, false), at(depth2, true))
}

fn tukey_suite() -> Outcome {
    let f = tukey_fences(&(1..=9).map(f64::from).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    ensure!(f.q1 == 3.0 && f.q3 == 7.0, "[1..9]: q1 {} q3 {}", f.q1, f.q3);
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for case in 0..500 {
        let n = rng.gen_range(1..=60);
        let counts: Vec<i64> = (0..n)
            .map(|_| if rng.gen_bool(0.1) { rng.gen_range(20..80) } else { rng.gen_range(1..12) })
            .collect();
        let (q1, q3) = hinge_oracle(&counts);
        let (lo, hi) = (q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1));
        let threads: Vec<Thread> = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| Thread::from_raw(format!("t{i}"), "c", "s", "", (0..c).map(|_| String::from("x"))))
            .collect();
        let kept: Vec<String> = filter_by_answer_count(threads.clone()).into_iter().map(|t| t.thread_id).collect();
        let expected: Vec<String> = threads
            .iter()
            .filter(|t| {
                let c = t.answers.len() as f64;
                lo <= c && c <= hi
            })
            .map(|t| t.thread_id.clone())
            .collect();
        ensure!(kept == expected, "case {case}: counts {counts:?}, fences [{lo}, {hi}]");
    }
    Ok("[1..9] q1=3 q3=7; 500 random lists match the hinge oracle".into())
}

// ---------------------------------------------------------------------------
// Logistic regression

fn lr_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let classes = rng.gen_range(2..=4);
        let d = rng.gen_range(1..=7);
        let n = rng.gen_range(4..=30);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let y: Vec<usize> = (0..n).map(|i| if i < classes { i } else { rng.gen_range(0..classes) }).collect();
        let w = balanced_class_weights(&y, classes);
        let lambda = [0.0, 0.01, 0.1, 1.0, 10.0][case % 5];
        let layout = ParamLayout::new(classes, d);
        let params: Vec<f64> = (0..layout.len()).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let (_, grad) = objective(&params, layout, &x, &y, &w, lambda);
        let h = 1e-5;
        for j in 0..params.len() {
            let mut p = params.clone();
            p[j] += h;
            let up = objective(&p, layout, &x, &y, &w, lambda).0;
            p[j] -= 2.0 * h;
            let down = objective(&p, layout, &x, &y, &w, lambda).0;
            let fd = (up - down) / (2.0 * h);
            let rel = (fd - grad[j]).abs() / fd.abs().max(grad[j].abs()).max(1e-3);
            worst = worst.max(rel);
            ensure!(rel < 1e-4, "case {case} param {j}: fd {fd} analytic {}", grad[j]);
        }
    }

    // balanced weights, exact
    for (y, k) in [(vec![0, 0, 0, 1], 2usize), (vec![0, 1, 2, 2, 2, 2, 1, 0, 2], 3)] {
        let w = balanced_class_weights(&y, k);
        for (c, wc) in w.iter().enumerate() {
            let nc = y.iter().filter(|&&v| v == c).count();
            let exact = y.len() as f64 / (k as f64 * nc as f64);
            ensure!(wc.to_bits() == exact.to_bits(), "class {c}: {wc} vs {exact}");
        }
    }
    ensure!(balanced_class_weights(&[0, 0, 0, 1], 2) == vec![4.0 / 6.0, 2.0], "hand case");

    // each example lands in exactly one validation fold
    let y: Vec<usize> = (0..137).map(|_| rng.gen_range(0..3)).collect();
    let folds = stratified_folds(&y, 10, 7);
    for (i, &fold) in folds.iter().enumerate() {
        let hits = (0..10).filter(|&f| fold == f).count();
        ensure!(hits == 1, "example {i} in {hits} folds");
    }
    let mut sizes = [0usize; 10];
    for &f in &folds {
        sizes[f] += 1;
    }
    ensure!(sizes.iter().sum::<usize>() == y.len() && sizes.iter().all(|&s| s > 0), "fold sizes {sizes:?}");

    // same seed, same bits
    let x: Vec<Vec<f64>> = (0..90)
        .map(|i| vec![(i % 3) as f64 + rng.gen_range(-0.8..0.8), rng.gen_range(-1.0..1.0)])
        .collect();
    let yy: Vec<usize> = (0..90).map(|i| i % 3).collect();
    let classes: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let cfg = TrainConfig {
        seed: 99,
        ..TrainConfig::default()
    };
    let m1 = train_logreg(&x, &yy, &classes, &[], &cfg).map_err(|e| e.to_string())?;
    let m2 = train_logreg(&x, &yy, &classes, &[], &cfg).map_err(|e| e.to_string())?;
    let bits = |m: &asumm_core::classify::LogRegModel| -> Vec<u64> {
        m.weights.iter().flatten().chain(&m.bias).map(|v| v.to_bits()).collect()
    };
    ensure!(bits(&m1) == bits(&m2) && m1 == m2, "refit differs");
    for (c, &wv) in classes.iter().zip(&balanced_class_weights(&yy, 3)) {
        ensure!(m1.class_weights[c] == wv, "model class weight for {c}");
    }
    Ok(format!(
        "50 gradients max rel err {worst:.1e}; weights exact; 137 examples in one fold each; refit bit-identical (lambda {})",
        m1.lambda
    ))
}

// ---------------------------------------------------------------------------
// Zero-shot label table

fn zs_table() -> Outcome {
    use Aspect::*;
    let table: [(&str, Aspect); 12] = [
        ("informative", Information),
        ("information", Information),
        ("cause", Information),
        ("question", Question),
        ("interrogative", Question),
        ("suggestion", Suggestion),
        ("imperative", Suggestion),
        ("instruction", Suggestion),
        ("command", Suggestion),
        ("personal experience", Experience),
        ("experience", Experience),
        ("personal", Experience),
    ];
    ensure!(CANDIDATE_LABELS.len() == 12, "{} candidate labels", CANDIDATE_LABELS.len());
    let map = ZsLabelMap::default();
    let p = PatternLists::default();
    // a sentence without personal pronouns, so both variants agree
    let neutral = "Vitamin levels vary.";
    for (label, aspect) in table {
        ensure!(CANDIDATE_LABELS.contains(&label), "{label} not a candidate");
        for v in [ZsVariant::Zs, ZsVariant::ZsPp] {
            let got = map.map(label, neutral, v, &p).map_err(|e| e.to_string())?;
            ensure!(got == aspect, "{label} ({v:?}) -> {got:?}, expected {aspect:?}");
        }
    }
    ensure!(map.aspect_for("not-a-label").is_err(), "unknown label accepted");
    Ok("12/12 labels map to the stated partition".into())
}

// ---------------------------------------------------------------------------
// End-to-end conservation

/// Pair classifier and aspect classifier that answer from planted gold labels.
struct GoldOracle {
    relevance: BTreeMap<String, Relevance>,
    aspect: BTreeMap<String, Aspect>,
}

impl GoldOracle {
    fn new(threads: &[Thread]) -> Self {
        let mut o = GoldOracle {
            relevance: BTreeMap::new(),
            aspect: BTreeMap::new(),
        };
        for s in threads.iter().flat_map(Thread::sentences) {
            o.relevance.insert(s.text.clone(), s.relevance_gold.expect("gold relevance"));
            if let Some(a) = s.aspect_gold {
                o.aspect.insert(s.text.clone(), a);
            }
        }
        o
    }
}

impl PairClassifier for GoldOracle {
    fn p_relevant(&self, _question: &str, sentence: &str) -> Result<f64, BackendError> {
        match self.relevance.get(sentence) {
            Some(Relevance::Relevant) => Ok(1.0),
            Some(Relevance::Irrelevant) => Ok(0.0),
            None => Err(BackendError::new(format!("unplanted sentence {sentence:?}"))),
        }
    }
}

impl AspectClassifier for GoldOracle {
    fn aspect(&self, sentence: &str) -> Result<Aspect, BackendError> {
        self.aspect
            .get(sentence)
            .copied()
            .ok_or_else(|| BackendError::new(format!("no planted aspect for {sentence:?}")))
    }
}

fn end_to_end_conservation() -> Outcome {
    let path = workspace_root().join("fixtures/corpus/annotated.jsonl");
    let threads = read_threads(&path).map_err(|e| e.to_string())?.threads;
    ensure!(threads.len() == 20, "{} threads", threads.len());
    let oracle = GoldOracle::new(&threads);
    let rb = RelevanceBackend::PairClassifier {
        classifier: &oracle,
        threshold: 0.5,
    };
    let ab = AspectBackend::Multiclass(&oracle);
    let spec = SummarizerSpec {
        backend: SummarizerBackend::ExtractiveLead,
        max_words: 1_000_000,
        ..SummarizerSpec::default()
    };
    let mut system = Vec::new();
    let mut gold = Vec::new();
    for t in &threads {
        let classified = classify_relevance(t.clone(), &rb).and_then(|t| classify_aspect(t, &ab)).map_err(|e| e.to_string())?;
        let chunks = chunk_by_aspect(&classified, LabelSource::Predicted).map_err(|e| e.to_string())?;
        let set = summarize_chunks(&t.thread_id, &chunks, &spec, None, FailurePolicy::FailFast).map_err(|e| e.to_string())?;
        for (aspect, summary) in &set.summaries {
            // the planted sentences of this aspect, in (answer, sentence) order
            let mut planted: Vec<_> = t.sentences().filter(|s| s.aspect_gold == Some(*aspect)).collect();
            planted.sort_by_key(|s| s.position());
            let expected = planted.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
            ensure!(*summary == expected, "{} {aspect}: {summary:?} != {expected:?}", t.thread_id);
        }
        system.push(set);
        gold.push(gold_extractive_summaries(t).map_err(|e| e.to_string())?);
    }
    let scores = evaluate_summaries(&system, &gold, &RougeConfig::default()).map_err(|e| e.to_string())?;
    ensure!(scores.len() == 4, "aspects scored: {:?}", scores.keys().collect::<Vec<_>>());
    for (aspect, s) in &scores {
        ensure!(s.mean.r1.f1 == 1.0 && s.missing == 0, "{aspect}: R1 f1 {}", s.mean.r1.f1);
    }

    // the same through the binary, offline
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sys = dir.path().join("sys.jsonl");
    let refs = dir.path().join("gold.jsonl");
    let p = path.to_str().unwrap();
    run_cli(&["--offline", "summarize", "--in", p, "--labels", "gold", "--backend", "extractive", "--max-words", "1000000", "--out", sys.to_str().unwrap()])?;
    run_cli(&["--offline", "summarize", "--in", p, "--reference", "--out", refs.to_str().unwrap()])?;
    let out = run_cli(&["--offline", "evaluate", "--system", sys.to_str().unwrap(), "--gold", refs.to_str().unwrap()])?;
    let report: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    for (aspect, r) in report["rouge"].as_object().ok_or("no rouge block")? {
        ensure!(r["mean"]["r1"]["f1"] == 1.0, "cli {aspect}: {}", r["mean"]["r1"]["f1"]);
    }
    let pairs: usize = scores.values().map(|s| s.pairs).sum();
    Ok(format!("20 threads, {pairs} aspect pairs, mean ROUGE-1 f1 = 1.0 (library and CLI)"))
}

// ---------------------------------------------------------------------------
// Pairing rule

fn set(id: &str, items: &[(Aspect, &str)]) -> SummarySet {
    let mut s = SummarySet::new(id);
    for (a, t) in items {
        s.insert(*a, *t);
    }
    s
}

fn pairing_rule() -> Outcome {
    use Aspect::*;
    // a system that never writes Question summaries, as with full-answer input
    let gold = [
        set("1", &[(Question, "is it chronic?"), (Suggestion, "drink more water"), (Experience, "mine went away")]),
        set("2", &[(Question, "how old are you?"), (Suggestion, "see a doctor")]),
    ];
    let system = [
        set("1", &[(Suggestion, "drink more water"), (Experience, "mine went away"), (Information, "it is common")]),
        set("2", &[(Suggestion, "see a doctor"), (Information, "it is rare")]),
    ];
    let r = evaluate_summaries(&system, &gold, &RougeConfig::default()).map_err(|e| e.to_string())?;
    let q = r.get(&Question).ok_or("question not scored")?;
    ensure!(q.pairs == 2 && q.missing == 2, "question pairs {} missing {}", q.pairs, q.missing);
    for prf in [q.mean.r1, q.mean.r2, q.mean.rl] {
        ensure!(prf.f1 == 0.0 && prf.precision == 0.0 && prf.recall == 0.0, "question row {prf:?}");
    }
    ensure!(!r.contains_key(&Information), "system-only aspect was scored");
    ensure!(r[&Suggestion].mean.r1.f1 == 1.0 && r[&Suggestion].pairs == 2, "suggestion");
    ensure!(r[&Experience].pairs == 1, "experience pairs {}", r[&Experience].pairs);
    Ok("omitted gold aspect scores 0.0/0.0/0.0; system-only aspect excluded".into())
}

// ---------------------------------------------------------------------------
// Compression

fn compression_bookkeeping() -> Outcome {
    let root = workspace_root().join("fixtures/compression");
    let out = run_cli(&[
        "stats",
        "--in",
        root.join("threads.jsonl").to_str().unwrap(),
        "--gold-summaries",
        root.join("gold_summaries.jsonl").to_str().unwrap(),
    ])?;
    let report: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let mean = report["summary"]["mean"].as_f64().ok_or("no summary mean")?;
    ensure!((mean - 0.38).abs() <= 1e-9, "mean ratio {mean}");
    let per_thread: Vec<f64> = report["threads"]
        .as_array()
        .ok_or("no threads")?
        .iter()
        .map(|t| t["summary_ratio"].as_f64().unwrap())
        .collect();
    Ok(format!("stats mean summary/source ratio {mean} from per-thread {per_thread:?}"))
}

// ---------------------------------------------------------------------------

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_asumm"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("asumm {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("metric oracle equivalence", metric_oracles),
        ("preprocessing golden suite", preprocessing_golden),
        ("tukey property suite", tukey_suite),
        ("logistic regression correctness", lr_correctness),
        ("zero-shot label table", zs_table),
        ("end-to-end conservation", end_to_end_conservation),
        ("evaluation pairing rule", pairing_rule),
        ("compression bookkeeping", compression_bookkeeping),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
