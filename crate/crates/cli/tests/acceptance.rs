//! Acceptance run: one PASS or FAIL line per criterion.
//!
//! Failures are reported, not fatal; set `DRIFTLAB_ACCEPTANCE_STRICT=1` to
//! turn any failure into a non-zero exit status.

use std::fs;
use std::panic;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;

use driftlab::corpus::{
    build_vocabulary, slice, subsample_keep_probability, ContextBatch, Granularity, SliceConfig, Split, Stoplist,
    TimeSlicedCorpus, Vocabulary,
};
use driftlab::crosslingual::{
    apply_alignment, classify, cross_drift, fit_alignment, BehaviorClass, BilingualLexicon, CutRule,
};
use driftlab::drift::{drift_report, median_drift, top_drifting};
use driftlab::evaluation::{evaluate, scale_factor};
use driftlab::model::{
    gradients, loss_neg_with, loss_pos, loss_prior, EmbeddingState, NegativeDraws, PriorConfig, Variant,
};
use driftlab::seed::rng_for;
use driftlab::synth::{generate, Behavior, Planted, SynthCorpus, SynthSpec};
use driftlab::trainer::{init_dynamic, random_init, train_dynamic, train_static, TrainingConfig};

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

const VARIANTS: [Variant; 4] = [Variant::Dbe, Variant::DbeI, Variant::DbeNc, Variant::DbeSc];

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Random state whose slices differ, with a random prior and one batch.
struct Instance {
    state: EmbeddingState,
    prior: PriorConfig,
    batch: ContextBatch,
    draws: NegativeDraws,
}

fn instance(variant: Variant, seed: u64, num_slices: usize, slice: Option<usize>) -> Instance {
    let (nv, dim, window, k, n) = (20, 5, 2, 3, 6);
    let mut rng = rng_for(seed, "instance");
    let mut state = EmbeddingState::random(num_slices, nv, dim, 0.5, seed);
    for x in state.rho_data_mut() {
        *x += uniform(&mut rng, -0.3, 0.3);
    }
    let prior = PriorConfig::new(variant, uniform(&mut rng, 0.5, 2.0), uniform(&mut rng, 0.1, 0.5));
    let t = slice.unwrap_or_else(|| rng.random_range(0..num_slices));
    let mut batch = ContextBatch::new(t, window);
    let mut ids = Vec::new();
    for _ in 0..n {
        let center = rng.random_range(0..nv as u32);
        batch.centers.push(center);
        let mut mask: Vec<bool> = (0..2 * window).map(|_| rng.random_bool(0.8)).collect();
        if !mask.iter().any(|&m| m) {
            mask[0] = true;
        }
        for m in mask {
            batch.contexts.push(if m { rng.random_range(0..nv as u32) } else { 0 });
            batch.mask.push(m);
        }
        for _ in 0..k {
            let neg = loop {
                let c = rng.random_range(0..nv as u32);
                if c != center {
                    break c;
                }
            };
            ids.push(neg);
        }
    }
    Instance {
        state,
        prior,
        batch,
        draws: NegativeDraws { k, ids },
    }
}

fn data_loss(s: &EmbeddingState, i: &Instance) -> f64 {
    loss_pos(s, &i.batch) + loss_neg_with(s, &i.batch, &i.draws)
}

/// Worst relative error of present rows against central differences of
/// the full objective, and worst absolute data-term difference on absent
/// rows.
fn check_gradient(i: &Instance) -> (f64, f64) {
    const H: f64 = 1e-5;
    let grad = gradients(&i.state, &i.batch, &i.draws, &i.prior, 1.0);
    let total = |s: &EmbeddingState| data_loss(s, i) + loss_prior(s, &i.prior);
    let (nt, nv, dim) = (i.state.num_slices(), i.state.vocab_size(), i.state.dim());
    let mut worst_rel: f64 = 0.0;
    let mut worst_absent: f64 = 0.0;
    let mut probe = |offset: usize, is_rho: bool, analytic: Option<f64>| {
        let mut s = i.state.clone();
        fn data(s: &mut EmbeddingState, is_rho: bool) -> &mut [f64] {
            if is_rho {
                s.rho_data_mut()
            } else {
                s.alpha_data_mut()
            }
        }
        let x = data(&mut s, is_rho)[offset];
        data(&mut s, is_rho)[offset] = x + H;
        let (fp, dp) = (total(&s), data_loss(&s, i));
        data(&mut s, is_rho)[offset] = x - H;
        let (fm, dm) = (total(&s), data_loss(&s, i));
        match analytic {
            Some(a) => {
                let numeric = (fp - fm) / (2.0 * H);
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
                worst_rel = worst_rel.max(rel);
            }
            None => worst_absent = worst_absent.max(((dp - dm) / (2.0 * H)).abs()),
        }
    };
    for t in 0..nt {
        for v in 0..nv {
            let row = grad.rho_row(t, v);
            for d in 0..dim {
                probe((t * nv + v) * dim + d, true, row.map(|r| r[d]));
            }
        }
    }
    for v in 0..nv {
        let row = grad.alpha_row(v);
        for d in 0..dim {
            probe(v * dim + d, false, row.map(|r| r[d]));
        }
    }
    (worst_rel, worst_absent)
}

fn gradient_exactness() -> Verdict {
    let mut worst_rel: f64 = 0.0;
    let mut worst_absent: f64 = 0.0;
    for (vi, &variant) in VARIANTS.iter().enumerate() {
        for n in 0..20 {
            let i = instance(variant, (vi * 100 + n) as u64, 4, None);
            let (rel, absent) = check_gradient(&i);
            worst_rel = worst_rel.max(rel);
            worst_absent = worst_absent.max(absent);
        }
    }
    verdict(
        worst_rel <= 1e-4 && worst_absent <= 1e-9,
        format!("80 instances, max relative error {worst_rel:.2e}, max untouched-row data gradient {worst_absent:.1e}"),
    )
}

fn formula_exactness() -> Verdict {
    let mut rng = rng_for(2, "formulas");
    let mut worst_keep: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    for _ in 0..1000 {
        let freq = 10f64.powf(uniform(&mut rng, -8.0, 0.0));
        let threshold = 10f64.powf(uniform(&mut rng, -7.0, -3.0));
        let expected = (threshold / freq).sqrt().min(1.0);
        worst_keep = worst_keep.max((subsample_keep_probability(freq, threshold).unwrap() - expected).abs());
        let n_eval = rng.random_range(1..10_000_000usize);
        let n_batch = rng.random_range(1..10_000usize);
        let expected = n_eval as f64 / n_batch as f64;
        let rel = (scale_factor(n_eval, n_batch).unwrap() - expected).abs() / expected;
        worst_scale = worst_scale.max(rel);
    }
    let half = subsample_keep_probability(4e-5, 1e-5).unwrap();
    verdict(
        worst_keep <= 1e-12 && worst_scale <= 1e-12 && half == 0.5,
        format!("keep error {worst_keep:.1e}, scale error {worst_scale:.1e}, keep(4e-5, 1e-5) = {half}"),
    )
}

/// Same state, batch and draws under two prior settings.
fn identical(i: &Instance, a: PriorConfig, b: PriorConfig) -> bool {
    loss_prior(&i.state, &a) == loss_prior(&i.state, &b)
        && gradients(&i.state, &i.batch, &i.draws, &a, 1.0) == gradients(&i.state, &i.batch, &i.draws, &b, 1.0)
        && gradients(&i.state, &i.batch, &i.draws, &a, 0.37) == gradients(&i.state, &i.batch, &i.draws, &b, 0.37)
}

fn variant_identities() -> Verdict {
    let mut chain_anchor = 0;
    let mut weighted = 0;
    for n in 0..20u64 {
        for t in 0..2 {
            let i = instance(Variant::Dbe, 300 + n, 2, Some(t));
            let nc = PriorConfig { variant: Variant::DbeNc, ..i.prior };
            chain_anchor += usize::from(identical(&i, i.prior, nc));
        }
        let i = instance(Variant::DbeNc, 400 + n, 4, None);
        let sc = PriorConfig {
            variant: Variant::DbeSc,
            unit_time_weights: true,
            ..i.prior
        };
        weighted += usize::from(identical(&i, i.prior, sc));
    }
    verdict(
        chain_anchor == 40 && weighted == 20,
        format!("chain = anchor at T=2 in {chain_anchor}/40 cases; unit-weight scaled = anchor in {weighted}/20"),
    )
}

/// Vocabulary and slices of a generated language, without subsampling.
fn build(lang: &SynthCorpus, vocab_size: usize, seed: u64) -> (Vocabulary, TimeSlicedCorpus) {
    let vocab = build_vocabulary(lang.documents.iter().map(|d| &d.tokens), vocab_size, &Stoplist::new()).unwrap();
    let config = SliceConfig {
        granularity: Granularity::Annual,
        subsample_threshold: None,
        seed,
        ..SliceConfig::default()
    };
    let corpus = slice(&lang.documents, &vocab, &config).unwrap();
    (vocab, corpus)
}

fn ids_with(lang: &SynthCorpus, vocab: &Vocabulary, pred: impl Fn(&Behavior) -> bool) -> Vec<usize> {
    lang.truth
        .iter()
        .filter(|r| pred(&r.1))
        .map(|r| vocab.id(&r.0).unwrap() as usize)
        .collect()
}

fn planted(word: usize, behavior: Behavior, source: usize, target: usize) -> Planted {
    Planted {
        word,
        behavior,
        source,
        target,
    }
}

/// 500 words in 10 clusters over 10 yearly slices of 200k tokens, five
/// monotone words and two transient spikes.
fn planted_spec() -> SynthSpec {
    let mut spec = SynthSpec::uniform(500, 10, 200_000, 10, 2, 1);
    for (w, s, t) in [(7, 0, 5), (113, 2, 6), (221, 4, 7), (333, 6, 8), (448, 8, 9)] {
        spec.planted.push(planted(w, Behavior::Monotone, s, t));
    }
    spec.planted.push(planted(58, Behavior::Spike(4), 1, 3));
    spec.planted.push(planted(275, Behavior::Spike(6), 5, 0));
    spec
}

const LAMBDA: f64 = 10.0;

fn config(seed: u64) -> TrainingConfig {
    let mut c = TrainingConfig {
        window: 2,
        dim: 20,
        negatives: 5,
        minibatches_per_slice: 160,
        batch_size: 1000,
        static_epochs: 5,
        epochs: 5,
        learning_rate: 0.05,
        seed,
        validate: false,
        ..TrainingConfig::default()
    };
    c.prior.lambda = LAMBDA;
    c
}

fn static_model(corpus: &TimeSlicedCorpus, config: &TrainingConfig) -> EmbeddingState {
    train_static(corpus, config).unwrap().into_result().unwrap().state
}

fn dynamic(corpus: &TimeSlicedCorpus, config: &TrainingConfig, init: EmbeddingState) -> EmbeddingState {
    train_dynamic(corpus, config, init).unwrap().into_result().unwrap().state
}

/// Models trained on the planted corpus, shared by several criteria.
struct PlantedRuns {
    truth: SynthCorpus,
    vocab: Vocabulary,
    corpus: TimeSlicedCorpus,
    /// Static model of every seed.
    statics: Vec<EmbeddingState>,
    /// DBE models from the static models, one per seed.
    dyn_init: Vec<EmbeddingState>,
    first_run_secs: f64,
}

const SEEDS: [u64; 3] = [1, 2, 3];

fn planted_runs() -> &'static PlantedRuns {
    static RUNS: OnceLock<PlantedRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let out = generate(&planted_spec()).unwrap();
        let (vocab, corpus) = build(&out.source, 500, 1);
        let mut statics = Vec::new();
        let mut dyn_init = Vec::new();
        let mut first_run_secs = 0.0;
        for seed in SEEDS {
            let c = config(seed);
            let s = static_model(&corpus, &c);
            dyn_init.push(dynamic(&corpus, &c, init_dynamic(&s, corpus.num_slices()).unwrap()));
            statics.push(s);
            if seed == SEEDS[0] {
                first_run_secs = start.elapsed().as_secs_f64();
            }
        }
        PlantedRuns {
            truth: out.source,
            vocab,
            corpus,
            statics,
            dyn_init,
            first_run_secs,
        }
    })
}

fn monotone_regularization() -> Verdict {
    let start = Instant::now();
    let runs = planted_runs();
    let mut drifts = Vec::new();
    for lambda in [0.1, 1.0, 10.0, 1000.0] {
        let d = if lambda == LAMBDA {
            runs.dyn_init[0].total_squared_drift()
        } else {
            let mut c = config(SEEDS[0]);
            c.prior.lambda = lambda;
            let init = init_dynamic(&runs.statics[0], runs.corpus.num_slices()).unwrap();
            dynamic(&runs.corpus, &c, init).total_squared_drift()
        };
        drifts.push(d);
    }
    let monotone = drifts.windows(2).all(|w| w[1] <= w[0]);
    let ratio = drifts[3] / drifts[0];
    let secs = start.elapsed().as_secs_f64();
    verdict(
        monotone && ratio < 0.1 && secs < 600.0,
        format!(
            "total drift at lambda 0.1/1/10/1000 = {:.1}/{:.1}/{:.1}/{:.2}, ratio {ratio:.4}, {secs:.0} s",
            drifts[0], drifts[1], drifts[2], drifts[3]
        ),
    )
}

fn planted_recovery() -> Verdict {
    let runs = planted_runs();
    let report = drift_report(&runs.dyn_init[0], 0).unwrap();
    let top: Vec<usize> = top_drifting(&report, 10).unwrap().into_iter().map(|(v, _)| v).collect();
    let monotone = ids_with(&runs.truth, &runs.vocab, |b| *b == Behavior::Monotone);
    let found = monotone.iter().filter(|v| top.contains(v)).count();
    let mut stable: Vec<f64> = ids_with(&runs.truth, &runs.vocab, |b| *b == Behavior::Stable)
        .into_iter()
        .map(|v| report.total[v])
        .collect();
    stable.sort_by(f64::total_cmp);
    let median = stable[stable.len() / 2];
    let weakest = monotone.iter().map(|&v| report.total[v]).fold(f64::INFINITY, f64::min);
    let secs = runs.first_run_secs;
    verdict(
        found == 5 && median < 0.25 * weakest && runs.first_run_secs < 600.0,
        format!(
            "{found}/5 monotone words in the top 10 of 500; stable median {median:.3} vs weakest planted {weakest:.3} ({:.1}%), {secs:.0} s for the first seed",
            100.0 * median / weakest
        ),
    )
}

fn directedness() -> Verdict {
    let runs = planted_runs();
    let report = drift_report(&runs.dyn_init[0], 0).unwrap();
    let medians: Vec<f64> = (0..report.num_slices()).map(|t| median_drift(&report, t)).collect();
    let rising = medians.windows(2).filter(|w| w[1] >= w[0]).count();
    let pairs = medians.len() - 1;

    let mut c = config(SEEDS[0]);
    c.prior.variant = Variant::DbeNc;
    let init = init_dynamic(&runs.statics[0], runs.corpus.num_slices()).unwrap();
    let anchored = drift_report(&dynamic(&runs.corpus, &c, init), 0).unwrap();
    let mut spikes_ok = true;
    let mut spike_detail = Vec::new();
    for (word, behavior, _, _) in &runs.truth.truth {
        let Behavior::Spike(at) = *behavior else { continue };
        let d = &anchored.d[runs.vocab.id(word).unwrap() as usize];
        let peak = d.iter().copied().fold(0.0, f64::max);
        let after = d[at + 1..].iter().copied().fold(0.0, f64::max);
        spikes_ok &= after < 0.5 * peak;
        spike_detail.push(format!("{word} peak {peak:.3} at t={at}, max after {after:.3}"));
    }
    verdict(
        rising as f64 >= 0.9 * pairs as f64 && spikes_ok,
        format!(
            "median drift non-decreasing in {rising}/{pairs} consecutive pairs; {}",
            spike_detail.join("; ")
        ),
    )
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn likelihood_direction() -> Verdict {
    let runs = planted_runs();
    let score = |s: &EmbeddingState| {
        evaluate(s, &runs.corpus, Split::Test, 2, 1000).unwrap().mean
    };
    let mut with_init = Vec::new();
    let mut statics = Vec::new();
    let mut without_init = Vec::new();
    for (n, &seed) in SEEDS.iter().enumerate() {
        let c = config(seed);
        with_init.push(score(&runs.dyn_init[n]));
        statics.push(score(&runs.statics[n]));
        without_init.push(score(&dynamic(&runs.corpus, &c, random_init(&runs.corpus, &c))));
    }
    let (a, sa) = mean_std(&with_init);
    let (b, sb) = mean_std(&statics);
    let (c, sc) = mean_std(&without_init);
    let first = a - b > 3.0 * sa.max(sb);
    let second = b - c > 3.0 * sb.max(sc);
    verdict(
        first && second,
        format!(
            "held-out scaled L_pos mean (std): dynamic from static {a:.0} ({sa:.0}), static {b:.0} ({sb:.0}), dynamic from random {c:.0} ({sc:.0}); first gap {}, second gap {}",
            if first { "holds" } else { "fails" },
            if second { "holds" } else { "fails" }
        ),
    )
}

fn procrustes_recovery() -> Verdict {
    let start = Instant::now();
    let (dim, pairs) = (100, 5000);
    let gauss = EmbeddingState::random(1, dim, dim, 1.0, 8);
    let r = DMatrix::from_row_slice(dim, dim, gauss.rho_data()).qr().q();
    let mut src = EmbeddingState::random(1, pairs, dim, 1.0, 9);
    for v in 0..pairs {
        let row = src.rho_mut(0, v);
        let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        row.iter_mut().for_each(|x| *x /= n);
    }
    let noise = EmbeddingState::random(1, pairs, dim, 0.01, 10);
    let mut tgt = EmbeddingState::zeros(1, pairs, dim);
    for v in 0..pairs {
        let x = nalgebra::DVector::from_column_slice(src.rho(0, v));
        let y = &r * x;
        for (d, out) in tgt.rho_mut(0, v).iter_mut().enumerate() {
            *out = y[d] + noise.rho(0, v)[d];
        }
        tgt.alpha_mut(v).copy_from_slice(noise.alpha(v));
    }
    let words = |p: &str| -> Vocabulary {
        Vocabulary::from_counts((0..pairs).map(|v| (format!("{p}{v}"), 1)).collect(), pairs as u64).unwrap()
    };
    let (sv, tv) = (words("s"), words("t"));
    let lexicon = BilingualLexicon::from_words((0..pairs).map(|v| (format!("s{v}"), format!("t{v}"))), &sv, &tv);
    let map = fit_alignment(&src, &tgt, &lexicon).unwrap();
    let mapped = apply_alignment(&map, &src).unwrap();
    let cos: f64 = (0..pairs)
        .map(|v| {
            let (a, b) = (mapped.rho(0, v), tgt.rho(0, v));
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            dot / (na * nb)
        })
        .sum::<f64>()
        / pairs as f64;
    let defect = map.orthogonality_defect();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        cos >= 0.99 && defect <= 1e-6 && secs < 30.0,
        format!("mean pair cosine {cos:.5}, orthogonality defect {defect:.1e}, {secs:.1} s"),
    )
}

fn crosslingual_classes() -> Verdict {
    let (nv, clusters) = (60, 3);
    let w = nv / clusters;
    let mut spec = SynthSpec::uniform(nv, 10, 50_000, clusters, 2, 3);
    spec.planted = vec![
        planted(0, Behavior::Monotone, 0, 2),
        planted(1, Behavior::Monotone, 0, 1),
        planted(w, Behavior::Monotone, 1, 2),
        planted(w + 1, Behavior::Monotone, 1, 0),
    ];
    spec.mirror = Some(vec![
        planted(0, Behavior::Monotone, 1, 2),
        planted(1, Behavior::Monotone, 2, 1),
        planted(w, Behavior::Stable, 1, 1),
        planted(w + 1, Behavior::Stable, 1, 1),
    ]);
    let out = generate(&spec).unwrap();
    let (sv, sc) = build(&out.source, nv, 3);
    let (tv, tc) = build(out.mirror.as_ref().unwrap(), nv, 3);
    let mut c = config(3);
    c.minibatches_per_slice = 50;
    let src_static = static_model(&sc, &c);
    let tgt_static = static_model(&tc, &c);
    let lexicon = BilingualLexicon::from_words(out.lexicon.iter().cloned(), &sv, &tv);
    let map = fit_alignment(&src_static, &tgt_static, &lexicon).unwrap();
    let aligned = apply_alignment(&map, &src_static).unwrap();
    let src = dynamic(&sc, &c, init_dynamic(&aligned, sc.num_slices()).unwrap());
    let tgt = dynamic(&tc, &c, init_dynamic(&tgt_static, tc.num_slices()).unwrap());
    let (records, _) = cross_drift((&src, &sv), (&tgt, &tv), &out.lexicon, 0, 9).unwrap();
    let classes = classify(&records, CutRule::Mean).unwrap();
    let expected = [
        (0, BehaviorClass::CoDrift),
        (1, BehaviorClass::CoDrift),
        (w, BehaviorClass::SingleDriftSrc),
        (w + 1, BehaviorClass::SingleDriftSrc),
    ];
    let correct = expected
        .iter()
        .filter(|(v, class)| {
            let word = driftlab::synth::word_name(0, *v);
            let i = records.iter().position(|r| r.src == word).unwrap();
            classes.classes[i] == *class
        })
        .count();
    let sum: f64 = classes.proportions.iter().sum();
    let stable = classes.proportion(BehaviorClass::Stable);
    verdict(
        correct >= 3 && sum == 1.0 && stable > 0.5,
        format!(
            "{correct}/4 planted pairs correct, proportions {:?} sum to {sum}, stable share {stable:.3}",
            classes.proportions.map(|p| (p * 1000.0).round() / 1000.0)
        ),
    )
}

const SPEC: &str = "\
vocab_size = 60
num_slices = 4
tokens_per_slice = 6000
window = 2
seed = 11
clusters = 3
planted = 0 monotone 0 2
planted = 20 monotone 1 0
mirror = true
mirror_override = 20 stable 1 1
";

fn driftlab(dir: &Path, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_driftlab"))
        .args(args)
        .current_dir(dir)
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "driftlab {args:?} exited with {status}");
}

/// Synthesis, slicing, training in both languages, alignment, evaluation,
/// drift and cross-lingual reports, run inside `dir`.
fn pipeline(dir: &Path) {
    fs::write(dir.join("spec.txt"), SPEC).unwrap();
    let train = ["--dim", "8", "--window", "2", "--negatives", "3", "--minibatches", "6", "--seed", "5"];
    let run = |args: &[&str], extra: &[&str]| {
        let all: Vec<&str> = args.iter().chain(extra).copied().collect();
        driftlab(dir, &all);
    };
    run(&["synth", "--spec", "spec.txt", "--out", "syn"], &[]);
    run(&["slice", "--input", "syn/corpus.txt", "--out", "src", "--vocab-size", "60", "--subsample", "none", "--seed", "2"], &[]);
    run(&["slice", "--input", "syn/mirror/corpus.txt", "--out", "tgt", "--vocab-size", "60", "--subsample", "none", "--seed", "2"], &[]);
    run(&["train", "--corpus", "src/corpus.dlc", "--out", "src_static", "--static-only"], &train);
    run(&["train", "--corpus", "tgt/corpus.dlc", "--out", "tgt_model", "--lambda", "10"], &train);
    run(
        &["align", "--src", "src_static", "--tgt", "tgt_model", "--lexicon", "syn/lexicon.tsv", "--out", "map.bin", "--aligned", "src_aligned"],
        &[],
    );
    run(&["train", "--corpus", "src/corpus.dlc", "--out", "src_model", "--init", "src_aligned", "--lambda", "10"], &train);
    run(&["eval", "--model", "src_model", "--corpus", "src/corpus.dlc", "--out", "curve.tsv"], &[]);
    run(&["drift", "--model", "src_model", "--top", "5", "--out", "drift.tsv"], &[]);
    run(&["xdrift", "--src", "src_model", "--tgt", "tgt_model", "--lexicon", "syn/lexicon.tsv", "--out", "records.tsv"], &[]);
    run(&["classify", "--records", "records.tsv", "--out", "classes.tsv"], &[]);
}

const ARTIFACTS: [&str; 20] = [
    "syn/corpus.txt",
    "src/corpus.dlc",
    "src/vocab.tsv",
    "src_static/rho.tsv",
    "src_static/alpha.tsv",
    "tgt_model/rho.tsv",
    "tgt_model/alpha.tsv",
    "tgt_model/checkpoint.bin",
    "tgt_model/metrics.tsv",
    "map.bin",
    "src_aligned/rho.tsv",
    "src_model/rho.tsv",
    "src_model/alpha.tsv",
    "src_model/checkpoint.bin",
    "curve.tsv",
    "drift.tsv",
    "drift.top.tsv",
    "drift.hist.tsv",
    "records.tsv",
    "classes.tsv",
];

fn reproducibility() -> Verdict {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    pipeline(a.path());
    pipeline(b.path());
    let differing: Vec<&str> = ARTIFACTS
        .iter()
        .copied()
        .filter(|f| fs::read(a.path().join(f)).unwrap() != fs::read(b.path().join(f)).unwrap())
        .collect();
    verdict(
        differing.is_empty(),
        format!("{} artifacts compared, differing: {differing:?}", ARTIFACTS.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("gradient exactness", gradient_exactness),
        ("formula exactness", formula_exactness),
        ("variant identities", variant_identities),
        ("monotone regularization", monotone_regularization),
        ("planted drift recovery", planted_recovery),
        ("directedness", directedness),
        ("likelihood direction", likelihood_direction),
        ("procrustes recovery", procrustes_recovery),
        ("cross-lingual classification", crosslingual_classes),
        ("reproducibility", reproducibility),
    ];
    let mut failed = Vec::new();
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {}: {name}: {} [{:.1} s]",
            n + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(n + 1);
        }
    }
    println!("acceptance: {}/10 criteria passed, failed: {failed:?}", 10 - failed.len());
    let strict = std::env::var("DRIFTLAB_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && !failed.is_empty() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
