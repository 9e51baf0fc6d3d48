// Temporary diagnosis probes; deleted before release.
use loopgram::algebra::{AlgebraConfig, CategoryCode};
use loopgram::corpus::Corpus;
use loopgram::solver::{Solution, SolverConfig};
use loopgram::synth::{corrupt_sentences, synth_generate, SyntheticGrammar};
use loopgram::train::train;
use std::collections::HashMap;

fn group_check(solution: &Solution) -> Vec<String> {
    let groups: [(&str, Vec<&str>); 5] = [
        ("pron", vec!["they", "he", "them", "it", "she", "her", "him"]),
        ("iv", vec!["run", "runs", "jump", "jumps", "sit", "sits", "speak", "speaks"]),
        ("tv", vec!["see", "sees", "hear", "hears", "follow", "follows", "avoid", "avoids"]),
        ("conj", vec!["and", "but", "until", "while"]),
        ("det", vec!["a", "all", "some", "the"]),
    ];
    let mut bad = Vec::new();
    for (name, words) in groups {
        let mut codes: Vec<CategoryCode> = Vec::new();
        for w in &words {
            match solution.lexicon.get(*w) {
                Some(cs) => codes.extend(cs.iter().copied()),
                None => bad.push(format!("{name}: {w} missing")),
            }
        }
        codes.dedup();
        codes.sort();
        codes.dedup();
        if codes.len() != 1 {
            bad.push(format!("{name}: {} codes", codes.len()));
        }
    }
    bad
}

#[test]
#[ignore]
fn probe_c4() {
    let grammar = SyntheticGrammar::standard();
    let corpus = Corpus::from_sentences(synth_generate(&grammar, 100, 42).unwrap()).unwrap();
    let algebra = AlgebraConfig::new(3, 3).unwrap();
    let config = SolverConfig { rng_seed: 1, max_iters: 10000, restarts: 10, ..Default::default() };
    let outcome = train(&corpus, &algebra, &config).unwrap();
    for (i, s) in outcome.solutions.iter().enumerate() {
        let p = s.perplexity.as_ref().map(|p| p.total).unwrap_or(f64::NAN);
        let exact = s.parsed_count() == 100;
        let bad = if exact { group_check(s) } else { vec![] };
        eprintln!(
            "restart {i}: parsed {} perp {p:.4} iters {} exact {exact} groups_bad {:?}",
            s.parsed_count(),
            s.trace.iterations(),
            bad
        );
    }
}

fn rename_vocab(sentences: Vec<loopgram::corpus::Sentence>) -> Vec<loopgram::corpus::Sentence> {
    let map: HashMap<&str, &str> = [
        ("human", "person"), ("dog", "cat"), ("bear", "wolf"),
        ("humans", "persons"), ("dogs", "cats"), ("bears", "wolves"),
        ("runs", "walks"), ("jumps", "hops"), ("sits", "stands"), ("speaks", "talks"),
        ("run", "walk"), ("jump", "hop"), ("sit", "stand"), ("speak", "talk"),
        ("sees", "watches"), ("hears", "smells"), ("follows", "chases"), ("avoids", "fears"),
        ("see", "watch"), ("hear", "smell"), ("follow", "chase"), ("avoid", "fear"),
        ("happy", "glad"), ("hungry", "tired"), ("sad", "angry"),
        ("always", "usually"), ("often", "rarely"), ("seldom", "sometimes"), ("never", "briefly"),
        ("by", "under"), ("with", "above"), ("near", "behind"), ("beside", "around"),
    ]
    .into_iter()
    .collect();
    sentences
        .into_iter()
        .map(|mut s| {
            for t in s.tokens.iter_mut() {
                if let Some(new) = map.get(t.as_str()) {
                    *t = new.to_string();
                }
            }
            s
        })
        .collect()
}

#[test]
#[ignore]
fn probe_c10_new_vocab() {
    let grammar = SyntheticGrammar::standard();
    let algebra = AlgebraConfig::new(3, 3).unwrap();
    let clean100 = Corpus::from_sentences(synth_generate(&grammar, 100, 42).unwrap()).unwrap();
    let cfg = SolverConfig { rng_seed: 1, max_iters: 10000, restarts: 1, ..Default::default() };
    let seed_solution = train(&clean100, &algebra, &cfg).unwrap();
    let s0 = &seed_solution.solutions[0];
    eprintln!("seed run parsed {} converged {}", s0.parsed_count(), s0.converged);
    let seeds: HashMap<String, CategoryCode> =
        s0.lexicon.iter().map(|(w, c)| (w.clone(), c[0])).collect();

    for (size, iters) in [(240usize, 5000usize), (360, 5000), (480, 3000)] {
        // Half original vocabulary, half renamed, interleaved.
        let old = synth_generate(&grammar, size / 2, 31).unwrap();
        let new = rename_vocab(synth_generate(&grammar, size - size / 2, 77).unwrap());
        let mut mixed_sentences = Vec::new();
        for (i, s) in old.into_iter().chain(new).enumerate() {
            mixed_sentences.push(loopgram::corpus::Sentence::new(s.tokens, i));
        }
        let mixed = Corpus::from_sentences(mixed_sentences).unwrap();
        {
            let run = |sl: HashMap<String, CategoryCode>| -> (Vec<f64>, Vec<usize>) {
                let config = SolverConfig {
                    rng_seed: 21,
                    restarts: 3,
                    max_iters: iters,
                    seed_lexicon: sl,
                    ..Default::default()
                };
                let out = train(&mixed, &algebra, &config).unwrap();
                (
                    out.solutions
                        .iter()
                        .map(|s| s.perplexity.as_ref().map(|p| p.total).unwrap_or(f64::INFINITY))
                        .collect(),
                    out.solutions.iter().map(|s| s.parsed_count()).collect(),
                )
            };
            let (pu, cu) = run(HashMap::new());
            let (ps, cs) = run(seeds.clone());
            eprintln!(
                "size {size} iters {iters}: unseeded perp {pu:.3?} parsed {cu:?} | seeded perp {ps:.3?} parsed {cs:?}"
            );
        }
    }
}

#[test]
#[ignore]
fn probe_c10() {
    let grammar = SyntheticGrammar::standard();
    let algebra = AlgebraConfig::new(3, 3).unwrap();
    // Seed lexicon: use a quick converged run on clean 100.
    let clean100 = Corpus::from_sentences(synth_generate(&grammar, 100, 42).unwrap()).unwrap();
    let cfg = SolverConfig { rng_seed: 1, max_iters: 10000, restarts: 1, ..Default::default() };
    let seed_solution = train(&clean100, &algebra, &cfg).unwrap();
    let s0 = &seed_solution.solutions[0];
    eprintln!("seed run parsed {}", s0.parsed_count());
    let seeds: HashMap<String, CategoryCode> =
        s0.lexicon.iter().map(|(w, c)| (w.clone(), c[0])).collect();

    for size in [100usize, 200] {
        for noise in [0.08f64, 0.15] {
            for iters in [1200usize, 2500] {
                let clean = synth_generate(&grammar, size, 31).unwrap();
                let mixed = Corpus::from_sentences(corrupt_sentences(&clean, noise, 17)).unwrap();
                let run = |sl: HashMap<String, CategoryCode>| -> (Vec<f64>, Vec<usize>) {
                    let config = SolverConfig {
                        rng_seed: 21,
                        restarts: 3,
                        max_iters: iters,
                        seed_lexicon: sl,
                        ..Default::default()
                    };
                    let out = train(&mixed, &algebra, &config).unwrap();
                    (
                        out.solutions
                            .iter()
                            .map(|s| {
                                s.perplexity.as_ref().map(|p| p.total).unwrap_or(f64::INFINITY)
                            })
                            .collect(),
                        out.solutions.iter().map(|s| s.parsed_count()).collect(),
                    )
                };
                let (pu, cu) = run(HashMap::new());
                let (ps, cs) = run(seeds.clone());
                eprintln!(
                    "size {size} noise {noise} iters {iters}: unseeded perp {pu:.3?} parsed {cu:?} | seeded perp {ps:.3?} parsed {cs:?}"
                );
            }
        }
    }
}
