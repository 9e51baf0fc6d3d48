//! The synthetic grammar: a small set of production rules over simple
//! declarative sentences, used to generate controlled training data and to
//! grade generated output.
//!
//! The recognizer doubles as a gold oracle. Besides a plain accept/reject it
//! can diagnose *why* a sentence fails, by retrying the parse under targeted
//! relaxations (ignore number agreement, allow object pronouns in subject
//! position, allow subject pronouns in object position) and reporting the
//! smallest relaxation that makes the sentence parse.

use crate::corpus::Sentence;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("sentence generation exceeded the recursion depth cap in every retry")]
    DepthExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Num {
    Sg,
    Pl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Cat {
    Start,
    S,
    Subj,
    Vp,
    Obj,
    Noun,
    NounPhrase,
    Iv,
    Tv,
    Conj,
    Adv,
    Prep,
    Det,
    Adj,
}

/// How a symbol occurrence resolves its grammatical number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NumRef {
    None,
    /// Use the number drawn (or inherited) for the enclosing alternative.
    Matched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Word(&'static str),
    Cat(Cat, NumRef),
}

use NumRef::{Matched, None as NoNum};
use Part::{Cat as C, Word as W};

type Alt = &'static [Part];

/// The production rules, as data. Numbered categories carry separate
/// singular and plural word lists; alternatives whose symbols are `Matched`
/// agree in number within one expansion.
#[derive(Debug, Clone, Default)]
pub struct SyntheticGrammar {
    _private: (),
}

impl SyntheticGrammar {
    pub fn standard() -> Self {
        Self { _private: () }
    }

    fn alts(&self, cat: Cat, num: Option<Num>) -> &'static [Alt] {
        match (cat, num) {
            (Cat::Start, _) => &[
                &[C(Cat::S, NoNum), W(".")],
                &[C(Cat::S, NoNum), C(Cat::Conj, NoNum), C(Cat::S, NoNum), W(".")],
            ],
            (Cat::S, _) => &[
                &[C(Cat::Subj, Matched), C(Cat::Vp, Matched)],
                &[C(Cat::Subj, Matched), C(Cat::Adv, NoNum), C(Cat::Vp, Matched)],
            ],
            (Cat::Subj, Some(Num::Sg)) => &[
                &[W("she")],
                &[W("he")],
                &[W("it")],
                &[C(Cat::Det, Matched), C(Cat::Noun, Matched)],
                &[C(Cat::Det, Matched), C(Cat::Adj, NoNum), C(Cat::Noun, Matched)],
            ],
            (Cat::Subj, Some(Num::Pl)) => &[
                &[W("they")],
                &[C(Cat::Det, Matched), C(Cat::Noun, Matched)],
                &[C(Cat::Det, Matched), C(Cat::Adj, NoNum), C(Cat::Noun, Matched)],
            ],
            (Cat::Vp, _) => &[
                &[C(Cat::Iv, Matched)],
                &[C(Cat::Tv, Matched), C(Cat::Obj, NoNum)],
            ],
            (Cat::Obj, _) => &[
                &[W("her")],
                &[W("him")],
                &[W("it")],
                &[W("them")],
                &[C(Cat::Det, Matched), C(Cat::Noun, Matched)],
                &[C(Cat::Det, Matched), C(Cat::Adj, NoNum), C(Cat::Noun, Matched)],
            ],
            (Cat::Noun, Some(Num::Sg)) => &[
                &[W("human")],
                &[W("dog")],
                &[W("bear")],
                &[C(Cat::Noun, Matched), C(Cat::Prep, NoNum), C(Cat::NounPhrase, NoNum)],
            ],
            (Cat::Noun, Some(Num::Pl)) => &[
                &[W("humans")],
                &[W("dogs")],
                &[W("bears")],
                &[C(Cat::Noun, Matched), C(Cat::Prep, NoNum), C(Cat::NounPhrase, NoNum)],
            ],
            (Cat::NounPhrase, _) => &[
                &[C(Cat::Det, Matched), C(Cat::Noun, Matched)],
                &[C(Cat::Det, Matched), C(Cat::Adj, NoNum), C(Cat::Noun, Matched)],
            ],
            (Cat::Iv, Some(Num::Sg)) => &[&[W("runs")], &[W("jumps")], &[W("sits")], &[W("speaks")]],
            (Cat::Iv, Some(Num::Pl)) => &[&[W("run")], &[W("jump")], &[W("sit")], &[W("speak")]],
            (Cat::Tv, Some(Num::Sg)) => &[&[W("sees")], &[W("hears")], &[W("follows")], &[W("avoids")]],
            (Cat::Tv, Some(Num::Pl)) => &[&[W("see")], &[W("hear")], &[W("follow")], &[W("avoid")]],
            (Cat::Conj, _) => &[&[W("and")], &[W("but")], &[W("until")], &[W("while")]],
            (Cat::Adv, _) => &[&[W("always")], &[W("often")], &[W("seldom")], &[W("never")]],
            (Cat::Prep, _) => &[&[W("by")], &[W("with")], &[W("near")], &[W("beside")]],
            (Cat::Det, Some(Num::Sg)) => &[&[W("a")], &[W("the")]],
            (Cat::Det, Some(Num::Pl)) => &[&[W("all")], &[W("some")], &[W("the")]],
            (Cat::Adj, _) => &[&[W("happy")], &[W("hungry")], &[W("sad")]],
            (cat, num) => unreachable!("no rules for {cat:?} {num:?}"),
        }
    }

    fn numbered(cat: Cat) -> bool {
        matches!(cat, Cat::Subj | Cat::Vp | Cat::Noun | Cat::Iv | Cat::Tv | Cat::Det)
    }

    /// Every word the grammar can produce, terminal punctuation included.
    pub fn vocabulary(&self) -> HashSet<&'static str> {
        let mut vocab = HashSet::new();
        for cat in ALL_CATS {
            let nums: &[Option<Num>] = if Self::numbered(cat) {
                &[Some(Num::Sg), Some(Num::Pl)]
            } else {
                &[None]
            };
            for &num in nums {
                for alt in self.alts(cat, num) {
                    for part in *alt {
                        if let W(w) = part {
                            vocab.insert(*w);
                        }
                    }
                }
            }
        }
        vocab
    }
}

const ALL_CATS: [Cat; 14] = [
    Cat::Start,
    Cat::S,
    Cat::Subj,
    Cat::Vp,
    Cat::Obj,
    Cat::Noun,
    Cat::NounPhrase,
    Cat::Iv,
    Cat::Tv,
    Cat::Conj,
    Cat::Adv,
    Cat::Prep,
    Cat::Det,
    Cat::Adj,
];

const MAX_DEPTH: usize = 4;
const MAX_RETRIES: usize = 50;

struct Generator<'a> {
    grammar: &'a SyntheticGrammar,
    rng: ChaCha8Rng,
}

impl Generator<'_> {
    fn expand(
        &mut self,
        cat: Cat,
        num: Option<Num>,
        depths: &mut HashMap<Cat, usize>,
        out: &mut Vec<String>,
    ) -> Result<(), SynthError> {
        let depth = depths.entry(cat).or_insert(0);
        *depth += 1;
        if *depth > MAX_DEPTH {
            *depths.get_mut(&cat).unwrap() -= 1;
            return Err(SynthError::DepthExceeded);
        }
        let alts = self.grammar.alts(cat, num);
        let alt = alts[self.rng.gen_range(0..alts.len())];
        // A numbered category passes its own number down to matched symbols;
        // elsewhere each alternative instance draws one fresh and shares it.
        let scope = if SyntheticGrammar::numbered(cat) {
            num
        } else if alt.iter().any(|p| matches!(p, C(_, Matched))) {
            Some(if self.rng.gen_range(0..2) == 0 { Num::Sg } else { Num::Pl })
        } else {
            None
        };
        let mut result = Ok(());
        for part in alt {
            match part {
                W(w) => out.push(w.to_string()),
                C(c, r) => {
                    let child_num = match r {
                        NoNum => {
                            if SyntheticGrammar::numbered(*c) {
                                unreachable!("numbered category without a number")
                            }
                            None
                        }
                        Matched => scope,
                    };
                    result = self.expand(*c, child_num, depths, out);
                    if result.is_err() {
                        break;
                    }
                }
            }
        }
        *depths.get_mut(&cat).unwrap() -= 1;
        result
    }
}

/// Generate `count` sentences from the grammar, deterministically for a
/// given seed. Expansions that blow the recursion cap are retried up to 50
/// times each before the error surfaces.
pub fn synth_generate(
    grammar: &SyntheticGrammar,
    count: usize,
    rng_seed: u64,
) -> Result<Vec<Sentence>, SynthError> {
    let mut gen = Generator { grammar, rng: ChaCha8Rng::seed_from_u64(rng_seed) };
    let mut sentences = Vec::with_capacity(count);
    for i in 0..count {
        let mut ok = false;
        for _ in 0..=MAX_RETRIES {
            let mut tokens = Vec::new();
            let mut depths = HashMap::new();
            if gen.expand(Cat::Start, None, &mut depths, &mut tokens).is_ok() {
                sentences.push(Sentence::new(tokens, i));
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(SynthError::DepthExceeded);
        }
    }
    Ok(sentences)
}

/// Replace tokens at random with other vocabulary words, leaving the final
/// punctuation alone. Used to build noisy fixtures from clean synthetic data.
pub fn corrupt_sentences(sentences: &[Sentence], rate: f64, rng_seed: u64) -> Vec<Sentence> {
    let mut vocab: Vec<&str> = sentences
        .iter()
        .flat_map(|s| s.tokens[..s.tokens.len() - 1].iter().map(String::as_str))
        .collect();
    vocab.sort_unstable();
    vocab.dedup();
    if vocab.is_empty() {
        return sentences.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    sentences
        .iter()
        .map(|s| {
            let mut tokens = s.tokens.clone();
            let last = tokens.len() - 1;
            for t in tokens[..last].iter_mut() {
                if rng.gen::<f64>() < rate {
                    *t = vocab[rng.gen_range(0..vocab.len())].to_string();
                }
            }
            Sentence::new(tokens, s.source_index)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Recognition

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recognition {
    Accept,
    Reject(RejectReason),
}

impl Recognition {
    pub fn is_accept(&self) -> bool {
        matches!(self, Recognition::Accept)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    UnknownWord(String),
    NumberDisagreement,
    ObjectPronounAsSubject,
    SubjectPronounAsObject,
    NoParse,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Relax {
    number: bool,
    obj_as_subj: bool,
    subj_as_obj: bool,
}

/// Accept iff the token sequence derives from the start symbol with number
/// agreement intact; otherwise name the first violated requirement found.
pub fn synth_recognize(grammar: &SyntheticGrammar, sentence: &Sentence) -> Recognition {
    let vocab = grammar.vocabulary();
    for t in &sentence.tokens {
        if !vocab.contains(t.as_str()) {
            return Recognition::Reject(RejectReason::UnknownWord(t.clone()));
        }
    }
    let parses = |relax: Relax| Cfg::build(grammar, relax).accepts(&sentence.tokens);
    if parses(Relax::default()) {
        return Recognition::Accept;
    }
    // Smallest relaxation first; within a size, number agreement is checked
    // before the pronoun-case relaxations.
    let ladder: [(Relax, RejectReason); 7] = [
        (Relax { number: true, ..Default::default() }, RejectReason::NumberDisagreement),
        (Relax { obj_as_subj: true, ..Default::default() }, RejectReason::ObjectPronounAsSubject),
        (Relax { subj_as_obj: true, ..Default::default() }, RejectReason::SubjectPronounAsObject),
        (
            Relax { number: true, obj_as_subj: true, ..Default::default() },
            RejectReason::ObjectPronounAsSubject,
        ),
        (
            Relax { number: true, subj_as_obj: true, ..Default::default() },
            RejectReason::SubjectPronounAsObject,
        ),
        (
            Relax { obj_as_subj: true, subj_as_obj: true, ..Default::default() },
            RejectReason::ObjectPronounAsSubject,
        ),
        (
            Relax { number: true, obj_as_subj: true, subj_as_obj: true },
            RejectReason::ObjectPronounAsSubject,
        ),
    ];
    for (relax, reason) in ladder {
        if parses(relax) {
            return Recognition::Reject(reason);
        }
    }
    Recognition::Reject(RejectReason::NoParse)
}

/// True when the sentence cannot be explained without letting an object
/// pronoun stand in subject position, however the other constraints are
/// relaxed.
pub fn exhibits_object_pronoun_as_subject(grammar: &SyntheticGrammar, sentence: &Sentence) -> bool {
    let without = Relax { number: true, subj_as_obj: true, obj_as_subj: false };
    let with = Relax { number: true, subj_as_obj: true, obj_as_subj: true };
    !Cfg::build(grammar, without).accepts(&sentence.tokens)
        && Cfg::build(grammar, with).accepts(&sentence.tokens)
}

#[derive(Debug, Clone)]
enum GSym {
    T(&'static str),
    N(usize),
}

struct Cfg {
    prods: Vec<(usize, Vec<GSym>)>,
    by_lhs: Vec<Vec<usize>>,
    start: usize,
}

impl Cfg {
    fn build(grammar: &SyntheticGrammar, relax: Relax) -> Self {
        let mut ids: HashMap<(Cat, Option<Num>), usize> = HashMap::new();
        let mut next = 0usize;
        let mut id = |key: (Cat, Option<Num>)| -> usize {
            *ids.entry(key).or_insert_with(|| {
                let v = next;
                next += 1;
                v
            })
        };

        let mut prods: Vec<(usize, Vec<GSym>)> = Vec::new();
        for cat in ALL_CATS {
            let nums: &[Option<Num>] = if SyntheticGrammar::numbered(cat) {
                &[Some(Num::Sg), Some(Num::Pl)]
            } else {
                &[None]
            };
            for &num in nums {
                let lhs = id((cat, num));
                for alt in grammar.alts(cat, num) {
                    let matched: Vec<usize> = alt
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| matches!(p, C(_, Matched)))
                        .map(|(i, _)| i)
                        .collect();
                    // Number bindings for the matched symbols of this
                    // alternative: agree within the alternative, unless the
                    // number relaxation voids agreement entirely.
                    let bindings: Vec<Vec<Num>> = if matched.is_empty() {
                        vec![Vec::new()]
                    } else if SyntheticGrammar::numbered(cat) && !relax.number {
                        vec![vec![num.unwrap(); matched.len()]]
                    } else {
                        let base: &[Num] = &[Num::Sg, Num::Pl];
                        let mut combos = vec![Vec::new()];
                        for _ in 0..matched.len() {
                            combos = combos
                                .into_iter()
                                .flat_map(|c: Vec<Num>| {
                                    base.iter().map(move |&n| {
                                        let mut c2 = c.clone();
                                        c2.push(n);
                                        c2
                                    })
                                })
                                .collect();
                            if !relax.number {
                                // Strict: all matched symbols share one draw.
                                combos.retain(|c| c.iter().all(|&n| n == c[0]));
                            }
                        }
                        combos
                    };
                    for binding in bindings {
                        let mut bi = 0;
                        let rhs: Vec<GSym> = alt
                            .iter()
                            .map(|part| match part {
                                W(w) => GSym::T(w),
                                C(c, NoNum) => GSym::N(id((*c, None))),
                                C(c, Matched) => {
                                    let n = binding[bi];
                                    bi += 1;
                                    if SyntheticGrammar::numbered(*c) {
                                        GSym::N(id((*c, Some(n))))
                                    } else {
                                        GSym::N(id((*c, None)))
                                    }
                                }
                            })
                            .collect();
                        prods.push((lhs, rhs));
                    }
                }
            }
        }
        if relax.obj_as_subj {
            for num in [Num::Sg, Num::Pl] {
                let lhs = id((Cat::Subj, Some(num)));
                for w in ["her", "him", "them"] {
                    prods.push((lhs, vec![GSym::T(w)]));
                }
            }
        }
        if relax.subj_as_obj {
            let lhs = id((Cat::Obj, None));
            for w in ["she", "he", "they"] {
                prods.push((lhs, vec![GSym::T(w)]));
            }
        }

        let start = id((Cat::Start, None));
        let mut by_lhs = vec![Vec::new(); next];
        for (i, (lhs, _)) in prods.iter().enumerate() {
            by_lhs[*lhs].push(i);
        }
        Cfg { prods, by_lhs, start }
    }

    /// Earley recognition; the grammar has no empty productions.
    fn accepts(&self, tokens: &[String]) -> bool {
        type Item = (usize, usize, usize); // (production, dot, origin)
        let n = tokens.len();
        let mut sets: Vec<Vec<Item>> = vec![Vec::new(); n + 1];
        let mut seen: Vec<HashSet<Item>> = vec![HashSet::new(); n + 1];

        let push = |sets: &mut Vec<Vec<Item>>, seen: &mut Vec<HashSet<Item>>, i: usize, item: Item| {
            if seen[i].insert(item) {
                sets[i].push(item);
            }
        };
        for &p in &self.by_lhs[self.start] {
            push(&mut sets, &mut seen, 0, (p, 0, 0));
        }

        for i in 0..=n {
            let mut cursor = 0;
            while cursor < sets[i].len() {
                let (p, dot, origin) = sets[i][cursor];
                cursor += 1;
                let rhs = &self.prods[p].1;
                if dot == rhs.len() {
                    // Complete: advance everything in the origin set that was
                    // waiting on this nonterminal.
                    let lhs = self.prods[p].0;
                    let waiting: Vec<Item> = sets[origin]
                        .iter()
                        .filter(|&&(p2, d2, _)| {
                            matches!(self.prods[p2].1.get(d2), Some(GSym::N(x)) if *x == lhs)
                        })
                        .copied()
                        .collect();
                    for (p2, d2, o2) in waiting {
                        push(&mut sets, &mut seen, i, (p2, d2 + 1, o2));
                    }
                } else {
                    match &rhs[dot] {
                        GSym::N(x) => {
                            for &q in &self.by_lhs[*x] {
                                push(&mut sets, &mut seen, i, (q, 0, i));
                            }
                        }
                        GSym::T(w) => {
                            if i < n && tokens[i] == *w {
                                push(&mut sets, &mut seen, i + 1, (p, dot + 1, origin));
                            }
                        }
                    }
                }
            }
        }
        sets[n]
            .iter()
            .any(|&(p, dot, origin)| {
                origin == 0 && dot == self.prods[p].1.len() && self.prods[p].0 == self.start
            })
    }
}
