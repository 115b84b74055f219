//! Defeasible inference over one environment state.
//!
//! Every rule is defeasible. A rule is *applicable* once all its premises are
//! proved; it *fires* when it is applicable, its head is not contradicted by
//! a fact of the state, and every rule attacking it is either inapplicable
//! for good or beaten by it through the superiority relation. Attacks are
//! pairwise (no team defeat) and an applicable attacker blocks even when it
//! cannot fire itself, so an unresolved conflict suppresses both heads.
//!
//! Heads attack each other when they are complementary facts, obligations of
//! complementary contents, or a permission against an obligation of the
//! complement. Deontic literals handed in from outside (obligations already
//! in force, permissions granted earlier) only satisfy premises; they never
//! attack.

use std::collections::{BTreeSet, HashMap};

use crate::fcl::{BodyItem, DeonticLiteral, Head, Modality, ReparationChain, RuleSet};
use crate::model::Literal;

type Lit = u32;

fn lit_id(atom: u32, positive: bool) -> Lit {
    atom * 2 + u32::from(!positive)
}

fn complement(l: Lit) -> Lit {
    l ^ 1
}

/// A deontic literal in compiled form.
type Deon = (Modality, Lit);

#[derive(Debug, Clone)]
enum CHead {
    Fact(Lit),
    Deontic(Deon),
}

#[derive(Debug, Clone)]
struct CRule {
    facts: Vec<Lit>,
    deontic: Vec<Deon>,
    head: CHead,
    /// Attacking rules, each with whether this rule beats it.
    attackers: Vec<(usize, bool)>,
}

/// Outcome of the competition between a rule and its attackers. Whether
/// the body holds is tracked separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Open,
    Fired,
    /// Contradicted by a fact, or facing an unbeaten applicable attacker.
    Defeated,
}

/// What a rule set concludes in one state.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConclusionSet {
    /// The input state plus every derived definitional conclusion.
    pub facts: BTreeSet<Literal>,
    /// Obligation chains in force, keyed by originating rule id.
    pub deontic: BTreeSet<(String, ReparationChain)>,
    /// Permissions concluded in this state.
    pub permissions: BTreeSet<DeonticLiteral>,
    /// Indices (into the rule set) of the rules that fired, ascending.
    pub fired: Vec<usize>,
    /// Fixpoint rounds taken.
    pub steps: usize,
}

/// A rule set compiled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Reasoner<'a> {
    rs: &'a RuleSet,
    atoms: HashMap<&'a str, u32>,
    rules: Vec<CRule>,
    by_fact: HashMap<Lit, Vec<usize>>,
    by_deon: HashMap<Deon, Vec<usize>>,
}

impl<'a> Reasoner<'a> {
    pub fn new(rs: &'a RuleSet) -> Self {
        let mut atoms: HashMap<&'a str, u32> = HashMap::new();
        let mut intern = |l: &'a Literal| {
            let n = atoms.len() as u32;
            let a = *atoms.entry(l.atom()).or_insert(n);
            lit_id(a, l.is_positive())
        };
        let mut rules = Vec::with_capacity(rs.rules().len());
        for r in rs.rules() {
            let mut facts = Vec::new();
            let mut deontic = Vec::new();
            for item in &r.body {
                match item {
                    BodyItem::Literal(l) => facts.push(intern(l)),
                    BodyItem::Deontic(d) => deontic.push((d.modality, intern(&d.content))),
                }
            }
            let head = match &r.head {
                Head::Definitional(l) => CHead::Fact(intern(l)),
                Head::Deontic(c) => {
                    CHead::Deontic((c.first().modality, intern(&c.first().content)))
                }
            };
            rules.push(CRule {
                facts,
                deontic,
                head,
                attackers: Vec::new(),
            });
        }
        let mut by_fact: HashMap<Lit, Vec<usize>> = HashMap::new();
        let mut by_deon: HashMap<Deon, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            match r.head {
                CHead::Fact(l) => by_fact.entry(l).or_default().push(i),
                CHead::Deontic(d) => by_deon.entry(d).or_default().push(i),
            }
        }
        let src = rs.rules();
        for i in 0..src.len() {
            for j in 0..src.len() {
                if i != j && src[i].head.conflicts_with(&src[j].head) {
                    let beats = rs.is_superior(&src[i].id, &src[j].id);
                    rules[i].attackers.push((j, beats));
                }
            }
        }
        Reasoner {
            rs,
            atoms,
            rules,
            by_fact,
            by_deon,
        }
    }

    pub fn rule_set(&self) -> &'a RuleSet {
        self.rs
    }

    fn compile_lit(&self, l: &Literal) -> Option<Lit> {
        self.atoms
            .get(l.atom())
            .map(|&a| lit_id(a, l.is_positive()))
    }

    /// Indices of the rules that fire in `state` given the `ambient` deontic
    /// literals, plus the number of rounds taken.
    pub fn fire<'s>(
        &self,
        state: impl IntoIterator<Item = &'s Literal>,
        ambient: impl IntoIterator<Item = &'s DeonticLiteral>,
    ) -> (Vec<usize>, usize) {
        let mut known = vec![false; self.atoms.len() * 2];
        for l in state {
            if let Some(id) = self.compile_lit(l) {
                known[id as usize] = true;
            }
        }
        let mut amb: BTreeSet<Deon> = BTreeSet::new();
        for d in ambient {
            if let Some(id) = self.compile_lit(&d.content) {
                amb.insert((d.modality, id));
            }
        }
        self.fire_compiled(&known, &amb)
    }

    fn fire_compiled(&self, state: &[bool], ambient: &BTreeSet<Deon>) -> (Vec<usize>, usize) {
        let n = self.rules.len();
        let mut verdict = vec![Verdict::Open; n];
        let mut applicable = vec![false; n];
        // some premise can never be proved
        let mut discarded = vec![false; n];
        let mut facts = state.to_vec();
        let mut deon: BTreeSet<Deon> = ambient.clone();
        let no_rules: &[usize] = &[];

        let mut steps = 0;
        loop {
            steps += 1;
            // each rule changes at most twice: body settled, then verdict
            assert!(steps <= 2 * n + 1, "defeasible fixpoint did not converge");
            let mut changed = false;
            for i in 0..n {
                let r = &self.rules[i];
                if !applicable[i] && !discarded[i] {
                    let out = |s: &usize| discarded[*s] || verdict[*s] == Verdict::Defeated;
                    if r.facts.iter().all(|&l| facts[l as usize])
                        && r.deontic.iter().all(|d| deon.contains(d))
                    {
                        applicable[i] = true;
                        changed = true;
                    } else if r.facts.iter().any(|&l| {
                        state[complement(l) as usize]
                            || !facts[l as usize]
                                && self
                                    .by_fact
                                    .get(&l)
                                    .map_or(no_rules, Vec::as_slice)
                                    .iter()
                                    .all(out)
                    }) || r.deontic.iter().any(|d| {
                        !deon.contains(d)
                            && self
                                .by_deon
                                .get(d)
                                .map_or(no_rules, Vec::as_slice)
                                .iter()
                                .all(out)
                    }) {
                        discarded[i] = true;
                        changed = true;
                    }
                }
                if verdict[i] != Verdict::Open || discarded[i] {
                    continue;
                }
                // defeat need not wait for applicability: an attacker never
                // stops being applicable
                let contradicted =
                    matches!(r.head, CHead::Fact(q) if state[complement(q) as usize]);
                if contradicted
                    || r.attackers
                        .iter()
                        .any(|&(s, beats)| applicable[s] && !beats)
                {
                    verdict[i] = Verdict::Defeated;
                    changed = true;
                    continue;
                }
                if applicable[i] && r.attackers.iter().all(|&(s, beats)| beats || discarded[s]) {
                    verdict[i] = Verdict::Fired;
                    changed = true;
                    match r.head {
                        CHead::Fact(q) => facts[q as usize] = true,
                        CHead::Deontic(d) => {
                            deon.insert(d);
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let fired = (0..n).filter(|&i| verdict[i] == Verdict::Fired).collect();
        (fired, steps)
    }

    pub fn conclusions(
        &self,
        state: &BTreeSet<Literal>,
        ambient: &BTreeSet<DeonticLiteral>,
    ) -> ConclusionSet {
        let (fired, steps) = self.fire(state, ambient);
        let mut out = ConclusionSet {
            facts: state.clone(),
            steps,
            ..ConclusionSet::default()
        };
        for &i in &fired {
            let r = &self.rs.rules()[i];
            match &r.head {
                Head::Definitional(l) => {
                    out.facts.insert(l.clone());
                }
                Head::Deontic(c) if c.first().modality.is_permission() => {
                    out.permissions.insert(c.first().clone());
                }
                Head::Deontic(c) => {
                    out.deontic.insert((r.id.clone(), c.clone()));
                }
            }
        }
        out.fired = fired;
        out
    }
}

/// One-shot form of [`Reasoner::conclusions`].
pub fn conclusions(
    rs: &RuleSet,
    state: &BTreeSet<Literal>,
    ambient: &BTreeSet<DeonticLiteral>,
) -> ConclusionSet {
    Reasoner::new(rs).conclusions(state, ambient)
}
