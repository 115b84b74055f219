//! Generators and independent reference implementations shared by the
//! integration and acceptance tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use fclcheck::fcl::{BodyItem, DeonticLiteral, Head, Modality, ReparationChain, Rule, RuleSet};
use fclcheck::model::{Literal, NodeKind, ProcessGraph};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type TaskSeq = Vec<String>;

// ---------------------------------------------------------------------------
// random block-structured models

#[derive(Debug, Clone)]
enum Tree {
    Task,
    Seq(Vec<Tree>),
    Xor(Vec<Tree>),
    And(Vec<Tree>),
    Loop(Box<Tree>, Box<Tree>),
}

pub struct ModelLimits {
    pub tasks: usize,
    pub xor: usize,
    pub and: usize,
    pub loops: usize,
}

struct Budget {
    tasks: usize,
    xor: usize,
    and: usize,
    loops: usize,
}

/// A sequence whose first task has already been taken from the budget, so
/// no branch is ever empty.
fn gen_seq(rng: &mut ChaCha8Rng, b: &mut Budget, depth: usize) -> Tree {
    let mut items = vec![Tree::Task];
    let extra = rng.random_range(0..=3);
    for _ in 0..extra {
        let pick = rng.random_range(0..4);
        let item = match pick {
            1 if b.xor > 0 && b.tasks >= 2 && depth < 3 => {
                b.xor -= 1;
                let n = if b.tasks >= 3 && rng.random_bool(0.3) {
                    3
                } else {
                    2
                };
                b.tasks -= n;
                Tree::Xor((0..n).map(|_| gen_seq(rng, b, depth + 1)).collect())
            }
            2 if b.and > 0 && b.tasks >= 2 && depth < 3 => {
                b.and -= 1;
                b.tasks -= 2;
                Tree::And((0..2).map(|_| gen_seq(rng, b, depth + 1)).collect())
            }
            3 if b.loops > 0 && b.tasks >= 2 && depth < 3 => {
                b.loops -= 1;
                b.tasks -= 2;
                let body = gen_seq(rng, b, depth + 1);
                let redo = gen_seq(rng, b, depth + 1);
                Tree::Loop(Box::new(body), Box::new(redo))
            }
            _ if b.tasks > 0 => {
                b.tasks -= 1;
                Tree::Task
            }
            _ => continue,
        };
        let at = rng.random_range(0..=items.len());
        items.insert(at, item);
    }
    Tree::Seq(items)
}

/// A random valid model plus the back edges of its loops.
pub struct RandomModel {
    pub graph: ProcessGraph,
    pub back_edges: Vec<(String, String)>,
}

struct Emit<'r> {
    rng: &'r mut ChaCha8Rng,
    atoms: usize,
    nodes: Vec<(String, NodeKind, Vec<Literal>)>,
    edges: Vec<(String, String)>,
    back: Vec<(String, String)>,
    count: usize,
}

impl Emit<'_> {
    fn fresh(&mut self, prefix: &str) -> String {
        self.count += 1;
        format!("{prefix}{}", self.count)
    }

    fn tree(&mut self, t: &Tree, prev: String) -> String {
        match t {
            Tree::Task => {
                let id = self.fresh("T");
                let n = self.rng.random_range(0..=2);
                let mut ann: BTreeMap<usize, bool> = BTreeMap::new();
                for _ in 0..n {
                    ann.insert(
                        self.rng.random_range(0..self.atoms),
                        self.rng.random_bool(0.6),
                    );
                }
                let lits = ann
                    .into_iter()
                    .map(|(a, p)| Literal::new(format!("p{a}"), p))
                    .collect();
                self.nodes.push((id.clone(), NodeKind::Task, lits));
                self.edges.push((prev, id.clone()));
                id
            }
            Tree::Seq(items) => items.iter().fold(prev, |p, it| self.tree(it, p)),
            Tree::Xor(bs) | Tree::And(bs) => {
                let (sk, jk, pre) = if matches!(t, Tree::Xor(_)) {
                    (NodeKind::XorSplit, NodeKind::XorJoin, "x")
                } else {
                    (NodeKind::AndSplit, NodeKind::AndJoin, "a")
                };
                let split = self.fresh(pre);
                let join = format!("{split}_j");
                self.nodes.push((split.clone(), sk, vec![]));
                self.edges.push((prev, split.clone()));
                for b in bs {
                    let last = self.tree(b, split.clone());
                    self.edges.push((last, join.clone()));
                }
                self.nodes.push((join.clone(), jk, vec![]));
                join
            }
            Tree::Loop(body, redo) => {
                let head = self.fresh("h");
                let test = format!("{head}_t");
                self.nodes.push((head.clone(), NodeKind::XorJoin, vec![]));
                self.edges.push((prev, head.clone()));
                let last = self.tree(body, head.clone());
                self.nodes.push((test.clone(), NodeKind::XorSplit, vec![]));
                self.edges.push((last, test.clone()));
                let back = self.tree(redo, test.clone());
                self.edges.push((back.clone(), head.clone()));
                self.back.push((back, head));
                test
            }
        }
    }
}

pub fn random_model(rng: &mut ChaCha8Rng, limits: &ModelLimits, atoms: usize) -> RandomModel {
    let mut budget = Budget {
        tasks: limits.tasks.max(1) - 1,
        xor: limits.xor,
        and: limits.and,
        loops: limits.loops,
    };
    let tree = gen_seq(rng, &mut budget, 0);
    let mut em = Emit {
        rng,
        atoms,
        nodes: vec![("s".into(), NodeKind::Start, vec![])],
        edges: vec![],
        back: vec![],
        count: 0,
    };
    let last = em.tree(&tree, "s".into());
    em.nodes.push(("e".into(), NodeKind::End, vec![]));
    em.edges.push((last, "e".into()));
    let mut b = ProcessGraph::builder("random");
    for (id, kind, ann) in std::mem::take(&mut em.nodes) {
        b = if kind == NodeKind::Task {
            b.task(id, ann)
        } else {
            b.node(id, kind)
        };
    }
    for (f, t) in std::mem::take(&mut em.edges) {
        b = b.edge(f, t);
    }
    RandomModel {
        graph: b.build().expect("generated model builds"),
        back_edges: em.back,
    }
}

// ---------------------------------------------------------------------------
// token game

/// Every task sequence from start to end, playing tokens on edges and
/// taking each back edge at most `bound` times.
pub fn token_game(
    g: &ProcessGraph,
    back_edges: &[(String, String)],
    bound: usize,
) -> BTreeSet<TaskSeq> {
    let edges: Vec<(String, String)> = g
        .edges()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let incoming =
        |n: &str| -> Vec<usize> { (0..edges.len()).filter(|&i| edges[i].1 == n).collect() };
    let outgoing =
        |n: &str| -> Vec<usize> { (0..edges.len()).filter(|&i| edges[i].0 == n).collect() };
    let is_back: Vec<Option<usize>> = edges
        .iter()
        .map(|e| back_edges.iter().position(|b| b == e))
        .collect();
    let start = g
        .nodes()
        .iter()
        .find(|n| n.kind == NodeKind::Start)
        .unwrap();

    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    // (marking, back-edge counts, executed tasks)
    let mut stack: Vec<(Vec<usize>, Vec<usize>, TaskSeq)> =
        vec![(vec![0; edges.len()], vec![0; back_edges.len()], Vec::new())];
    for i in outgoing(&start.id) {
        stack[0].0[i] += 1;
    }
    while let Some((mark, counts, seq)) = stack.pop() {
        if !seen.insert((mark.clone(), counts.clone(), seq.clone())) {
            continue;
        }
        for node in g.nodes() {
            let ins = incoming(&node.id);
            let outs = outgoing(&node.id);
            let consume: Vec<Vec<usize>> = match node.kind {
                NodeKind::Start => continue,
                NodeKind::AndJoin => {
                    if ins.iter().all(|&i| mark[i] > 0) {
                        vec![ins.clone()]
                    } else {
                        vec![]
                    }
                }
                _ => ins
                    .iter()
                    .filter(|&&i| mark[i] > 0)
                    .map(|&i| vec![i])
                    .collect(),
            };
            for c in consume {
                let mut m = mark.clone();
                for &i in &c {
                    m[i] -= 1;
                }
                let mut s = seq.clone();
                if node.kind == NodeKind::Task {
                    s.push(node.id.clone());
                }
                if node.kind == NodeKind::End {
                    if m.iter().all(|&x| x == 0) {
                        out.insert(s);
                    }
                    continue;
                }
                let produce: Vec<Vec<usize>> = if node.kind == NodeKind::XorSplit {
                    outs.iter().map(|&o| vec![o]).collect()
                } else {
                    vec![outs.clone()]
                };
                for p in produce {
                    let mut m2 = m.clone();
                    let mut c2 = counts.clone();
                    let mut ok = true;
                    for &o in &p {
                        m2[o] += 1;
                        if let Some(b) = is_back[o] {
                            c2[b] += 1;
                            ok &= c2[b] <= bound;
                        }
                    }
                    if ok {
                        stack.push((m2, c2, s.clone()));
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// random rule sets

pub struct RuleLimits {
    pub rules: usize,
    pub atoms: usize,
    /// Allow `[P]x` premises.
    pub permission_premises: bool,
    /// Allow premises of any modality.
    pub deontic_premises: bool,
    pub terminates: bool,
    pub max_chain: usize,
}

const OBLIGATIONS: [Modality; 6] = [
    Modality::Opu,
    Modality::Om,
    Modality::Oapp,
    Modality::Oapnp,
    Modality::Oanpp,
    Modality::Oanpnp,
];

fn random_lit(rng: &mut ChaCha8Rng, atoms: usize) -> Literal {
    Literal::new(
        format!("p{}", rng.random_range(0..atoms)),
        rng.random_bool(0.6),
    )
}

pub fn random_rules(rng: &mut ChaCha8Rng, lim: &RuleLimits) -> RuleSet {
    let n = rng.random_range(0..=lim.rules);
    let mut rules = Vec::with_capacity(n);
    for i in 0..n {
        let mut body = Vec::new();
        let mut used = BTreeSet::new();
        for _ in 0..rng.random_range(0..=2) {
            let l = random_lit(rng, lim.atoms);
            if used.insert(l.atom().to_string()) {
                body.push(BodyItem::Literal(l));
            }
        }
        if lim.deontic_premises && rng.random_bool(0.2) {
            let m = *[Modality::P, Modality::Om, Modality::Oanpnp, Modality::Opu]
                .choose(rng)
                .unwrap();
            body.push(BodyItem::Deontic(DeonticLiteral::new(
                m,
                random_lit(rng, lim.atoms),
            )));
        } else if lim.permission_premises && rng.random_bool(0.15) {
            body.push(BodyItem::Deontic(DeonticLiteral::new(
                Modality::P,
                random_lit(rng, lim.atoms),
            )));
        }
        let roll = rng.random_range(0..100);
        let head = if roll < 25 {
            Head::Definitional(random_lit(rng, lim.atoms))
        } else if roll < 40 {
            Head::Deontic(ReparationChain::single(DeonticLiteral::new(
                Modality::P,
                random_lit(rng, lim.atoms),
            )))
        } else {
            let first = DeonticLiteral::new(
                *OBLIGATIONS.choose(rng).unwrap(),
                random_lit(rng, lim.atoms),
            );
            let mut links = vec![first];
            while links.len() < lim.max_chain && rng.random_bool(0.35) {
                let c = random_lit(rng, lim.atoms);
                if links.iter().any(|l| l.content == c) {
                    break;
                }
                links.push(DeonticLiteral::new(*OBLIGATIONS.choose(rng).unwrap(), c));
            }
            Head::Deontic(ReparationChain::new(links).unwrap())
        };
        let mut rule = Rule::new(format!("r{i}"), body, head);
        if lim.terminates && rng.random_bool(0.15) {
            rule.terminates = vec![random_lit(rng, lim.atoms)];
        }
        rules.push(rule);
    }
    // superiority oriented by a random rank, so it is acyclic
    let rank: Vec<u32> = (0..n).map(|_| rng.random()).collect();
    let mut sup = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j
                && rank[i] < rank[j]
                && rules[i].head.conflicts_with(&rules[j].head)
                && rng.random_bool(0.5)
            {
                sup.push((rules[i].id.clone(), rules[j].id.clone()));
            }
        }
    }
    RuleSet::new(rules, sup).expect("rank-ordered superiority is acyclic")
}

// ---------------------------------------------------------------------------
// defeasible-logic reference: literal-level proof conditions

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Tv {
    Unknown,
    Plus,
    Minus,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Key {
    Fact(Literal),
    Deon(Modality, Literal),
}

fn key_of_body(b: &BodyItem) -> Key {
    match b {
        BodyItem::Literal(l) => Key::Fact(l.clone()),
        BodyItem::Deontic(d) => Key::Deon(d.modality, d.content.clone()),
    }
}

fn key_of_head(h: &Head) -> Key {
    match h {
        Head::Definitional(l) => Key::Fact(l.clone()),
        Head::Deontic(c) => Key::Deon(c.first().modality, c.first().content.clone()),
    }
}

/// Indices of the rules whose conclusion is defeasibly provable, computed
/// as the Kleene fixpoint of the +∂/−∂ conditions (ambiguity blocking, no
/// team defeat, facts strict).
pub fn oracle_fired(
    rs: &RuleSet,
    state: &BTreeSet<Literal>,
    ambient: &BTreeSet<DeonticLiteral>,
) -> BTreeSet<usize> {
    let rules = rs.rules();
    let n = rules.len();
    let attackers: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && rules[i].head.conflicts_with(&rules[j].head))
                .collect()
        })
        .collect();
    let sup = |i: usize, j: usize| rs.is_superior(&rules[i].id, &rules[j].id);
    let given = |k: &Key| match k {
        Key::Fact(l) => state.contains(l),
        Key::Deon(m, c) => ambient.contains(&DeonticLiteral::new(*m, c.clone())),
    };
    let contradicted = |k: &Key| match k {
        Key::Fact(l) => state.contains(&l.complement()),
        Key::Deon(..) => false,
    };

    let mut keys: BTreeSet<Key> = BTreeSet::new();
    for r in rules {
        keys.insert(key_of_head(&r.head));
        keys.extend(r.body.iter().map(key_of_body));
    }
    let mut tv: BTreeMap<Key, Tv> = keys.iter().map(|k| (k.clone(), Tv::Unknown)).collect();
    let app = |tv: &BTreeMap<Key, Tv>, r: usize| {
        rules[r]
            .body
            .iter()
            .all(|b| tv[&key_of_body(b)] == Tv::Plus)
    };
    let disc = |tv: &BTreeMap<Key, Tv>, r: usize| {
        rules[r]
            .body
            .iter()
            .any(|b| tv[&key_of_body(b)] == Tv::Minus)
    };
    let wins = |tv: &BTreeMap<Key, Tv>, r: usize| {
        !contradicted(&key_of_head(&rules[r].head))
            && app(tv, r)
            && attackers[r].iter().all(|&s| disc(tv, s) || sup(r, s))
    };
    let blocked = |tv: &BTreeMap<Key, Tv>, r: usize| {
        contradicted(&key_of_head(&rules[r].head))
            || disc(tv, r)
            || attackers[r].iter().any(|&s| app(tv, s) && !sup(r, s))
    };
    loop {
        let mut next = tv.clone();
        for k in &keys {
            if tv[k] != Tv::Unknown {
                continue;
            }
            let for_k: Vec<usize> = (0..n)
                .filter(|&r| key_of_head(&rules[r].head) == *k)
                .collect();
            let plus = given(k) || for_k.iter().any(|&r| wins(&tv, r));
            let minus = !given(k) && for_k.iter().all(|&r| blocked(&tv, r));
            if plus {
                next.insert(k.clone(), Tv::Plus);
            } else if minus {
                next.insert(k.clone(), Tv::Minus);
            }
        }
        if next == tv {
            break;
        }
        tv = next;
    }
    (0..n).filter(|&r| wins(&tv, r)).collect()
}

// ---------------------------------------------------------------------------
// lifecycle reference: interval formulas per obligation type

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OStatus {
    Fulfilled,
    Violated,
    Compensated,
    Terminated,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OInst {
    pub rule: String,
    pub chain_index: usize,
    pub content: Literal,
    pub start: usize,
    pub violated_at: Option<usize>,
    pub status: OStatus,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cause {
    Eval,
    Termination,
    End,
}

struct Resolution {
    status: OStatus,
    violated: Option<(usize, Cause)>,
    /// Last position the instance is in force.
    until: usize,
}

/// Evaluates one trace, given as its annotation sets, with the
/// persist force mode. Rule sets may use `[P]` premises only.
pub fn brute_trace(
    rs: &RuleSet,
    steps: &[BTreeSet<Literal>],
    strict: bool,
) -> (Vec<OInst>, bool, bool) {
    let len = steps.len();
    let rules = rs.rules();
    // states, 1-based
    let mut states = vec![BTreeSet::new()];
    for a in steps {
        let prev: &BTreeSet<Literal> = states.last().unwrap();
        let mut s: BTreeSet<Literal> = prev
            .iter()
            .filter(|l| !a.contains(&l.complement()))
            .cloned()
            .collect();
        s.extend(a.iter().cloned());
        states.push(s);
    }
    let mut fired = vec![BTreeSet::new()];
    let mut terms: Vec<BTreeSet<Literal>> = vec![BTreeSet::new()];
    let mut perms: BTreeSet<DeonticLiteral> = BTreeSet::new();
    for k in 1..=len {
        let f = oracle_fired(rs, &states[k], &perms);
        let mut t = BTreeSet::new();
        let mut granted = BTreeSet::new();
        for &r in &f {
            t.extend(rules[r].terminates.iter().cloned());
            if let Head::Deontic(c) = &rules[r].head {
                if c.first().modality == Modality::P {
                    granted.insert(c.first().clone());
                }
            }
        }
        perms.retain(|p| !t.contains(&p.content));
        perms.extend(granted);
        fired.push(f);
        terms.push(t);
    }
    let holds = |k: usize, c: &Literal| states[k].contains(c);
    let first_term = |c: &Literal, from: usize| (from..=len).find(|&k| terms[k].contains(c));

    let resolve = |d: &DeonticLiteral, n: usize, term_from: usize| -> Resolution {
        let c = &d.content;
        let tau = first_term(c, term_from.max(n));
        match d.modality {
            Modality::Opu => {
                if holds(n, c) {
                    Resolution {
                        status: OStatus::Fulfilled,
                        violated: None,
                        until: n,
                    }
                } else {
                    Resolution {
                        status: OStatus::Violated,
                        violated: Some((n, Cause::Eval)),
                        until: n,
                    }
                }
            }
            Modality::Om => {
                let e = tau.unwrap_or(len);
                match (n..=e).find(|&k| !holds(k, c)) {
                    Some(b) => Resolution {
                        status: OStatus::Violated,
                        violated: Some((b, Cause::Eval)),
                        until: e,
                    },
                    None if tau.is_some() => Resolution {
                        status: OStatus::Terminated,
                        violated: None,
                        until: e,
                    },
                    None => Resolution {
                        status: OStatus::Fulfilled,
                        violated: None,
                        until: len,
                    },
                }
            }
            m => {
                if m.is_preemptive() && (1..=n).any(|k| holds(k, c)) {
                    return Resolution {
                        status: OStatus::Fulfilled,
                        violated: None,
                        until: n,
                    };
                }
                let f = (n..=len).find(|&k| holds(k, c));
                match (f, tau) {
                    (Some(f), t) if t.is_none_or(|t| f <= t) => Resolution {
                        status: OStatus::Fulfilled,
                        violated: None,
                        until: f,
                    },
                    (f, Some(t)) => Resolution {
                        status: OStatus::Violated,
                        violated: Some((t, Cause::Termination)),
                        until: if m.is_perdurant() {
                            f.unwrap_or(len)
                        } else {
                            t
                        },
                    },
                    (_, None) => Resolution {
                        status: OStatus::Violated,
                        violated: Some((len, Cause::End)),
                        until: len,
                    },
                }
            }
        }
    };

    let mut out: Vec<OInst> = Vec::new();
    for (r, rule) in rules.iter().enumerate() {
        let Head::Deontic(chain) = &rule.head else {
            continue;
        };
        if chain.first().modality == Modality::P {
            continue;
        }
        let derived = |k: usize| k >= 1 && fired[k].contains(&r);
        let mut busy = 0;
        for k in 1..=len {
            if !derived(k) || derived(k - 1) || k <= busy {
                continue;
            }
            let mut group: Vec<(OInst, Option<usize>)> = Vec::new();
            let (mut n, mut term_from) = (k, k);
            for (idx, link) in chain.links().iter().enumerate() {
                let res = resolve(link, n, term_from);
                if idx == 0 {
                    busy = res.until;
                }
                group.push((
                    OInst {
                        rule: rule.id.clone(),
                        chain_index: idx + 1,
                        content: link.content.clone(),
                        start: n,
                        violated_at: res.violated.map(|v| v.0),
                        status: res.status,
                    },
                    None,
                ));
                match res.violated {
                    Some((v, cause)) => {
                        n = v;
                        term_from = if cause == Cause::Eval { v } else { v + 1 };
                    }
                    None => break,
                }
            }
            // compensation, backwards along the chain
            for i in (0..group.len().saturating_sub(1)).rev() {
                let next = group[i + 1].0.status;
                let ok = match next {
                    OStatus::Fulfilled | OStatus::Terminated => true,
                    OStatus::Compensated => !strict,
                    OStatus::Violated => false,
                };
                if group[i].0.status == OStatus::Violated && ok {
                    group[i].0.status = OStatus::Compensated;
                }
            }
            out.extend(group.into_iter().map(|g| g.0));
        }
    }
    out.sort();
    let strong = out.iter().all(|o| o.violated_at.is_none());
    let weak = out
        .iter()
        .all(|o| o.violated_at.is_none() || o.status == OStatus::Compensated);
    (out, strong, weak)
}

/// The implementation's instances in the reference form, sorted.
pub fn as_oinst(r: &fclcheck::TraceResult) -> Vec<OInst> {
    use fclcheck::Status;
    let mut v: Vec<OInst> = r
        .instances
        .iter()
        .map(|o| OInst {
            rule: o.source_rule.clone(),
            chain_index: o.chain_index,
            content: o.content.clone(),
            start: o.start,
            violated_at: o.first_violation(),
            status: match o.status {
                Status::Fulfilled => OStatus::Fulfilled,
                Status::Violated => OStatus::Violated,
                Status::Compensated => OStatus::Compensated,
                Status::Terminated => OStatus::Terminated,
                Status::Active => panic!("instance left active"),
            },
        })
        .collect();
    v.sort();
    v
}
