//! Seeded generator for benchmark-shaped models and rule bases.
//!
//! A model is grown as a block skeleton: loops and top-level XOR blocks on a
//! spine, further XOR blocks nested into the long branches, then single tasks
//! inserted until the shortest path, the longest loop-free path and the task
//! count hit their targets. Every random choice comes from one ChaCha stream,
//! so a seed always yields byte-identical files.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fcl::{BodyItem, DeonticLiteral, Head, Modality, ReparationChain, Rule, RuleSet};
use crate::model::{Literal, NodeKind, ProcessGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("infeasible shape: {0}")]
    Infeasible(String),
}

fn infeasible<T>(msg: impl Into<String>) -> Result<T, ShapeError> {
    Err(ShapeError::Infeasible(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelShape {
    pub tasks: usize,
    /// XOR decision blocks, not counting the gateways of loops.
    pub xor: usize,
    /// How many of the XOR blocks have three branches instead of two.
    pub ternary: usize,
    pub loops: usize,
    /// Tasks on the shortest path from start to end.
    pub min_path: Option<usize>,
    /// Tasks on the longest path that takes no back edge.
    pub max_path: Option<usize>,
}

impl ModelShape {
    /// 41 tasks, 12 decisions (one of them three-way), 2 loops, shortest
    /// path 6 and longest loop-free path 22.
    pub fn case_study() -> Self {
        ModelShape {
            tasks: 41,
            xor: 12,
            ternary: 1,
            loops: 2,
            min_path: Some(6),
            max_path: Some(22),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleShape {
    pub rules: usize,
    pub definitional: usize,
    /// Exact number of distinct atoms.
    pub atoms: usize,
    pub superiority: usize,
    pub punctual: usize,
    /// Maintenance heads, prohibitions included.
    pub maintenance: usize,
    pub prohibitions: usize,
    pub permissions: usize,
    /// Heads with a second, compensating link.
    pub chains: usize,
    /// Rules carrying a `terminates` clause.
    pub terminations: usize,
    /// Rules with a permission among their premises.
    pub deontic_premises: usize,
}

impl RuleShape {
    /// 176 rules over 223 atoms with 7 superiority pairs; the remaining
    /// deontic heads are achievement obligations.
    pub fn case_study() -> Self {
        RuleShape {
            rules: 176,
            definitional: 33,
            atoms: 223,
            superiority: 7,
            punctual: 5,
            maintenance: 13,
            prohibitions: 9,
            permissions: 15,
            chains: 2,
            terminations: 12,
            deontic_premises: 6,
        }
    }

    fn achievements(&self) -> Option<usize> {
        self.rules
            .checked_sub(self.definitional)?
            .checked_sub(self.punctual)?
            .checked_sub(self.maintenance)?
            .checked_sub(self.permissions)
    }
}

pub fn atom_name(i: usize) -> String {
    format!("a{i:03}")
}

#[derive(Debug, Clone)]
enum Item {
    Task,
    Xor(Vec<usize>),
    Loop(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Root,
    Branch,
    /// The one-task branch of a top-level decision; keeps the shortest path short.
    Short,
    Body,
    Redo,
}

#[derive(Debug, Clone)]
struct Seq {
    items: Vec<Item>,
    role: Role,
}

#[derive(Debug, Clone)]
struct Skeleton {
    seqs: Vec<Seq>,
}

impl Skeleton {
    fn add(&mut self, role: Role, items: Vec<Item>) -> usize {
        self.seqs.push(Seq { items, role });
        self.seqs.len() - 1
    }

    fn measure(&self, s: usize, longest: bool) -> usize {
        self.seqs[s]
            .items
            .iter()
            .map(|it| match it {
                Item::Task => 1,
                Item::Xor(bs) => {
                    let ms = bs.iter().map(|&b| self.measure(b, longest));
                    if longest {
                        ms.max().unwrap_or(0)
                    } else {
                        ms.min().unwrap_or(0)
                    }
                }
                Item::Loop(body, _) => self.measure(*body, longest),
            })
            .sum()
    }

    fn min(&self) -> usize {
        self.measure(0, false)
    }

    fn max(&self) -> usize {
        self.measure(0, true)
    }

    fn tasks(&self) -> usize {
        self.seqs
            .iter()
            .flat_map(|s| &s.items)
            .filter(|i| matches!(i, Item::Task))
            .count()
    }

    /// Inserts a task somewhere in one of `seqs` and keeps it if `accept`
    /// approves the new (min, max); gives up after a bounded number of tries.
    fn place(
        &mut self,
        rng: &mut ChaCha8Rng,
        seqs: &[usize],
        accept: impl Fn(usize, usize) -> bool,
    ) -> bool {
        if seqs.is_empty() {
            return false;
        }
        for _ in 0..400 {
            let s = *seqs.choose(rng).expect("nonempty");
            let at = rng.random_range(0..=self.seqs[s].items.len());
            self.seqs[s].items.insert(at, Item::Task);
            if accept(self.min(), self.max()) {
                return true;
            }
            self.seqs[s].items.remove(at);
        }
        false
    }

    fn seqs_where(&self, f: impl Fn(Role) -> bool) -> Vec<usize> {
        (0..self.seqs.len())
            .filter(|&i| f(self.seqs[i].role))
            .collect()
    }
}

fn grow(shape: &ModelShape, rng: &mut ChaCha8Rng) -> Result<Skeleton, ShapeError> {
    if shape.ternary > shape.xor {
        return infeasible("more three-way decisions than decisions");
    }
    if shape.tasks == 0 {
        return infeasible("a model needs at least one task");
    }
    let mut sk = Skeleton {
        seqs: vec![Seq {
            items: Vec::new(),
            role: Role::Root,
        }],
    };
    let mut top = Vec::new();
    for _ in 0..shape.loops {
        let body = sk.add(Role::Body, vec![Item::Task]);
        let redo = sk.add(Role::Redo, vec![Item::Task]);
        top.push(Item::Loop(body, redo));
    }
    let k = match (shape.xor, shape.min_path) {
        (0, _) => 0,
        (x, Some(m)) => ((m.saturating_sub(shape.loops) + 1) / 2).clamp(1, x),
        (x, None) => rng.random_range(1..=x),
    };
    let mut arity = vec![2usize; shape.xor];
    for i in rand::seq::index::sample(rng, shape.xor, shape.ternary) {
        arity[i] = 3;
    }
    let mut hosts: Vec<usize> = Vec::new();
    for (i, &n) in arity.iter().enumerate() {
        let mut branches = Vec::with_capacity(n);
        for b in 0..n {
            let role = if i < k && b == n - 1 {
                Role::Short
            } else {
                Role::Branch
            };
            branches.push(sk.add(role, vec![Item::Task]));
        }
        let item = Item::Xor(branches.clone());
        if i < k {
            top.push(item);
        } else {
            let host = *hosts.choose(rng).expect("top-level decisions exist");
            let at = rng.random_range(0..=sk.seqs[host].items.len());
            sk.seqs[host].items.insert(at, item);
        }
        hosts.extend(
            branches
                .into_iter()
                .filter(|&b| sk.seqs[b].role == Role::Branch),
        );
    }
    top.shuffle(rng);
    sk.seqs[0].items = top;

    if let Some(m) = shape.min_path {
        if sk.min() > m {
            return infeasible(format!("shortest path cannot go below {}", sk.min()));
        }
        while sk.min() < m {
            let at = rng.random_range(0..=sk.seqs[0].items.len());
            sk.seqs[0].items.insert(at, Item::Task);
        }
    }
    if let Some(mx) = shape.max_path {
        if sk.max() > mx {
            return infeasible(format!(
                "longest loop-free path cannot go below {}",
                sk.max()
            ));
        }
        let fixed_min = shape.min_path.is_some();
        let cands = sk.seqs_where(|r| match r {
            Role::Branch | Role::Body => true,
            Role::Root => !fixed_min,
            _ => false,
        });
        while sk.max() < mx {
            let (lo, hi) = (sk.min(), sk.max());
            let ok = sk.place(rng, &cands, |a, b| (!fixed_min || a == lo) && b == hi + 1);
            if !ok {
                return infeasible("cannot lengthen the longest path without moving the shortest");
            }
        }
    }
    if sk.tasks() > shape.tasks {
        return infeasible(format!("the requested paths need {} tasks", sk.tasks()));
    }
    let all: Vec<usize> = (0..sk.seqs.len()).collect();
    while sk.tasks() < shape.tasks {
        let (lo, hi) = (sk.min(), sk.max());
        let (fix_lo, fix_hi) = (shape.min_path.is_some(), shape.max_path.is_some());
        let ok = sk.place(rng, &all, |a, b| {
            (!fix_lo || a == lo) && (!fix_hi || b == hi)
        });
        if !ok {
            return infeasible("no room for further tasks off the measured paths");
        }
    }
    Ok(sk)
}

struct Emitter<'r> {
    rng: &'r mut ChaCha8Rng,
    nodes: Vec<(String, NodeKind)>,
    edges: Vec<(String, String)>,
    tasks: usize,
    xors: usize,
    loops: usize,
}

impl Emitter<'_> {
    fn seq(&mut self, sk: &Skeleton, s: usize, mut prev: String) -> String {
        for item in &sk.seqs[s].items {
            prev = match item {
                Item::Task => {
                    self.tasks += 1;
                    let id = format!("T{:02}", self.tasks);
                    self.nodes.push((id.clone(), NodeKind::Task));
                    self.edges.push((prev, id.clone()));
                    id
                }
                Item::Xor(bs) => {
                    self.xors += 1;
                    let split = format!("x{}", self.xors);
                    let join = format!("x{}_join", self.xors);
                    self.nodes.push((split.clone(), NodeKind::XorSplit));
                    self.edges.push((prev, split.clone()));
                    for &b in bs {
                        let last = self.seq(sk, b, split.clone());
                        self.edges.push((last, join.clone()));
                    }
                    self.nodes.push((join.clone(), NodeKind::XorJoin));
                    join
                }
                Item::Loop(body, redo) => {
                    self.loops += 1;
                    let head = format!("loop{}", self.loops);
                    let test = format!("loop{}_test", self.loops);
                    self.nodes.push((head.clone(), NodeKind::XorJoin));
                    self.edges.push((prev, head.clone()));
                    let last = self.seq(sk, *body, head.clone());
                    self.nodes.push((test.clone(), NodeKind::XorSplit));
                    self.edges.push((last, test.clone()));
                    let back = self.seq(sk, *redo, test.clone());
                    self.edges.push((back, head));
                    test
                }
            };
        }
        prev
    }
}

/// Annotation source: literals to draw from, favoured, plus the atom pool.
pub struct AnnotationPool<'a> {
    pub preferred: &'a [Literal],
    pub atoms: usize,
}

fn annotate(rng: &mut ChaCha8Rng, pool: &AnnotationPool<'_>) -> BTreeSet<Literal> {
    let n = rng.random_range(1..=3);
    let mut out: BTreeSet<Literal> = BTreeSet::new();
    for _ in 0..n {
        let l = match pool.preferred.choose(rng) {
            Some(l) if rng.random_bool(0.7) => l.clone(),
            _ => Literal::new(
                atom_name(rng.random_range(0..pool.atoms.max(1))),
                rng.random_bool(0.8),
            ),
        };
        if !out.contains(&l.complement()) {
            out.insert(l);
        }
    }
    out
}

fn build_model(
    shape: &ModelShape,
    pool: &AnnotationPool<'_>,
    rng: &mut ChaCha8Rng,
) -> Result<ProcessGraph, ShapeError> {
    // nesting is random, so some skeletons cannot meet every target at once
    let mut attempt = 0;
    let sk = loop {
        match grow(shape, rng) {
            Ok(sk) => break sk,
            Err(e) if attempt == 63 => return Err(e),
            Err(_) => attempt += 1,
        }
    };
    let mut em = Emitter {
        rng,
        nodes: vec![("start".into(), NodeKind::Start)],
        edges: Vec::new(),
        tasks: 0,
        xors: 0,
        loops: 0,
    };
    let last = em.seq(&sk, 0, "start".into());
    em.nodes.push(("end".into(), NodeKind::End));
    em.edges.push((last, "end".into()));
    let mut b = ProcessGraph::builder("bench");
    let nodes = std::mem::take(&mut em.nodes);
    for (id, kind) in nodes {
        b = if kind == NodeKind::Task {
            let ann = annotate(em.rng, pool);
            b.task(id, ann)
        } else {
            b.node(id, kind)
        };
    }
    for (f, t) in std::mem::take(&mut em.edges) {
        b = b.edge(f, t);
    }
    Ok(b.build()
        .expect("generated ids are unique and edges resolve"))
}

/// A model of the requested shape, annotated over atoms `a000..`.
pub fn generate_model(
    shape: &ModelShape,
    pool: &AnnotationPool<'_>,
    seed: u64,
) -> Result<ProcessGraph, ShapeError> {
    build_model(shape, pool, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Def,
    Deon(Modality),
}

/// A literal slot of a rule template, filled with an atom later.
#[derive(Clone, Copy)]
struct Slot {
    atom: Option<usize>,
    positive: bool,
}

struct Template {
    kind: Kind,
    body: Vec<Slot>,
    head: Slot,
    second: Option<Slot>,
    /// Index of a rule whose head content this one's first link contradicts.
    against: Option<usize>,
    permission_premise: Option<usize>,
    terminates: Option<usize>,
}

fn build_rules(shape: &RuleShape, rng: &mut ChaCha8Rng) -> Result<RuleSet, ShapeError> {
    let Some(achievements) = shape.achievements() else {
        return infeasible("head counts exceed the number of rules");
    };
    if shape.prohibitions > shape.maintenance {
        return infeasible("more prohibitions than maintenance obligations");
    }
    if achievements < 2 * shape.superiority + shape.chains {
        return infeasible("not enough achievement rules for the superiority pairs and chains");
    }
    if shape.deontic_premises > 0 && shape.permissions == 0 {
        return infeasible("permission premises need permission rules");
    }
    if shape.terminations > 0 && achievements == 0 {
        return infeasible("terminations need achievement rules");
    }

    let mut kinds = Vec::with_capacity(shape.rules);
    kinds.extend(std::iter::repeat_n(Kind::Def, shape.definitional));
    kinds.extend(std::iter::repeat_n(
        Kind::Deon(Modality::Opu),
        shape.punctual,
    ));
    kinds.extend(std::iter::repeat_n(
        Kind::Deon(Modality::Om),
        shape.maintenance,
    ));
    kinds.extend(std::iter::repeat_n(
        Kind::Deon(Modality::P),
        shape.permissions,
    ));
    for _ in 0..achievements {
        let m = Modality::achievement(rng.random_bool(0.3), rng.random_bool(0.2));
        kinds.push(Kind::Deon(m));
    }
    kinds.shuffle(rng);

    let slot = |rng: &mut ChaCha8Rng, p: f64| Slot {
        atom: None,
        positive: rng.random_bool(p),
    };
    let mut ts: Vec<Template> = kinds
        .iter()
        .map(|&kind| {
            let n = match kind {
                Kind::Def => rng.random_range(1..=2),
                Kind::Deon(_) => rng.random_range(1..=3),
            };
            Template {
                kind,
                body: (0..n).map(|_| slot(rng, 0.85)).collect(),
                head: slot(rng, 0.9),
                second: None,
                against: None,
                permission_premise: None,
                terminates: None,
            }
        })
        .collect();

    let of = |ts: &[Template], f: &dyn Fn(Kind) -> bool| -> Vec<usize> {
        (0..ts.len()).filter(|&i| f(ts[i].kind)).collect()
    };
    let mut maint = of(&ts, &|k| k == Kind::Deon(Modality::Om));
    maint.shuffle(rng);
    for &i in maint.iter().take(shape.prohibitions) {
        ts[i].head.positive = false;
    }
    for &i in &maint[shape.prohibitions..] {
        ts[i].head.positive = true;
    }
    let mut ach = of(&ts, &|k| matches!(k, Kind::Deon(m) if m.is_achievement()));
    ach.shuffle(rng);
    let (pairs, rest) = ach.split_at(2 * shape.superiority);
    let mut sup = Vec::new();
    for pair in pairs.chunks(2) {
        ts[pair[1]].against = Some(pair[0]);
        sup.push((pair[0], pair[1]));
    }
    for &i in &rest[..shape.chains] {
        ts[i].second = Some(Slot {
            atom: None,
            positive: true,
        });
    }
    let perms = of(&ts, &|k| k == Kind::Deon(Modality::P));
    let mut premise_hosts = of(&ts, &|k| matches!(k, Kind::Deon(m) if m.is_obligation()));
    premise_hosts.retain(|i| ts[*i].against.is_none());
    premise_hosts.shuffle(rng);
    for &i in premise_hosts.iter().take(shape.deontic_premises) {
        ts[i].permission_premise = Some(*perms.choose(rng).expect("permissions exist"));
    }
    let mut term_hosts: Vec<usize> = (0..ts.len()).collect();
    term_hosts.shuffle(rng);
    for &i in term_hosts.iter().take(shape.terminations) {
        let target = *ach.choose(rng).expect("achievements exist");
        if target != i {
            ts[i].terminates = Some(target);
        }
    }

    // free slots: bodies, heads that do not mirror another, second links
    let mut free: Vec<(usize, u8, usize)> = Vec::new();
    for (i, t) in ts.iter().enumerate() {
        free.extend((0..t.body.len()).map(|j| (i, 0, j)));
        if t.against.is_none() {
            free.push((i, 1, 0));
        }
        if t.second.is_some() {
            free.push((i, 2, 0));
        }
    }
    if free.len() < shape.atoms {
        return infeasible(format!(
            "{} literal slots cannot hold {} atoms",
            free.len(),
            shape.atoms
        ));
    }
    if shape.atoms == 0 && !free.is_empty() {
        return infeasible("rules need at least one atom");
    }
    free.shuffle(rng);
    let (cover, extra) = free.split_at(shape.atoms);
    for (a, &(i, w, j)) in cover.iter().enumerate() {
        slot_mut(&mut ts, i, w, j).atom = Some(a);
    }
    for &(i, w, j) in extra {
        slot_mut(&mut ts, i, w, j).atom = Some(rng.random_range(0..shape.atoms));
    }

    // mirrored heads and clean-up of clashing random picks
    let extra_set: BTreeSet<(usize, u8, usize)> = extra.iter().copied().collect();
    for i in 0..ts.len() {
        if let Some(w) = ts[i].against {
            let h = ts[w].head;
            ts[i].head = Slot {
                atom: h.atom,
                positive: !h.positive,
            };
        }
        for _ in 0..64 {
            let t = &ts[i];
            let mut seen: BTreeSet<usize> = BTreeSet::new();
            let clash_body = t
                .body
                .iter()
                .position(|s| !seen.insert(s.atom.expect("filled")));
            let clash_chain = t
                .second
                .filter(|s| s.atom == t.head.atom)
                .map(|_| (i, 2u8, 0usize));
            let fix = match (clash_body, clash_chain) {
                (Some(j), _) if extra_set.contains(&(i, 0, j)) => Some((i, 0u8, j)),
                (Some(j), _) => t
                    .body
                    .iter()
                    .enumerate()
                    .find(|(k, s)| {
                        *k != j && s.atom == t.body[j].atom && extra_set.contains(&(i, 0, *k))
                    })
                    .map(|(k, _)| (i, 0u8, k)),
                (None, Some(c)) if extra_set.contains(&c) => Some(c),
                (None, Some(_)) => None,
                (None, None) => break,
            };
            match fix {
                Some((i, w, j)) => {
                    slot_mut(&mut ts, i, w, j).atom = Some(rng.random_range(0..shape.atoms))
                }
                None => return infeasible("could not spread atoms without clashes"),
            }
        }
    }

    let id = |i: usize| format!("r{:03}", i + 1);
    let lit = |s: Slot| Literal::new(atom_name(s.atom.expect("filled")), s.positive);
    let mut rules = Vec::with_capacity(ts.len());
    for (i, t) in ts.iter().enumerate() {
        let mut body: Vec<BodyItem> = t.body.iter().map(|&s| BodyItem::Literal(lit(s))).collect();
        if let Some(p) = t.permission_premise {
            body.push(BodyItem::Deontic(DeonticLiteral::new(
                Modality::P,
                lit(ts[p].head),
            )));
        }
        let head = match t.kind {
            Kind::Def => Head::Definitional(lit(t.head)),
            Kind::Deon(m) => {
                let mut links = vec![DeonticLiteral::new(m, lit(t.head))];
                if let Some(s) = t.second {
                    let m2 = if rng.random_bool(0.5) {
                        Modality::Oapnp
                    } else {
                        Modality::Oanpnp
                    };
                    links.push(DeonticLiteral::new(m2, lit(s)));
                }
                Head::Deontic(ReparationChain::new(links).expect("chain contents differ"))
            }
        };
        let terminates = t
            .terminates
            .map(|x| vec![lit(ts[x].head)])
            .unwrap_or_default();
        rules.push(Rule::new(id(i), body, head).with_terminates(terminates));
    }
    let sup: Vec<(String, String)> = sup.into_iter().map(|(w, l)| (id(w), id(l))).collect();
    RuleSet::new(rules, sup).map_err(|e| ShapeError::Infeasible(e.to_string()))
}

fn slot_mut(ts: &mut [Template], i: usize, w: u8, j: usize) -> &mut Slot {
    match w {
        0 => &mut ts[i].body[j],
        1 => &mut ts[i].head,
        _ => ts[i].second.as_mut().expect("second link"),
    }
}

pub fn generate_rules(shape: &RuleShape, seed: u64) -> Result<RuleSet, ShapeError> {
    build_rules(shape, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// A rule base and a model annotated mostly with literals the rules test.
pub fn generate_bench(
    model: &ModelShape,
    rules: &RuleShape,
    seed: u64,
) -> Result<(ProcessGraph, RuleSet), ShapeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rs = build_rules(rules, &mut rng)?;
    let preferred: Vec<Literal> = rs
        .rules()
        .iter()
        .flat_map(|r| {
            let body = r.body.iter().filter_map(|b| match b {
                BodyItem::Literal(l) => Some(l.clone()),
                BodyItem::Deontic(_) => None,
            });
            let head = match &r.head {
                Head::Deontic(c) => c.links().iter().map(|d| d.content.clone()).collect(),
                Head::Definitional(_) => Vec::new(),
            };
            body.chain(head)
        })
        .collect();
    let pool = AnnotationPool {
        preferred: &preferred,
        atoms: rules.atoms,
    };
    let g = build_model(model, &pool, &mut rng)?;
    Ok((g, rs))
}
