//! The rule language: a propositional FCL dialect with explicit modality tags.
//!
//! ```text
//! # definitional rule
//! r1: customer, spending_over_1000 => premium_customer
//! # deontic rule with a reparation chain
//! r2: restaurant, [P]sell_alcohol => [OM]show_license (x) [OAPNP]pay_fine
//! r3: => [P]p terminates {q}
//! r3 > r2
//! ```
//!
//! One statement per line; `#` starts a comment. `[F]p` is read as `[OM]~p`.

mod parser;
mod print;
mod stats;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::Literal;

pub use parser::{parse_rules, ParseError, ParseErrorKind};
pub use print::serialize_rules;
pub use stats::{ruleset_stats, Count, RulesetStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Modality {
    /// Permission.
    P,
    /// Punctual obligation.
    #[serde(rename = "OPU")]
    Opu,
    /// Maintenance obligation.
    #[serde(rename = "OM")]
    Om,
    /// Achievement, preemptive, perdurant.
    #[serde(rename = "OAPP")]
    Oapp,
    /// Achievement, preemptive, non-perdurant.
    #[serde(rename = "OAPNP")]
    Oapnp,
    /// Achievement, non-preemptive, perdurant.
    #[serde(rename = "OANPP")]
    Oanpp,
    /// Achievement, non-preemptive, non-perdurant.
    #[serde(rename = "OANPNP")]
    Oanpnp,
}

impl Modality {
    pub const ALL: [Modality; 7] = [
        Modality::P,
        Modality::Opu,
        Modality::Om,
        Modality::Oapp,
        Modality::Oapnp,
        Modality::Oanpp,
        Modality::Oanpnp,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Modality::P => "P",
            Modality::Opu => "OPU",
            Modality::Om => "OM",
            Modality::Oapp => "OAPP",
            Modality::Oapnp => "OAPNP",
            Modality::Oanpp => "OANPP",
            Modality::Oanpnp => "OANPNP",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Modality> {
        Modality::ALL.into_iter().find(|m| m.tag() == tag)
    }

    /// Builds an achievement modality from its two flags.
    pub fn achievement(preemptive: bool, perdurant: bool) -> Modality {
        match (preemptive, perdurant) {
            (true, true) => Modality::Oapp,
            (true, false) => Modality::Oapnp,
            (false, true) => Modality::Oanpp,
            (false, false) => Modality::Oanpnp,
        }
    }

    pub fn is_permission(self) -> bool {
        self == Modality::P
    }

    pub fn is_obligation(self) -> bool {
        !self.is_permission()
    }

    pub fn is_achievement(self) -> bool {
        matches!(
            self,
            Modality::Oapp | Modality::Oapnp | Modality::Oanpp | Modality::Oanpnp
        )
    }

    /// Achievement obligations only; everything else is `false`.
    pub fn is_preemptive(self) -> bool {
        matches!(self, Modality::Oapp | Modality::Oapnp)
    }

    /// Achievement obligations only; everything else is `false`.
    pub fn is_perdurant(self) -> bool {
        matches!(self, Modality::Oapp | Modality::Oanpp)
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeonticLiteral {
    pub modality: Modality,
    pub content: Literal,
}

impl DeonticLiteral {
    pub fn new(modality: Modality, content: impl Into<Literal>) -> Self {
        DeonticLiteral {
            modality,
            content: content.into(),
        }
    }

    /// Deontic conflict: an obligation against an obligation or permission
    /// of the complementary content.
    pub fn conflicts_with(&self, other: &DeonticLiteral) -> bool {
        self.content.is_complement_of(&other.content)
            && (self.modality.is_obligation() || other.modality.is_obligation())
    }
}

impl fmt::Display for DeonticLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]{}", self.modality, self.content)
    }
}

impl Serialize for DeonticLiteral {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("a reparation chain needs at least one link")]
    Empty,
    #[error("link {0} is a permission; only a lone head may be a permission")]
    Permission(usize),
    #[error("content `{0}` appears in more than one link")]
    RepeatedContent(Literal),
}

/// `O1 c1 ⊗ O2 c2 ⊗ ...`: each link compensates the violation of the one
/// before it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReparationChain {
    links: Vec<DeonticLiteral>,
}

impl ReparationChain {
    pub fn new(links: Vec<DeonticLiteral>) -> Result<Self, ChainError> {
        if links.is_empty() {
            return Err(ChainError::Empty);
        }
        for (i, link) in links.iter().enumerate() {
            if link.modality.is_permission() && (i > 0 || links.len() > 1) {
                return Err(ChainError::Permission(i + 1));
            }
        }
        let mut contents = BTreeSet::new();
        for link in &links {
            if !contents.insert(&link.content) {
                return Err(ChainError::RepeatedContent(link.content.clone()));
            }
        }
        Ok(ReparationChain { links })
    }

    pub fn single(link: DeonticLiteral) -> Self {
        ReparationChain { links: vec![link] }
    }

    pub fn links(&self) -> &[DeonticLiteral] {
        &self.links
    }

    pub fn first(&self) -> &DeonticLiteral {
        &self.links[0]
    }

    /// The compensation of link `index` (1-based): the next link, if any.
    pub fn compensation(&self, index: usize) -> Option<&DeonticLiteral> {
        self.links.get(index)
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for ReparationChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, link) in self.links.iter().enumerate() {
            if i > 0 {
                f.write_str(" (x) ")?;
            }
            write!(f, "{link}")?;
        }
        Ok(())
    }
}

impl Serialize for ReparationChain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BodyItem {
    Literal(Literal),
    Deontic(DeonticLiteral),
}

impl fmt::Display for BodyItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyItem::Literal(l) => write!(f, "{l}"),
            BodyItem::Deontic(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Head {
    Definitional(Literal),
    Deontic(ReparationChain),
}

impl Head {
    /// Whether two rule heads attack each other.
    pub fn conflicts_with(&self, other: &Head) -> bool {
        match (self, other) {
            (Head::Definitional(a), Head::Definitional(b)) => a.is_complement_of(b),
            (Head::Deontic(a), Head::Deontic(b)) => a.first().conflicts_with(b.first()),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub body: Vec<BodyItem>,
    pub head: Head,
    /// Contents whose in-force obligations this rule ends when it fires.
    pub terminates: Vec<Literal>,
}

impl Rule {
    pub fn new(id: impl Into<String>, body: Vec<BodyItem>, head: Head) -> Self {
        Rule {
            id: id.into(),
            body,
            head,
            terminates: Vec::new(),
        }
    }

    pub fn with_terminates(mut self, terminates: Vec<Literal>) -> Self {
        self.terminates = terminates;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleSetError {
    #[error("duplicate rule id `{0}`")]
    DuplicateId(String),
    #[error("superiority `{0} > {1}` names unknown rule `{2}`")]
    UnknownRule(String, String, String),
    #[error("rule `{0}` cannot be superior to itself")]
    SelfSuperiority(String),
    #[error("superiority among conflicting rules is cyclic through `{0}`")]
    Cycle(String),
}

/// A normative system: rules with unique ids plus a superiority relation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
    superiority: BTreeSet<(String, String)>,
}

impl RuleSet {
    pub fn new(
        rules: Vec<Rule>,
        superiority: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, RuleSetError> {
        let mut index = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            if index.insert(r.id.as_str(), i).is_some() {
                return Err(RuleSetError::DuplicateId(r.id.clone()));
            }
        }
        let superiority: BTreeSet<(String, String)> = superiority.into_iter().collect();
        for (w, l) in &superiority {
            for id in [w, l] {
                if !index.contains_key(id.as_str()) {
                    return Err(RuleSetError::UnknownRule(w.clone(), l.clone(), id.clone()));
                }
            }
            if w == l {
                return Err(RuleSetError::SelfSuperiority(w.clone()));
            }
        }
        let rs = RuleSet { rules, superiority };
        if let Some(id) = rs.superiority_cycle() {
            return Err(RuleSetError::Cycle(id));
        }
        Ok(rs)
    }

    pub fn empty() -> Self {
        RuleSet::default()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn superiority(&self) -> &BTreeSet<(String, String)> {
        &self.superiority
    }

    pub fn is_superior(&self, winner: &str, loser: &str) -> bool {
        self.superiority
            .contains(&(winner.to_string(), loser.to_string()))
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// A rule on a cycle of the superiority relation restricted to pairs of
    /// rules with conflicting heads.
    fn superiority_cycle(&self) -> Option<String> {
        let heads: HashMap<&str, &Head> = self
            .rules
            .iter()
            .map(|r| (r.id.as_str(), &r.head))
            .collect();
        let mut graph: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (w, l) in &self.superiority {
            if heads[w.as_str()].conflicts_with(heads[l.as_str()]) {
                graph.entry(w.as_str()).or_default().push(l.as_str());
            }
        }
        // colour DFS
        let mut colour: HashMap<&str, u8> = HashMap::new();
        for &root in graph.keys() {
            if colour.contains_key(root) {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            colour.insert(root, 1);
            while let Some((node, i)) = stack.pop() {
                let next = graph.get(node).map(Vec::as_slice).unwrap_or(&[]);
                if i < next.len() {
                    stack.push((node, i + 1));
                    let m = next[i];
                    match colour.get(m) {
                        Some(1) => return Some(m.to_string()),
                        Some(_) => {}
                        None => {
                            colour.insert(m, 1);
                            stack.push((m, 0));
                        }
                    }
                } else {
                    colour.insert(node, 2);
                }
            }
        }
        None
    }
}
