//! Occurrence counts over a rule set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{BodyItem, DeonticLiteral, Head, Modality, RuleSet};

/// Distinct deontic literals and total occurrences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Count {
    pub distinct: usize,
    pub total: usize,
}

#[derive(Default)]
struct Tally {
    seen: BTreeSet<DeonticLiteral>,
    total: usize,
}

impl Tally {
    fn add(&mut self, d: &DeonticLiteral) {
        self.seen.insert(d.clone());
        self.total += 1;
    }

    fn count(&self) -> Count {
        Count {
            distinct: self.seen.len(),
            total: self.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RulesetStats {
    pub rules: usize,
    pub definitional_rules: usize,
    pub deontic_rules: usize,
    pub superiority_pairs: usize,
    /// Distinct atoms anywhere in the rule set.
    pub atoms: usize,
    /// Every link of every head chain, by modality tag.
    pub heads: BTreeMap<&'static str, Count>,
    /// Deontic literals used as rule premises.
    pub bodies: BTreeMap<&'static str, Count>,
    pub obligations: Count,
    pub punctual: Count,
    pub achievement: Count,
    pub preemptive: Count,
    pub non_preemptive: Count,
    pub perdurant: Count,
    pub non_perdurant: Count,
    pub maintenance: Count,
    /// Maintenance obligations of a negative content.
    pub prohibitions: Count,
    pub permissions: Count,
    /// Links after the first in a chain.
    pub compensations: Count,
}

pub fn ruleset_stats(rs: &RuleSet) -> RulesetStats {
    let mut heads: BTreeMap<Modality, Tally> = BTreeMap::new();
    let mut bodies: BTreeMap<Modality, Tally> = BTreeMap::new();
    let mut groups: BTreeMap<&'static str, Tally> = BTreeMap::new();
    let mut atoms = BTreeSet::new();
    let mut definitional = 0;
    for r in rs.rules() {
        for item in &r.body {
            match item {
                BodyItem::Literal(l) => {
                    atoms.insert(l.atom().to_string());
                }
                BodyItem::Deontic(d) => {
                    atoms.insert(d.content.atom().to_string());
                    bodies.entry(d.modality).or_default().add(d);
                }
            }
        }
        for l in &r.terminates {
            atoms.insert(l.atom().to_string());
        }
        match &r.head {
            Head::Definitional(l) => {
                definitional += 1;
                atoms.insert(l.atom().to_string());
            }
            Head::Deontic(chain) => {
                for (i, d) in chain.links().iter().enumerate() {
                    atoms.insert(d.content.atom().to_string());
                    heads.entry(d.modality).or_default().add(d);
                    let m = d.modality;
                    let mut tags = Vec::new();
                    if m.is_obligation() {
                        tags.push("obligations");
                    }
                    if m == Modality::Opu {
                        tags.push("punctual");
                    }
                    if m.is_achievement() {
                        tags.push("achievement");
                        tags.push(if m.is_preemptive() {
                            "preemptive"
                        } else {
                            "non_preemptive"
                        });
                        tags.push(if m.is_perdurant() {
                            "perdurant"
                        } else {
                            "non_perdurant"
                        });
                    }
                    if m == Modality::Om {
                        tags.push("maintenance");
                        if !d.content.is_positive() {
                            tags.push("prohibitions");
                        }
                    }
                    if m.is_permission() {
                        tags.push("permissions");
                    }
                    if i > 0 {
                        tags.push("compensations");
                    }
                    for t in tags {
                        groups.entry(t).or_default().add(d);
                    }
                }
            }
        }
    }
    let g = |name: &str| groups.get(name).map(Tally::count).unwrap_or_default();
    RulesetStats {
        rules: rs.rules().len(),
        definitional_rules: definitional,
        deontic_rules: rs.rules().len() - definitional,
        superiority_pairs: rs.superiority().len(),
        atoms: atoms.len(),
        heads: heads.iter().map(|(m, t)| (m.tag(), t.count())).collect(),
        bodies: bodies.iter().map(|(m, t)| (m.tag(), t.count())).collect(),
        obligations: g("obligations"),
        punctual: g("punctual"),
        achievement: g("achievement"),
        preemptive: g("preemptive"),
        non_preemptive: g("non_preemptive"),
        perdurant: g("perdurant"),
        non_perdurant: g("non_perdurant"),
        maintenance: g("maintenance"),
        prohibitions: g("prohibitions"),
        permissions: g("permissions"),
        compensations: g("compensations"),
    }
}

impl fmt::Display for RulesetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "rules: {} ({} definitional, {} deontic)",
            self.rules, self.definitional_rules, self.deontic_rules
        )?;
        writeln!(f, "superiority pairs: {}", self.superiority_pairs)?;
        writeln!(f, "atoms: {}", self.atoms)?;
        let row = |f: &mut fmt::Formatter<'_>, name: &str, c: &Count| {
            writeln!(f, "  {name:<16}{:>6} ({})", c.distinct, c.total)
        };
        writeln!(f, "head occurrences, distinct (total):")?;
        for (tag, c) in &self.heads {
            row(f, tag, c)?;
        }
        writeln!(f, "body occurrences, distinct (total):")?;
        for (tag, c) in &self.bodies {
            row(f, tag, c)?;
        }
        writeln!(f, "groups, distinct (total):")?;
        for (name, c) in [
            ("obligation", &self.obligations),
            ("punctual", &self.punctual),
            ("achievement", &self.achievement),
            ("preemptive", &self.preemptive),
            ("non-preemptive", &self.non_preemptive),
            ("perdurant", &self.perdurant),
            ("non-perdurant", &self.non_perdurant),
            ("maintenance", &self.maintenance),
            ("prohibition", &self.prohibitions),
            ("permission", &self.permissions),
            ("compensation", &self.compensations),
        ] {
            row(f, name, c)?;
        }
        Ok(())
    }
}
