use std::fmt::Write;

use super::{Head, Rule, RuleSet};

fn write_rule(out: &mut String, r: &Rule) {
    let _ = write!(out, "{}:", r.id);
    for (i, item) in r.body.iter().enumerate() {
        out.push_str(if i == 0 { " " } else { ", " });
        let _ = write!(out, "{item}");
    }
    out.push_str(" => ");
    match &r.head {
        Head::Definitional(l) => {
            let _ = write!(out, "{l}");
        }
        Head::Deontic(chain) => {
            let _ = write!(out, "{chain}");
        }
    }
    if !r.terminates.is_empty() {
        out.push_str(" terminates {");
        for (i, l) in r.terminates.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{l}");
        }
        out.push('}');
    }
    out.push('\n');
}

/// Canonical text form: one rule per line in declaration order, then the
/// superiority pairs. Prohibitions are written as `[OM]~p`.
pub fn serialize_rules(rs: &RuleSet) -> String {
    let mut out = String::new();
    for r in rs.rules() {
        write_rule(&mut out, r);
    }
    for (w, l) in rs.superiority() {
        let _ = writeln!(out, "{w} > {l}");
    }
    out
}
