use std::collections::{BTreeMap, BTreeSet};

use super::node::{Expr, Node};
use super::symbol::Symbol;
use super::ExprError;

/// Substitution rules `symbol -> replacement`.
pub type Rules = BTreeMap<Symbol, Expr>;

/// One simultaneous pass: every occurrence of a rule symbol is replaced once.
pub fn substitute(e: &Expr, rules: &Rules) -> Expr {
    if rules.is_empty() {
        return e.clone();
    }
    match e.node() {
        Node::Num(_) => e.clone(),
        Node::Sym(s) => rules.get(s).cloned().unwrap_or_else(|| e.clone()),
        _ => e.map_children(|c| substitute(c, rules)),
    }
}

/// Substitutes until no rule symbol remains. Fails if the rules reference each
/// other cyclically.
pub fn substitute_fixpoint(e: &Expr, rules: &Rules) -> Result<Expr, ExprError> {
    check_acyclic(rules)?;
    let keys: Vec<Symbol> = rules.keys().cloned().collect();
    let mut cur = e.clone();
    // acyclic rules resolve within `rules.len()` passes
    for _ in 0..=rules.len() {
        if !cur.contains_any(&keys) {
            return Ok(cur);
        }
        cur = substitute(&cur, rules);
    }
    Ok(cur)
}

fn check_acyclic(rules: &Rules) -> Result<(), ExprError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit(
        s: &Symbol,
        rules: &Rules,
        marks: &mut BTreeMap<Symbol, Mark>,
        path: &mut Vec<Symbol>,
    ) -> Result<(), ExprError> {
        match marks.get(s) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Open) => {
                let start = path.iter().position(|p| p == s).unwrap_or(0);
                let mut chain: Vec<String> =
                    path[start..].iter().map(|p| p.name().to_string()).collect();
                chain.push(s.name().to_string());
                return Err(ExprError::CyclicSubstitution {
                    chain: chain.join(" -> "),
                });
            }
            None => {}
        }
        let Some(rhs) = rules.get(s) else {
            return Ok(());
        };
        marks.insert(s.clone(), Mark::Open);
        path.push(s.clone());
        let deps: BTreeSet<Symbol> = rhs.free_symbols();
        for d in deps.iter().filter(|d| rules.contains_key(*d)) {
            visit(d, rules, marks, path)?;
        }
        path.pop();
        marks.insert(s.clone(), Mark::Done);
        Ok(())
    }
    let mut marks = BTreeMap::new();
    for s in rules.keys() {
        visit(s, rules, &mut marks, &mut Vec::new())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, SymbolTable};

    #[test]
    fn chained_rules_resolve() {
        let t = SymbolTable::with_dependents(&["u"]);
        let p = |s: &str| parse(s, &t).unwrap();
        let mut rules = Rules::new();
        rules.insert(t.jet(1, 3), p("-2*u_x*u_xx"));
        rules.insert(t.jet(1, 2), p("x + u"));
        let e = substitute_fixpoint(&p("u_xxx + u_xx"), &rules).unwrap();
        assert_eq!(e, p("-2*u_x*(x + u) + x + u"));
    }

    #[test]
    fn cycles_are_reported() {
        let t = SymbolTable::with_dependents(&["u"]);
        let p = |s: &str| parse(s, &t).unwrap();
        let mut rules = Rules::new();
        rules.insert(t.jet(1, 1), p("u_xx + 1"));
        rules.insert(t.jet(1, 2), p("u_x^2"));
        let err = substitute_fixpoint(&p("u_x"), &rules).unwrap_err();
        assert!(matches!(err, ExprError::CyclicSubstitution { .. }));
        let mut self_ref = Rules::new();
        self_ref.insert(t.jet(1, 0), p("u + 1"));
        assert!(substitute_fixpoint(&p("u"), &self_ref).is_err());
    }
}
