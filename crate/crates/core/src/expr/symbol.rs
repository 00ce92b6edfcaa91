use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Role of a symbol in a problem.
///
/// The derived ordering is the ordering of chart coordinates: `t`, `x`, then
/// jet coordinates grouped by dependent variable and sorted by x-order, then
/// parameters and level constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    IndependentT,
    IndependentX,
    /// `dep` is 1-based, `order` is the number of x-derivatives.
    Jet {
        dep: u32,
        order: u32,
    },
    Parameter,
    LevelConstant,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    kind: SymbolKind,
    name: Arc<str>,
}

impl Symbol {
    pub fn new(kind: SymbolKind, name: &str) -> Self {
        Symbol {
            kind,
            name: Arc::from(name),
        }
    }

    pub fn x() -> Self {
        Symbol::new(SymbolKind::IndependentX, "x")
    }

    pub fn t() -> Self {
        Symbol::new(SymbolKind::IndependentT, "t")
    }

    pub fn param(name: &str) -> Self {
        Symbol::new(SymbolKind::Parameter, name)
    }

    pub fn level(name: &str) -> Self {
        Symbol::new(SymbolKind::LevelConstant, name)
    }

    /// Jet coordinate `u^dep_order` displayed with the surface alias of
    /// `dep_name` (`u`, `u_x`, `u_xx`, `u_xxx`, `u_4`, ...).
    pub fn jet(dep: u32, order: u32, dep_name: &str) -> Self {
        assert!(dep >= 1, "dependent indices are 1-based");
        Symbol::new(SymbolKind::Jet { dep, order }, &jet_alias(dep_name, order))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn is_jet(&self) -> bool {
        matches!(self.kind, SymbolKind::Jet { .. })
    }

    pub fn jet_index(&self) -> Option<(u32, u32)> {
        match self.kind {
            SymbolKind::Jet { dep, order } => Some((dep, order)),
            _ => None,
        }
    }

    /// True for symbols that never vary along the problem's chart.
    pub fn is_constant(&self) -> bool {
        matches!(self.kind, SymbolKind::Parameter | SymbolKind::LevelConstant)
    }

    /// Canonical jet name `u<i>_<r>`; the plain name for other symbols.
    pub fn canonical_name(&self) -> String {
        match self.kind {
            SymbolKind::Jet { dep, order } => format!("u{dep}_{order}"),
            _ => self.name.to_string(),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

pub fn jet_alias(dep_name: &str, order: u32) -> String {
    match order {
        0 => dep_name.to_string(),
        1..=3 => format!("{}_{}", dep_name, "x".repeat(order as usize)),
        _ => format!("{dep_name}_{order}"),
    }
}

/// Name resolution for the expression parser.
///
/// Jet coordinates are resolved on the fly from the dependent-variable names,
/// so every order is addressable: `u`, `u_x`, `u_xx`, `u_3`, `u1_3` all work.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    deps: Vec<String>,
    names: BTreeMap<String, Symbol>,
}

impl SymbolTable {
    pub fn new() -> Self {
        let mut table = SymbolTable::default();
        table.insert(Symbol::x());
        table.insert(Symbol::t());
        table
    }

    /// Table with `x`, `t` and the given dependent variables (1-based in order).
    pub fn with_dependents<S: AsRef<str>>(deps: &[S]) -> Self {
        let mut table = SymbolTable::new();
        for d in deps {
            table.add_dependent(d.as_ref());
        }
        table
    }

    pub fn add_dependent(&mut self, name: &str) -> u32 {
        self.deps.push(name.to_string());
        self.deps.len() as u32
    }

    pub fn insert(&mut self, sym: Symbol) {
        self.names.insert(sym.name().to_string(), sym);
    }

    pub fn add_parameter(&mut self, name: &str) -> Symbol {
        let s = Symbol::param(name);
        self.insert(s.clone());
        s
    }

    pub fn dependents(&self) -> &[String] {
        &self.deps
    }

    pub fn dependent_name(&self, dep: u32) -> &str {
        &self.deps[(dep - 1) as usize]
    }

    pub fn jet(&self, dep: u32, order: u32) -> Symbol {
        Symbol::jet(dep, order, self.dependent_name(dep))
    }

    pub fn parameters(&self) -> impl Iterator<Item = &Symbol> {
        self.names.values().filter(|s| s.is_constant())
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        if let Some(s) = self.names.get(name) {
            return Some(s.clone());
        }
        self.resolve_jet(name)
    }

    fn resolve_jet(&self, name: &str) -> Option<Symbol> {
        for (i, dep) in self.deps.iter().enumerate() {
            let dep_idx = i as u32 + 1;
            if name == dep {
                return Some(self.jet(dep_idx, 0));
            }
            if let Some(rest) = name
                .strip_prefix(dep.as_str())
                .and_then(|r| r.strip_prefix('_'))
            {
                if !rest.is_empty() && rest.chars().all(|c| c == 'x') {
                    return Some(self.jet(dep_idx, rest.len() as u32));
                }
                if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
                    return rest.parse().ok().map(|r| self.jet(dep_idx, r));
                }
            }
        }
        // canonical u<i>_<r>
        let rest = name.strip_prefix('u')?;
        let (i, r) = rest.split_once('_')?;
        let i: u32 = i.parse().ok()?;
        let r: u32 = r.parse().ok()?;
        if i >= 1 && (i as usize) <= self.deps.len() {
            Some(self.jet(i, r))
        } else {
            None
        }
    }
}
