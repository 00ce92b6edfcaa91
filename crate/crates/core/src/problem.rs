//! Problem files: a line-oriented format with `[section]` headers and
//! `key = "expression"` entries, plus integer templating.
//!
//! ```text
//! [variables]
//! dependent = "u"
//! parameters = "a"
//!
//! [evolution]
//! u = "a*u_xx"
//!
//! [constraints]
//! u_{n} = "0"
//!
//! [symmetries]
//! @for k = 1..{n}: X{k} = { prolong = "u_{k-1}" }
//!
//! [options]
//! n = 4
//! ```
//!
//! Integer options double as template variables: `{n-1}` is replaced by its
//! value and `@for k = A..B: line` repeats `line` for k = A, …, B.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{parse, substitute, Expr, ExprError, Rules, Symbol, SymbolTable};

/// Components of a symmetry field.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldSpec {
    /// Explicit components along chart coordinates.
    Components(Vec<(Symbol, Expr)>),
    /// Evolutionary field with one generator per dependent variable.
    Prolong(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Symmetry {
    pub name: String,
    pub spec: FieldSpec,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProblemOptions {
    pub truncation: Option<u32>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub volume_order: Option<Vec<Symbol>>,
    pub base_point: Vec<(Symbol, Expr)>,
    /// Remaining integer options (template variables).
    pub templates: BTreeMap<String, i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub name: String,
    pub dependents: Vec<String>,
    pub parameters: Vec<String>,
    /// f^i, indexed like `dependents`.
    pub evolution: Vec<Expr>,
    /// (n_i, g^i), indexed like `dependents`.
    pub constraints: Vec<(u32, Expr)>,
    pub symmetries: Vec<Symmetry>,
    pub options: ProblemOptions,
}

const RESERVED_OPTIONS: [&str; 5] = [
    "truncation",
    "samples",
    "seed",
    "volume_order",
    "base_point",
];

struct Line {
    no: usize,
    text: String,
}

fn input_err(file: &str, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Input {
        file: file.to_string(),
        line,
        column,
        message: message.into(),
    }
}

/// Drops a `#` comment that is not inside quotes.
fn strip_comment(s: &str) -> &str {
    let mut quoted = false;
    for (i, c) in s.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &s[..i],
            _ => {}
        }
    }
    s
}

/// Evaluates `{…}` integer arithmetic (+, -, * and variables).
fn eval_int(src: &str, vars: &BTreeMap<String, i64>) -> Option<i64> {
    let cleaned: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    let mut total = 0i64;
    let mut sign = 1i64;
    let mut term: Option<i64> = None;
    let mut cur = String::new();
    let flush = |cur: &mut String, term: &mut Option<i64>| -> Option<()> {
        if cur.is_empty() {
            return None;
        }
        let v = match cur.parse::<i64>() {
            Ok(v) => v,
            Err(_) => *vars.get(cur.as_str())?,
        };
        *term = Some(term.map_or(v, |t| t * v));
        cur.clear();
        Some(())
    };
    for c in cleaned.chars() {
        match c {
            '+' | '-' => {
                flush(&mut cur, &mut term)?;
                total += sign * term.take()?;
                sign = if c == '-' { -1 } else { 1 };
            }
            '*' => flush(&mut cur, &mut term)?,
            c if c.is_ascii_alphanumeric() || c == '_' => cur.push(c),
            _ => return None,
        }
    }
    flush(&mut cur, &mut term)?;
    Some(total + sign * term?)
}

/// Replaces innermost `{…}` groups that are integer arithmetic; other braces
/// (inline maps) are copied through.
fn expand_braces(s: &str, vars: &BTreeMap<String, i64>) -> std::result::Result<String, usize> {
    let mut out = String::new();
    let mut i = 0;
    while i < s.len() {
        let c = s[i..].chars().next().expect("char boundary");
        if c == '{' {
            let rest = &s[i + 1..];
            if let Some(j) = rest.find(['{', '}']) {
                let inner = &rest[..j];
                if rest[j..].starts_with('}') && !inner.contains(['=', '"']) {
                    let v = eval_int(inner, vars).ok_or(i + 1)?;
                    out.push_str(&v.to_string());
                    i += j + 2;
                    continue;
                }
            }
        }
        out.push(c);
        i += c.len_utf8();
    }
    Ok(out)
}

/// Splits `key = value` at the first `=`.
fn split_entry(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    Some((k.trim(), v.trim()))
}

/// Contents of a double-quoted string.
fn unquote(v: &str) -> Option<&str> {
    v.strip_prefix('"')?.strip_suffix('"')
}

/// Parses `{ k = "v", k2 = "v2" }`.
fn inline_map(v: &str) -> Option<Vec<(String, String)>> {
    let body = v.strip_prefix('{')?.strip_suffix('}')?;
    let mut out = Vec::new();
    let mut quoted = false;
    let mut start = 0;
    let mut parts = Vec::new();
    for (i, c) in body.char_indices() {
        match c {
            '"' => quoted = !quoted,
            ',' if !quoted => {
                parts.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&body[start..]);
    for p in parts {
        if p.trim().is_empty() {
            continue;
        }
        let (k, v) = split_entry(p)?;
        out.push((k.to_string(), unquote(v)?.to_string()));
    }
    Some(out)
}

fn names_list(v: &str) -> Vec<String> {
    v.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Template variables, read before expansion.
fn prescan(lines: &[Line]) -> BTreeMap<String, i64> {
    let mut section = String::new();
    let mut vars = BTreeMap::new();
    for l in lines {
        let t = l.text.trim();
        if t.starts_with('[') && t.ends_with(']') {
            section = t[1..t.len() - 1].trim().to_string();
            continue;
        }
        let Some((k, v)) = split_entry(t) else {
            continue;
        };
        if section == "options" && !RESERVED_OPTIONS.contains(&k) {
            if let Ok(n) = v.parse::<i64>() {
                vars.insert(k.to_string(), n);
            }
        }
    }
    vars
}

impl ProblemFile {
    /// Parses problem text. `overrides` set template integers (`n=5`);
    /// use [`ProblemFile::specialize`] for parameter values.
    pub fn parse(name: &str, text: &str, overrides: &[(String, i64)]) -> Result<ProblemFile> {
        let raw: Vec<Line> = text
            .lines()
            .enumerate()
            .map(|(i, l)| Line {
                no: i + 1,
                text: strip_comment(l).trim_end().to_string(),
            })
            .filter(|l| !l.text.trim().is_empty())
            .collect();
        let mut vars = prescan(&raw);
        for (k, v) in overrides {
            if !vars.contains_key(k) {
                return Err(input_err(
                    name,
                    0,
                    0,
                    format!("unknown template variable {k}"),
                ));
            }
            vars.insert(k.clone(), *v);
        }
        let lines = expand(name, &raw, &vars)?;
        parse_sections(name, &lines, vars)
    }

    pub fn table(&self) -> SymbolTable {
        let mut t = SymbolTable::with_dependents(&self.dependents);
        for p in &self.parameters {
            t.add_parameter(p);
        }
        t
    }

    /// Substitutes a value for a parameter everywhere and drops it from the
    /// parameter list.
    pub fn specialize(&self, name: &str, value: &str) -> Result<ProblemFile> {
        if !self.parameters.iter().any(|p| p == name) {
            return Err(input_err(
                &self.name,
                0,
                0,
                format!("unknown parameter {name}"),
            ));
        }
        let mut out = self.clone();
        out.parameters.retain(|p| p != name);
        let value = parse(value, &out.table()).map_err(|e| expr_err(&self.name, 0, 0, e))?;
        let mut rules = Rules::new();
        rules.insert(Symbol::param(name), value);
        let sub = |e: &Expr| substitute(e, &rules);
        out.evolution = out.evolution.iter().map(sub).collect();
        out.constraints = out.constraints.iter().map(|(n, g)| (*n, sub(g))).collect();
        for s in &mut out.symmetries {
            s.spec = match &s.spec {
                FieldSpec::Components(cs) => {
                    FieldSpec::Components(cs.iter().map(|(k, e)| (k.clone(), sub(e))).collect())
                }
                FieldSpec::Prolong(ps) => FieldSpec::Prolong(ps.iter().map(sub).collect()),
            };
        }
        out.options.base_point.retain(|(s, _)| s.name() != name);
        Ok(out)
    }
}

fn expr_err(file: &str, line: usize, col0: usize, e: ExprError) -> Error {
    match e {
        ExprError::Syntax { pos, message } => input_err(file, line, col0 + pos + 1, message),
        ExprError::UnknownIdentifier { pos, name } => input_err(
            file,
            line,
            col0 + pos + 1,
            format!("unknown identifier {name}"),
        ),
        other => Error::Expr(other),
    }
}

fn expand(file: &str, raw: &[Line], vars: &BTreeMap<String, i64>) -> Result<Vec<Line>> {
    let mut out = Vec::new();
    for l in raw {
        let t = l.text.trim();
        if let Some(rest) = t.strip_prefix("@for") {
            let bad = || input_err(file, l.no, 1, "expected `@for k = A..B: line`");
            let (head, body) = rest.split_once(':').ok_or_else(bad)?;
            let (var, range) = split_entry(head).ok_or_else(bad)?;
            let (a, b) = range.split_once("..").ok_or_else(bad)?;
            let a = eval_int(a.trim().trim_start_matches('{').trim_end_matches('}'), vars)
                .ok_or_else(bad)?;
            let b = eval_int(b.trim().trim_start_matches('{').trim_end_matches('}'), vars)
                .ok_or_else(bad)?;
            for k in a..=b {
                let mut local = vars.clone();
                local.insert(var.to_string(), k);
                let text = expand_braces(body.trim(), &local)
                    .map_err(|c| input_err(file, l.no, c, "bad template expression"))?;
                out.push(Line { no: l.no, text });
            }
        } else {
            let text = expand_braces(&l.text, vars)
                .map_err(|c| input_err(file, l.no, c, "bad template expression"))?;
            out.push(Line { no: l.no, text });
        }
    }
    Ok(out)
}

fn parse_sections(
    file: &str,
    lines: &[Line],
    templates: BTreeMap<String, i64>,
) -> Result<ProblemFile> {
    let mut section = String::new();
    let mut dependents: Option<Vec<String>> = None;
    let mut parameters = Vec::new();
    let mut evolution_raw: Vec<(usize, String, String, usize)> = Vec::new();
    let mut constraints_raw: Vec<(usize, String, String, usize)> = Vec::new();
    let mut symmetries_raw: Vec<(usize, String, String)> = Vec::new();
    let mut options = ProblemOptions {
        templates: templates.clone(),
        ..Default::default()
    };
    let mut volume_raw: Option<(usize, String)> = None;
    let mut base_raw: Option<(usize, String)> = None;
    for l in lines {
        let t = l.text.trim();
        if t.starts_with('[') && t.ends_with(']') {
            section = t[1..t.len() - 1].trim().to_string();
            if ![
                "variables",
                "evolution",
                "constraints",
                "symmetries",
                "options",
            ]
            .contains(&section.as_str())
            {
                return Err(input_err(
                    file,
                    l.no,
                    1,
                    format!("unknown section [{section}]"),
                ));
            }
            continue;
        }
        let Some((k, v)) = split_entry(t) else {
            return Err(input_err(file, l.no, 1, "expected `key = value`"));
        };
        // column of the first character inside the quotes
        let col0 = l.text.find(v).map(|i| i + 1).unwrap_or(0);
        let quoted =
            || unquote(v).ok_or_else(|| input_err(file, l.no, col0 + 1, "expected a quoted value"));
        match section.as_str() {
            "variables" => match k {
                "dependent" => dependents = Some(names_list(quoted()?)),
                "parameters" => parameters = names_list(quoted()?),
                "independent" => {
                    let mut ind = names_list(quoted()?);
                    ind.sort();
                    if ind != ["t", "x"] {
                        return Err(input_err(
                            file,
                            l.no,
                            col0 + 1,
                            "independent variables must be x and t",
                        ));
                    }
                }
                _ => {
                    return Err(input_err(
                        file,
                        l.no,
                        1,
                        format!("unknown variables entry {k}"),
                    ))
                }
            },
            "evolution" => evolution_raw.push((l.no, k.to_string(), quoted()?.to_string(), col0)),
            "constraints" => {
                constraints_raw.push((l.no, k.to_string(), quoted()?.to_string(), col0))
            }
            "symmetries" => symmetries_raw.push((l.no, k.to_string(), v.to_string())),
            "options" => match k {
                "truncation" => options.truncation = Some(parse_num(file, l.no, col0, v)?),
                "samples" => options.samples = Some(parse_num(file, l.no, col0, v)?),
                "seed" => options.seed = Some(parse_num(file, l.no, col0, v)?),
                "volume_order" => volume_raw = Some((l.no, quoted()?.to_string())),
                "base_point" => base_raw = Some((l.no, v.to_string())),
                _ => {
                    if !templates.contains_key(k) {
                        return Err(input_err(file, l.no, 1, format!("unknown option {k}")));
                    }
                }
            },
            _ => return Err(input_err(file, l.no, 1, "entry outside of a section")),
        }
    }
    let dependents =
        dependents.ok_or_else(|| input_err(file, 0, 0, "missing [variables] dependent"))?;
    if dependents.is_empty() {
        return Err(input_err(file, 0, 0, "no dependent variables"));
    }
    let mut table = SymbolTable::with_dependents(&dependents);
    for p in &parameters {
        if table.lookup(p).is_some() {
            return Err(input_err(
                file,
                0,
                0,
                format!("parameter {p} clashes with a coordinate"),
            ));
        }
        table.add_parameter(p);
    }
    let px =
        |no: usize, col0: usize, s: &str| parse(s, &table).map_err(|e| expr_err(file, no, col0, e));
    let mut evolution = vec![None; dependents.len()];
    for (no, k, v, col0) in &evolution_raw {
        let Some(i) = dependents.iter().position(|d| d == k) else {
            return Err(input_err(
                file,
                *no,
                1,
                format!("unknown dependent variable {k}"),
            ));
        };
        let f = px(*no, *col0, v)?;
        if f.free_symbols().iter().any(|s| s.name().ends_with("_t")) {
            return Err(input_err(
                file,
                *no,
                *col0,
                "right-hand side uses a t-derivative",
            ));
        }
        evolution[i] = Some(f);
    }
    let evolution: Vec<Expr> = evolution
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            f.ok_or_else(|| {
                input_err(
                    file,
                    0,
                    0,
                    format!("missing evolution for {}", dependents[i]),
                )
            })
        })
        .collect::<Result<_>>()?;
    let mut constraints = vec![None; dependents.len()];
    for (no, k, v, col0) in &constraints_raw {
        let Some((i, n)) = table.lookup(k).and_then(|s| s.jet_index()) else {
            return Err(input_err(
                file,
                *no,
                1,
                format!("{k} is not a jet coordinate"),
            ));
        };
        if n == 0 {
            return Err(input_err(
                file,
                *no,
                1,
                format!("constraint on {k} has order 0"),
            ));
        }
        let g = px(*no, *col0, v)?;
        for s in g.free_symbols() {
            if let Some((j, r)) = s.jet_index() {
                if j == i && r >= n {
                    return Err(input_err(
                        file,
                        *no,
                        *col0,
                        format!("right-hand side uses {s}, of order ≥ {n}"),
                    ));
                }
            }
        }
        constraints[(i - 1) as usize] = Some((n, g));
    }
    let constraints: Vec<(u32, Expr)> = constraints
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| {
                input_err(
                    file,
                    0,
                    0,
                    format!("missing constraint for {}", dependents[i]),
                )
            })
        })
        .collect::<Result<_>>()?;
    let mut symmetries = Vec::new();
    for (no, name, v) in &symmetries_raw {
        let entries = inline_map(v).ok_or_else(|| {
            input_err(file, *no, 1, "expected an inline map `{ key = \"expr\" }`")
        })?;
        let prolong: Vec<&(String, String)> = entries
            .iter()
            .filter(|(k, _)| k.starts_with("prolong"))
            .collect();
        let spec = if !prolong.is_empty() {
            if prolong.len() != entries.len() {
                return Err(input_err(
                    file,
                    *no,
                    1,
                    "prolong cannot be mixed with components",
                ));
            }
            let mut gens = vec![Expr::zero(); dependents.len()];
            for (k, e) in &entries {
                let idx = if k == "prolong" && dependents.len() == 1 {
                    0
                } else {
                    let d = k.strip_prefix("prolong_").unwrap_or("");
                    dependents
                        .iter()
                        .position(|x| x == d)
                        .ok_or_else(|| input_err(file, *no, 1, format!("bad generator key {k}")))?
                };
                gens[idx] = px(*no, 0, e)?;
            }
            FieldSpec::Prolong(gens)
        } else {
            let mut comps = Vec::new();
            for (k, e) in &entries {
                let s = table
                    .lookup(k)
                    .filter(|s| !s.is_constant())
                    .ok_or_else(|| input_err(file, *no, 1, format!("unknown coordinate {k}")))?;
                comps.push((s, px(*no, 0, e)?));
            }
            FieldSpec::Components(comps)
        };
        symmetries.push(Symmetry {
            name: name.clone(),
            spec,
        });
    }
    if let Some((no, v)) = volume_raw {
        let mut order = Vec::new();
        for n in names_list(&v) {
            order.push(
                table
                    .lookup(&n)
                    .ok_or_else(|| input_err(file, no, 1, format!("unknown coordinate {n}")))?,
            );
        }
        options.volume_order = Some(order);
    }
    if let Some((no, v)) = base_raw {
        let entries =
            inline_map(&v).ok_or_else(|| input_err(file, no, 1, "expected an inline map"))?;
        for (k, e) in entries {
            let s = table
                .lookup(&k)
                .ok_or_else(|| input_err(file, no, 1, format!("unknown symbol {k}")))?;
            options.base_point.push((s, px(no, 0, &e)?));
        }
    }
    Ok(ProblemFile {
        name: file.to_string(),
        dependents,
        parameters,
        evolution,
        constraints,
        symmetries,
        options,
    })
}

fn parse_num<T: std::str::FromStr>(file: &str, line: usize, col: usize, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| input_err(file, line, col, format!("expected an integer, found {v}")))
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let table = self.table();
        writeln!(f, "[variables]")?;
        writeln!(f, "dependent = \"{}\"", self.dependents.join(", "))?;
        if !self.parameters.is_empty() {
            writeln!(f, "parameters = \"{}\"", self.parameters.join(", "))?;
        }
        writeln!(f, "\n[evolution]")?;
        for (d, e) in self.dependents.iter().zip(&self.evolution) {
            writeln!(f, "{d} = \"{e}\"")?;
        }
        writeln!(f, "\n[constraints]")?;
        for (i, (n, g)) in self.constraints.iter().enumerate() {
            writeln!(f, "{} = \"{g}\"", table.jet(i as u32 + 1, *n))?;
        }
        writeln!(f, "\n[symmetries]")?;
        for s in &self.symmetries {
            let body: Vec<String> = match &s.spec {
                FieldSpec::Components(cs) => {
                    cs.iter().map(|(k, e)| format!("{k} = \"{e}\"")).collect()
                }
                FieldSpec::Prolong(ps) if ps.len() == 1 => vec![format!("prolong = \"{}\"", ps[0])],
                FieldSpec::Prolong(ps) => self
                    .dependents
                    .iter()
                    .zip(ps)
                    .map(|(d, e)| format!("prolong_{d} = \"{e}\""))
                    .collect(),
            };
            writeln!(f, "{} = {{ {} }}", s.name, body.join(", "))?;
        }
        writeln!(f, "\n[options]")?;
        if let Some(k) = self.options.truncation {
            writeln!(f, "truncation = {k}")?;
        }
        if let Some(n) = self.options.samples {
            writeln!(f, "samples = {n}")?;
        }
        if let Some(s) = self.options.seed {
            writeln!(f, "seed = {s}")?;
        }
        if let Some(v) = &self.options.volume_order {
            let names: Vec<String> = v.iter().map(|s| s.to_string()).collect();
            writeln!(f, "volume_order = \"{}\"", names.join(", "))?;
        }
        if !self.options.base_point.is_empty() {
            let body: Vec<String> = self
                .options
                .base_point
                .iter()
                .map(|(k, e)| format!("{k} = \"{e}\""))
                .collect();
            writeln!(f, "base_point = {{ {} }}", body.join(", "))?;
        }
        for (k, v) in &self.options.templates {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Problems shipped with the crate.
pub mod bundled {
    pub const BURGERS: &str = include_str!("../problems/burgers.prob");
    pub const HEAT_N: &str = include_str!("../problems/heat_n.prob");
    pub const MODHEAT: &str = include_str!("../problems/modheat.prob");
    pub const SYSTEM: &str = include_str!("../problems/system.prob");

    pub const NAMES: [&str; 4] = ["burgers.prob", "heat_n.prob", "modheat.prob", "system.prob"];

    /// Text of a bundled problem by file name (with or without `.prob`).
    pub fn get(name: &str) -> Option<&'static str> {
        match name.trim_end_matches(".prob") {
            "burgers" => Some(BURGERS),
            "heat_n" | "heat" => Some(HEAT_N),
            "modheat" => Some(MODHEAT),
            "system" => Some(SYSTEM),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_expand() {
        let vars: BTreeMap<String, i64> = [("n".to_string(), 4)].into_iter().collect();
        assert_eq!(eval_int("n-1", &vars), Some(3));
        assert_eq!(eval_int("2*n+1", &vars), Some(9));
        assert_eq!(
            expand_braces("u_{n-1} = { x = \"1\" }", &vars).unwrap(),
            "u_3 = { x = \"1\" }"
        );
        assert_eq!(
            expand_braces("X{n} = { p = \"u_{n-1}\" }", &vars).unwrap(),
            "X4 = { p = \"u_3\" }"
        );
    }

    #[test]
    fn bundled_problems_load() {
        for name in bundled::NAMES {
            let p = ProblemFile::parse(name, bundled::get(name).unwrap(), &[]).unwrap();
            let again = ProblemFile::parse(name, &p.to_string(), &[]).unwrap();
            assert_eq!(p, again, "{name} round trip");
        }
        let heat = ProblemFile::parse("heat_n.prob", bundled::HEAT_N, &[("n".into(), 6)]).unwrap();
        assert_eq!(heat.symmetries.len(), 6);
        assert_eq!(heat.constraints[0].0, 6);
    }

    #[test]
    fn rejects_high_order_constraint() {
        let text = "[variables]\ndependent = \"u\"\n[evolution]\nu = \"u_xx\"\n[constraints]\nu_xx = \"u_xxx\"\n";
        let err = ProblemFile::parse("bad.prob", text, &[]).unwrap_err();
        assert!(matches!(err, Error::Input { line: 6, .. }), "{err}");
    }

    #[test]
    fn syntax_errors_carry_columns() {
        let text = "[variables]\ndependent = \"u\"\n[evolution]\nu = \"u_xx + * u\"\n";
        match ProblemFile::parse("bad.prob", text, &[]).unwrap_err() {
            Error::Input { line, column, .. } => {
                assert_eq!(line, 4);
                assert_eq!(column, 13);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn specialization_substitutes() {
        let p = ProblemFile::parse("modheat.prob", bundled::MODHEAT, &[]).unwrap();
        let q = p.specialize("b", "0").unwrap();
        assert!(!q.parameters.contains(&"b".to_string()));
        assert!(!q.evolution[0]
            .free_symbols()
            .iter()
            .any(|s| s.name() == "b"));
    }
}
