//! Formulas of the full propositional team language, their concrete syntax,
//! fragment membership, and occurrence addressing.
//!
//! Concrete syntax (ASCII; a few Unicode aliases are accepted on input):
//!
//! ```text
//! atom    := pN | -pN | BOT | TOP | NE
//!          | =(pA pB, pC)            dependence
//!          | ind(pA pB ; pC)         independence
//!          | cind(pA ; pB ; pC)      conditional independence
//!          | inc(pA ; pB)            inclusion
//!          | eneg(a) | edep(a, b ; c) | eind(a ; b) | ecind(a ; b ; c) | einc(a ; b)
//! prefix  := ~ prefix | M( formula ) | ( formula ) | atom
//! formula := prefix, then binary operators by increasing binding strength:
//!            -o  <  v  <  %  <  |  <  &      (all left associative)
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type F = Arc<Formula>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(usize),
    NegVar(usize),
    Bot,
    Top,
    Ne,
    Dep(Vec<usize>, usize),
    Indep(Vec<usize>, Vec<usize>),
    CondIndep(Vec<usize>, Vec<usize>, Vec<usize>),
    Incl(Vec<usize>, Vec<usize>),
    ExtNeg(F),
    ExtDep(Vec<Formula>, F),
    ExtIndep(Vec<Formula>, Vec<Formula>),
    ExtCondIndep(Vec<Formula>, Vec<Formula>, Vec<Formula>),
    ExtIncl(Vec<Formula>, Vec<Formula>),
    And(F, F),
    Tensor(F, F),
    NeOr(F, F),
    BoolOr(F, F),
    LinImp(F, F),
    Might(F),
    BoolNeg(F),
}

use Formula::*;

impl Formula {
    pub fn var(i: usize) -> Formula {
        Var(i)
    }
    pub fn neg_var(i: usize) -> Formula {
        NegVar(i)
    }
    /// `p_i` when `value` is true, `¬p_i` otherwise.
    pub fn literal(i: usize, value: bool) -> Formula {
        if value {
            Var(i)
        } else {
            NegVar(i)
        }
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        And(Arc::new(a), Arc::new(b))
    }
    pub fn tensor(a: Formula, b: Formula) -> Formula {
        Tensor(Arc::new(a), Arc::new(b))
    }
    pub fn ne_or(a: Formula, b: Formula) -> Formula {
        NeOr(Arc::new(a), Arc::new(b))
    }
    pub fn bor(a: Formula, b: Formula) -> Formula {
        BoolOr(Arc::new(a), Arc::new(b))
    }
    pub fn lin_imp(a: Formula, b: Formula) -> Formula {
        LinImp(Arc::new(a), Arc::new(b))
    }
    pub fn might(a: Formula) -> Formula {
        Might(Arc::new(a))
    }
    pub fn bool_neg(a: Formula) -> Formula {
        BoolNeg(Arc::new(a))
    }
    pub fn ext_neg(a: Formula) -> Formula {
        ExtNeg(Arc::new(a))
    }
    /// `⊥ ∧ NE`, the strong contradiction.
    pub fn falsum() -> Formula {
        Formula::and(Bot, Ne)
    }

    /// Left fold with `∧`; the empty conjunction is `⊤`.
    pub fn big_and(items: impl IntoIterator<Item = Formula>) -> Formula {
        fold(items, Formula::and).unwrap_or(Top)
    }
    /// Left fold with `⊗`; the empty tensor is `⊥`.
    pub fn big_tensor(items: impl IntoIterator<Item = Formula>) -> Formula {
        fold(items, Formula::tensor).unwrap_or(Bot)
    }
    /// Left fold with `⊛`; the empty fold is `⊥`.
    pub fn big_ne_or(items: impl IntoIterator<Item = Formula>) -> Formula {
        fold(items, Formula::ne_or).unwrap_or(Bot)
    }
    /// Left fold with `∨`; the empty disjunction is `⊥ ∧ NE`.
    pub fn big_or(items: impl IntoIterator<Item = Formula>) -> Formula {
        fold(items, Formula::bor).unwrap_or_else(Formula::falsum)
    }

    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            And(..) | Tensor(..) | NeOr(..) | BoolOr(..) | LinImp(..)
        )
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            And(a, b) | Tensor(a, b) | NeOr(a, b) | BoolOr(a, b) | LinImp(a, b) => vec![a, b],
            Might(a) | BoolNeg(a) | ExtNeg(a) => vec![a],
            _ => vec![],
        }
    }

    /// Syntactic membership in the classical grammar: literals, `⊥`, `⊤`, `∧`, `⊗`.
    pub fn is_classical(&self) -> bool {
        match self {
            Var(_) | NegVar(_) | Bot | Top => true,
            And(a, b) | Tensor(a, b) => a.is_classical() && b.is_classical(),
            _ => false,
        }
    }

    /// Classical in the extended language, where `¬` may apply to classical formulas.
    pub fn is_ext_classical(&self) -> bool {
        match self {
            Var(_) | NegVar(_) | Bot | Top => true,
            ExtNeg(a) => a.is_ext_classical(),
            And(a, b) | Tensor(a, b) => a.is_ext_classical() && b.is_ext_classical(),
            _ => false,
        }
    }

    pub fn contains_ne(&self) -> bool {
        match self {
            Ne => true,
            _ => self.children().iter().any(|c| c.contains_ne()),
        }
    }

    pub fn contains_lin_imp(&self) -> bool {
        match self {
            LinImp(..) => true,
            _ => self.children().iter().any(|c| c.contains_lin_imp()),
        }
    }

    pub fn contains_top(&self) -> bool {
        match self {
            Top => true,
            ExtDep(a, b) => a.iter().any(|f| f.contains_top()) || b.contains_top(),
            ExtIndep(a, b) | ExtIncl(a, b) => a.iter().chain(b).any(|f| f.contains_top()),
            ExtCondIndep(a, b, c) => a.iter().chain(b).chain(c).any(|f| f.contains_top()),
            _ => self.children().iter().any(|c| c.contains_top()),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }
}

fn fold(items: impl IntoIterator<Item = Formula>, op: fn(Formula, Formula) -> Formula) -> Option<Formula> {
    let mut it = items.into_iter();
    let first = it.next()?;
    Some(it.fold(first, op))
}

/// Every variable index occurring anywhere in `f`, atom arguments included.
pub fn variables(f: &Formula) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    collect_vars(f, &mut out);
    out
}

fn collect_vars(f: &Formula, out: &mut BTreeSet<usize>) {
    match f {
        Var(i) | NegVar(i) => {
            out.insert(*i);
        }
        Bot | Top | Ne => {}
        Dep(xs, y) => {
            out.extend(xs.iter().copied());
            out.insert(*y);
        }
        Indep(xs, ys) | Incl(xs, ys) => out.extend(xs.iter().chain(ys).copied()),
        CondIndep(zs, xs, ys) => out.extend(zs.iter().chain(xs).chain(ys).copied()),
        ExtDep(xs, y) => {
            xs.iter().for_each(|g| collect_vars(g, out));
            collect_vars(y, out);
        }
        ExtIndep(xs, ys) | ExtIncl(xs, ys) => xs.iter().chain(ys).for_each(|g| collect_vars(g, out)),
        ExtCondIndep(zs, xs, ys) => zs.iter().chain(xs).chain(ys).for_each(|g| collect_vars(g, out)),
        _ => f.children().into_iter().for_each(|c| collect_vars(c, out)),
    }
}

/// The De Morgan dual of a classical formula, in negation normal form.
pub fn negate_classical(f: &Formula) -> Result<Formula> {
    Ok(match f {
        Var(i) => NegVar(*i),
        NegVar(i) => Var(*i),
        Top => Bot,
        Bot => Top,
        ExtNeg(a) if a.is_ext_classical() => (**a).clone(),
        And(a, b) => Formula::tensor(negate_classical(a)?, negate_classical(b)?),
        Tensor(a, b) => Formula::and(negate_classical(a)?, negate_classical(b)?),
        _ => return Err(Error::NotClassical(f.to_string())),
    })
}

// ---------------------------------------------------------------------------
// Fragments

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fragment {
    Cpl,
    CplPlus,
    Pi,
    PiPlus,
    Pt,
    PtPlus,
    Pu,
    PuPlus,
    PInc,
    PIncPlus,
    Pd,
    PdPlus,
    Fpt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomKind {
    Literal,
    Bot,
    Ne,
    Indep,
    Dep,
    Incl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Connective {
    And,
    Tensor,
    NeOr,
    BoolOr,
    LinImp,
}

impl Fragment {
    pub const ALL: [Fragment; 13] = [
        Fragment::Cpl,
        Fragment::CplPlus,
        Fragment::Pi,
        Fragment::PiPlus,
        Fragment::Pt,
        Fragment::PtPlus,
        Fragment::Pu,
        Fragment::PuPlus,
        Fragment::PInc,
        Fragment::PIncPlus,
        Fragment::Pd,
        Fragment::PdPlus,
        Fragment::Fpt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fragment::Cpl => "CPL",
            Fragment::CplPlus => "CPL+",
            Fragment::Pi => "PI",
            Fragment::PiPlus => "PI+",
            Fragment::Pt => "PT",
            Fragment::PtPlus => "PT+",
            Fragment::Pu => "PU",
            Fragment::PuPlus => "PU+",
            Fragment::PInc => "PInc",
            Fragment::PIncPlus => "PInc+",
            Fragment::Pd => "PD",
            Fragment::PdPlus => "PD+",
            Fragment::Fpt => "FPT",
        }
    }

    pub fn from_name(s: &str) -> Option<Fragment> {
        let norm = s.trim().replace('⁺', "+").to_ascii_lowercase();
        let norm = norm.strip_suffix("plus").map(|b| format!("{b}+")).unwrap_or(norm);
        Fragment::ALL
            .into_iter()
            .find(|f| f.name().to_ascii_lowercase() == norm)
    }

    /// Atom inventory. `⊤` is admitted everywhere as a classical constant.
    pub fn atoms(self) -> &'static [AtomKind] {
        use AtomKind as A;
        match self {
            Fragment::Cpl | Fragment::Pt | Fragment::Pu => &[A::Literal, A::Bot],
            Fragment::CplPlus | Fragment::PtPlus | Fragment::PuPlus => &[A::Literal, A::Bot, A::Ne],
            Fragment::Pi => &[A::Literal, A::Bot, A::Indep],
            Fragment::PiPlus => &[A::Literal, A::Bot, A::Ne, A::Indep],
            Fragment::PInc => &[A::Literal, A::Bot, A::Incl],
            Fragment::PIncPlus => &[A::Literal, A::Bot, A::Ne, A::Incl],
            Fragment::Pd | Fragment::PdPlus => &[A::Literal, A::Bot, A::Dep],
            Fragment::Fpt => &[A::Literal, A::Bot, A::Ne, A::Indep, A::Dep, A::Incl],
        }
    }

    pub fn connectives(self) -> &'static [Connective] {
        use Connective as C;
        match self {
            Fragment::Cpl
            | Fragment::CplPlus
            | Fragment::Pi
            | Fragment::PiPlus
            | Fragment::PInc
            | Fragment::PIncPlus => &[C::And, C::Tensor],
            Fragment::Pt => &[C::And, C::NeOr, C::BoolOr],
            Fragment::PtPlus | Fragment::Pd => &[C::And, C::Tensor, C::BoolOr],
            Fragment::Pu | Fragment::PuPlus => &[C::And, C::Tensor, C::NeOr],
            Fragment::PdPlus => &[C::And, C::Tensor, C::BoolOr, C::LinImp],
            Fragment::Fpt => &[C::And, C::Tensor, C::NeOr, C::BoolOr],
        }
    }

    /// Language inclusion: every atom and connective of `self` is available in `other`.
    pub fn sublanguage_of(self, other: Fragment) -> bool {
        self.atoms().iter().all(|a| other.atoms().contains(a))
            && self.connectives().iter().all(|c| other.connectives().contains(c))
    }

    pub fn admits(self, f: &Formula) -> bool {
        let (atoms, conns, foreign) = inventory(f);
        !foreign
            && atoms.iter().all(|a| self.atoms().contains(a))
            && conns.iter().all(|c| self.connectives().contains(c))
    }

    pub fn has_ne(self) -> bool {
        self.atoms().contains(&AtomKind::Ne)
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Atoms and connectives used by `f`; the flag is set when `f` uses material
/// outside every fragment (`▽`, `∼`, conditional independence, extended atoms).
fn inventory(f: &Formula) -> (BTreeSet<AtomKind>, BTreeSet<Connective>, bool) {
    fn go(f: &Formula, a: &mut BTreeSet<AtomKind>, c: &mut BTreeSet<Connective>, foreign: &mut bool) {
        match f {
            Var(_) | NegVar(_) => {
                a.insert(AtomKind::Literal);
            }
            Bot => {
                a.insert(AtomKind::Bot);
            }
            Top => {}
            Ne => {
                a.insert(AtomKind::Ne);
            }
            Dep(..) => {
                a.insert(AtomKind::Dep);
            }
            Indep(..) => {
                a.insert(AtomKind::Indep);
            }
            Incl(..) => {
                a.insert(AtomKind::Incl);
            }
            CondIndep(..) | ExtNeg(_) | ExtDep(..) | ExtIndep(..) | ExtCondIndep(..) | ExtIncl(..) | Might(_)
            | BoolNeg(_) => *foreign = true,
            And(x, y) | Tensor(x, y) | NeOr(x, y) | BoolOr(x, y) | LinImp(x, y) => {
                c.insert(match f {
                    And(..) => Connective::And,
                    Tensor(..) => Connective::Tensor,
                    NeOr(..) => Connective::NeOr,
                    BoolOr(..) => Connective::BoolOr,
                    _ => Connective::LinImp,
                });
                go(x, a, c, foreign);
                go(y, a, c, foreign);
            }
        }
    }
    let (mut a, mut c, mut foreign) = (BTreeSet::new(), BTreeSet::new(), false);
    go(f, &mut a, &mut c, &mut foreign);
    (a, c, foreign)
}

/// Every fragment whose atom and connective inventory covers `f`.
pub fn classify(f: &Formula) -> BTreeSet<Fragment> {
    Fragment::ALL.into_iter().filter(|fr| fr.admits(f)).collect()
}

// ---------------------------------------------------------------------------
// Occurrence paths

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Left,
    Right,
    Body,
}

impl Step {
    pub fn code(self) -> &'static str {
        match self {
            Step::Left => "L",
            Step::Right => "R",
            Step::Body => "B",
        }
    }
    pub fn from_code(s: &str) -> Option<Step> {
        match s {
            "L" | "l" | "left" => Some(Step::Left),
            "R" | "r" | "right" => Some(Step::Right),
            "B" | "b" | "body" => Some(Step::Body),
            _ => None,
        }
    }
}

pub type Path = Vec<Step>;

fn child(f: &Formula, s: Step) -> Option<&F> {
    match (f, s) {
        (And(a, _) | Tensor(a, _) | NeOr(a, _) | BoolOr(a, _) | LinImp(a, _), Step::Left) => Some(a),
        (And(_, b) | Tensor(_, b) | NeOr(_, b) | BoolOr(_, b) | LinImp(_, b), Step::Right) => Some(b),
        (Might(a) | BoolNeg(a) | ExtNeg(a), Step::Body) => Some(a),
        _ => None,
    }
}

pub fn subformula_at<'a>(f: &'a Formula, path: &[Step]) -> Result<&'a Formula> {
    let mut cur = f;
    for (k, s) in path.iter().enumerate() {
        cur = child(cur, *s).ok_or_else(|| {
            Error::InvalidPath(format!("step {} ({}) does not address a child", k + 1, s.code()))
        })?;
    }
    Ok(cur)
}

/// Replaces exactly the occurrence addressed by `path`.
pub fn replace_at(f: &Formula, path: &[Step], g: Formula) -> Result<Formula> {
    let Some((s, rest)) = path.split_first() else {
        return Ok(g);
    };
    let sub = child(f, *s)
        .ok_or_else(|| Error::InvalidPath(format!("step {} does not address a child", s.code())))?;
    let new = Arc::new(replace_at(sub, rest, g)?);
    Ok(match (f, s) {
        (And(_, b), Step::Left) => And(new, b.clone()),
        (And(a, _), Step::Right) => And(a.clone(), new),
        (Tensor(_, b), Step::Left) => Tensor(new, b.clone()),
        (Tensor(a, _), Step::Right) => Tensor(a.clone(), new),
        (NeOr(_, b), Step::Left) => NeOr(new, b.clone()),
        (NeOr(a, _), Step::Right) => NeOr(a.clone(), new),
        (BoolOr(_, b), Step::Left) => BoolOr(new, b.clone()),
        (BoolOr(a, _), Step::Right) => BoolOr(a.clone(), new),
        (LinImp(_, b), Step::Left) => LinImp(new, b.clone()),
        (LinImp(a, _), Step::Right) => LinImp(a.clone(), new),
        (Might(_), Step::Body) => Might(new),
        (BoolNeg(_), Step::Body) => BoolNeg(new),
        (ExtNeg(_), Step::Body) => ExtNeg(new),
        _ => unreachable!("child() accepted the step"),
    })
}

/// All occurrence paths of `f`, in left-to-right (pre-order) order.
pub fn all_paths(f: &Formula) -> Vec<Path> {
    fn go(f: &Formula, cur: &mut Path, out: &mut Vec<Path>) {
        out.push(cur.clone());
        for s in [Step::Left, Step::Right, Step::Body] {
            if let Some(c) = child(f, s) {
                cur.push(s);
                go(c, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

/// Number of symbols in the canonical printing of `f`; `root` controls the
/// enclosing parentheses of a binary node.
pub fn symbol_count(f: &Formula, root: bool) -> usize {
    let list = |xs: &[Formula]| -> usize {
        xs.iter().map(|x| symbol_count(x, true)).sum::<usize>() + xs.len().saturating_sub(1)
    };
    match f {
        Var(_) | Bot | Top | Ne => 1,
        NegVar(_) => 2,
        Dep(xs, _) => xs.len() + 5,
        Indep(xs, ys) | Incl(xs, ys) => xs.len() + ys.len() + 4,
        CondIndep(zs, xs, ys) => zs.len() + xs.len() + ys.len() + 5,
        ExtNeg(a) => symbol_count(a, true) + 3,
        ExtDep(xs, y) => list(xs) + symbol_count(y, true) + 4,
        ExtIndep(xs, ys) | ExtIncl(xs, ys) => list(xs) + list(ys) + 4,
        ExtCondIndep(zs, xs, ys) => list(zs) + list(xs) + list(ys) + 5,
        Might(a) => symbol_count(a, true) + 3,
        BoolNeg(a) => symbol_count(a, false) + 1,
        And(a, b) | Tensor(a, b) | NeOr(a, b) | BoolOr(a, b) | LinImp(a, b) => {
            symbol_count(a, false) + symbol_count(b, false) + if root { 1 } else { 3 }
        }
    }
}

/// 1-based symbol position at which the addressed occurrence starts in the
/// canonical printing. `-pN` counts as two symbols and parentheses count.
pub fn token_position(f: &Formula, path: &[Step]) -> Result<usize> {
    let mut pos = 1;
    let mut cur = f;
    let mut root = true;
    for s in path {
        let next = child(cur, *s).ok_or_else(|| Error::InvalidPath(format!("bad step {}", s.code())))?;
        let open = if cur.is_binary() && !root { 1 } else { 0 };
        pos += match (cur, s) {
            (_, Step::Left) => open,
            (And(a, _) | Tensor(a, _) | NeOr(a, _) | BoolOr(a, _) | LinImp(a, _), Step::Right) => {
                open + symbol_count(a, false) + 1
            }
            (BoolNeg(_), Step::Body) => 1,
            (Might(_) | ExtNeg(_), Step::Body) => 2,
            _ => unreachable!(),
        };
        root = matches!(cur, Might(_) | ExtNeg(_));
        cur = next;
    }
    Ok(pos)
}

/// Inverse of [`token_position`]: the path of the occurrence starting at symbol
/// `m`. When several nested occurrences start at `m` the outermost is returned.
pub fn path_at_position(f: &Formula, m: usize) -> Result<Path> {
    all_paths(f)
        .into_iter()
        .find(|p| token_position(f, p).ok() == Some(m))
        .ok_or_else(|| Error::InvalidPath(format!("no subformula starts at symbol {m}")))
}

pub fn path_to_string(path: &[Step]) -> String {
    path.iter().map(|s| s.code()).collect::<Vec<_>>().join(".")
}

// ---------------------------------------------------------------------------
// Printing

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(self, true, &mut s);
        f.write_str(&s)
    }
}

fn op_text(f: &Formula) -> &'static str {
    match f {
        And(..) => "&",
        Tensor(..) => "|",
        NeOr(..) => "%",
        BoolOr(..) => "v",
        LinImp(..) => "-o",
        _ => unreachable!(),
    }
}

fn vars_text(xs: &[usize]) -> String {
    xs.iter().map(|i| format!("p{i}")).collect::<Vec<_>>().join(" ")
}

fn list_text(xs: &[Formula]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn write_formula(f: &Formula, root: bool, out: &mut String) {
    match f {
        Var(i) => out.push_str(&format!("p{i}")),
        NegVar(i) => out.push_str(&format!("-p{i}")),
        Bot => out.push_str("BOT"),
        Top => out.push_str("TOP"),
        Ne => out.push_str("NE"),
        Dep(xs, y) => out.push_str(&format!("=({}, p{y})", vars_text(xs))),
        Indep(xs, ys) => out.push_str(&format!("ind({} ; {})", vars_text(xs), vars_text(ys))),
        CondIndep(zs, xs, ys) => {
            out.push_str(&format!("cind({} ; {} ; {})", vars_text(zs), vars_text(xs), vars_text(ys)))
        }
        Incl(xs, ys) => out.push_str(&format!("inc({} ; {})", vars_text(xs), vars_text(ys))),
        ExtNeg(a) => out.push_str(&format!("eneg({a})")),
        ExtDep(xs, y) => out.push_str(&format!("edep({} ; {y})", list_text(xs))),
        ExtIndep(xs, ys) => out.push_str(&format!("eind({} ; {})", list_text(xs), list_text(ys))),
        ExtCondIndep(zs, xs, ys) => out.push_str(&format!(
            "ecind({} ; {} ; {})",
            list_text(zs),
            list_text(xs),
            list_text(ys)
        )),
        ExtIncl(xs, ys) => out.push_str(&format!("einc({} ; {})", list_text(xs), list_text(ys))),
        Might(a) => out.push_str(&format!("M({a})")),
        BoolNeg(a) => {
            out.push('~');
            write_formula(a, false, out);
        }
        And(a, b) | Tensor(a, b) | NeOr(a, b) | BoolOr(a, b) | LinImp(a, b) => {
            if !root {
                out.push('(');
            }
            write_formula(a, false, out);
            out.push(' ');
            out.push_str(op_text(f));
            out.push(' ');
            write_formula(b, false, out);
            if !root {
                out.push(')');
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Var(usize),
    NegVar(usize),
    Word(String),
    Sym(&'static str),
}

struct Lexed {
    tok: Tok,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let digits = |i: &mut usize| -> Option<usize> {
        let start = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
        (start < *i).then(|| chars[start..*i].iter().collect::<String>().parse().ok()).flatten()
    };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let push = |out: &mut Vec<Lexed>, tok| out.push(Lexed { tok, col });
        match c {
            '-' | '¬' if i + 1 < chars.len() && chars[i + 1] == 'p' => {
                i += 2;
                let n = digits(&mut i)
                    .ok_or(Error::Parse { col, msg: "expected variable index after '-p'".into() })?;
                push(&mut out, Tok::NegVar(n));
            }
            '-' if i + 1 < chars.len() && chars[i + 1] == 'o' => {
                i += 2;
                push(&mut out, Tok::Sym("-o"));
            }
            '&' | '∧' => {
                i += 1;
                push(&mut out, Tok::Sym("&"));
            }
            '|' | '⊗' => {
                i += 1;
                push(&mut out, Tok::Sym("|"));
            }
            '%' | '⊛' => {
                i += 1;
                push(&mut out, Tok::Sym("%"));
            }
            '∨' => {
                i += 1;
                push(&mut out, Tok::Sym("v"));
            }
            '⊸' => {
                i += 1;
                push(&mut out, Tok::Sym("-o"));
            }
            '~' | '∼' => {
                i += 1;
                push(&mut out, Tok::Sym("~"));
            }
            '(' => {
                i += 1;
                push(&mut out, Tok::Sym("("));
            }
            ')' => {
                i += 1;
                push(&mut out, Tok::Sym(")"));
            }
            ',' => {
                i += 1;
                push(&mut out, Tok::Sym(","));
            }
            ';' => {
                i += 1;
                push(&mut out, Tok::Sym(";"));
            }
            '=' => {
                i += 1;
                push(&mut out, Tok::Sym("="));
            }
            '⊥' => {
                i += 1;
                push(&mut out, Tok::Word("BOT".into()));
            }
            '⊤' => {
                i += 1;
                push(&mut out, Tok::Word("TOP".into()));
            }
            '▽' => {
                i += 1;
                push(&mut out, Tok::Word("M".into()));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let w: String = chars[start..i].iter().collect();
                if let Some(rest) = w.strip_prefix('p') {
                    if !rest.is_empty() && rest.chars().all(|d| d.is_ascii_digit()) {
                        let n = rest
                            .parse()
                            .map_err(|_| Error::Parse { col, msg: format!("variable index too large in '{w}'") })?;
                        push(&mut out, Tok::Var(n));
                        continue;
                    }
                }
                push(&mut out, Tok::Word(w));
            }
            _ => return Err(Error::Parse { col, msg: format!("unexpected character '{c}'") }),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    end_col: usize,
}

const LEVELS: [&str; 5] = ["-o", "v", "%", "|", "&"];

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }
    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|l| l.col).unwrap_or(self.end_col)
    }
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { col: self.col(), msg: msg.into() })
    }
    fn is_op(&self, op: &str) -> bool {
        match self.peek() {
            Some(Tok::Sym(s)) => *s == op,
            Some(Tok::Word(w)) => op == "v" && w == "v",
            _ => false,
        }
    }
    fn expect(&mut self, sym: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == sym => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected '{sym}'")),
        }
    }

    fn formula(&mut self, level: usize) -> Result<Formula> {
        if level == LEVELS.len() {
            return self.prefix();
        }
        let mut lhs = self.formula(level + 1)?;
        while self.is_op(LEVELS[level]) {
            self.pos += 1;
            let rhs = self.formula(level + 1)?;
            lhs = match LEVELS[level] {
                "-o" => Formula::lin_imp(lhs, rhs),
                "v" => Formula::bor(lhs, rhs),
                "%" => Formula::ne_or(lhs, rhs),
                "|" => Formula::tensor(lhs, rhs),
                _ => Formula::and(lhs, rhs),
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Formula> {
        let col = self.col();
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of input");
        };
        self.pos += 1;
        match tok {
            Tok::Var(i) => Ok(Var(i)),
            Tok::NegVar(i) => Ok(NegVar(i)),
            Tok::Sym("~") => Ok(Formula::bool_neg(self.prefix()?)),
            Tok::Sym("(") => {
                let f = self.formula(0)?;
                self.expect(")")?;
                Ok(f)
            }
            Tok::Sym("=") => self.dep(col),
            Tok::Word(w) => match w.as_str() {
                "BOT" => Ok(Bot),
                "TOP" => Ok(Top),
                "NE" => Ok(Ne),
                "M" => {
                    self.expect("(")?;
                    let f = self.formula(0)?;
                    self.expect(")")?;
                    Ok(Formula::might(f))
                }
                "ind" => {
                    let ls = self.var_lists(col, 2)?;
                    Ok(Indep(ls[0].clone(), ls[1].clone()))
                }
                "cind" => {
                    let ls = self.var_lists(col, 3)?;
                    Ok(CondIndep(ls[0].clone(), ls[1].clone(), ls[2].clone()))
                }
                "inc" => {
                    let ls = self.var_lists(col, 2)?;
                    if ls[0].len() != ls[1].len() {
                        return Err(Error::Arity {
                            col,
                            msg: format!(
                                "inclusion atom needs lists of equal length, got {} and {}",
                                ls[0].len(),
                                ls[1].len()
                            ),
                        });
                    }
                    Ok(Incl(ls[0].clone(), ls[1].clone()))
                }
                "eneg" => {
                    let ls = self.formula_lists(col, 1)?;
                    match <[Vec<Formula>; 1]>::try_from(ls) {
                        Ok([l]) if l.len() == 1 => Ok(Formula::ext_neg(l.into_iter().next().unwrap())),
                        _ => Err(Error::Arity { col, msg: "eneg takes exactly one formula".into() }),
                    }
                }
                "edep" => {
                    let mut ls = self.formula_lists(col, 2)?;
                    let target = ls.pop().unwrap();
                    if target.len() != 1 {
                        return Err(Error::Arity { col, msg: "edep takes exactly one target formula".into() });
                    }
                    Ok(ExtDep(ls.pop().unwrap(), Arc::new(target.into_iter().next().unwrap())))
                }
                "eind" => {
                    let mut ls = self.formula_lists(col, 2)?;
                    let r = ls.pop().unwrap();
                    Ok(ExtIndep(ls.pop().unwrap(), r))
                }
                "ecind" => {
                    let mut ls = self.formula_lists(col, 3)?;
                    let r = ls.pop().unwrap();
                    let l = ls.pop().unwrap();
                    Ok(ExtCondIndep(ls.pop().unwrap(), l, r))
                }
                "einc" => {
                    let mut ls = self.formula_lists(col, 2)?;
                    let r = ls.pop().unwrap();
                    let l = ls.pop().unwrap();
                    if l.len() != r.len() {
                        return Err(Error::Arity { col, msg: "einc needs lists of equal length".into() });
                    }
                    Ok(ExtIncl(l, r))
                }
                _ => Err(Error::Parse { col, msg: format!("unknown word '{w}'") }),
            },
            Tok::Sym(s) => Err(Error::Parse { col, msg: format!("unexpected '{s}'") }),
        }
    }

    fn var(&mut self) -> Option<usize> {
        if let Some(Tok::Var(i)) = self.peek() {
            let i = *i;
            self.pos += 1;
            Some(i)
        } else {
            None
        }
    }

    // `=(` args `,` target `)`: everything before the last comma is the argument list.
    fn dep(&mut self, col: usize) -> Result<Formula> {
        self.expect("(")?;
        let mut items: Vec<(usize, bool)> = Vec::new(); // (var, preceded by comma)
        let mut comma = false;
        loop {
            if let Some(v) = self.var() {
                items.push((v, comma));
                comma = false;
            } else if self.is_op(",") || matches!(self.peek(), Some(Tok::Sym(","))) {
                self.pos += 1;
                comma = true;
            } else {
                break;
            }
        }
        self.expect(")")?;
        match items.split_last() {
            Some((&(target, true), args)) if !args.is_empty() => {
                Ok(Dep(args.iter().map(|x| x.0).collect(), target))
            }
            _ => Err(Error::Arity {
                col,
                msg: "dependence atom needs a nonempty argument list, a comma, and one target".into(),
            }),
        }
    }

    fn var_lists(&mut self, col: usize, n: usize) -> Result<Vec<Vec<usize>>> {
        self.expect("(")?;
        let mut lists = vec![Vec::new()];
        loop {
            if let Some(v) = self.var() {
                lists.last_mut().unwrap().push(v);
            } else {
                match self.peek() {
                    Some(Tok::Sym(",")) => self.pos += 1,
                    Some(Tok::Sym(";")) => {
                        self.pos += 1;
                        lists.push(Vec::new());
                    }
                    _ => break,
                }
            }
        }
        self.expect(")")?;
        if lists.len() != n || lists.iter().any(|l| l.is_empty()) {
            return Err(Error::Arity {
                col,
                msg: format!("expected {n} nonempty ';'-separated variable lists"),
            });
        }
        Ok(lists)
    }

    fn formula_lists(&mut self, col: usize, n: usize) -> Result<Vec<Vec<Formula>>> {
        self.expect("(")?;
        let mut lists = vec![vec![self.formula(0)?]];
        loop {
            match self.peek() {
                Some(Tok::Sym(",")) => {
                    self.pos += 1;
                    lists.last_mut().unwrap().push(self.formula(0)?);
                }
                Some(Tok::Sym(";")) => {
                    self.pos += 1;
                    lists.push(vec![self.formula(0)?]);
                }
                _ => break,
            }
        }
        self.expect(")")?;
        if lists.len() != n {
            return Err(Error::Arity { col, msg: format!("expected {n} ';'-separated formula lists") });
        }
        for f in lists.iter().flatten() {
            if !f.is_ext_classical() {
                return Err(Error::Arity { col, msg: format!("argument '{f}' is not classical") });
            }
        }
        Ok(lists)
    }
}

pub fn parse(text: &str) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end_col: text.chars().count() + 1 };
    let f = p.formula(0)?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Formula> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn grammar_cases() {
        assert_eq!(p("p0 | -p0"), Formula::tensor(Var(0), NegVar(0)));
        assert_eq!(p("=(p1 p2, p3)"), Dep(vec![1, 2], 3));
        assert_eq!(p("cind(p0 ; p1 ; p2)"), CondIndep(vec![0], vec![1], vec![2]));
        assert!(matches!(parse("inc(p1 p2 ; p3)"), Err(Error::Arity { .. })));
        assert!(matches!(parse("=(p1)"), Err(Error::Arity { .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("p0 & p1 | p2"), Formula::tensor(Formula::and(Var(0), Var(1)), Var(2)));
        assert_eq!(
            p("p0 v p1 v p2"),
            Formula::bor(Formula::bor(Var(0), Var(1)), Var(2))
        );
        assert_eq!(
            p("p0 -o p1 v p2 % p3"),
            Formula::lin_imp(Var(0), Formula::bor(Var(1), Formula::ne_or(Var(2), Var(3))))
        );
        assert_eq!(p("~p0 & NE"), Formula::and(Formula::bool_neg(Var(0)), Ne));
        assert_eq!(p("M(p0 | p1)"), Formula::might(Formula::tensor(Var(0), Var(1))));
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(p("⊥ ∨ NE"), p("BOT v NE"));
        assert_eq!(p("¬p1 ⊗ p2"), p("-p1 | p2"));
    }

    #[test]
    fn printing_round_trip() {
        for s in [
            "NE | (-p1 & NE)",
            "(p0 v p1) -o ~(p2 % TOP)",
            "M(p0 & NE) & =(p0 p1, p2)",
            "eneg(p0 & p1) | edep(p0, -p1 ; p2 | p3)",
            "ecind(p0 ; p1 ; p2) & einc(p0, p1 ; p2, p3) & eind(TOP ; BOT)",
        ] {
            let f = p(s);
            assert_eq!(p(&f.to_string()), f, "{s}");
        }
        assert_eq!(p("NE | (-p1 & NE)").to_string(), "NE | (-p1 & NE)");
    }

    #[test]
    fn symbol_numbering_matches_worked_example() {
        let f = p("NE | (-p1 & NE)");
        assert_eq!(symbol_count(&f, true), 8);
        let second_ne = vec![Step::Right, Step::Right];
        assert_eq!(token_position(&f, &second_ne).unwrap(), 7);
        assert_eq!(token_position(&f, &[Step::Right]).unwrap(), 3);
        assert_eq!(token_position(&f, &[Step::Right, Step::Left]).unwrap(), 4);
        assert_eq!(path_at_position(&f, 7).unwrap(), second_ne);
        let g = replace_at(&f, &second_ne, Var(9)).unwrap();
        assert_eq!(g, p("NE | (-p1 & p9)"));
        assert_eq!(replace_at(&f, &[], Bot).unwrap(), Bot);
        assert!(subformula_at(&f, &[Step::Body]).is_err());
    }

    #[test]
    fn variables_cover_atom_arguments() {
        assert_eq!(variables(&Dep(vec![1, 2], 3)), [1, 2, 3].into());
        assert!(variables(&Ne).is_empty());
        assert_eq!(variables(&p("p0 | p0")), [0].into());
    }

    #[test]
    fn negation_rewrite() {
        assert_eq!(negate_classical(&Var(0)).unwrap(), NegVar(0));
        assert_eq!(negate_classical(&p("p0 & p1")).unwrap(), p("-p0 | -p1"));
        assert_eq!(negate_classical(&Bot).unwrap(), Top);
        assert!(negate_classical(&Ne).is_err());
    }

    #[test]
    fn fragment_table() {
        let c = classify(&p("p0 | -p1"));
        assert_eq!(c.len(), 12);
        assert!(!c.contains(&Fragment::Pt));
        let ne = classify(&Ne);
        for fr in [Fragment::CplPlus, Fragment::PiPlus, Fragment::PtPlus, Fragment::PuPlus, Fragment::PIncPlus, Fragment::Fpt] {
            assert!(ne.contains(&fr), "{fr}");
        }
        assert!(!ne.contains(&Fragment::Cpl) && !ne.contains(&Fragment::Pd));
        let nor = classify(&p("p0 % p1"));
        for fr in [Fragment::Pt, Fragment::Pu, Fragment::PuPlus, Fragment::Fpt] {
            assert!(nor.contains(&fr), "{fr}");
        }
        assert!(!nor.contains(&Fragment::CplPlus));
        assert!(classify(&p("M(p0)")).is_empty());
        assert_eq!(Fragment::from_name("pt+"), Some(Fragment::PtPlus));
        assert_eq!(Fragment::from_name("PDplus"), Some(Fragment::PdPlus));
    }
}
