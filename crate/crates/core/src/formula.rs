//! Propositional modal formulas: syntax tree, parser, printer and the
//! structural operations used by every engine in the crate.
//!
//! Formulas are generic over their atom type. Plain modal schemas use
//! `String` variables ([`ModalFormula`]); statements about a concrete
//! potentialist system use that system's ground descriptors as atoms.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula<A = String> {
    Atom(A),
    Top,
    Bottom,
    Not(Box<Formula<A>>),
    And(Box<Formula<A>>, Box<Formula<A>>),
    Or(Box<Formula<A>>, Box<Formula<A>>),
    Implies(Box<Formula<A>>, Box<Formula<A>>),
    Iff(Box<Formula<A>>, Box<Formula<A>>),
    Diamond(Box<Formula<A>>),
    Box(Box<Formula<A>>),
}

/// A modal schema over named propositional variables.
pub type ModalFormula = Formula<String>;

impl<A> Formula<A> {
    pub fn atom(a: impl Into<A>) -> Self {
        Formula::Atom(a.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Self, b: Self) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Self, b: Self) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Self, b: Self) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn diamond(f: Self) -> Self {
        Formula::Diamond(Box::new(f))
    }

    pub fn boxed(f: Self) -> Self {
        Formula::Box(Box::new(f))
    }

    /// Left-nested conjunction; the empty conjunction is `T`.
    pub fn conjunction(items: impl IntoIterator<Item = Self>) -> Self {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; the empty disjunction is `F`.
    pub fn disjunction(items: impl IntoIterator<Item = Self>) -> Self {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::Bottom)
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula<A>> {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bottom => vec![],
            Formula::Not(a) | Formula::Diamond(a) | Formula::Box(a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => vec![a, b],
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// Number of nested modal operators on the deepest branch.
    pub fn modal_depth(&self) -> usize {
        let inner = self.children().into_iter().map(Formula::modal_depth).max().unwrap_or(0);
        match self {
            Formula::Diamond(_) | Formula::Box(_) => inner + 1,
            _ => inner,
        }
    }

    pub fn is_modal(&self) -> bool {
        matches!(self, Formula::Diamond(_) | Formula::Box(_))
    }

    pub fn atoms(&self) -> BTreeSet<&A>
    where
        A: Ord,
    {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a A>)
    where
        A: Ord,
    {
        if let Formula::Atom(a) = self {
            out.insert(a);
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    /// Rebuilds the tree with every atom replaced by the formula `f` returns.
    pub fn try_flat_map_atoms<B, E>(
        &self,
        f: &mut impl FnMut(&A) -> std::result::Result<Formula<B>, E>,
    ) -> std::result::Result<Formula<B>, E> {
        Ok(match self {
            Formula::Atom(a) => f(a)?,
            Formula::Top => Formula::Top,
            Formula::Bottom => Formula::Bottom,
            Formula::Not(a) => Formula::not(a.try_flat_map_atoms(f)?),
            Formula::Diamond(a) => Formula::diamond(a.try_flat_map_atoms(f)?),
            Formula::Box(a) => Formula::boxed(a.try_flat_map_atoms(f)?),
            Formula::And(a, b) => Formula::and(a.try_flat_map_atoms(f)?, b.try_flat_map_atoms(f)?),
            Formula::Or(a, b) => Formula::or(a.try_flat_map_atoms(f)?, b.try_flat_map_atoms(f)?),
            Formula::Implies(a, b) => Formula::implies(a.try_flat_map_atoms(f)?, b.try_flat_map_atoms(f)?),
            Formula::Iff(a, b) => Formula::iff(a.try_flat_map_atoms(f)?, b.try_flat_map_atoms(f)?),
        })
    }

    pub fn map_atoms<B>(&self, mut f: impl FnMut(&A) -> B) -> Formula<B> {
        let r: std::result::Result<_, std::convert::Infallible> =
            self.try_flat_map_atoms(&mut |a| Ok(Formula::Atom(f(a))));
        match r {
            Ok(v) => v,
            Err(e) => match e {},
        }
    }

    /// Simultaneous substitution of every atom by its image in `assignment`.
    pub fn substitute<B: Clone>(&self, assignment: &BTreeMap<A, Formula<B>>) -> Result<Formula<B>>
    where
        A: Ord + fmt::Display,
    {
        self.try_flat_map_atoms(&mut |a| {
            assignment
                .get(a)
                .cloned()
                .ok_or_else(|| Error::UnmappedVariable(a.to_string()))
        })
    }

    /// Distinct subformulas in post-order (children before parents, first
    /// occurrence wins), ending with `self`.
    pub fn subformulas(&self) -> Vec<&Formula<A>>
    where
        A: Eq + std::hash::Hash,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        self.post_order(&mut seen, &mut out);
        out
    }

    fn post_order<'a>(&'a self, seen: &mut HashSet<&'a Formula<A>>, out: &mut Vec<&'a Formula<A>>)
    where
        A: Eq + std::hash::Hash,
    {
        for c in self.children() {
            c.post_order(seen, out);
        }
        if seen.insert(self) {
            out.push(self);
        }
    }
}

impl<A: Clone> Formula<A> {
    /// Negation normal form: negations sit on atoms only, `->` and `<->` are
    /// expanded, `~[]` becomes `<>~` and `~<>` becomes `[]~`.
    pub fn to_nnf(&self) -> Formula<A> {
        self.nnf(true)
    }

    fn nnf(&self, positive: bool) -> Formula<A> {
        match (self, positive) {
            (Formula::Atom(_), true) => self.clone(),
            (Formula::Atom(_), false) => Formula::not(self.clone()),
            (Formula::Top, true) | (Formula::Bottom, false) => Formula::Top,
            (Formula::Top, false) | (Formula::Bottom, true) => Formula::Bottom,
            (Formula::Not(a), p) => a.nnf(!p),
            (Formula::And(a, b), true) => Formula::and(a.nnf(true), b.nnf(true)),
            (Formula::And(a, b), false) => Formula::or(a.nnf(false), b.nnf(false)),
            (Formula::Or(a, b), true) => Formula::or(a.nnf(true), b.nnf(true)),
            (Formula::Or(a, b), false) => Formula::and(a.nnf(false), b.nnf(false)),
            (Formula::Implies(a, b), true) => Formula::or(a.nnf(false), b.nnf(true)),
            (Formula::Implies(a, b), false) => Formula::and(a.nnf(true), b.nnf(false)),
            (Formula::Iff(a, b), true) => Formula::and(
                Formula::or(a.nnf(false), b.nnf(true)),
                Formula::or(a.nnf(true), b.nnf(false)),
            ),
            (Formula::Iff(a, b), false) => Formula::or(
                Formula::and(a.nnf(true), b.nnf(false)),
                Formula::and(a.nnf(false), b.nnf(true)),
            ),
            (Formula::Diamond(a), true) => Formula::diamond(a.nnf(true)),
            (Formula::Diamond(a), false) => Formula::boxed(a.nnf(false)),
            (Formula::Box(a), true) => Formula::boxed(a.nnf(true)),
            (Formula::Box(a), false) => Formula::diamond(a.nnf(false)),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing

const PREC_IFF: u8 = 1;
const PREC_IMP: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_UNARY: u8 = 5;

impl<A: fmt::Display> Formula<A> {
    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => PREC_IFF,
            Formula::Implies(..) => PREC_IMP,
            Formula::Or(..) => PREC_OR,
            Formula::And(..) => PREC_AND,
            _ => PREC_UNARY,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let wrap = self.precedence() < min_prec;
        if wrap {
            f.write_str("(")?;
        }
        match self {
            Formula::Atom(a) => write!(f, "{a}")?,
            Formula::Top => f.write_str("T")?,
            Formula::Bottom => f.write_str("F")?,
            Formula::Not(a) => {
                f.write_str("~")?;
                a.write_at(f, PREC_UNARY)?;
            }
            Formula::Diamond(a) => {
                f.write_str("<>")?;
                a.write_at(f, PREC_UNARY)?;
            }
            Formula::Box(a) => {
                f.write_str("[]")?;
                a.write_at(f, PREC_UNARY)?;
            }
            Formula::And(a, b) => {
                a.write_at(f, PREC_AND)?;
                f.write_str(" & ")?;
                b.write_at(f, PREC_AND + 1)?;
            }
            Formula::Or(a, b) => {
                a.write_at(f, PREC_OR)?;
                f.write_str(" | ")?;
                b.write_at(f, PREC_OR + 1)?;
            }
            // right associative
            Formula::Implies(a, b) => {
                a.write_at(f, PREC_IMP + 1)?;
                f.write_str(" -> ")?;
                b.write_at(f, PREC_IMP)?;
            }
            Formula::Iff(a, b) => {
                a.write_at(f, PREC_IFF)?;
                f.write_str(" <-> ")?;
                b.write_at(f, PREC_IFF + 1)?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl<A: fmt::Display> fmt::Display for Formula<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Var(String),
    Top,
    Bottom,
    Not,
    And,
    Or,
    Imp,
    Iff,
    Diamond,
    Box,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Top => "`T`".into(),
            Tok::Bottom => "`F`".into(),
            Tok::Not => "`~`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Imp => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Diamond => "`<>`".into(),
            Tok::Box => "`[]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < src.len() {
        let rest = &src[i..];
        let c = rest.chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with("->") {
            (Tok::Imp, 2)
        } else if rest.starts_with("<>") {
            (Tok::Diamond, 2)
        } else if rest.starts_with("[]") {
            (Tok::Box, 2)
        } else {
            match c {
                '~' | '¬' => (Tok::Not, c.len_utf8()),
                '&' | '∧' => (Tok::And, c.len_utf8()),
                '|' | '∨' => (Tok::Or, c.len_utf8()),
                '→' => (Tok::Imp, c.len_utf8()),
                '↔' => (Tok::Iff, c.len_utf8()),
                '◇' => (Tok::Diamond, c.len_utf8()),
                '□' => (Tok::Box, c.len_utf8()),
                '⊤' | 'T' => (Tok::Top, c.len_utf8()),
                '⊥' | 'F' => (Tok::Bottom, c.len_utf8()),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                'a'..='z' => {
                    let len = bytes[i..]
                        .iter()
                        .take_while(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || **b == b'_')
                        .count();
                    (Tok::Var(src[i..i + len].to_string()), len)
                }
                _ => {
                    return Err(Error::Parse {
                        offset: i,
                        expected: vec!["a formula token".into()],
                        found: format!("`{c}`"),
                    })
                }
            }
        };
        out.push((i, tok));
        i += len;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> Error {
        let (offset, tok) = &self.toks[self.pos];
        Error::Parse {
            offset: *offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.describe(),
        }
    }

    fn iff(&mut self) -> Result<ModalFormula> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.imp()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<ModalFormula> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Imp {
            self.bump();
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<ModalFormula> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<ModalFormula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ModalFormula> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Diamond => {
                self.bump();
                Ok(Formula::diamond(self.unary()?))
            }
            Tok::Box => {
                self.bump();
                Ok(Formula::boxed(self.unary()?))
            }
            Tok::Var(_) => match self.bump() {
                Tok::Var(v) => Ok(Formula::Atom(v)),
                _ => unreachable!(),
            },
            Tok::Top => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Bottom => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.iff()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&["`)`", "a binary connective"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error(&["variable", "`T`", "`F`", "`~`", "`<>`", "`[]`", "`(`"])),
        }
    }
}

/// Parses the ASCII concrete syntax: `~ & | -> <->`, `<>`, `[]`, constants
/// `T`/`F`, variables `[a-z][a-z0-9_]*`. Binding strength decreases from `~`
/// through `&`, `|`, `->` to `<->`; `->` associates to the right, the other
/// binary connectives to the left.
pub fn parse(src: &str) -> Result<ModalFormula> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let f = p.iff()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["a binary connective", "end of input"]));
    }
    Ok(f)
}

impl std::str::FromStr for ModalFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

pub fn is_variable_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some('a'..='z')) && cs.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

// ---------------------------------------------------------------------------
// JSON trees: {"op": "...", "args": [...], "var": ...}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "A: Serialize", deserialize = "A: Deserialize<'de>"))]
pub(crate) struct Wire<A> {
    op: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    args: Vec<Wire<A>>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    var: Option<A>,
}

impl<A: Clone> Formula<A> {
    pub(crate) fn to_wire(&self) -> Wire<A> {
        let (op, var) = match self {
            Formula::Atom(a) => ("var", Some(a.clone())),
            Formula::Top => ("top", None),
            Formula::Bottom => ("bottom", None),
            Formula::Not(_) => ("not", None),
            Formula::And(..) => ("and", None),
            Formula::Or(..) => ("or", None),
            Formula::Implies(..) => ("implies", None),
            Formula::Iff(..) => ("iff", None),
            Formula::Diamond(_) => ("diamond", None),
            Formula::Box(_) => ("box", None),
        };
        Wire {
            op: op.to_string(),
            args: self.children().into_iter().map(Formula::to_wire).collect(),
            var,
        }
    }

    pub(crate) fn from_wire(w: Wire<A>) -> std::result::Result<Self, String> {
        let Wire { op, args, var } = w;
        let arity = match op.as_str() {
            "var" | "top" | "bottom" => 0,
            "not" | "diamond" | "box" => 1,
            "and" | "or" | "implies" | "iff" => 2,
            other => return Err(format!("unknown op `{other}`")),
        };
        if args.len() != arity {
            return Err(format!("op `{op}` takes {arity} args, got {}", args.len()));
        }
        let mut args = args.into_iter().map(Formula::from_wire);
        let mut next = || args.next().unwrap();
        Ok(match op.as_str() {
            "var" => Formula::Atom(var.ok_or("op `var` needs a `var` field")?),
            "top" => Formula::Top,
            "bottom" => Formula::Bottom,
            "not" => Formula::not(next()?),
            "diamond" => Formula::diamond(next()?),
            "box" => Formula::boxed(next()?),
            "and" => Formula::and(next()?, next()?),
            "or" => Formula::or(next()?, next()?),
            "implies" => Formula::implies(next()?, next()?),
            "iff" => Formula::iff(next()?, next()?),
            _ => unreachable!(),
        })
    }
}

impl Serialize for ModalFormula {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_wire().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModalFormula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Tree(Wire<String>),
        }
        let f = match Repr::deserialize(d)? {
            Repr::Text(t) => return parse(&t).map_err(D::Error::custom),
            Repr::Tree(w) => Formula::from_wire(w).map_err(D::Error::custom)?,
        };
        for v in f.atoms() {
            if !is_variable_name(v) {
                return Err(D::Error::custom(format!("bad variable name `{v}`")));
            }
        }
        Ok(f)
    }
}

/// Every formula over `vars` with at most `max_size` nodes, built from
/// variables, `~`, `<>`, `[]`, `&`, `|`, `->`, `<->` (no constants), in
/// order of increasing size.
pub fn enumerate_formulas(vars: &[&str], max_size: usize) -> Vec<ModalFormula> {
    let mut by_size: Vec<Vec<ModalFormula>> = vec![Vec::new()];
    for size in 1..=max_size {
        let mut level = Vec::new();
        if size == 1 {
            level.extend(vars.iter().map(|v| Formula::atom(*v)));
        } else {
            for f in &by_size[size - 1] {
                level.push(Formula::not(f.clone()));
                level.push(Formula::diamond(f.clone()));
                level.push(Formula::boxed(f.clone()));
            }
            for left in 1..size - 1 {
                let right = size - 1 - left;
                for a in &by_size[left] {
                    for b in &by_size[right] {
                        level.push(Formula::and(a.clone(), b.clone()));
                        level.push(Formula::or(a.clone(), b.clone()));
                        level.push(Formula::implies(a.clone(), b.clone()));
                        level.push(Formula::iff(a.clone(), b.clone()));
                    }
                }
            }
        }
        by_size.push(level);
    }
    by_size.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> ModalFormula {
        parse(s).unwrap()
    }

    #[test]
    fn parses_introduction_example() {
        let f = p("p -> <>(p & <>[]~p)");
        let v = || Formula::atom("p");
        let expected = Formula::implies(
            v(),
            Formula::diamond(Formula::and(v(), Formula::diamond(Formula::boxed(Formula::not(v()))))),
        );
        assert_eq!(f, expected);
        assert_eq!(f.to_string(), "p -> <>(p & <>[]~p)");
    }

    #[test]
    fn single_variable() {
        assert_eq!(p("p"), Formula::atom("p"));
        assert_eq!(p("p").size(), 1);
    }

    #[test]
    fn axiom_k_node_count() {
        let k = p("[](p->q)->([]p->[]q)");
        // three implications, three boxes, four variable leaves
        assert_eq!(k.size(), 10);
        // with each `a -> b` read as `~a | b` the count is 13
        fn desugared(f: &ModalFormula) -> usize {
            match f {
                Formula::Implies(a, b) => 2 + desugared(a) + desugared(b),
                _ => 1 + f.children().into_iter().map(desugared).sum::<usize>(),
            }
        }
        assert_eq!(desugared(&k), 13);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("a -> b -> c"), p("a -> (b -> c)"));
        assert_eq!(p("a & b | c"), p("(a & b) | c"));
        assert_eq!(p("a | b & c"), p("a | (b & c)"));
        assert_eq!(p("a <-> b -> c"), p("a <-> (b -> c)"));
        assert_eq!(p("~<>p & q"), p("(~(<>p)) & q"));
        assert_eq!(p("(a -> b) -> c").to_string(), "(a -> b) -> c");
        assert_eq!(p("a & (b & c)").to_string(), "a & (b & c)");
        assert_eq!(p("(a & b) & c").to_string(), "a & b & c");
    }

    #[test]
    fn unicode_input() {
        assert_eq!(p("◇□p → p ∧ ¬q"), p("<>[]p -> p & ~q"));
        assert_eq!(p("⊤ ∨ ⊥"), p("T | F"));
    }

    #[test]
    fn syntax_errors_report_offset_and_expectation() {
        match parse("p & ") {
            Err(Error::Parse { offset, expected, .. }) => {
                assert_eq!(offset, 4);
                assert!(expected.iter().any(|e| e == "variable"));
            }
            other => panic!("{other:?}"),
        }
        match parse("(p | q") {
            Err(Error::Parse { offset, expected, .. }) => {
                assert_eq!(offset, 6);
                assert!(expected.contains(&"`)`".to_string()));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("p q"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(parse("P"), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(parse(""), Err(Error::Parse { offset: 0, .. })));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let mut m = BTreeMap::new();
        m.insert("p".to_string(), p("<>q"));
        assert_eq!(p("p->p").substitute(&m).unwrap(), p("<>q-><>q"));

        let mut m = BTreeMap::new();
        m.insert("p".to_string(), p("~p"));
        assert_eq!(p("[]p->p").substitute(&m).unwrap(), p("[]~p->~p"));

        let mut m = BTreeMap::new();
        m.insert("p".to_string(), p("q"));
        m.insert("q".to_string(), p("p"));
        assert_eq!(p("p & ~q").substitute(&m).unwrap(), p("q & ~p"));
    }

    #[test]
    fn substitution_names_unmapped_variable() {
        let m: BTreeMap<String, ModalFormula> = BTreeMap::new();
        match p("p -> q").substitute(&m) {
            Err(Error::UnmappedVariable(v)) => assert_eq!(v, "p"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nnf_examples() {
        assert_eq!(p("~[]p").to_nnf(), p("<>~p"));
        assert_eq!(p("p").to_nnf(), p("p"));
        assert_eq!(p("~(p & <>q)").to_nnf(), p("~p | []~q"));
        assert_eq!(p("~~p").to_nnf(), p("p"));
        assert_eq!(p("~T").to_nnf(), p("F"));
    }

    #[test]
    fn subformula_lists() {
        let f = p("p");
        assert_eq!(f.subformulas(), vec![&f]);

        let f = p("<>p -> p");
        let subs: Vec<String> = f.subformulas().iter().map(|s| s.to_string()).collect();
        assert_eq!(subs, ["p", "<>p", "<>p -> p"]);

        // p, []p, <>[]p, <>p, []<>p and the whole formula
        let f = p("<>[]p->[]<>p");
        let subs: Vec<String> = f.subformulas().iter().map(|s| s.to_string()).collect();
        assert_eq!(subs, ["p", "[]p", "<>[]p", "<>p", "[]<>p", "<>[]p -> []<>p"]);
    }

    #[test]
    fn json_tree_round_trip() {
        let f = p("[](p -> q) <-> ~<>T");
        let j = serde_json::to_string(&f).unwrap();
        assert!(j.contains(r#""op":"iff""#));
        assert!(j.contains(r#""var":"p""#));
        let back: ModalFormula = serde_json::from_str(&j).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<ModalFormula>(r#"{"op":"not","args":[]}"#).is_err());
        assert!(serde_json::from_str::<ModalFormula>(r#"{"op":"var","var":"Bad"}"#).is_err());
    }
}
