//! Hand-written recursive-descent parser for terms, assertions and commands.
//!
//! ```text
//! term      := primary ('+' primary)*
//! primary   := NAT | IDENT | 'null' | 'b(' term ')' | 'e(' term ')' | '(' term ')'
//! atom      := 'emp' | 'arr(' term ',' term ')' | 'narr(' term ',' term ')'
//!            | term '|->' (term | '-') | term '!|->' | term relop term
//! heap      := atom ('*' atom)*
//! disjunct  := ['exists' IDENT+ '.'] heap
//! assertion := 'false' | disjunct ('\/' disjunct)*
//! command   := choice (';' choice)*
//! choice    := postfix ('+' postfix)*
//! postfix   := basic '*'*
//! ```

use super::ast::{
    Assertion, Command, Disjunct, Ident, PureAtom, PureOp, SpatialAtom, SymbolicHeap, Term,
};
use super::subst::FreshGen;
use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "!|->", "|->", "\\/", ":=", "==", "!=", "<=", "<", "(", ")", "{", "}", "[", "]", ",", "+", "*",
    ";", ".", "-",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if src[i..].starts_with("//") || c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_digit() {
            let s = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[s..i].parse::<u64>().map_err(|_| ParseError {
                line,
                col,
                msg: "numeral out of range".into(),
            })?;
            col += i - s;
            out.push(Token { tok: Tok::Nat(n), line, col: start_col });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let s = i;
            while i < bytes.len() {
                let d = bytes[i] as char;
                if d.is_ascii_alphanumeric() || d == '_' || d == '$' || d == '\'' {
                    i += 1;
                } else {
                    break;
                }
            }
            col += i - s;
            out.push(Token { tok: Tok::Ident(src[s..i].to_string()), line, col: start_col });
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token { tok: Tok::Sym(s), line, col: start_col });
            }
            None => {
                return Err(ParseError { line, col, msg: format!("unexpected character `{c}`") })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "null", "emp", "arr", "narr", "exists", "false", "skip", "assume", "local", "in", "error",
    "alloc", "free",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    fresh: FreshGen,
    /// Bound names introduced by `t |-> -` in the current disjunct.
    anon: Vec<Ident>,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        let toks = lex(src)?;
        let mut fresh = FreshGen::new();
        for t in &toks {
            if let Tok::Ident(s) = &t.tok {
                fresh.reserve(&Ident::new(s));
            }
        }
        Ok(Parser { toks, pos: 0, fresh, anon: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = &self.toks[self.pos];
        Err(ParseError { line: t.line, col: t.col, msg: msg.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Ident::new(&s))
            }
            other => self.err(format!("expected identifier, found {}", describe(&other))),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut t = self.primary()?;
        while self.is_sym("+") && self.starts_primary(1) {
            self.bump();
            let r = self.primary()?;
            t = Term::add(t, r);
        }
        Ok(t)
    }

    fn starts_primary(&self, k: usize) -> bool {
        match self.peek_at(k) {
            Tok::Nat(_) => true,
            Tok::Ident(s) => {
                (s == "null" || !KEYWORDS.contains(&s.as_str()))
                    && self.peek_at(k + 1) != &Tok::Sym(":=")
            }
            Tok::Sym("(") => true,
            _ => false,
        }
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(Term::Nat(n))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(s) if s == "null" => {
                self.bump();
                Ok(Term::Null)
            }
            Tok::Ident(s) if (s == "b" || s == "e") && self.peek_at(1) == &Tok::Sym("(") => {
                self.bump();
                self.bump();
                let arg = self.term()?;
                if arg.has_block_fn() {
                    return self.err("block functions cannot be nested");
                }
                self.expect_sym(")")?;
                Ok(if s == "b" { Term::base(arg) } else { Term::end(arg) })
            }
            Tok::Ident(_) => Ok(Term::Var(self.ident()?)),
            other => self.err(format!("expected term, found {}", describe(&other))),
        }
    }

    fn relop(&mut self) -> Option<PureOp> {
        let op = match self.peek() {
            Tok::Sym("==") => PureOp::Eq,
            Tok::Sym("!=") => PureOp::Ne,
            Tok::Sym("<=") => PureOp::Le,
            Tok::Sym("<") => PureOp::Lt,
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    fn pure_atom(&mut self) -> Result<PureAtom, ParseError> {
        let l = self.term()?;
        match self.relop() {
            Some(op) => Ok(PureAtom::new(op, l, self.term()?)),
            None => self.err(format!("expected comparison, found {}", describe(self.peek()))),
        }
    }

    fn heap_atom(&mut self, sp: &mut Vec<SpatialAtom>, pu: &mut Vec<PureAtom>) -> Result<(), ParseError> {
        if self.is_kw("emp") {
            self.bump();
            sp.push(SpatialAtom::Emp);
            return Ok(());
        }
        for (kw, neg) in [("arr", false), ("narr", true)] {
            if self.is_kw(kw) {
                self.bump();
                self.expect_sym("(")?;
                let a = self.term()?;
                self.expect_sym(",")?;
                let b = self.term()?;
                self.expect_sym(")")?;
                sp.push(if neg { SpatialAtom::NegArr(a, b) } else { SpatialAtom::Arr(a, b) });
                return Ok(());
            }
        }
        let l = self.term()?;
        if self.eat_sym("|->") {
            if self.eat_sym("-") {
                let v = self.fresh.fresh();
                self.anon.push(v.clone());
                sp.push(SpatialAtom::PointsTo(l, Term::Var(v)));
            } else {
                let v = self.term()?;
                sp.push(SpatialAtom::PointsTo(l, v));
            }
            return Ok(());
        }
        if self.eat_sym("!|->") {
            let r = l.clone().plus(1);
            sp.push(SpatialAtom::NegArr(l, r));
            return Ok(());
        }
        match self.relop() {
            Some(op) => {
                let r = self.term()?;
                pu.push(PureAtom::new(op, l, r));
                Ok(())
            }
            None => self.err(format!("expected heap atom, found {}", describe(self.peek()))),
        }
    }

    fn heap(&mut self) -> Result<SymbolicHeap, ParseError> {
        let mut sp = Vec::new();
        let mut pu = Vec::new();
        self.heap_atom(&mut sp, &mut pu)?;
        while self.eat_sym("*") {
            self.heap_atom(&mut sp, &mut pu)?;
        }
        Ok(SymbolicHeap::new(sp, pu))
    }

    fn disjunct(&mut self) -> Result<Disjunct, ParseError> {
        let mut bound = Vec::new();
        if self.is_kw("exists") {
            self.bump();
            bound.push(self.ident()?);
            while !self.is_sym(".") {
                bound.push(self.ident()?);
            }
            self.expect_sym(".")?;
        }
        self.anon.clear();
        let body = self.heap()?;
        bound.append(&mut self.anon);
        Ok(Disjunct::new(bound, body))
    }

    fn assertion(&mut self) -> Result<Assertion, ParseError> {
        if self.is_kw("false") {
            self.bump();
            return Ok(Assertion::falsum());
        }
        let mut ds = vec![self.disjunct()?];
        while self.eat_sym("\\/") {
            ds.push(self.disjunct()?);
        }
        Ok(Assertion::from_disjuncts(ds))
    }

    fn command(&mut self) -> Result<Command, ParseError> {
        let first = self.choice()?;
        if self.eat_sym(";") {
            if self.is_sym("}") || *self.peek() == Tok::Eof {
                return Ok(first);
            }
            let rest = self.command()?;
            return Ok(Command::seq(first, rest));
        }
        Ok(first)
    }

    fn choice(&mut self) -> Result<Command, ParseError> {
        let mut c = self.postfix()?;
        while self.eat_sym("+") {
            let r = self.postfix()?;
            c = Command::choice(c, r);
        }
        Ok(c)
    }

    fn postfix(&mut self) -> Result<Command, ParseError> {
        let mut c = self.basic()?;
        while self.eat_sym("*") {
            c = Command::star(c);
        }
        Ok(c)
    }

    fn block(&mut self) -> Result<Command, ParseError> {
        self.expect_sym("{")?;
        let c = self.command()?;
        self.expect_sym("}")?;
        Ok(c)
    }

    fn basic(&mut self) -> Result<Command, ParseError> {
        if self.is_sym("{") {
            return self.block();
        }
        if self.eat_sym("(") {
            let c = self.command()?;
            self.expect_sym(")")?;
            return Ok(c);
        }
        if self.is_kw("skip") {
            self.bump();
            return Ok(Command::Skip);
        }
        if self.is_kw("error") {
            self.bump();
            self.expect_sym("(")?;
            self.expect_sym(")")?;
            return Ok(Command::Error);
        }
        if self.is_kw("assume") {
            self.bump();
            self.expect_sym("(")?;
            let mut ps = Vec::new();
            if !self.is_sym(")") {
                ps.push(self.pure_atom()?);
                while self.eat_sym("*") {
                    ps.push(self.pure_atom()?);
                }
            }
            self.expect_sym(")")?;
            return Ok(Command::Assume(ps));
        }
        if self.is_kw("local") {
            self.bump();
            let x = self.ident()?;
            if self.eat_sym(":=") {
                let t = self.plain_term()?;
                self.expect_kw("in")?;
                let body = self.block()?;
                return Ok(Command::LocalInit(x, t, Box::new(body)));
            }
            self.expect_kw("in")?;
            let body = self.block()?;
            return Ok(Command::Local(x, Box::new(body)));
        }
        if self.is_kw("free") {
            self.bump();
            self.expect_sym("(")?;
            let t = self.plain_term()?;
            self.expect_sym(")")?;
            return Ok(Command::Free(t));
        }
        if self.eat_sym("[") {
            let a = self.plain_term()?;
            self.expect_sym("]")?;
            self.expect_sym(":=")?;
            let v = self.plain_term()?;
            return Ok(Command::Store(a, v));
        }
        let x = self.ident()?;
        self.expect_sym(":=")?;
        if self.eat_sym("*") {
            return Ok(Command::Havoc(x));
        }
        if self.is_kw("alloc") {
            self.bump();
            self.expect_sym("(")?;
            let t = self.plain_term()?;
            self.expect_sym(")")?;
            return Ok(Command::Alloc(x, t));
        }
        if self.eat_sym("[") {
            let t = self.plain_term()?;
            self.expect_sym("]")?;
            return Ok(Command::Load(x, t));
        }
        let t = self.plain_term()?;
        Ok(Command::Assign(x, t))
    }

    /// Program terms may not mention block functions.
    fn plain_term(&mut self) -> Result<Term, ParseError> {
        let t = self.term()?;
        if t.has_block_fn() {
            return self.err("block functions are not allowed in programs");
        }
        Ok(t)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Nat(n) => format!("`{n}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_assertion(src: &str) -> Result<Assertion, ParseError> {
    let mut p = Parser::new(src)?;
    let a = p.assertion()?;
    p.expect_eof()?;
    Ok(a)
}

/// Parses a single symbolic heap without quantifiers.
pub fn parse_heap(src: &str) -> Result<SymbolicHeap, ParseError> {
    let mut p = Parser::new(src)?;
    let h = p.heap()?;
    if !p.anon.is_empty() {
        return p.err("`-` values need an enclosing assertion");
    }
    p.expect_eof()?;
    Ok(h)
}

pub fn parse_command(src: &str) -> Result<Command, ParseError> {
    let mut p = Parser::new(src)?;
    let c = p.command()?;
    p.expect_eof()?;
    Ok(c)
}

pub fn parse_pure(src: &str) -> Result<Vec<PureAtom>, ParseError> {
    let mut p = Parser::new(src)?;
    let mut ps = vec![p.pure_atom()?];
    while p.eat_sym("*") {
        ps.push(p.pure_atom()?);
    }
    p.expect_eof()?;
    Ok(ps)
}
