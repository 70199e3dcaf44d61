use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Program or logical variable name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ident(Arc<str>);

impl Ident {
    pub fn new(name: &str) -> Self {
        Ident(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Index of a generated `$k` name, if this is one.
    pub fn fresh_index(&self) -> Option<usize> {
        self.0.strip_prefix('$').and_then(|s| s.parse().ok())
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident::new(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Null,
    Nat(u64),
    Var(Ident),
    Add(Box<Term>, Box<Term>),
    /// Base address of the block containing the argument.
    Base(Box<Term>),
    /// End address of the block containing the argument.
    End(Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Ident::new(name))
    }

    pub fn add(l: Term, r: Term) -> Term {
        Term::Add(Box::new(l), Box::new(r))
    }

    pub fn plus(self, n: u64) -> Term {
        Term::add(self, Term::Nat(n))
    }

    pub fn base(t: Term) -> Term {
        debug_assert!(!t.has_block_fn(), "nested block function");
        Term::Base(Box::new(t))
    }

    pub fn end(t: Term) -> Term {
        debug_assert!(!t.has_block_fn(), "nested block function");
        Term::End(Box::new(t))
    }

    pub fn has_block_fn(&self) -> bool {
        match self {
            Term::Null | Term::Nat(_) | Term::Var(_) => false,
            Term::Add(l, r) => l.has_block_fn() || r.has_block_fn(),
            Term::Base(_) | Term::End(_) => true,
        }
    }

    pub fn mentions(&self, x: &Ident) -> bool {
        match self {
            Term::Null | Term::Nat(_) => false,
            Term::Var(y) => y == x,
            Term::Add(l, r) => l.mentions(x) || r.mentions(x),
            Term::Base(t) | Term::End(t) => t.mentions(x),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Ident>) {
        match self {
            Term::Null | Term::Nat(_) => {}
            Term::Var(y) => {
                if !out.contains(y) {
                    out.push(y.clone())
                }
            }
            Term::Add(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Term::Base(t) | Term::End(t) => t.collect_vars(out),
        }
    }

    /// Whether `sub` occurs in `self` (including `self` itself).
    pub fn contains(&self, sub: &Term) -> bool {
        if self == sub {
            return true;
        }
        match self {
            Term::Add(l, r) => l.contains(sub) || r.contains(sub),
            Term::Base(t) | Term::End(t) => t.contains(sub),
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PureOp {
    Eq,
    Ne,
    Le,
    Lt,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PureAtom {
    pub op: PureOp,
    pub lhs: Term,
    pub rhs: Term,
}

impl PureAtom {
    pub fn new(op: PureOp, lhs: Term, rhs: Term) -> Self {
        PureAtom { op, lhs, rhs }
    }
    pub fn eq(lhs: Term, rhs: Term) -> Self {
        PureAtom::new(PureOp::Eq, lhs, rhs)
    }
    pub fn ne(lhs: Term, rhs: Term) -> Self {
        PureAtom::new(PureOp::Ne, lhs, rhs)
    }
    pub fn le(lhs: Term, rhs: Term) -> Self {
        PureAtom::new(PureOp::Le, lhs, rhs)
    }
    pub fn lt(lhs: Term, rhs: Term) -> Self {
        PureAtom::new(PureOp::Lt, lhs, rhs)
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> PureAtom {
        PureAtom::new(self.op, f(&self.lhs), f(&self.rhs))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpatialAtom {
    Emp,
    PointsTo(Term, Term),
    Arr(Term, Term),
    /// Negative array: every cell of `[lo, hi)` is deallocated.
    NegArr(Term, Term),
}

impl SpatialAtom {
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> SpatialAtom {
        match self {
            SpatialAtom::Emp => SpatialAtom::Emp,
            SpatialAtom::PointsTo(a, v) => SpatialAtom::PointsTo(f(a), f(v)),
            SpatialAtom::Arr(a, b) => SpatialAtom::Arr(f(a), f(b)),
            SpatialAtom::NegArr(a, b) => SpatialAtom::NegArr(f(a), f(b)),
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            SpatialAtom::Emp => vec![],
            SpatialAtom::PointsTo(a, v) => vec![a, v],
            SpatialAtom::Arr(a, b) | SpatialAtom::NegArr(a, b) => vec![a, b],
        }
    }
}

/// A symbolic heap `ψ`: a `*`-conjunction of spatial and pure atoms, kept
/// as sorted multisets so that equality is syntactic equality modulo
/// reordering.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolicHeap {
    spatial: Vec<SpatialAtom>,
    pure: Vec<PureAtom>,
}

impl SymbolicHeap {
    pub fn new(mut spatial: Vec<SpatialAtom>, mut pure: Vec<PureAtom>) -> Self {
        spatial.sort();
        pure.sort();
        pure.dedup();
        SymbolicHeap { spatial, pure }
    }

    pub fn emp() -> Self {
        SymbolicHeap::new(vec![SpatialAtom::Emp], vec![])
    }

    pub fn spatial(&self) -> &[SpatialAtom] {
        &self.spatial
    }

    pub fn pure(&self) -> &[PureAtom] {
        &self.pure
    }

    pub fn is_empty(&self) -> bool {
        self.spatial.is_empty() && self.pure.is_empty()
    }

    pub fn with_pure(mut self, atoms: impl IntoIterator<Item = PureAtom>) -> Self {
        self.pure.extend(atoms);
        self.pure.sort();
        self.pure.dedup();
        self
    }

    pub fn with_spatial(mut self, atoms: impl IntoIterator<Item = SpatialAtom>) -> Self {
        self.spatial.extend(atoms);
        self.spatial.sort();
        self
    }

    pub fn star(&self, other: &SymbolicHeap) -> SymbolicHeap {
        let mut s = self.spatial.clone();
        s.extend(other.spatial.iter().cloned());
        let mut p = self.pure.clone();
        p.extend(other.pure.iter().cloned());
        SymbolicHeap::new(s, p)
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> SymbolicHeap {
        SymbolicHeap::new(
            self.spatial.iter().map(|a| a.map_terms(&mut f)).collect(),
            self.pure.iter().map(|a| a.map_terms(&mut f)).collect(),
        )
    }

    pub fn free_vars(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        for a in &self.spatial {
            for t in a.terms() {
                t.collect_vars(&mut out);
            }
        }
        for a in &self.pure {
            a.lhs.collect_vars(&mut out);
            a.rhs.collect_vars(&mut out);
        }
        out
    }
}

/// Label of the atomic command that produced an error disjunct. Ignored by
/// equality and hashing.
#[derive(Clone, Debug, Default)]
pub struct Origin(pub Option<String>);

impl PartialEq for Origin {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for Origin {}
impl Hash for Origin {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Disjunct {
    pub bound: Vec<Ident>,
    pub body: SymbolicHeap,
    pub origin: Origin,
}

impl Disjunct {
    pub fn new(bound: Vec<Ident>, body: SymbolicHeap) -> Self {
        Disjunct { bound, body, origin: Origin::default() }
    }

    pub fn plain(body: SymbolicHeap) -> Self {
        Disjunct::new(vec![], body)
    }

    pub fn with_origin(mut self, origin: Option<String>) -> Self {
        self.origin = Origin(origin);
        self
    }

    pub fn free_vars(&self) -> Vec<Ident> {
        let mut v = self.body.free_vars();
        v.retain(|x| !self.bound.contains(x));
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    pub reason: String,
}

/// A finite disjunction of existentially quantified symbolic heaps. When
/// `truncated` is set the disjunction is a prefix of a longer (possibly
/// infinite) one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Assertion {
    pub disjuncts: Vec<Disjunct>,
    pub truncated: Option<Truncation>,
}

impl Assertion {
    pub fn falsum() -> Self {
        Assertion::default()
    }

    pub fn single(body: SymbolicHeap) -> Self {
        Assertion { disjuncts: vec![Disjunct::plain(body)], truncated: None }
    }

    pub fn from_disjuncts(disjuncts: Vec<Disjunct>) -> Self {
        Assertion { disjuncts, truncated: None }
    }

    pub fn is_false(&self) -> bool {
        self.disjuncts.is_empty()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated.is_some()
    }

    pub fn mark_truncated(&mut self, reason: impl Into<String>) {
        if self.truncated.is_none() {
            self.truncated = Some(Truncation { reason: reason.into() });
        }
    }

    /// Appends the disjuncts of `other`, keeping the first truncation reason.
    pub fn extend(&mut self, other: Assertion) {
        self.disjuncts.extend(other.disjuncts);
        if self.truncated.is_none() {
            self.truncated = other.truncated;
        }
    }

    pub fn free_vars(&self) -> Vec<Ident> {
        let mut out: Vec<Ident> = Vec::new();
        for d in &self.disjuncts {
            for v in d.free_vars() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Syntactic equality ignoring disjunct order.
    pub fn same_disjuncts(&self, other: &Assertion) -> bool {
        let mut a = self.disjuncts.clone();
        let mut b = other.disjuncts.clone();
        let key = |d: &Disjunct| (d.bound.clone(), d.body.clone());
        a.sort_by_key(key);
        b.sort_by_key(key);
        a == b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exit {
    Ok,
    Er,
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exit::Ok => "ok",
            Exit::Er => "er",
        })
    }
}

impl std::str::FromStr for Exit {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ok" => Ok(Exit::Ok),
            "er" => Ok(Exit::Er),
            _ => Err(format!("unknown exit condition `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Skip,
    Assign(Ident, Term),
    Havoc(Ident),
    Assume(Vec<PureAtom>),
    Local(Ident, Box<Command>),
    LocalInit(Ident, Term, Box<Command>),
    Seq(Box<Command>, Box<Command>),
    Choice(Box<Command>, Box<Command>),
    Star(Box<Command>),
    Error,
    Alloc(Ident, Term),
    Free(Term),
    Load(Ident, Term),
    Store(Term, Term),
}

impl Command {
    pub fn seq(a: Command, b: Command) -> Command {
        Command::Seq(Box::new(a), Box::new(b))
    }
    pub fn choice(a: Command, b: Command) -> Command {
        Command::Choice(Box::new(a), Box::new(b))
    }
    pub fn star(c: Command) -> Command {
        Command::Star(Box::new(c))
    }

    pub fn has_star(&self) -> bool {
        match self {
            Command::Star(_) => true,
            Command::Local(_, c) | Command::LocalInit(_, _, c) => c.has_star(),
            Command::Seq(a, b) | Command::Choice(a, b) => a.has_star() || b.has_star(),
            _ => false,
        }
    }

    pub fn is_atomic_heap(&self) -> bool {
        matches!(
            self,
            Command::Alloc(..) | Command::Free(_) | Command::Load(..) | Command::Store(..)
        )
    }

    /// Every variable mentioned, including local binders.
    pub fn vars(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Ident>) {
        let push = |x: &Ident, out: &mut Vec<Ident>| {
            if !out.contains(x) {
                out.push(x.clone())
            }
        };
        match self {
            Command::Skip | Command::Error => {}
            Command::Assign(x, t) | Command::Alloc(x, t) | Command::Load(x, t) => {
                push(x, out);
                t.collect_vars(out);
            }
            Command::Havoc(x) => push(x, out),
            Command::Assume(ps) => {
                for p in ps {
                    p.lhs.collect_vars(out);
                    p.rhs.collect_vars(out);
                }
            }
            Command::Local(x, c) => {
                push(x, out);
                c.collect_vars(out);
            }
            Command::LocalInit(x, t, c) => {
                push(x, out);
                t.collect_vars(out);
                c.collect_vars(out);
            }
            Command::Seq(a, b) | Command::Choice(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Command::Star(c) => c.collect_vars(out),
            Command::Free(t) => t.collect_vars(out),
            Command::Store(a, v) => {
                a.collect_vars(out);
                v.collect_vars(out);
            }
        }
    }
}
