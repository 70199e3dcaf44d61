use std::fmt;

use super::ast::{
    Assertion, Command, Disjunct, PureAtom, PureOp, SpatialAtom, SymbolicHeap, Term,
};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Null => f.write_str("null"),
            Term::Nat(n) => write!(f, "{n}"),
            Term::Var(x) => write!(f, "{x}"),
            Term::Add(l, r) => {
                if matches!(**r, Term::Add(..)) {
                    write!(f, "{l} + ({r})")
                } else {
                    write!(f, "{l} + {r}")
                }
            }
            Term::Base(a) => write!(f, "b({a})"),
            Term::End(a) => write!(f, "e({a})"),
        }
    }
}

impl fmt::Display for PureOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PureOp::Eq => "==",
            PureOp::Ne => "!=",
            PureOp::Le => "<=",
            PureOp::Lt => "<",
        })
    }
}

impl fmt::Display for PureAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op, self.rhs)
    }
}

impl fmt::Display for SpatialAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpatialAtom::Emp => f.write_str("emp"),
            SpatialAtom::PointsTo(a, v) => write!(f, "{a} |-> {v}"),
            SpatialAtom::Arr(a, b) => write!(f, "arr({a}, {b})"),
            SpatialAtom::NegArr(a, b) => write!(f, "narr({a}, {b})"),
        }
    }
}

impl fmt::Display for SymbolicHeap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("emp");
        }
        let mut first = true;
        for a in self.spatial() {
            if !first {
                f.write_str(" * ")?;
            }
            first = false;
            write!(f, "{a}")?;
        }
        for a in self.pure() {
            if !first {
                f.write_str(" * ")?;
            }
            first = false;
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Disjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.bound.is_empty() {
            f.write_str("exists")?;
            for b in &self.bound {
                write!(f, " {b}")?;
            }
            f.write_str(". ")?;
        }
        write!(f, "{}", self.body)
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.disjuncts.is_empty() {
            return f.write_str("false");
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" \\/ ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl Assertion {
    /// One disjunct per line, with a trailing comment when truncated.
    pub fn to_pretty(&self) -> String {
        let mut s = String::new();
        if self.disjuncts.is_empty() {
            s.push_str("false\n");
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                s.push_str("\\/ ");
            }
            s.push_str(&d.to_string());
            s.push('\n');
        }
        if let Some(t) = &self.truncated {
            s.push_str(&format!("// truncated: {}\n", t.reason));
        }
        s
    }
}

fn write_pure_list(f: &mut fmt::Formatter<'_>, ps: &[PureAtom]) -> fmt::Result {
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            f.write_str(" * ")?;
        }
        write!(f, "{p}")?;
    }
    Ok(())
}

struct Braced<'a>(&'a Command);

impl fmt::Display for Braced<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{ {} }}", self.0)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Skip => f.write_str("skip"),
            Command::Assign(x, t) => write!(f, "{x} := {t}"),
            Command::Havoc(x) => write!(f, "{x} := *"),
            Command::Assume(ps) => {
                f.write_str("assume(")?;
                write_pure_list(f, ps)?;
                f.write_str(")")
            }
            Command::Local(x, c) => write!(f, "local {x} in {}", Braced(c)),
            Command::LocalInit(x, t, c) => write!(f, "local {x} := {t} in {}", Braced(c)),
            Command::Seq(a, b) => {
                if matches!(**a, Command::Seq(..)) {
                    write!(f, "{}; {b}", Braced(a))
                } else {
                    write!(f, "{a}; {b}")
                }
            }
            Command::Choice(a, b) => {
                if matches!(**a, Command::Choice(..)) {
                    write!(f, "{a}")?;
                } else {
                    write!(f, "{}", Braced(a))?;
                }
                write!(f, " + {}", Braced(b))
            }
            Command::Star(c) => write!(f, "{}*", Braced(c)),
            Command::Error => f.write_str("error()"),
            Command::Alloc(x, t) => write!(f, "{x} := alloc({t})"),
            Command::Free(t) => write!(f, "free({t})"),
            Command::Load(x, t) => write!(f, "{x} := [{t}]"),
            Command::Store(t, v) => write!(f, "[{t}] := {v}"),
        }
    }
}
