//! Weakest exact postconditions, computed syntactically.

mod heap;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canonical::{cano, CanoOptions};
use crate::entailment::PureSolver;
use crate::error::Result;
use crate::syntax::{
    subst_heap, Assertion, Command, Disjunct, Exit, FreshGen, PureAtom, SymbolicHeap, Term,
};

/// Bounds on the symbolic computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WpoBudget {
    /// Number of unrollings of each loop.
    pub loop_bound: usize,
    /// Maximum disjuncts kept in any intermediate assertion.
    pub disjunct_cap: usize,
    pub cano: CanoOptions,
}

impl Default for WpoBudget {
    fn default() -> Self {
        WpoBudget { loop_bound: 3, disjunct_cap: 100_000, cano: CanoOptions::default() }
    }
}

/// Which version of the array load/store rules to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleVariant {
    /// Load from an array cell records the loaded value, and a store into a
    /// one-cell array is handled.
    #[default]
    Corrected,
    /// The rules exactly as originally stated.
    Literal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WpoOptions {
    pub budget: WpoBudget,
    pub variant: RuleVariant,
}

/// Stateful computation context: fresh names and a trace of which rule
/// branches produced satisfiable output.
#[derive(Debug, Clone)]
pub struct Wpo {
    opts: WpoOptions,
    fresh: FreshGen,
    trace: BTreeMap<&'static str, usize>,
}

impl Wpo {
    pub fn new(opts: WpoOptions) -> Self {
        Wpo { opts, fresh: FreshGen::new(), trace: BTreeMap::new() }
    }

    pub fn options(&self) -> &WpoOptions {
        &self.opts
    }

    /// Rule branches taken, with the number of satisfiable disjuncts each
    /// produced.
    pub fn trace(&self) -> &BTreeMap<&'static str, usize> {
        &self.trace
    }

    pub(crate) fn note(&mut self, label: &'static str, n: usize) {
        if n > 0 {
            *self.trace.entry(label).or_insert(0) += n;
        }
    }

    pub(crate) fn fresh(&mut self) -> crate::syntax::Ident {
        self.fresh.fresh()
    }

    /// Keeps generated names clear of those used by `p` and `c`.
    pub fn reserve(&mut self, p: &Assertion, c: &Command) {
        self.fresh.reserve_assertion(p);
        self.fresh.reserve_command(c);
    }

    /// Top-level entry: reserves the names used by the inputs, then computes
    /// the postcondition.
    pub fn run(&mut self, p: &Assertion, c: &Command, exit: Exit) -> Result<Assertion> {
        self.reserve(p, c);
        self.wpo(p, c, exit)
    }

    /// `wpo(P, C, ε)`: canonicalise `P` for `C`, then apply the
    /// symbolic-heap rules disjunct by disjunct.
    pub fn wpo(&mut self, p: &Assertion, c: &Command, exit: Exit) -> Result<Assertion> {
        let canon = cano(p, c, &self.opts.budget.cano, &mut self.fresh)?;
        let mut out = Assertion { disjuncts: Vec::new(), truncated: canon.truncated.clone() };
        for d in &canon.disjuncts {
            let r = self.wpo_sh(&d.body, c, exit)?;
            if let Some(t) = r.truncated {
                if out.truncated.is_none() {
                    out.truncated = Some(t);
                }
            }
            for rd in r.disjuncts {
                let mut bound = d.bound.clone();
                bound.extend(rd.bound);
                out.disjuncts.push(Disjunct { bound, body: rd.body, origin: rd.origin });
            }
        }
        self.cap(&mut out);
        Ok(out)
    }

    fn cap(&self, a: &mut Assertion) {
        let cap = self.opts.budget.disjunct_cap;
        if a.disjuncts.len() > cap {
            a.disjuncts.truncate(cap);
            a.mark_truncated(format!("disjunct cap {cap} reached"));
        }
    }

    /// `wpo_sh(ψ, C, ε)` for a symbolic heap canonical with respect to `C`.
    pub fn wpo_sh(&mut self, psi: &SymbolicHeap, c: &Command, exit: Exit) -> Result<Assertion> {
        let single = |h: SymbolicHeap| Assertion::single(h);
        match c {
            Command::Skip => Ok(match exit {
                Exit::Ok => single(psi.clone()),
                Exit::Er => Assertion::falsum(),
            }),
            Command::Error => Ok(match exit {
                Exit::Ok => Assertion::falsum(),
                Exit::Er => {
                    self.note("error", 1);
                    Assertion::from_disjuncts(vec![
                        Disjunct::plain(psi.clone()).with_origin(Some(c.to_string()))
                    ])
                }
            }),
            Command::Assume(b) => Ok(match exit {
                Exit::Ok => single(psi.clone().with_pure(b.iter().cloned())),
                Exit::Er => Assertion::falsum(),
            }),
            Command::Assign(x, t) => Ok(match exit {
                Exit::Ok => {
                    let x1 = self.fresh();
                    let v1 = Term::Var(x1.clone());
                    let body = subst_heap(psi, x, &v1)
                        .with_pure([PureAtom::eq(Term::Var(x.clone()), crate::syntax::subst_term(t, x, &v1))]);
                    Assertion::from_disjuncts(vec![Disjunct::new(vec![x1], body)])
                }
                Exit::Er => Assertion::falsum(),
            }),
            Command::Havoc(x) => Ok(match exit {
                Exit::Ok => {
                    let x1 = self.fresh();
                    let body = subst_heap(psi, x, &Term::Var(x1.clone()));
                    Assertion::from_disjuncts(vec![Disjunct::new(vec![x1], body)])
                }
                Exit::Er => Assertion::falsum(),
            }),
            Command::Local(x, body) => {
                let x1 = self.fresh();
                let inner = subst_heap(psi, x, &Term::Var(x1.clone()));
                let w = self.wpo(&Assertion::single(inner), body, exit)?;
                let mut out = Assertion { disjuncts: Vec::new(), truncated: w.truncated.clone() };
                for d in w.disjuncts {
                    let x2 = self.fresh();
                    let b = subst_heap(&d.body, x, &Term::Var(x2.clone()));
                    let b = subst_heap(&b, &x1, &Term::Var(x.clone()));
                    let mut bound = d.bound.clone();
                    bound.push(x2);
                    out.disjuncts.push(Disjunct { bound, body: b, origin: d.origin });
                }
                Ok(out)
            }
            Command::LocalInit(x, t, body) => {
                // local x := t in C  ==  local f in (f := t; local x in (x := f; C))
                let f = self.fresh();
                let inner = Command::Local(
                    x.clone(),
                    Box::new(Command::seq(Command::Assign(x.clone(), Term::Var(f.clone())), (**body).clone())),
                );
                let outer = Command::Local(f.clone(), Box::new(Command::seq(Command::Assign(f, t.clone()), inner)));
                self.wpo_sh(psi, &outer, exit)
            }
            Command::Seq(c1, c2) => {
                let first = self.wpo_sh(psi, c1, Exit::Ok)?;
                match exit {
                    Exit::Ok => self.wpo(&first, c2, Exit::Ok),
                    Exit::Er => {
                        let mut out = self.wpo_sh(psi, c1, Exit::Er)?;
                        out.extend(self.wpo(&first, c2, Exit::Er)?);
                        self.cap(&mut out);
                        Ok(out)
                    }
                }
            }
            Command::Choice(c1, c2) => {
                let mut out = self.wpo_sh(psi, c1, exit)?;
                out.extend(self.wpo_sh(psi, c2, exit)?);
                self.cap(&mut out);
                Ok(out)
            }
            Command::Star(body) => self.star(psi, body, exit),
            Command::Alloc(..) | Command::Free(_) | Command::Load(..) | Command::Store(..) => {
                if !PureSolver::for_heap(psi).is_sat() {
                    return Ok(Assertion::falsum());
                }
                heap::heap_rule(self, psi, c, exit)
            }
        }
    }

    /// Loops: `Υ(0) = ψ`, `Υ(n+1) = wpo(Υ(n), C, ok)`, unrolled up to the
    /// loop bound. The ok result is the union of the `Υ(n)`; the er result
    /// the union of `wpo(Υ(n), C, er)` for `n` below the bound.
    fn star(&mut self, psi: &SymbolicHeap, body: &Command, exit: Exit) -> Result<Assertion> {
        let k = self.opts.budget.loop_bound;
        let mut upsilon = Assertion::single(psi.clone());
        let mut out = Assertion::falsum();
        let mut exhausted = false;
        for n in 0..=k {
            match exit {
                Exit::Ok => out.extend(upsilon.clone()),
                Exit::Er if n < k => out.extend(self.wpo(&upsilon, body, Exit::Er)?),
                Exit::Er => {}
            }
            if n == k || (exit == Exit::Er && n + 1 == k) {
                break;
            }
            upsilon = self.wpo(&upsilon, body, Exit::Ok)?;
            if upsilon.is_false() && !upsilon.is_truncated() {
                exhausted = true;
                break;
            }
        }
        if !exhausted {
            out.mark_truncated(format!("loop unrolled {k} times"));
        }
        self.cap(&mut out);
        Ok(out)
    }
}

/// One-shot `wpo(P, C, ε)` with default rule variant.
pub fn wpo(p: &Assertion, c: &Command, exit: Exit, budget: &WpoBudget) -> Result<Assertion> {
    Wpo::new(WpoOptions { budget: *budget, variant: RuleVariant::Corrected }).run(p, c, exit)
}
