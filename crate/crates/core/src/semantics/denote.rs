//! Denotational semantics of commands as relations on exact states, run
//! forward from individual states inside a bounded universe. Transitions
//! that would leave the universe (values above `vmax`, cells at or above it)
//! are blocked.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, Ordering};

use crate::error::Result;
use crate::par;
use crate::syntax::{Assertion, Command, Exit};

use super::eval::{CAtom, CTerm, SlotMap};
use super::models::{CompiledAssertion, Scope, StateSet};
use super::state::{Layout, PState, PView, Universe, ABSENT, BOT, OUTSIDE};

#[derive(Clone, Debug)]
enum CCmd {
    Skip,
    Assign(usize, CTerm),
    Havoc(usize),
    Assume(Vec<CAtom>),
    Local(usize, Box<CCmd>),
    LocalInit(usize, CTerm, Box<CCmd>),
    Seq(Box<CCmd>, Box<CCmd>),
    Choice(Box<CCmd>, Box<CCmd>),
    Star(Box<CCmd>),
    Error,
    Alloc(usize, CTerm),
    Free(CTerm),
    Load(usize, CTerm),
    Store(CTerm, CTerm),
}

fn compile(c: &Command, sm: &SlotMap) -> Result<CCmd> {
    let slot = |x| {
        sm.lookup(x).ok_or_else(|| {
            crate::IslError::Precondition(format!("variable `{x}` is not in the universe"))
        })
    };
    Ok(match c {
        Command::Skip => CCmd::Skip,
        Command::Assign(x, t) => CCmd::Assign(slot(x)?, sm.term(t)?),
        Command::Havoc(x) => CCmd::Havoc(slot(x)?),
        Command::Assume(ps) => CCmd::Assume(ps.iter().map(|p| sm.atom(p)).collect::<Result<_>>()?),
        Command::Local(x, body) => CCmd::Local(slot(x)?, Box::new(compile(body, sm)?)),
        Command::LocalInit(x, t, body) => {
            CCmd::LocalInit(slot(x)?, sm.term(t)?, Box::new(compile(body, sm)?))
        }
        Command::Seq(a, b) => CCmd::Seq(Box::new(compile(a, sm)?), Box::new(compile(b, sm)?)),
        Command::Choice(a, b) => CCmd::Choice(Box::new(compile(a, sm)?), Box::new(compile(b, sm)?)),
        Command::Star(body) => CCmd::Star(Box::new(compile(body, sm)?)),
        Command::Error => CCmd::Error,
        Command::Alloc(x, t) => CCmd::Alloc(slot(x)?, sm.term(t)?),
        Command::Free(t) => CCmd::Free(sm.term(t)?),
        Command::Load(x, t) => CCmd::Load(slot(x)?, sm.term(t)?),
        Command::Store(t, v) => CCmd::Store(sm.term(t)?, sm.term(v)?),
    })
}

/// A command compiled against a universe, ready to execute.
pub struct Executor {
    universe: Universe,
    layout: Layout,
    cmd: CCmd,
    cut: AtomicBool,
}

type Out = HashSet<PState>;

impl Executor {
    pub fn new(c: &Command, u: &Universe) -> Result<Self> {
        let sm = SlotMap::new(&u.vars);
        Ok(Executor {
            universe: u.clone(),
            layout: u.layout(),
            cmd: compile(c, &sm)?,
            cut: AtomicBool::new(false),
        })
    }

    /// Whether some loop still had unexplored states when its bound ran out.
    pub fn was_cut(&self) -> bool {
        self.cut.load(Ordering::Relaxed)
    }

    fn slots(&self, st: &PState) -> Vec<u64> {
        (0..self.layout.nvars).map(|i| self.layout.get(st, i)).collect()
    }

    fn eval(&self, t: &CTerm, st: &PState) -> u64 {
        let slots = self.slots(st);
        t.eval(&slots, &PView { layout: self.layout, st })
    }

    pub(crate) fn run(&self, st: &PState, exit: Exit) -> Out {
        let mut out = Out::new();
        self.exec(&self.cmd, st, exit, &mut out);
        out
    }

    fn exec(&self, c: &CCmd, st: &PState, exit: Exit, out: &mut Out) {
        let lay = self.layout;
        let vmax = self.universe.vmax;
        match c {
            CCmd::Skip => {
                if exit == Exit::Ok {
                    out.insert(st.clone());
                }
            }
            CCmd::Error => {
                if exit == Exit::Er {
                    out.insert(st.clone());
                }
            }
            CCmd::Assign(x, t) => {
                if exit == Exit::Ok {
                    let v = self.eval(t, st);
                    if v <= vmax {
                        let mut s = st.clone();
                        lay.set(&mut s, *x, v);
                        out.insert(s);
                    }
                }
            }
            CCmd::Havoc(x) => {
                if exit == Exit::Ok {
                    for v in 0..=vmax {
                        let mut s = st.clone();
                        lay.set(&mut s, *x, v);
                        out.insert(s);
                    }
                }
            }
            CCmd::Assume(ps) => {
                if exit == Exit::Ok {
                    let slots = self.slots(st);
                    let view = PView { layout: lay, st };
                    if ps.iter().all(|p| p.holds(&slots, &view)) {
                        out.insert(st.clone());
                    }
                }
            }
            CCmd::Local(x, body) => {
                let old = lay.get(st, *x);
                for v in 0..=vmax {
                    let mut s = st.clone();
                    lay.set(&mut s, *x, v);
                    self.restore(body, &s, exit, *x, old, out);
                }
            }
            CCmd::LocalInit(x, t, body) => {
                let old = lay.get(st, *x);
                let v = self.eval(t, st);
                if v <= vmax {
                    let mut s = st.clone();
                    lay.set(&mut s, *x, v);
                    self.restore(body, &s, exit, *x, old, out);
                }
            }
            CCmd::Seq(a, b) => {
                let mut mid = Out::new();
                self.exec(a, st, Exit::Ok, &mut mid);
                if exit == Exit::Er {
                    self.exec(a, st, Exit::Er, out);
                }
                for s in &mid {
                    self.exec(b, s, exit, out);
                }
            }
            CCmd::Choice(a, b) => {
                self.exec(a, st, exit, out);
                self.exec(b, st, exit, out);
            }
            CCmd::Star(body) => {
                // Unions C^m for m <= loop_bound; a state reached again later
                // has no more budget left than on its first visit.
                let mut seen = Out::new();
                seen.insert(st.clone());
                let mut frontier = vec![st.clone()];
                if exit == Exit::Ok {
                    out.insert(st.clone());
                }
                for _ in 0..self.universe.loop_bound {
                    if frontier.is_empty() {
                        break;
                    }
                    let mut next = Out::new();
                    for s in &frontier {
                        if exit == Exit::Er {
                            self.exec(body, s, Exit::Er, out);
                        }
                        self.exec(body, s, Exit::Ok, &mut next);
                    }
                    frontier = next.into_iter().filter(|s| seen.insert(s.clone())).collect();
                    if exit == Exit::Ok {
                        out.extend(frontier.iter().cloned());
                    }
                }
                if !frontier.is_empty() {
                    self.cut.store(true, Ordering::Relaxed);
                }
            }
            CCmd::Alloc(x, t) => {
                if exit == Exit::Er {
                    return;
                }
                let n = self.eval(t, st);
                if n == 0 {
                    return;
                }
                for lo in 1..=vmax {
                    let hi = lo + n;
                    if hi > vmax {
                        break;
                    }
                    if (lo..hi).any(|l| lay.mark(st, l) != OUTSIDE) {
                        continue;
                    }
                    let mut s = st.clone();
                    lay.add_block(&mut s, lo, hi);
                    lay.set(&mut s, *x, lo);
                    fill(lay, vmax, &mut s, lo, hi, out);
                }
            }
            CCmd::Free(t) => {
                let l = self.eval(t, st);
                let b = lay.base(st, l);
                let ok = b > 0 && b == l;
                match exit {
                    Exit::Ok if ok => {
                        let e = lay.end(st, l);
                        let mut s = st.clone();
                        for k in b..e {
                            lay.set_cell(&mut s, k, BOT);
                            lay.set_mark(&mut s, k, OUTSIDE);
                        }
                        out.insert(s);
                    }
                    Exit::Er if !ok => {
                        out.insert(st.clone());
                    }
                    _ => {}
                }
            }
            CCmd::Load(x, t) => {
                let l = self.eval(t, st);
                let b = lay.base(st, l);
                match exit {
                    Exit::Ok if b > 0 => {
                        let raw = lay.cell(st, l);
                        if raw != ABSENT && raw != BOT {
                            let mut s = st.clone();
                            lay.set(&mut s, *x, raw as u64 - 2);
                            out.insert(s);
                        }
                    }
                    Exit::Er if b == 0 => {
                        out.insert(st.clone());
                    }
                    _ => {}
                }
            }
            CCmd::Store(t, v) => {
                let l = self.eval(t, st);
                let b = lay.base(st, l);
                match exit {
                    Exit::Ok if b > 0 => {
                        let v = self.eval(v, st);
                        if v <= vmax {
                            let mut s = st.clone();
                            lay.set_cell(&mut s, l, v as u8 + 2);
                            out.insert(s);
                        }
                    }
                    Exit::Er if b == 0 => {
                        out.insert(st.clone());
                    }
                    _ => {}
                }
            }
        }
    }

    fn restore(&self, body: &CCmd, s: &PState, exit: Exit, x: usize, old: u64, out: &mut Out) {
        let mut inner = Out::new();
        self.exec(body, s, exit, &mut inner);
        for mut r in inner {
            self.layout.set(&mut r, x, old);
            out.insert(r);
        }
    }
}

fn fill(lay: Layout, vmax: u64, st: &mut PState, lo: u64, hi: u64, out: &mut Out) {
    if lo == hi {
        out.insert(st.clone());
        return;
    }
    for v in 0..=vmax {
        lay.set_cell(st, lo, v as u8 + 2);
        fill(lay, vmax, st, lo + 1, hi, out);
    }
}

/// Post-states reachable from exact models of `pre` with exit `exit`,
/// restricted to the universe.
pub fn wpo_semantic(pre: &Assertion, c: &Command, exit: Exit, u: &Universe) -> Result<StateSet> {
    let pre_models = CompiledAssertion::new(pre, u)?.models(Scope::Exact);
    post_states(&pre_models, c, exit, u)
}

pub(crate) fn post_states(pre: &StateSet, c: &Command, exit: Exit, u: &Universe) -> Result<StateSet> {
    let ex = Executor::new(c, u)?;
    let lay = u.layout();
    let starts: Vec<PState> = pre.states.iter().cloned().collect();
    let parts: Vec<Vec<PState>> = par::map(&starts, |s| {
        ex.run(s, exit).into_iter().filter(|p| lay.dom_size(p) <= u.heap_cap).collect()
    });
    let mut set = StateSet::new(u.clone());
    for p in parts {
        set.states.extend(p);
    }
    set.truncated = pre.truncated || ex.was_cut();
    Ok(set)
}

/// Runs `c` from one concrete state.
pub fn denote(
    c: &Command,
    st: &super::state::ConcreteState,
    exit: Exit,
    u: &Universe,
) -> Result<Vec<super::state::ConcreteState>> {
    let ex = Executor::new(c, u)?;
    let lay = u.layout();
    let Some(p) = lay.from_concrete(u, st) else {
        return Err(crate::IslError::Precondition("state does not fit the universe".into()));
    };
    let mut v: Vec<_> = ex.run(&p, exit).iter().map(|s| lay.to_concrete(u, s)).collect();
    v.sort();
    Ok(v)
}
