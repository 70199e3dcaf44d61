//! Seeded random generation of small preconditions and loop-free programs.
//!
//! Values written to memory or compared against are variables, small
//! constants or `null`, which keeps every generated instance inside a small
//! universe.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::syntax::{Assertion, Command, Exit, Ident, PureAtom, PureOp, SpatialAtom, SymbolicHeap, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    /// Number of program variables, at most 3.
    pub vars: usize,
    pub max_spatial: usize,
    pub max_pure: usize,
    /// Largest constant and array length.
    pub max_const: u64,
    /// Largest number of atomic commands in sequence.
    pub max_commands: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { vars: 3, max_spatial: 2, max_pure: 1, max_const: 2, max_commands: 2 }
    }
}

const NAMES: [&str; 3] = ["x", "y", "z"];

/// One generated instance.
#[derive(Clone, Debug)]
pub struct GenCase {
    pub index: usize,
    pub pre: Assertion,
    pub prog: Command,
    pub exit: Exit,
}

pub struct Generator {
    rng: ChaCha8Rng,
    cfg: GenConfig,
}

impl Generator {
    pub fn new(seed: u64, cfg: GenConfig) -> Self {
        Generator { rng: ChaCha8Rng::seed_from_u64(seed), cfg }
    }

    fn var(&mut self) -> Term {
        let n = self.cfg.vars.clamp(1, NAMES.len());
        Term::var(NAMES[self.rng.gen_range(0..n)])
    }

    fn ident(&mut self) -> Ident {
        match self.var() {
            Term::Var(x) => x,
            _ => unreachable!(),
        }
    }

    fn constant(&mut self) -> Term {
        Term::Nat(self.rng.gen_range(1..=self.cfg.max_const.max(1)))
    }

    /// A location: `x` or `x + n`.
    fn location(&mut self) -> Term {
        let v = self.var();
        if self.rng.gen_bool(0.3) {
            let n = self.constant();
            Term::add(v, n)
        } else {
            v
        }
    }

    /// A stored or compared value.
    fn value(&mut self) -> Term {
        match self.rng.gen_range(0..4) {
            0 => Term::Null,
            1 => self.constant(),
            _ => self.var(),
        }
    }

    fn spatial(&mut self) -> SpatialAtom {
        let l = self.var();
        match self.rng.gen_range(0..4) {
            0 | 1 => SpatialAtom::PointsTo(l, self.value()),
            2 => {
                let n = self.constant();
                SpatialAtom::Arr(l.clone(), Term::add(l, n))
            }
            _ => {
                let n = self.constant();
                SpatialAtom::NegArr(l.clone(), Term::add(l, n))
            }
        }
    }

    fn pure(&mut self) -> PureAtom {
        let op = *[PureOp::Eq, PureOp::Ne, PureOp::Le, PureOp::Lt].choose(&mut self.rng).unwrap();
        let l = self.var();
        let r = if self.rng.gen_bool(0.2) { Term::base(self.var()) } else { self.value() };
        PureAtom::new(op, l, r)
    }

    pub fn assertion(&mut self) -> Assertion {
        let ns = self.rng.gen_range(0..=self.cfg.max_spatial);
        let np = self.rng.gen_range(0..=self.cfg.max_pure);
        let mut sp: Vec<SpatialAtom> = (0..ns).map(|_| self.spatial()).collect();
        if sp.is_empty() {
            sp.push(SpatialAtom::Emp);
        }
        let pu = (0..np).map(|_| self.pure()).collect();
        Assertion::single(SymbolicHeap::new(sp, pu))
    }

    fn atomic(&mut self) -> Command {
        match self.rng.gen_range(0..20) {
            0 => Command::Skip,
            1 => Command::Error,
            2 | 3 => {
                let x = self.ident();
                let t = if self.rng.gen_bool(0.5) { self.value() } else { Term::add(self.var(), self.constant()) };
                Command::Assign(x, t)
            }
            4 => Command::Havoc(self.ident()),
            5 => Command::Assume(vec![self.pure()]),
            6 | 7 | 8 => {
                let x = self.ident();
                Command::Alloc(x, self.constant())
            }
            9 | 10 | 11 => Command::Free(self.location()),
            12 | 13 | 14 => {
                let x = self.ident();
                Command::Load(x, self.location())
            }
            _ => Command::Store(self.location(), self.value()),
        }
    }

    pub fn command(&mut self) -> Command {
        let n = self.rng.gen_range(1..=self.cfg.max_commands.max(1));
        let mut c = self.atomic();
        if self.rng.gen_bool(0.15) {
            c = Command::choice(c, self.atomic());
        }
        for _ in 1..n {
            c = Command::seq(c, self.atomic());
        }
        c
    }

    pub fn case(&mut self, index: usize) -> GenCase {
        let pre = self.assertion();
        let prog = self.command();
        let exit = if self.rng.gen_bool(0.5) { Exit::Ok } else { Exit::Er };
        GenCase { index, pre, prog, exit }
    }
}

/// `count` instances from one seed.
pub fn random_cases(seed: u64, count: usize, cfg: GenConfig) -> Vec<GenCase> {
    let mut g = Generator::new(seed, cfg);
    (0..count).map(|i| g.case(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = random_cases(7, 20, GenConfig::default());
        let b = random_cases(7, 20, GenConfig::default());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.pre, y.pre);
            assert_eq!(x.prog, y.prog);
            assert_eq!(x.exit, y.exit);
        }
    }

    #[test]
    fn respects_bounds() {
        for c in random_cases(3, 200, GenConfig::default()) {
            assert!(c.pre.free_vars().len() <= 3);
            let d = &c.pre.disjuncts[0];
            assert!(d.body.spatial().len() <= 2);
            assert!(!c.prog.has_star());
        }
    }
}
