//! Difference-bound matrices: conjunctions of `v - u <= w` over the
//! naturals, kept closed under shortest paths.

use super::linear::{LinExpr, Lit};

const INF: i64 = i64::MAX / 4;

/// `to - from <= w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub w: i64,
}

/// Edges of `sign·e <= 0`, with node `zero` standing for the constant 0.
fn edge_of(e: &LinExpr, sign: i64, zero: usize) -> Option<Option<Edge>> {
    let w = -sign * e.constant;
    let mut pos = None;
    let mut neg = None;
    for (&v, &c) in &e.coeffs {
        match c * sign {
            1 if pos.is_none() => pos = Some(v as usize),
            -1 if neg.is_none() => neg = Some(v as usize),
            _ => return None,
        }
    }
    Some(match (pos, neg) {
        (None, None) => (w < 0).then_some(Edge { from: zero, to: zero, w }),
        (to, from) => Some(Edge { from: from.unwrap_or(zero), to: to.unwrap_or(zero), w }),
    })
}

/// The edges of a literal, or `None` if it is not a difference constraint.
pub fn edges(l: &Lit, zero: usize) -> Option<Vec<Edge>> {
    let mut out = Vec::new();
    let (e, signs): (&LinExpr, &[i64]) = match l {
        Lit::Le(e) => (e, &[1]),
        Lit::Eq(e) => (e, &[1, -1]),
    };
    for &s in signs {
        out.extend(edge_of(e, s, zero)?);
    }
    Some(out)
}

#[derive(Clone, Debug)]
pub struct Dbm {
    n: usize,
    d: Vec<i64>,
}

impl Dbm {
    /// `nvars` unknowns, all non-negative. Node `nvars` is the constant 0.
    pub fn new(nvars: usize) -> Self {
        let n = nvars + 1;
        let mut d = vec![INF; n * n];
        for i in 0..n {
            d[i * n + i] = 0;
        }
        for v in 0..nvars {
            d[v * n + nvars] = 0;
        }
        Dbm { n, d }
    }

    pub fn zero(&self) -> usize {
        self.n - 1
    }

    /// Shortest known bound on `to - from`, if any.
    pub fn bound(&self, from: usize, to: usize) -> Option<i64> {
        let w = self.d[from * self.n + to];
        (w < INF).then_some(w)
    }

    /// Whether the edge alone contradicts the current bounds.
    pub fn refutes(&self, e: &Edge) -> bool {
        let back = self.d[e.to * self.n + e.from];
        back < INF && back + e.w < 0
    }

    /// Adds an edge and restores closure; `false` on a negative cycle, in
    /// which case the matrix is left unusable.
    pub fn add(&mut self, e: &Edge) -> bool {
        if self.refutes(e) {
            return false;
        }
        let n = self.n;
        if self.d[e.from * n + e.to] <= e.w {
            return true;
        }
        let (u, v) = (e.from, e.to);
        let to_u: Vec<i64> = (0..n).map(|i| self.d[i * n + u]).collect();
        let from_v: Vec<i64> = self.d[v * n..v * n + n].to_vec();
        for i in 0..n {
            if to_u[i] >= INF {
                continue;
            }
            let base = to_u[i] + e.w;
            let row = &mut self.d[i * n..i * n + n];
            for j in 0..n {
                if from_v[j] < INF && base + from_v[j] < row[j] {
                    row[j] = base + from_v[j];
                }
            }
        }
        (0..n).all(|i| self.d[i * n + i] >= 0)
    }

    pub fn add_all(&mut self, es: &[Edge]) -> bool {
        es.iter().all(|e| self.add(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_strict_cycle() {
        let mut m = Dbm::new(2);
        assert!(m.add(&Edge { from: 0, to: 1, w: -1 }));
        assert!(!m.add(&Edge { from: 1, to: 0, w: 0 }));
    }

    #[test]
    fn bounds_compose() {
        let mut m = Dbm::new(3);
        assert!(m.add(&Edge { from: 0, to: 1, w: 2 }));
        assert!(m.add(&Edge { from: 1, to: 2, w: 3 }));
        assert_eq!(m.bound(0, 2), Some(5));
        assert_eq!(m.bound(2, 0), None);
    }

    #[test]
    fn naturals_are_nonnegative() {
        let mut m = Dbm::new(1);
        let z = m.zero();
        // v - 0 <= -1
        assert!(!m.add(&Edge { from: z, to: 0, w: -1 }));
    }
}
