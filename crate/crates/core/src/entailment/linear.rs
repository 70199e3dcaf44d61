//! Fourier-Motzkin elimination over the naturals. An `Infeasible` answer is
//! always sound; `Feasible` means no contradiction was derived.

use std::collections::{BTreeMap, HashMap};

/// `Σ cᵢ·vᵢ + k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    pub coeffs: BTreeMap<u32, i64>,
    pub constant: i64,
}

impl LinExpr {
    pub fn constant(k: i64) -> Self {
        LinExpr { coeffs: BTreeMap::new(), constant: k }
    }

    pub fn var(v: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, 1);
        LinExpr { coeffs, constant: 0 }
    }

    pub fn add(&self, o: &LinExpr) -> LinExpr {
        let mut r = self.clone();
        for (&v, &c) in &o.coeffs {
            let e = r.coeffs.entry(v).or_insert(0);
            *e += c;
            if *e == 0 {
                r.coeffs.remove(&v);
            }
        }
        r.constant += o.constant;
        r
    }

    pub fn scale(&self, k: i64) -> LinExpr {
        if k == 0 {
            return LinExpr::default();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(&v, &c)| (v, c * k)).collect(),
            constant: self.constant * k,
        }
    }

    pub fn sub(&self, o: &LinExpr) -> LinExpr {
        self.add(&o.scale(-1))
    }

    pub fn plus(&self, k: i64) -> LinExpr {
        let mut r = self.clone();
        r.constant += k;
        r
    }
}

/// A constraint `e ≤ 0` or `e = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Lit {
    Le(LinExpr),
    Eq(LinExpr),
}

impl Lit {
    /// `a ≤ b`.
    pub fn le(a: &LinExpr, b: &LinExpr) -> Lit {
        Lit::Le(a.sub(b))
    }
    /// `a < b`.
    pub fn lt(a: &LinExpr, b: &LinExpr) -> Lit {
        Lit::Le(a.sub(b).plus(1))
    }
    pub fn eq(a: &LinExpr, b: &LinExpr) -> Lit {
        Lit::Eq(a.sub(b))
    }
}

/// Row cap beyond which elimination gives up and reports feasibility.
const ROW_LIMIT: usize = 4000;

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

type Row = (Vec<(u32, i128)>, i128);

fn to_row(e: &LinExpr) -> Row {
    (e.coeffs.iter().map(|(&v, &c)| (v, c as i128)).collect(), e.constant as i128)
}

/// Divides by the gcd of the coefficients and rounds the constant up, which
/// is exact over the integers for `≤ 0` rows.
fn normalize_le(row: &mut Row) {
    let g = row.0.iter().fold(0, |g, &(_, c)| gcd(g, c));
    if g > 1 {
        for c in row.0.iter_mut() {
            c.1 /= g;
        }
        row.1 = -((-row.1).div_euclid(g));
    }
}

fn combine(a: &Row, ka: i128, b: &Row, kb: i128) -> Row {
    let mut m: BTreeMap<u32, i128> = BTreeMap::new();
    for &(v, c) in &a.0 {
        *m.entry(v).or_insert(0) += c * ka;
    }
    for &(v, c) in &b.0 {
        *m.entry(v).or_insert(0) += c * kb;
    }
    (m.into_iter().filter(|&(_, c)| c != 0).collect(), a.1 * ka + b.1 * kb)
}

fn substitute(row: &Row, v: u32, def: &Row, coef: i128) -> Row {
    // def: coef·v + rest = 0, so v = -rest/coef with coef = ±1.
    let Some(&(_, c)) = row.0.iter().find(|(x, _)| *x == v) else { return row.clone() };
    let rest: Row = (def.0.iter().filter(|(x, _)| *x != v).cloned().collect(), def.1);
    let mut without: Row = (row.0.iter().filter(|(x, _)| *x != v).cloned().collect(), row.1);
    let k = -c * coef;
    without = combine(&without, 1, &rest, k);
    without
}

/// Decides whether the literals can hold with every variable a natural
/// number.
pub fn feasible(nvars: u32, lits: &[Lit]) -> bool {
    if let Some(r) = difference_feasible(nvars, lits) {
        return r;
    }
    fm_feasible(nvars, lits)
}

/// Exact answer when every literal is a difference constraint, by negative
/// cycle detection; `None` otherwise. Shortest-path potentials are integral,
/// so rational and integer feasibility agree here.
fn difference_feasible(nvars: u32, lits: &[Lit]) -> Option<bool> {
    let zero = nvars as usize;
    let mut edges: Vec<(usize, usize, i64)> = (0..zero).map(|v| (v, zero, 0)).collect();
    let mut push = |e: &LinExpr, sign: i64| -> Option<()> {
        // sign·e ≤ 0 as `to - from ≤ w`.
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
        match (pos, neg) {
            (None, None) if w < 0 => edges.push((zero, zero, w)),
            (None, None) => {}
            (to, from) => edges.push((from.unwrap_or(zero), to.unwrap_or(zero), w)),
        }
        Some(())
    };
    for l in lits {
        match l {
            Lit::Le(e) => push(e, 1)?,
            Lit::Eq(e) => {
                push(e, 1)?;
                push(e, -1)?;
            }
        }
    }
    let mut dist = vec![0i64; zero + 1];
    for _ in 0..=zero {
        let mut changed = false;
        for &(from, to, w) in &edges {
            if dist[from] + w < dist[to] {
                dist[to] = dist[from] + w;
                changed = true;
            }
        }
        if !changed {
            return Some(true);
        }
    }
    Some(false)
}

fn fm_feasible(nvars: u32, lits: &[Lit]) -> bool {
    let mut eqs: Vec<Row> = Vec::new();
    let mut les: Vec<Row> = Vec::new();
    for l in lits {
        match l {
            Lit::Le(e) => les.push(to_row(e)),
            Lit::Eq(e) => eqs.push(to_row(e)),
        }
    }
    for v in 0..nvars {
        les.push((vec![(v, -1)], 0));
    }
    while let Some(e) = eqs.pop() {
        if e.0.is_empty() {
            if e.1 != 0 {
                return false;
            }
            continue;
        }
        let g = e.0.iter().fold(0, |g, &(_, c)| gcd(g, c));
        if e.1 % g != 0 {
            return false;
        }
        let e: Row = (e.0.iter().map(|&(v, c)| (v, c / g)).collect(), e.1 / g);
        match e.0.iter().find(|(_, c)| c.abs() == 1) {
            Some(&(v, c)) => {
                for r in eqs.iter_mut() {
                    *r = substitute(r, v, &e, c);
                }
                for r in les.iter_mut() {
                    *r = substitute(r, v, &e, c);
                }
            }
            None => {
                les.push(e.clone());
                les.push((e.0.iter().map(|&(v, c)| (v, -c)).collect(), -e.1));
            }
        }
    }
    fm(les)
}

fn fm(rows: Vec<Row>) -> bool {
    let mut rows = dedup(rows);
    loop {
        let mut live = Vec::with_capacity(rows.len());
        for mut r in rows {
            if r.0.is_empty() {
                if r.1 > 0 {
                    return false;
                }
                continue;
            }
            normalize_le(&mut r);
            live.push(r);
        }
        rows = dedup(live);
        let mut counts: HashMap<u32, (usize, usize)> = HashMap::new();
        for r in &rows {
            for &(v, c) in &r.0 {
                let e = counts.entry(v).or_insert((0, 0));
                if c > 0 {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let Some((&v, _)) = counts
            .iter()
            .min_by_key(|(&v, &(p, n))| ((p * n) as i64 - (p + n) as i64, v))
        else {
            return true;
        };
        let (pos, rest): (Vec<Row>, Vec<Row>) =
            rows.into_iter().partition(|r| r.0.iter().any(|&(x, c)| x == v && c > 0));
        let (neg, mut others): (Vec<Row>, Vec<Row>) =
            rest.into_iter().partition(|r| r.0.iter().any(|&(x, c)| x == v && c < 0));
        for p in &pos {
            let cp = p.0.iter().find(|x| x.0 == v).unwrap().1;
            for n in &neg {
                let cn = -n.0.iter().find(|x| x.0 == v).unwrap().1;
                let r = combine(p, cn, n, cp);
                others.push(r);
            }
        }
        if others.len() > ROW_LIMIT {
            return true;
        }
        rows = others;
    }
}

/// Keeps the tightest constant per coefficient vector.
fn dedup(rows: Vec<Row>) -> Vec<Row> {
    let mut m: HashMap<Vec<(u32, i128)>, i128> = HashMap::new();
    for (c, k) in rows {
        let e = m.entry(c).or_insert(i128::MIN);
        if k > *e {
            *e = k;
        }
    }
    m.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(i: u32) -> LinExpr {
        LinExpr::var(i)
    }
    fn k(c: i64) -> LinExpr {
        LinExpr::constant(c)
    }

    #[test]
    fn strict_cycle_is_infeasible() {
        let lits = [Lit::lt(&v(0), &v(1)), Lit::lt(&v(1), &v(0))];
        assert!(!feasible(2, &lits));
    }

    #[test]
    fn integer_gap_is_infeasible() {
        // x < y < x + 1 has rational but no integer solutions.
        let lits = [Lit::lt(&v(0), &v(1)), Lit::lt(&v(1), &v(0).plus(1))];
        assert!(!feasible(2, &lits));
    }

    #[test]
    fn naturals_are_nonnegative() {
        assert!(!feasible(1, &[Lit::lt(&v(0), &k(0))]));
        assert!(feasible(1, &[Lit::le(&v(0), &k(0))]));
    }

    #[test]
    fn difference_and_elimination_agree() {
        let sets: Vec<Vec<Lit>> = vec![
            vec![Lit::lt(&v(0), &v(1)), Lit::le(&v(1), &k(0))],
            vec![Lit::eq(&v(0), &v(1).plus(2)), Lit::le(&v(0), &k(2))],
            vec![Lit::lt(&v(0), &v(1)), Lit::lt(&v(1), &v(2)), Lit::le(&v(2), &v(0).plus(1))],
            vec![Lit::lt(&v(0), &v(1)), Lit::lt(&v(1), &v(2)), Lit::le(&v(2), &v(0).plus(2))],
        ];
        for lits in sets {
            assert_eq!(difference_feasible(3, &lits), Some(fm_feasible(3, &lits)), "{lits:?}");
        }
        assert_eq!(difference_feasible(2, &[Lit::eq(&v(0).scale(2), &v(1))]), None);
    }

    fn diff_lit() -> impl Strategy<Value = Lit> {
        let side = (0u32..4, -2i64..3).prop_map(|(i, c)| if i == 3 { k(c.max(0)) } else { v(i).plus(c) });
        (side.clone(), side, 0..3).prop_map(|(a, b, op)| match op {
            0 => Lit::lt(&a, &b),
            1 => Lit::le(&a, &b),
            _ => Lit::eq(&a, &b),
        })
    }

    proptest! {
        #[test]
        fn shortest_paths_match_elimination(lits in prop::collection::vec(diff_lit(), 1..7)) {
            let d = difference_feasible(3, &lits);
            prop_assert!(d.is_some());
            prop_assert_eq!(d, Some(fm_feasible(3, &lits)), "{:?}", lits);
        }
    }

    #[test]
    fn equalities_substitute() {
        let lits = [Lit::eq(&v(0), &v(1).plus(2)), Lit::le(&v(0), &k(1))];
        assert!(!feasible(2, &lits));
        let lits = [Lit::eq(&v(0).scale(2), &k(3))];
        assert!(!feasible(1, &lits));
    }
}
