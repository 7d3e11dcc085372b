//! Conjunctions of linear constraints over exact rationals, some variables
//! integral. Variables are projected out by Fourier–Motzkin elimination from
//! the last to the first; a model is then built front to back, each
//! variable taking the admissible value closest to its preferred value and
//! backtracking when an integrality, disequality or modulus requirement
//! fails further on.

use std::collections::{BTreeMap, BTreeSet};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

pub type Q = BigRational;

/// Candidate domains up to this size are enumerated exhaustively.
pub const EXHAUSTIVE_DOMAIN: u64 = 4096;
/// Candidates tried on larger or unbounded domains.
pub const CAPPED_TRIES: usize = 64;
/// Total assignment steps before giving up.
pub const NODE_BUDGET: u64 = 1 << 16;
/// Constraint count beyond which projection gives up.
pub const PROJECTION_LIMIT: usize = 8192;

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `Σ coeffs[i]·x_i + constant`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lin {
    pub coeffs: BTreeMap<usize, Q>,
    pub constant: Q,
}

impl Lin {
    pub fn constant(c: Q) -> Lin {
        Lin {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(i: usize) -> Lin {
        Lin {
            coeffs: [(i, Q::one())].into_iter().collect(),
            constant: Q::zero(),
        }
    }

    pub fn is_const(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Lin) -> Lin {
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            let e = out.coeffs.entry(*i).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                out.coeffs.remove(i);
            }
        }
        out.constant += &other.constant;
        out
    }

    pub fn scale(&self, k: &Q) -> Lin {
        if k.is_zero() {
            return Lin::constant(Q::zero());
        }
        Lin {
            coeffs: self.coeffs.iter().map(|(i, c)| (*i, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn sub(&self, other: &Lin) -> Lin {
        self.add(&other.scale(&q(-1)))
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn max_var(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    /// Value under an assignment of every variable it mentions.
    pub fn eval(&self, vals: &[Q]) -> Q {
        let mut s = self.constant.clone();
        for (i, c) in &self.coeffs {
            s += c * &vals[*i];
        }
        s
    }

    fn without(&self, i: usize) -> Lin {
        let mut out = self.clone();
        out.coeffs.remove(&i);
        out
    }

    /// Replaces `x_i` by `e`.
    fn subst(&self, i: usize, e: &Lin) -> Lin {
        match self.coeffs.get(&i) {
            None => self.clone(),
            Some(c) => self.without(i).add(&e.scale(c)),
        }
    }
}

/// Relation of a linear form to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Eq,
    Le,
    Lt,
    Ne,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub lin: Lin,
    pub rel: Rel,
}

impl Constraint {
    pub fn new(lin: Lin, rel: Rel) -> Constraint {
        Constraint { lin, rel }
    }

    pub fn holds(&self, vals: &[Q]) -> bool {
        let v = self.lin.eval(vals);
        match self.rel {
            Rel::Eq => v.is_zero(),
            Rel::Le => !v.is_positive(),
            Rel::Lt => v.is_negative(),
            Rel::Ne => !v.is_zero(),
        }
    }
}

enum Norm {
    True,
    False,
    Keep(Constraint),
}

fn lcm_of_denoms(l: &Lin) -> BigInt {
    let mut m = l.constant.denom().clone();
    for c in l.coeffs.values() {
        m = m.lcm(c.denom());
    }
    m
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    Q::new(a.clone(), b.clone()).ceil().to_integer()
}

/// Canonical form; all-integer constraints are tightened, taking the
/// multiples each variable is restricted to into account.
fn normalize(c: Constraint, is_int: &[bool], modulus: &[Option<BigInt>]) -> Norm {
    let Constraint { lin, rel } = c;
    if lin.is_const() {
        let v = &lin.constant;
        let ok = match rel {
            Rel::Eq => v.is_zero(),
            Rel::Le => !v.is_positive(),
            Rel::Lt => v.is_negative(),
            Rel::Ne => !v.is_zero(),
        };
        return if ok { Norm::True } else { Norm::False };
    }
    if lin.coeffs.keys().all(|i| is_int[*i]) {
        let m = Q::from_integer(lcm_of_denoms(&lin));
        let mut lin = lin.scale(&m);
        let mut rel = rel;
        if rel == Rel::Lt {
            lin.constant += Q::one();
            rel = Rel::Le;
        }
        let mut g = BigInt::zero();
        for c in lin.coeffs.values() {
            g = g.gcd(&c.to_integer());
        }
        let c = lin.constant.to_integer();
        let coeffs = lin
            .coeffs
            .iter()
            .map(|(i, a)| (*i, Q::from_integer(a.to_integer() / &g)))
            .collect();
        let constant = match rel {
            Rel::Le => ceil_div(&c, &g),
            _ => {
                if !c.is_multiple_of(&g) {
                    return if rel == Rel::Eq {
                        Norm::False
                    } else {
                        Norm::True
                    };
                }
                &c / &g
            }
        };
        let lin = Lin {
            coeffs,
            constant: Q::from_integer(constant),
        };
        // The variable part ranges over multiples of `step`.
        let mut step = BigInt::zero();
        for (i, a) in &lin.coeffs {
            let m = modulus[*i].clone().unwrap_or_else(BigInt::one);
            step = step.gcd(&(a.to_integer() * m));
        }
        let c = lin.constant.to_integer();
        let constant = match rel {
            Rel::Le => ceil_div(&c, &step) * &step,
            _ if !c.is_multiple_of(&step) => {
                return if rel == Rel::Eq {
                    Norm::False
                } else {
                    Norm::True
                };
            }
            _ => c,
        };
        let mut lin = Lin {
            constant: Q::from_integer(constant),
            ..lin
        };
        if matches!(rel, Rel::Eq | Rel::Ne)
            && lin.coeffs.values().next().is_some_and(|a| a.is_negative())
        {
            lin = lin.scale(&q(-1));
        }
        return Norm::Keep(Constraint { lin, rel });
    }
    let lead = lin.coeffs.values().next().expect("non-constant").abs();
    let mut lin = lin.scale(&(Q::one() / lead));
    if matches!(rel, Rel::Eq | Rel::Ne)
        && lin.coeffs.values().next().is_some_and(|a| a.is_negative())
    {
        lin = lin.scale(&q(-1));
    }
    Norm::Keep(Constraint { lin, rel })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinResult {
    Sat(Vec<Q>),
    Unsat,
    Unknown(String),
}

/// A linear problem. `pref` gives, per variable, the value the model should
/// stay close to; `modulus` requires an integer variable to be a multiple.
#[derive(Clone, Debug, Default)]
pub struct Problem {
    pub is_int: Vec<bool>,
    pub pref: Vec<Q>,
    pub modulus: Vec<Option<BigInt>>,
    pub cons: Vec<Constraint>,
}

enum Level {
    /// `x_j = expr` over lower variables.
    Defined(Lin),
    /// Constraints bounding `x_j` in terms of lower variables.
    Bounds(Vec<Constraint>),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Search {
    Found,
    Exhausted,
    Truncated,
}

impl Problem {
    pub fn new_var(&mut self, is_int: bool, pref: Q, modulus: Option<BigInt>) -> usize {
        self.is_int.push(is_int);
        self.pref.push(pref);
        self.modulus.push(modulus);
        self.is_int.len() - 1
    }

    /// Solves each group of variables linked by constraints on its own, so
    /// that a conflict in one group is not re-searched under every candidate
    /// of another.
    pub fn solve(&self) -> LinResult {
        let n = self.is_int.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for c in &self.cons {
            let vars: Vec<usize> = c.lin.coeffs.keys().copied().collect();
            for w in vars.windows(2) {
                let (a, b) = (root(&mut parent, w[0]), root(&mut parent, w[1]));
                parent[a.max(b)] = a.min(b);
            }
        }
        let roots: Vec<usize> = (0..n).map(|i| root(&mut parent, i)).collect();
        let groups: BTreeSet<usize> = roots.iter().copied().collect();
        if groups.len() <= 1 {
            return self.solve_connected();
        }
        let mut vals = vec![Q::zero(); n];
        let mut unknown = None;
        for g in groups {
            let members: Vec<usize> = (0..n).filter(|&i| roots[i] == g).collect();
            let index: BTreeMap<usize, usize> =
                members.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let sub = Problem {
                is_int: members.iter().map(|&i| self.is_int[i]).collect(),
                pref: members.iter().map(|&i| self.pref[i].clone()).collect(),
                modulus: members.iter().map(|&i| self.modulus[i].clone()).collect(),
                cons: self
                    .cons
                    .iter()
                    .filter(|c| c.lin.coeffs.keys().next().is_some_and(|v| roots[*v] == g))
                    .map(|c| Constraint {
                        lin: Lin {
                            coeffs: c
                                .lin
                                .coeffs
                                .iter()
                                .map(|(v, k)| (index[v], k.clone()))
                                .collect(),
                            constant: c.lin.constant.clone(),
                        },
                        rel: c.rel,
                    })
                    .collect(),
            };
            match sub.solve_connected() {
                LinResult::Sat(sv) => {
                    for (k, &i) in members.iter().enumerate() {
                        vals[i] = sv[k].clone();
                    }
                }
                LinResult::Unsat => return LinResult::Unsat,
                LinResult::Unknown(why) => unknown = unknown.or(Some(why)),
            }
        }
        let constant_ok = self
            .cons
            .iter()
            .filter(|c| c.lin.coeffs.is_empty())
            .all(|c| c.holds(&vals));
        match (constant_ok, unknown) {
            (false, _) => LinResult::Unsat,
            (true, Some(why)) => LinResult::Unknown(why),
            (true, None) => LinResult::Sat(vals),
        }
    }

    fn solve_connected(&self) -> LinResult {
        let n = self.is_int.len();
        let mut cons: BTreeSet<Constraint> = BTreeSet::new();
        let mut diseq: Vec<Constraint> = Vec::new();
        for c in &self.cons {
            match normalize(c.clone(), &self.is_int, &self.modulus) {
                Norm::True => {}
                Norm::False => return LinResult::Unsat,
                Norm::Keep(c) if c.rel == Rel::Ne => diseq.push(c),
                Norm::Keep(c) => {
                    cons.insert(c);
                }
            }
        }
        let mut levels: Vec<Option<Level>> = (0..n).map(|_| None).collect();
        for j in (0..n).rev() {
            let (with, without): (Vec<Constraint>, Vec<Constraint>) = cons
                .into_iter()
                .partition(|c| c.lin.coeffs.contains_key(&j));
            let mut next: BTreeSet<Constraint> = without.into_iter().collect();
            let mut derived = Vec::new();
            if let Some(pos) = with.iter().position(|c| c.rel == Rel::Eq) {
                let eq = &with[pos];
                let a = eq.lin.coeff(j);
                let expr = eq.lin.without(j).scale(&(-Q::one() / a));
                for (k, c) in with.iter().enumerate() {
                    if k != pos {
                        derived.push(Constraint::new(c.lin.subst(j, &expr), c.rel));
                    }
                }
                levels[j] = Some(Level::Defined(expr));
            } else {
                let (lower, upper): (Vec<&Constraint>, Vec<&Constraint>) =
                    with.iter().partition(|c| c.lin.coeff(j).is_negative());
                for l in &lower {
                    for u in &upper {
                        let al = -l.lin.coeff(j);
                        let au = u.lin.coeff(j);
                        let lin = l.lin.scale(&au).add(&u.lin.scale(&al));
                        let rel = if l.rel == Rel::Lt || u.rel == Rel::Lt {
                            Rel::Lt
                        } else {
                            Rel::Le
                        };
                        derived.push(Constraint::new(lin, rel));
                    }
                }
                levels[j] = Some(Level::Bounds(with));
            }
            for c in derived {
                match normalize(c, &self.is_int, &self.modulus) {
                    Norm::True => {}
                    Norm::False => return LinResult::Unsat,
                    Norm::Keep(c) => {
                        next.insert(c);
                    }
                }
            }
            cons = prune(next);
            if cons.len() > PROJECTION_LIMIT {
                return LinResult::Unknown("projection too large".into());
            }
        }
        let mut by_level: Vec<Vec<Constraint>> = vec![Vec::new(); n];
        for d in diseq {
            let j = d.lin.max_var().expect("non-constant");
            by_level[j].push(d);
        }
        let levels: Vec<Level> = levels.into_iter().map(|l| l.expect("level")).collect();
        let mut search = Backsub {
            p: self,
            levels: &levels,
            diseq: &by_level,
            nodes: 0,
        };
        let mut vals = vec![Q::zero(); n];
        match search.assign(0, &mut vals) {
            Search::Found => LinResult::Sat(vals),
            Search::Exhausted => LinResult::Unsat,
            Search::Truncated => LinResult::Unknown("candidate search budget exhausted".into()),
        }
    }
}

/// Keeps only the tightest of inequalities sharing a left-hand side.
fn prune(cons: BTreeSet<Constraint>) -> BTreeSet<Constraint> {
    let mut best: BTreeMap<BTreeMap<usize, Q>, (Q, Rel)> = BTreeMap::new();
    let mut out = BTreeSet::new();
    for c in cons {
        if c.rel == Rel::Eq {
            out.insert(c);
            continue;
        }
        let key = c.lin.coeffs.clone();
        let cand = (c.lin.constant.clone(), c.rel);
        match best.get(&key) {
            Some((k, r))
                if *k > cand.0 || (*k == cand.0 && (*r == Rel::Lt || cand.1 == Rel::Le)) => {}
            _ => {
                best.insert(key, cand);
            }
        }
    }
    for (coeffs, (constant, rel)) in best {
        out.insert(Constraint::new(Lin { coeffs, constant }, rel));
    }
    out
}

struct Backsub<'a> {
    p: &'a Problem,
    levels: &'a [Level],
    diseq: &'a [Vec<Constraint>],
    nodes: u64,
}

#[derive(Clone, Debug, Default)]
struct Interval {
    lo: Option<(Q, bool)>,
    hi: Option<(Q, bool)>,
}

impl Interval {
    fn contains(&self, v: &Q) -> bool {
        self.lo
            .as_ref()
            .is_none_or(|(l, s)| if *s { v > l } else { v >= l })
            && self
                .hi
                .as_ref()
                .is_none_or(|(h, s)| if *s { v < h } else { v <= h })
    }

    fn tighten_lo(&mut self, v: Q, strict: bool) {
        let replace = match &self.lo {
            None => true,
            Some((l, s)) => v > *l || (v == *l && strict && !s),
        };
        if replace {
            self.lo = Some((v, strict));
        }
    }

    fn tighten_hi(&mut self, v: Q, strict: bool) {
        let replace = match &self.hi {
            None => true,
            Some((h, s)) => v < *h || (v == *h && strict && !s),
        };
        if replace {
            self.hi = Some((v, strict));
        }
    }

    fn clamp(&self, v: &Q) -> Q {
        let mut v = v.clone();
        if let Some((l, _)) = &self.lo {
            if v < *l {
                v = l.clone();
            }
        }
        if let Some((h, _)) = &self.hi {
            if v > *h {
                v = h.clone();
            }
        }
        v
    }
}

impl Backsub<'_> {
    fn assign(&mut self, j: usize, vals: &mut Vec<Q>) -> Search {
        if j == vals.len() {
            return Search::Found;
        }
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return Search::Truncated;
        }
        let excluded: Vec<Q> = self.diseq[j]
            .iter()
            .map(|d| {
                let a = d.lin.coeff(j);
                -d.lin.without(j).eval(vals) / a
            })
            .collect();
        let is_int = self.p.is_int[j];
        let modulus = self.p.modulus[j].clone();
        let admissible = |v: &Q| {
            (!is_int || v.is_integer())
                && modulus
                    .as_ref()
                    .is_none_or(|m| v.is_integer() && v.to_integer().is_multiple_of(m))
                && !excluded.contains(v)
        };
        match &self.levels[j] {
            Level::Defined(expr) => {
                let v = expr.eval(vals);
                if !admissible(&v) {
                    return Search::Exhausted;
                }
                vals[j] = v;
                self.assign(j + 1, vals)
            }
            Level::Bounds(cs) => {
                let mut iv = Interval::default();
                for c in cs {
                    let a = c.lin.coeff(j);
                    let bound = -c.lin.without(j).eval(vals) / &a;
                    let strict = c.rel == Rel::Lt;
                    if a.is_positive() {
                        iv.tighten_hi(bound, strict);
                    } else {
                        iv.tighten_lo(bound, strict);
                    }
                }
                let pref = &self.p.pref[j];
                let (cands, exhaustive) = if is_int {
                    int_candidates(&iv, pref, modulus.as_ref(), &excluded)
                } else {
                    real_candidates(&iv, pref, &excluded)
                };
                let mut truncated = !exhaustive;
                for v in cands {
                    if !admissible(&v) {
                        continue;
                    }
                    vals[j] = v;
                    match self.assign(j + 1, vals) {
                        Search::Found => return Search::Found,
                        Search::Truncated => {
                            truncated = true;
                            if self.nodes > NODE_BUDGET {
                                return Search::Truncated;
                            }
                        }
                        Search::Exhausted => {}
                    }
                }
                if truncated {
                    Search::Truncated
                } else {
                    Search::Exhausted
                }
            }
        }
    }
}

/// Integer candidates in order of distance from the preferred value, ties
/// upward. Returns whether the list covers the whole admissible domain.
fn int_candidates(
    iv: &Interval,
    pref: &Q,
    modulus: Option<&BigInt>,
    excluded: &[Q],
) -> (Vec<Q>, bool) {
    let lo = iv.lo.as_ref().map(|(l, s)| {
        if *s {
            l.floor().to_integer() + 1
        } else {
            l.ceil().to_integer()
        }
    });
    let hi = iv.hi.as_ref().map(|(h, s)| {
        if *s {
            h.ceil().to_integer() - 1
        } else {
            h.floor().to_integer()
        }
    });
    if let (Some(l), Some(h)) = (&lo, &hi) {
        if l > h {
            return (Vec::new(), true);
        }
    }
    let m = modulus.cloned().unwrap_or_else(BigInt::one);
    let mq = Q::from_integer(m.clone());
    let klo = lo.as_ref().map(|l| ceil_div(l, &m));
    let khi = hi
        .as_ref()
        .map(|h| Q::new(h.clone(), m.clone()).floor().to_integer());
    let (domain, cap) = match (&klo, &khi) {
        (Some(a), Some(b)) if a > b => return (Vec::new(), true),
        (Some(a), Some(b)) => {
            let size: BigInt = b - a + 1;
            let bounded = size <= BigInt::from(EXHAUSTIVE_DOMAIN);
            let size = if bounded {
                size.to_string().parse::<usize>().unwrap_or(usize::MAX)
            } else {
                usize::MAX
            };
            (Some(size), if bounded { size } else { CAPPED_TRIES })
        }
        _ => (None, CAPPED_TRIES),
    };
    let cap = cap + excluded.len();
    let center = iv.clamp(&pref.round());
    let mut up = (&center / &mq).ceil().to_integer();
    let mut down = &up - 1;
    let mut out = Vec::new();
    while out.len() < cap {
        let up_ok = khi.as_ref().is_none_or(|h| &up <= h) && klo.as_ref().is_none_or(|l| &up >= l);
        let down_ok =
            klo.as_ref().is_none_or(|l| &down >= l) && khi.as_ref().is_none_or(|h| &down <= h);
        let pick_up = match (up_ok, down_ok) {
            (false, false) => break,
            (true, false) => true,
            (false, true) => false,
            (true, true) => {
                let du = Q::from_integer(&up * &m) - &center;
                let dd = &center - Q::from_integer(&down * &m);
                du <= dd
            }
        };
        if pick_up {
            out.push(Q::from_integer(&up * &m));
            up += 1;
        } else {
            out.push(Q::from_integer(&down * &m));
            down -= 1;
        }
    }
    let exhaustive = domain.is_some_and(|d| out.len() >= d);
    (out, exhaustive)
}

/// Rational candidates: the preferred value, nearby integers, then interior
/// points. Complete only for empty or single-point intervals.
fn real_candidates(iv: &Interval, pref: &Q, excluded: &[Q]) -> (Vec<Q>, bool) {
    if let (Some((l, ls)), Some((h, hs))) = (&iv.lo, &iv.hi) {
        if l > h || (l == h && (*ls || *hs)) {
            return (Vec::new(), true);
        }
        if l == h {
            return (vec![l.clone()], true);
        }
    }
    let mut out: Vec<Q> = Vec::new();
    let push = |v: Q, out: &mut Vec<Q>| {
        if iv.contains(&v) && !excluded.contains(&v) && !out.contains(&v) {
            out.push(v);
        }
    };
    push(pref.clone(), &mut out);
    let c = iv.clamp(pref).round();
    for d in 0..4 {
        push(&c + q(d), &mut out);
        push(&c - q(d + 1), &mut out);
    }
    let half = Q::new(1.into(), 2.into());
    match (&iv.lo, &iv.hi) {
        (Some((l, _)), Some((h, _))) => {
            let w = h - l;
            for k in [2, 4, 8, 16, 32] {
                for i in 1..k {
                    push(l + &w * Q::new(i.into(), k.into()), &mut out);
                }
            }
        }
        (Some((l, _)), None) => {
            for v in [l.clone(), l + &half, l + q(1), l + q(2)] {
                push(v, &mut out);
            }
        }
        (None, Some((h, _))) => {
            for v in [h.clone(), h - &half, h - q(1), h - q(2)] {
                push(v, &mut out);
            }
        }
        (None, None) => {}
    }
    (out, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(terms: &[(usize, i64)], c: i64) -> Lin {
        let mut l = Lin::constant(q(c));
        for (i, a) in terms {
            l = l.add(&Lin::var(*i).scale(&q(*a)));
        }
        l
    }

    fn problem(ints: &[bool], cons: Vec<Constraint>) -> Problem {
        Problem {
            is_int: ints.to_vec(),
            pref: vec![Q::zero(); ints.len()],
            modulus: vec![None; ints.len()],
            cons,
        }
    }

    #[test]
    fn independent_groups_are_solved_separately() {
        // y is unbounded, x in [0, 0] but x != 0
        let p = problem(
            &[true, true],
            vec![
                Constraint::new(lin(&[(0, -1)], 0), Rel::Le),
                Constraint::new(lin(&[(0, 1)], 0), Rel::Le),
                Constraint::new(lin(&[(0, 1)], 0), Rel::Ne),
                Constraint::new(lin(&[(1, 1)], -100), Rel::Le),
            ],
        );
        assert!(matches!(p.solve(), LinResult::Unsat));
    }

    #[test]
    fn prefers_values_close_to_preference() {
        // x > 1000000 with x integral, preferred 0
        let p = problem(
            &[true],
            vec![Constraint::new(lin(&[(0, -1)], 1_000_000), Rel::Lt)],
        );
        assert_eq!(p.solve(), LinResult::Sat(vec![q(1_000_001)]));
    }

    #[test]
    fn detects_contradictions() {
        let p = problem(
            &[true],
            vec![
                Constraint::new(lin(&[(0, -1)], 0), Rel::Lt),
                Constraint::new(lin(&[(0, 1)], 0), Rel::Le),
            ],
        );
        assert_eq!(p.solve(), LinResult::Unsat);
        // 2x = 1 has no integer solution
        let p = problem(&[true], vec![Constraint::new(lin(&[(0, 2)], -1), Rel::Eq)]);
        assert_eq!(p.solve(), LinResult::Unsat);
    }

    #[test]
    fn integrality_via_backtracking() {
        // 1 <= 3y - x <= 1, 0 <= x <= 10, y integral, x integral, x != 2
        let p = problem(
            &[true, true],
            vec![
                Constraint::new(lin(&[(1, 3), (0, -1)], -1), Rel::Eq),
                Constraint::new(lin(&[(0, -1)], 0), Rel::Le),
                Constraint::new(lin(&[(0, 1)], -10), Rel::Le),
                Constraint::new(lin(&[(0, 1)], -2), Rel::Ne),
            ],
        );
        let LinResult::Sat(v) = p.solve() else {
            panic!()
        };
        assert_eq!(v, vec![q(5), q(2)]);
    }

    #[test]
    fn modulus_requirement() {
        // 1000000 < x < 1000500, x multiple of 100
        let mut p = problem(
            &[true],
            vec![
                Constraint::new(lin(&[(0, -1)], 1_000_000), Rel::Lt),
                Constraint::new(lin(&[(0, 1)], -1_000_500), Rel::Lt),
            ],
        );
        p.modulus[0] = Some(BigInt::from(100));
        assert_eq!(p.solve(), LinResult::Sat(vec![q(1_000_100)]));
        p.modulus[0] = Some(BigInt::from(1000));
        assert_eq!(p.solve(), LinResult::Unsat);
    }

    #[test]
    fn multiples_cannot_differ_by_less_than_the_step() {
        // d = r + 300 with d, r multiples of 1000, both unbounded
        let mut p = problem(
            &[true, true],
            vec![Constraint::new(lin(&[(0, 1), (1, -1)], -300), Rel::Eq)],
        );
        p.modulus = vec![Some(BigInt::from(1000)); 2];
        assert_eq!(p.solve(), LinResult::Unsat);
        p.modulus = vec![Some(BigInt::from(100)); 2];
        assert!(matches!(p.solve(), LinResult::Sat(_)));
    }

    #[test]
    fn reals_with_strict_bounds() {
        // 0 < x < 1/2 over the reals
        let p = problem(
            &[false],
            vec![
                Constraint::new(lin(&[(0, -1)], 0), Rel::Lt),
                Constraint::new(lin(&[(0, 2)], -1), Rel::Lt),
            ],
        );
        assert_eq!(p.solve(), LinResult::Sat(vec![Q::new(1.into(), 4.into())]));
    }
}
