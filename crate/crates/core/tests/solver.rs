use std::collections::BTreeMap;

use defcalc::solver::{Backend, CheckResult, Decls, Model, Session, SoftTier};
use defcalc::symbolic::{CmpOp, Sort, Term};
use defcalc::value::Value;
use num::bigint::BigInt;
use num::BigRational;
use proptest::prelude::*;

const BOUND: i64 = 5;
const OPS: [CmpOp; 6] = [
    CmpOp::Eq,
    CmpOp::Ne,
    CmpOp::Lt,
    CmpOp::Le,
    CmpOp::Gt,
    CmpOp::Ge,
];

fn var(i: usize) -> Term {
    Term::var(&format!("x{i}"), Sort::Int)
}

fn decls(n: usize) -> Decls {
    let mut d = Decls::default();
    for i in 0..n {
        d.var(&format!("x{i}"), Sort::Int);
    }
    d
}

fn bounds(n: usize) -> Vec<Term> {
    (0..n)
        .flat_map(|i| {
            [
                Term::cmp(CmpOp::Ge, var(i), Term::int(-BOUND)),
                Term::cmp(CmpOp::Le, var(i), Term::int(BOUND)),
            ]
        })
        .collect()
}

/// `coeffs` pairs a variable with a coefficient; `rounded` divides the
/// first variable by 3 under round or floor.
#[derive(Clone, Debug)]
struct Lit {
    coeffs: Vec<(usize, i64)>,
    rounded: Option<(bool, i64)>,
    op: usize,
    constant: i64,
}

impl Lit {
    fn term(&self) -> Term {
        let mut lhs = Term::int(0);
        for (v, c) in &self.coeffs {
            lhs = Term::add(lhs, Term::mul(Term::int(*c), var(*v)));
        }
        if let Some((floor, c)) = self.rounded {
            let q = Term::div(
                Term::to_real(var(0)),
                Term::real(BigRational::from_integer(3.into())),
            );
            let r = if floor {
                Term::floor(q)
            } else {
                Term::round(q)
            };
            lhs = Term::add(lhs, Term::mul(Term::int(c), r));
        }
        Term::cmp(OPS[self.op], lhs, Term::int(self.constant))
    }
}

fn lit(n: usize) -> impl Strategy<Value = Lit> {
    let scale = prop_oneof![4 => Just(1i64), 1 => Just(1_000), 1 => Just(1_000_000)];
    (
        prop::collection::vec((0..n, -3i64..=3), 1..=3),
        prop::option::weighted(0.25, (any::<bool>(), -2i64..=2)),
        0..OPS.len(),
        -8i64..=8,
        scale,
    )
        .prop_map(|(coeffs, rounded, op, constant, scale)| Lit {
            coeffs: coeffs.into_iter().map(|(v, c)| (v, c * scale)).collect(),
            rounded,
            op,
            constant: constant * scale,
        })
}

fn points(n: usize) -> Vec<Model> {
    let mut out = vec![Model::new()];
    for i in 0..n {
        out = out
            .into_iter()
            .flat_map(|m| {
                (-BOUND..=BOUND).map(move |v| {
                    let mut m = m.clone();
                    m.insert(format!("x{i}"), Value::int(v));
                    m
                })
            })
            .collect();
    }
    out
}

fn all_hold(lits: &[Term], m: &Model) -> bool {
    lits.iter().all(|t| t.holds(m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    #[test]
    fn builtin_is_complete_on_small_problems(
        (n, lits) in (1usize..=3).prop_flat_map(|n| (Just(n), prop::collection::vec(lit(n), 1..=4)))
    ) {
        let mut terms = bounds(n);
        terms.extend(lits.iter().map(Lit::term));
        let mut s = Session::new(Backend::Builtin, decls(n), Model::new());
        s.push(terms.clone());
        let expected = points(n).iter().any(|m| all_hold(&terms, m));
        match s.check() {
            CheckResult::Sat(m) => {
                prop_assert!(expected);
                prop_assert!(all_hold(&terms, &m), "model {:?} violates the query", m);
            }
            CheckResult::Unsat => prop_assert!(!expected, "query is satisfiable"),
            CheckResult::Unknown(why) => prop_assert!(false, "unknown: {}", why),
        }
    }

    #[test]
    fn incremental_matches_fresh(
        frames in prop::collection::vec(prop::collection::vec(lit(3), 1..=2), 1..=6),
        pops in prop::collection::vec(any::<bool>(), 6),
    ) {
        let mut inc = Session::new(Backend::Builtin, decls(3), Model::new());
        inc.push(bounds(3));
        for (f, pop) in frames.iter().zip(&pops) {
            inc.push(f.iter().map(Lit::term).collect());
            let _ = inc.check();
            if *pop {
                inc.pop().unwrap();
            }
        }
        let mut fresh = Session::new(Backend::Builtin, decls(3), Model::new());
        fresh.push(inc.assertions());
        prop_assert_eq!(inc.check(), fresh.check());
    }

    #[test]
    fn soft_tier_is_maximal(
        lo in -20_000i64..20_000,
        width in 0i64..30_000,
        offset in prop::sample::select(vec![0i64, 7, 30, 500, 2_500]),
    ) {
        // lo <= m0 <= lo + width, m1 = m0 + offset
        let mut d = Decls::default();
        d.var("m0", Sort::Int).var("m1", Sort::Int);
        let m = |i: usize| Term::var(&format!("m{i}"), Sort::Int);
        let lits = vec![
            Term::cmp(CmpOp::Ge, m(0), Term::int(lo)),
            Term::cmp(CmpOp::Le, m(0), Term::int(lo + width)),
            Term::cmp(CmpOp::Eq, m(1), Term::add(m(0), Term::int(offset))),
        ];
        let money = vec!["m0".to_string(), "m1".to_string()];
        let mut s = Session::new(Backend::Builtin, d.clone(), Model::new());
        s.push(lits.clone());
        let CheckResult::Sat(hard) = s.check() else { panic!("query is satisfiable") };
        let (model, tier) = s.check_soft(&money, hard);
        prop_assert!(all_hold(&lits, &model));
        // an independent oracle: scan m0 over its whole range
        let best = (lo..=lo + width)
            .filter_map(|v| {
                let mut p = Model::new();
                p.insert("m0".into(), Value::int(v));
                p.insert("m1".into(), Value::int(v + offset));
                SoftTier::of_model(&p, &money)
            })
            .min_by_key(|t| SoftTier::LADDER.iter().position(|x| x == t));
        prop_assert_eq!(tier, best);
        if let Some(t) = tier {
            prop_assert!(t.holds(&model, &money));
        }
        if let Some(above) = tier.map_or(Some(SoftTier::T1), SoftTier::higher) {
            let mut check = Session::new(Backend::Builtin, d, Model::new());
            check.push(lits);
            let modulus: BTreeMap<String, BigInt> =
                money.iter().map(|v| (v.clone(), BigInt::from(above.modulus_cents()))).collect();
            prop_assert_eq!(check.check_modulo(&modulus), CheckResult::Unsat);
        }
    }
}
