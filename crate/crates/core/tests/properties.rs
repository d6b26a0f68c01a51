use proptest::prelude::*;

use semiheat::criteria::{
    blowup_bound_boundary, blowup_bound_reaction, decide, integral_tail_converges, Hypothesis, Outcome, ProblemSpec,
    Tier,
};
use semiheat::expr::{parse, BinOp, CanonicalForm, Expr, Func, Node, Symbol};
use semiheat::kernel::{green_eval, KernelSpec};

fn leaf() -> impl Strategy<Value = Node> {
    prop_oneof![
        (0u32..100).prop_map(|k| Node::Const(k as f64)),
        (0.0f64..100.0).prop_map(Node::Const),
        Just(Node::Var(Symbol::S)),
    ]
}

fn node() -> impl Strategy<Value = Node> {
    let exps = prop_oneof![Just(2.0), Just(3.0), Just(0.5), Just(-1.0), Just(1.5)];
    leaf().prop_recursive(5, 64, 2, move |inner| {
        let funcs = prop_oneof![Just(Func::Exp), Just(Func::Log), Just(Func::Sqrt), Just(Func::Cos)];
        let ops = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
        prop_oneof![
            inner.clone().prop_map(Node::neg),
            (funcs, inner.clone()).prop_map(|(f, a)| Node::call(f, a)),
            (ops, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Node::binary(op, a, b)),
            (inner, exps.clone()).prop_map(|(a, p)| Node::pow(a, p)),
        ]
    })
}

/// Independent evaluator: `None` for any domain error or nonfinite value.
fn reference(n: &Node, v: f64) -> Option<f64> {
    let out = match n {
        Node::Const(c) => *c,
        Node::Var(_) => v,
        Node::Neg(a) => -reference(a, v)?,
        Node::Call(f, a) => {
            let x = reference(a, v)?;
            match f {
                Func::Exp => x.exp(),
                Func::Log if x > 0.0 => x.ln(),
                Func::Sqrt if x >= 0.0 => x.sqrt(),
                Func::Cos => x.cos(),
                _ => return None,
            }
        }
        Node::Binary(op, a, b) => {
            let (x, y) = (reference(a, v)?, reference(b, v)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div if y != 0.0 => x / y,
                BinOp::Div => return None,
            }
        }
        Node::Pow(a, p) => {
            let x = reference(a, v)?;
            if *p < 0.0 && x == 0.0 {
                return None;
            }
            if p.fract() == 0.0 {
                x.powi(*p as i32)
            } else if x >= 0.0 {
                x.powf(*p)
            } else {
                return None;
            }
        }
    };
    out.is_finite().then_some(out)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_ast_reparses(n in node().prop_filter("depth at most 6", |n| n.depth() <= 6)) {
        let e = Expr::from_node(n).unwrap();
        let again = parse(&e.to_string()).unwrap();
        prop_assert_eq!(e, again);
    }

    #[test]
    fn eval_matches_reference(n in node(), v in 0.0f64..10.0) {
        let e = Expr::from_node(n.clone()).unwrap();
        match (e.eval(v), reference(&n, v)) {
            (Ok(a), Some(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
            (Err(_), None) => {}
            (a, b) => prop_assert!(false, "{e} at {v}: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn canonical_form_agrees_with_eval(n in node(), v in 0.1f64..5.0) {
        let e = Expr::from_node(n).unwrap();
        let form = e.canonicalize();
        if let (Some(want), Ok(got)) = (form.eval(v), e.eval(v)) {
            let scale = want.abs().max(got.abs()).max(1.0);
            prop_assert!((want - got).abs() <= 1e-9 * scale, "{e} -> {form} at {v}: {want} vs {got}");
        }
    }

    #[test]
    fn canonical_families_are_recognized(c in 0.1f64..10.0, q in -3.0f64..3.0, lam in -2.0f64..2.0) {
        let e = parse(&format!("{c:?}*s^{q:?}")).unwrap();
        match e.canonicalize() {
            CanonicalForm::PowerLaw { c: c2, q: q2 } => {
                prop_assert!((c2 - c).abs() < 1e-12 * c && (q2 - q).abs() < 1e-12);
            }
            other => prop_assert!(q == 0.0, "{other}"),
        }
        let e = parse(&format!("{c:?}*exp({lam:?}*s)")).unwrap();
        let ok = matches!(e.canonicalize(), CanonicalForm::ExpLaw { .. } | CanonicalForm::Constant { .. });
        prop_assert!(ok);
    }

    #[test]
    fn tail_verdict_is_scale_invariant(c in 0.01f64..100.0, q in 0.2f64..3.0) {
        let base = parse(&format!("s^{q:?}")).unwrap();
        let scaled = base.scale(c);
        for tier in [Tier::Auto, Tier::Heuristic] {
            let a = integral_tail_converges(&base, 1.0, tier).unwrap();
            let b = integral_tail_converges(&scaled, 1.0, tier).unwrap();
            prop_assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn reaction_bound_scales_and_decreases(c in 0.2f64..5.0, m in 0.2f64..3.0, k in 1.01f64..3.0) {
        let t = |alpha: f64, u0: f64| {
            let spec = ProblemSpec::simple(1.0, "s^2", "0", &format!("{alpha:?}"), "0", &format!("{u0:?}")).unwrap();
            blowup_bound_reaction(&spec).unwrap().finite().unwrap()
        };
        let base = t(c, m);
        prop_assert!((t(k * c, m) - base / k).abs() <= 1e-9 * base);
        prop_assert!(t(c, k * m) < base);
    }

    #[test]
    fn boundary_bound_decreases_in_data(m in 0.2f64..3.0, k in 1.01f64..3.0) {
        let t = |u0: f64| {
            let spec = ProblemSpec::simple(1.0, "0", "s^2", "0", "1", &format!("{u0:?}")).unwrap();
            blowup_bound_boundary(&spec).unwrap().finite().unwrap()
        };
        prop_assert!(t(k * m) < t(m));
    }

    #[test]
    fn decision_table_is_sound(mask in 0u32..(1 << 12)) {
        let holds = |h: Hypothesis| {
            let i = Hypothesis::ALL.iter().position(|&x| x == h).unwrap();
            mask & (1 << i) != 0
        };
        use Hypothesis::*;
        let need: &[Hypothesis] = match decide(holds) {
            Outcome::BlowupBoundary => &[GPositiveNondecreasing, BoundaryTail, BetaDiverges],
            Outcome::BlowupReaction => &[FPositive, ReactionTail, AlphaDiverges],
            Outcome::GlobalAllData => &[BetaZero, FPositive],
            Outcome::GlobalSmallData => &[Holder, SmallPositive, NearZero, CoefficientsIntegrable, KernelWindow],
            Outcome::Inconclusive => &[],
        };
        prop_assert!(need.iter().all(|&h| holds(h)));
        if decide(holds) == Outcome::GlobalAllData {
            prop_assert!(!holds(ReactionTail));
        }
        if holds(GPositiveNondecreasing) && holds(BoundaryTail) && holds(BetaDiverges) {
            prop_assert_eq!(decide(holds), Outcome::BlowupBoundary);
        }
    }

    #[test]
    fn kernel_is_symmetric_and_nonnegative(x in 0.0f64..1.0, y in 0.0f64..1.0, t in 1e-4f64..2.0) {
        let ks = KernelSpec::new(1.0);
        let a = green_eval(&ks, x, y, t).unwrap();
        let b = green_eval(&ks, y, x, t).unwrap();
        prop_assert!(a >= -ks.tol);
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }
}
