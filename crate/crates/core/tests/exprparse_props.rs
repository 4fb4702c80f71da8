//! Grammar totality, span fidelity and pretty-print round trips.

use fracwave::exprparse::{parse, tokenize, BinOp, ExprAst, Func, Var};
use fracwave::fracops::sampling::seeded_rng;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

const PIECES: &[&str] = &[
    "x", "t", "pi", "1", "2.5", "1e-3", ".5", "3.", "+", "-", "*", "/", "^", "(", ")", ",", "sin", "cos", "exp",
    "sqrt", "abs", "y", " ", "1e", "..", "#", "é", "0",
];

#[test]
fn fuzz_corpus_never_panics() {
    let mut rng = seeded_rng(2024);
    let mut parsed = 0;
    for _ in 0..10_000 {
        let len = rng.gen_range(1..24);
        let src: String = (0..len).map(|_| *PIECES.choose(&mut rng).unwrap()).collect();
        match parse(&src) {
            Ok(ast) => {
                parsed += 1;
                // evaluation yields a value or a structured error, never a panic
                let _ = ast.evaluate(0.3, 0.7);
            }
            Err(err) => {
                let span = err.span();
                assert!(span.start <= span.end && span.end <= src.len(), "{src:?}: {err}");
                assert!(src.is_char_boundary(span.start) && src.is_char_boundary(span.end));
                if span.start < src.len() {
                    let text = &src[span.start..span.end];
                    assert!(!text.trim().is_empty(), "{src:?}: empty span for {err}");
                } else {
                    assert_eq!(span.start, span.end);
                }
            }
        }
    }
    assert!(parsed > 100, "corpus too hostile: only {parsed} parsed");
}

#[test]
fn error_span_names_the_offending_token() {
    for (src, text) in [("1 + y", "y"), ("sin(x))", ")"), ("2 x", "x"), ("3 * / 4", "/"), ("1..2", ".")] {
        let err = parse(src).unwrap_err();
        assert_eq!(&src[err.span().start..err.span().end], text, "{src}: {err}");
    }
}

#[test]
fn tokens_cover_their_text() {
    let src = "  sqrt( x^2 + 1.5e2 )*cos(pi*t) ";
    for tok in tokenize(src).unwrap() {
        let text = &src[tok.span.start..tok.span.end];
        assert!(!text.is_empty() && text.trim() == text);
    }
}

fn arb_ast() -> impl Strategy<Value = ExprAst> {
    let leaf = prop_oneof![
        (0.0f64..1e6).prop_map(ExprAst::Number),
        Just(ExprAst::Var(Var::X)),
        Just(ExprAst::Var(Var::T)),
        Just(ExprAst::Pi),
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow)
        ];
        let func = prop_oneof![
            Just(Func::Sin),
            Just(Func::Cos),
            Just(Func::Exp),
            Just(Func::Sqrt),
            Just(Func::Abs)
        ];
        prop_oneof![
            inner.clone().prop_map(|e| ExprAst::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(op, l, r)| ExprAst::Binary {
                op,
                lhs: Box::new(l),
                rhs: Box::new(r)
            }),
            (func, inner).prop_map(|(func, a)| ExprAst::Call { func, arg: Box::new(a) }),
        ]
    })
}

proptest! {
    #[test]
    fn printed_tree_reparses_identically(ast in arb_ast()) {
        let printed = ast.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(back, ast);
    }

    #[test]
    fn evaluation_is_pure(ast in arb_ast(), x in -2.0f64..2.0, t in 0.0f64..3.0) {
        let a = ast.evaluate(x, t);
        let b = ast.evaluate(x, t);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
            (a, b) => prop_assert_eq!(a, b),
        }
    }
}
