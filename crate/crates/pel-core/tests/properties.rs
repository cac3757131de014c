//! Randomized invariants over the lexer, parser, evaluator and scheduler.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use pel_core::eval::Output;
use pel_core::grammar::{sample_program, validate, CapabilityConfig};
use pel_core::lexer::tokenize;
use pel_core::llm::ScriptedMock;
use pel_core::scheduler;
use pel_core::{parse_source, Interp, PelValue};

fn offline_buffered() -> Interp {
    Interp { output: Output::buffer(), ..Interp::offline() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Token spans slice the source back to the exact token text.
    #[test]
    fn token_spans_are_lossless(seed in 0u64..5000) {
        let mut rng = StdRng::seed_from_u64(seed);
        let src = sample_program(&CapabilityConfig::default(), 2, &mut rng);
        for tok in tokenize(&src).unwrap() {
            let slice = &src[tok.span.start as usize..tok.span.end as usize];
            prop_assert_eq!(slice, tok.text.as_str(), "in source {:?}", src);
        }
    }

    /// Printing a parsed program and reparsing it yields the same AST.
    #[test]
    fn pretty_print_round_trips(seed in 0u64..5000) {
        let mut rng = StdRng::seed_from_u64(seed);
        let src = sample_program(&CapabilityConfig::default(), 2, &mut rng);
        let forms = parse_source(&src).unwrap();
        let printed = forms.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("\n");
        let reparsed = parse_source(&printed)
            .unwrap_or_else(|e| panic!("printed form failed to parse: {e}\n{printed}"));
        prop_assert_eq!(forms, reparsed, "printed:\n{}", printed);
    }

    /// Samples drawn from a restricted grammar stay inside it.
    #[test]
    fn restricted_samples_validate(seed in 0u64..5000, pipe in any::<bool>(), quote in any::<bool>()) {
        let caps = CapabilityConfig { allow_pipe: pipe, allow_quote: quote, ..CapabilityConfig::default() };
        let mut rng = StdRng::seed_from_u64(seed);
        let src = sample_program(&caps, 2, &mut rng);
        let forms = parse_source(&src).unwrap();
        prop_assert!(validate(&forms, &caps).is_empty(), "sample: {:?}", src);
    }

    /// Feeding arguments one at a time through partials matches one call.
    #[test]
    fn partial_application_is_order_insensitive_currying(
        args in proptest::collection::vec(-100i64..100, 1..=4),
        split in 0usize..4,
    ) {
        let n = args.len();
        let split = split % n;
        let params: Vec<String> = (0..n).map(|i| format!(":p{i}")).collect();
        let body = (0..n).map(|i| format!("p{i}")).collect::<Vec<_>>().join(" ");
        let arglist = args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
        let first = args[..split].iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
        let rest = args[split..].iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
        let def = format!("(def f (lambda [{}] (+ [{}])))", params.join(" "), body);
        let one_shot = offline_buffered().eval_source(&format!("{def}\n(f {arglist})")).unwrap();
        let split_call = offline_buffered()
            .eval_source(&format!("{def}\n(def g (f {first}))\n(g {rest})"))
            .unwrap();
        prop_assert_eq!(one_shot, split_call);
    }

    /// A caret-free pipe stage is first-argument insertion; a caret stage is
    /// substitution at the caret.
    #[test]
    fn pipe_rewrites_are_equivalent(v in -50i64..50, a in -50i64..50, b in -50i64..50) {
        let defs = "(def f (lambda [:x :y :z] [x y z]))";
        let piped = offline_buffered().eval_source(&format!("{defs}\n{v} \u{25B7} (f {a} {b})")).unwrap();
        let direct = offline_buffered().eval_source(&format!("{defs}\n(f {v} {a} {b})")).unwrap();
        prop_assert_eq!(piped, direct);

        let caret = offline_buffered().eval_source(&format!("{defs}\n{v} \u{25B7} (f {a} ^ {b})")).unwrap();
        let subst = offline_buffered().eval_source(&format!("{defs}\n(f {a} {v} {b})")).unwrap();
        prop_assert_eq!(caret, subst);
    }

    /// Concurrent scheduling of pure def programs matches sequential order.
    #[test]
    fn concurrent_defs_match_sequential(vals in proptest::collection::vec(-100i64..100, 2..6)) {
        let mut program = String::new();
        for (i, v) in vals.iter().enumerate() {
            program.push_str(&format!("(def v{i} (+ {v} {i}))\n"));
        }
        program.push_str(&format!(
            "(+ [{}])",
            (0..vals.len()).map(|i| format!("v{i}")).collect::<Vec<_>>().join(" ")
        ));
        let forms = parse_source(&program).unwrap();

        let seq = offline_buffered();
        let seq_val = seq.eval_source(&program).unwrap();

        let conc = Interp { jobs: 4, ..offline_buffered() };
        let conc_val = scheduler::run_exprs_concurrent(&conc, &forms, &conc.global).unwrap();
        prop_assert_eq!(seq_val, conc_val.clone());
        for i in 0..vals.len() {
            prop_assert_eq!(seq.global.lookup(&format!("v{i}")), conc.global.lookup(&format!("v{i}")));
        }
    }

    /// do/async agrees with do on pure bodies.
    #[test]
    fn do_async_matches_do(vals in proptest::collection::vec(-100i64..100, 1..5)) {
        let body = vals.iter().map(|v| format!("(* {v} 2)")).collect::<Vec<_>>().join("\n  ");
        let d = offline_buffered().eval_source(&format!("(do\n  {body})")).unwrap();
        let a = offline_buffered().eval_source(&format!("(do/async\n  {body})")).unwrap();
        prop_assert_eq!(d, a);
    }

    /// Key/value alternation folds to pairs and indexing sees the pairs.
    #[test]
    fn pair_folding_is_stable(pairs in proptest::collection::vec(("[a-z]{1,6}", -100i64..100), 1..5)) {
        let body = pairs
            .iter()
            .map(|(k, v)| format!(":{k} {v}"))
            .collect::<Vec<_>>()
            .join(" ");
        let val = offline_buffered().eval_source(&format!("[{body}]")).unwrap();
        let PelValue::List(items) = val else { panic!("expected a list") };
        prop_assert_eq!(items.len(), pairs.len());
        for (item, (k, v)) in items.iter().zip(&pairs) {
            prop_assert_eq!(item, &PelValue::Pair(k.clone(), Box::new(PelValue::int(*v))));
        }
    }
}

#[test]
fn natural_condition_replies_map_to_bools() {
    for (reply, expected) in [("yes", true), ("true", true), ("no", false), ("false", false)] {
        let script = format!("condition | looks big | {reply}");
        let interp = Interp {
            output: Output::buffer(),
            ..Interp::new(ScriptedMock::parse(&script).unwrap().shared())
        };
        let v = interp.eval_source("(case 9000 [ \"looks big\" 1 #t 2 ])").unwrap();
        assert_eq!(v, PelValue::int(if expected { 1 } else { 2 }), "reply {reply}");
    }
}
