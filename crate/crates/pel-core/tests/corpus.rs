//! End-to-end coverage of the surface syntax: a corpus of representative
//! programs that must tokenize, parse, validate under permissive
//! capabilities, and (where an expected value is pinned) evaluate to it.

use pel_core::eval::Output;
use pel_core::grammar::{validate, CapabilityConfig};
use pel_core::llm::ScriptedMock;
use pel_core::{parse_source, Interp, PelValue};

fn assert_parses(src: &str) {
    let forms = parse_source(src).unwrap_or_else(|e| panic!("parse failed: {e}\nsource:\n{src}"));
    assert!(!forms.is_empty(), "no forms in:\n{src}");
    let caps = CapabilityConfig::default();
    let violations = validate(&forms, &caps);
    assert!(violations.is_empty(), "violations {violations:?} in:\n{src}");
}

fn eval_str(src: &str) -> String {
    Interp::offline().eval_source(src).unwrap_or_else(|e| panic!("eval failed: {e}\nsource:\n{src}")).to_string()
}

fn eval_with_output(src: &str) -> (String, String) {
    let interp = Interp { output: Output::buffer(), ..Interp::offline() };
    let v = interp.eval_source(src).unwrap_or_else(|e| panic!("eval failed: {e}\nsource:\n{src}"));
    let out = interp.output.contents();
    (v.to_string(), out)
}

const PARSE_CORPUS: &[&str] = &[
    // definitions
    "(def pi 3.14)           ; Variable definition",
    "(def greet (lambda [:name] (print \"Hello, \" name))) ; Function definition",
    // body-first definition through a pipe
    "(lambda [:x :y]\n  [(pow x 2) (pow y 2)] \u{25B7} (+) \u{25B7} (sqrt)\n) \u{25B7} (def my-foo ^)",
    // partial application
    "(def add (lambda [:x :y] (+ x y)))\n(def add5 (add 5))\n(add5 10)",
    // pipes and carets
    "[1 2 3 4] \u{25B7} (len) \u{25B7} (+ 5)",
    "\"world\" \u{25B7} (concat \"hello, \" ^)",
    "5 \u{25B7} (* 10 ^)",
    "[1 2 3] \u{25B7} (print :vals [\"a list of items:\" ^] :sep \" \")",
    // list calls
    "([5 6 7 8] :at 1)",
    "([5 6 7 8] :to 2)",
    "([5 6 7 8] :from 2)",
    "([5 6 7 8] :from 1 :to 3)",
    "([5 6 7 8] :at [1 3])",
    "([:a 1 :b 2 :c 3] :at ':a)",
    "([:a 1 :b 2 :c 3] :at [':a ':c])",
    "([:a 1 :b 2 :c 3] :at [1 3])",
    "([5 6 7 8] 1)",
    "([5 6 7 8] () 1 3)",
    "(def data [1 2 3 4 5])\n(for [0 2 4] i\n  i \u{25B7} (data :at ^) \u{25B7} (print))",
    // control flow
    "(def data [1 2 3])\n(if data \u{25B7} (len) \u{25B7} (gt 2)\n  (print \"length of data is greater than 2\")\n  (print \"data is too short\"))",
    "(def data [1 2 3])\ndata \u{25B7} (len) \u{25B7} (gt 2) \u{25B7}\n  (if :cond ^\n      :then (print \"length of data is greater than 2\")\n      :else (print \"data is too short\"))",
    "(def my-list [1 2 3 4 5 6])\n(case my-list [\n  (len) \u{25B7} (gt 5)\n  \"length of my-list is greater than 5\"\n  #t ; Default case\n  (print \"all conditions failed\")\n]) \u{25B7} (print)",
    "(for :coll [1 2 3] :iterator i :body (* i 2))",
    "(do\n  (print \"Starting...\")\n  (def x 5)\n  (+ x 10))",
    // natural language conditions
    "(def user-profile [:tier \"gold\"])\n(case user-profile [\n  \"is a premium member\" (grant-access user-profile)\n  \"has incomplete profile\" (prompt-completion user-profile)\n  #t (show-basic-view)\n])",
    // agent orchestration
    "(FIN-AGENT :query \"give me the latest financial report for this quarter\"\n           :expect \"string\") \u{25B7} (def financial_report ^)\n(SALES-AGENT :query \"I need our sales data in detail\"\n             :expect \"string\") \u{25B7} (def sales_data ^)\n(add financial_report sales_data) \u{25B7} (summarize) ; erroneous code",
    "(MAIN/FINANCE :query \"what's the budget allocation\n                    for social media advertising?\"\n              :expect \"num\")\n\u{25B7} (def social_media_budget ^)\n(MAIN/MARKETING :query \"come up with an effective advertising campaign\n                    on social media given the given budget\"\n                :context social_media_budget\n                :expect \"string\")\n\u{25B7} (def social_media_strategy ^)\n[:social_media_budget social_media_budget\n :social_media_strategy social_media_strategy]",
    "(meeting :group [\"MAIN/MARKETING/SOCIAL_MEDIA\"\n                \"MAIN/MARKETING/CONTENT_MARKETING\"]\n        :rounds 3\n        :topic \"come up with a great advertising campaign given the budget\"\n        :context social_media_budget)\n\u{25B7} (summarize)\n\u{25B7} (def plan_summary ^)\n[:plan_summary plan_summary]",
    // literals and data
    "[1 #t \"hello\"]",
    "[1 \"two\" #t #nil]",
    "[:name \"Pel\" :version 1]",
    "()",
    "'(foo bar)",
    "'(a \u{25B7} (b ^))",
    "(def s \"line one\nline two\")",
    "#t #f #nil :flag",
    "5 |> (+ 1)",
];

#[test]
fn corpus_parses_and_validates() {
    for src in PARSE_CORPUS {
        assert_parses(src);
    }
}

#[test]
fn pipe_chain_into_arithmetic() {
    assert_eq!(eval_str("[1 2 3 4] \u{25B7} (len) \u{25B7} (+ 5)"), "9");
}

#[test]
fn partial_application_chain() {
    assert_eq!(eval_str("(def add (lambda [:x :y] (+ x y)))\n(def add5 (add 5))\n(add5 10)"), "15");
}

#[test]
fn body_first_definition() {
    let src = "(lambda [:x :y]\n  [(pow x 2) (pow y 2)] \u{25B7} (+) \u{25B7} (sqrt)\n) \u{25B7} (def my-foo ^)\n(my-foo 3 4)";
    assert_eq!(eval_str(src), "5");
}

#[test]
fn caret_injection() {
    assert_eq!(eval_str("\"world\" \u{25B7} (concat \"hello, \" ^)"), "\"hello, world\"");
    assert_eq!(eval_str("5 \u{25B7} (* 10 ^)"), "50");
}

#[test]
fn caret_injection_inside_nested_list() {
    let (v, out) = eval_with_output("[1 2 3] \u{25B7} (print :vals [\"a list of items:\" ^] :sep \" \")");
    assert_eq!(out, "a list of items: [1 2 3]\n");
    assert_eq!(v, "[\"a list of items:\" [1 2 3]]");
}

#[test]
fn list_call_catalogue() {
    let cases = [
        ("([5 6 7 8] :at 1)", "5"),
        ("([5 6 7 8] :to 2)", "[5 6]"),
        ("([5 6 7 8] :from 2)", "[6 7 8]"),
        ("([5 6 7 8] :from 1 :to 3)", "[5 6 7]"),
        ("([5 6 7 8] :at [1 3])", "[5 7]"),
        ("([:a 1 :b 2 :c 3] :at ':a)", "1"),
        ("([:a 1 :b 2 :c 3] :at [':a ':c])", "[1 3]"),
        ("([:a 1 :b 2 :c 3] :at [1 3])", "[:a 1 :c 3]"),
    ];
    for (src, expected) in cases {
        assert_eq!(eval_str(src), expected, "case: {src}");
    }
}

#[test]
fn list_call_positional_shorthand() {
    assert_eq!(eval_str("([5 6 7 8] 1)"), "5");
    assert_eq!(eval_str("([5 6 7 8] () 1 3)"), "[5 6 7]");
}

#[test]
fn indexing_through_a_pipe_loop() {
    let src = "(def data [10 20 30 40 50])\n(for [1 3 5] i\n  i \u{25B7} (data :at ^))";
    assert_eq!(eval_str(src), "[10 30 50]");
}

#[test]
fn if_with_piped_condition() {
    let src = "(def data [1 2 3])\n(if data \u{25B7} (len) \u{25B7} (gt 2)\n  (print \"length of data is greater than 2\")\n  (print \"data is too short\"))";
    let (_, out) = eval_with_output(src);
    assert_eq!(out, "length of data is greater than 2\n");
}

#[test]
fn if_called_with_named_arguments_via_pipe() {
    let src = "(def data [1 2 3])\ndata \u{25B7} (len) \u{25B7} (gt 2) \u{25B7}\n  (if :cond ^\n      :then (print \"length of data is greater than 2\")\n      :else (print \"data is too short\"))";
    let (_, out) = eval_with_output(src);
    assert_eq!(out, "length of data is greater than 2\n");
}

#[test]
fn case_with_piped_condition() {
    let src = "(def my-list [1 2 3 4 5 6])\n(case my-list [\n  (len) \u{25B7} (gt 5)\n  \"length of my-list is greater than 5\"\n  #t\n  (print \"all conditions failed\")\n]) \u{25B7} (print)";
    let (_, out) = eval_with_output(src);
    assert_eq!(out, "length of my-list is greater than 5\n");
}

#[test]
fn for_returns_the_mapped_list() {
    assert_eq!(eval_str("(for :coll [1 2 3] :iterator i :body (* i 2))"), "[2 4 6]");
}

#[test]
fn do_sequences_and_returns_last() {
    let (v, out) = eval_with_output("(do\n  (print \"Starting...\")\n  (def x 5)\n  (+ x 10))");
    assert_eq!(v, "15");
    assert_eq!(out, "Starting...\n");
}

#[test]
fn natural_language_case_condition_consults_the_backend() {
    let script = "condition | premium member | yes";
    let interp = Interp {
        output: Output::buffer(),
        ..Interp::new(ScriptedMock::parse(script).unwrap().shared())
    };
    let src = "(def user-profile [:tier \"gold\"])\n(case user-profile [\n  \"is a premium member\" \"welcome back\"\n  #t \"basic view\"\n])";
    let v = interp.eval_source(src).unwrap();
    assert_eq!(v, PelValue::str("welcome back"));
}

#[test]
fn empty_call_is_nil() {
    assert_eq!(eval_str("()"), "#nil");
}

#[test]
fn strings_span_lines_and_comments_end_at_newline() {
    assert_eq!(eval_str("(def s \"line one\nline two\") ; trailing comment\ns"), "\"line one\nline two\"");
}

#[test]
fn quote_absorbs_a_whole_chain() {
    // the parens make a call whose operator is the chain; quote flattens both
    assert_eq!(eval_str("'(a \u{25B7} (b ^))"), "[[\"a\" \"\u{25B7}\" [\"b\" \"^\"]]]");
}

#[test]
fn ascii_pipe_alias() {
    assert_eq!(eval_str("5 |> (+ 1)"), "6");
}
