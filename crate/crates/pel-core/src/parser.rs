//! Recursive-descent parser.
//!
//! Grammar, ignoring whitespace and comments:
//!
//! ```text
//! program    = { expression }
//! expression = primary { PIPE primary }
//! primary    = atom | "(" { expression } ")" | "[" { expression } "]"
//!            | QUOTE expression
//! ```
//!
//! After a call's elements or a list's elements are parsed, `:key value`
//! sequences are folded into pairs. Folding applies to call argument
//! positions (never the operator slot), literal-list bodies and the top
//! level, and is switched off for everything underneath a quote.
//!
//! Two call shapes get normalized here rather than in the evaluator:
//! `()` becomes the nil literal, and a multi-argument `(do ...)` or
//! `(do/async ...)` has its arguments wrapped into one implicit literal list.

use crate::ast::{Expr, ExprKind};
use crate::error::{PelError, Result};
use crate::lexer::{tokenize, Token, TokenKind};
use crate::num::PelNum;
use crate::span::Span;

pub fn parse_source(src: &str) -> Result<Vec<Expr>> {
    parse_program(&tokenize(src)?)
}

pub fn parse_program(tokens: &[Token]) -> Result<Vec<Expr>> {
    let mut p = Parser { tokens, pos: 0 };
    let mut forms = Vec::new();
    while !p.at_end() {
        forms.push(p.expression(true)?);
    }
    Ok(fold_pairs(forms))
}

/// Fold `:key value` / trailing `:key` sequences into Pair nodes. A key
/// followed by anything that is not itself a key atom absorbs it as the pair
/// value; a key followed by another key, or sitting at the end, pairs with
/// nothing.
pub fn fold_pairs(elems: Vec<Expr>) -> Vec<Expr> {
    let mut out = Vec::with_capacity(elems.len());
    let mut it = elems.into_iter().peekable();
    while let Some(e) = it.next() {
        if let ExprKind::Key(key) = &e.kind {
            let key = key.clone();
            let absorb = it.peek().is_some_and(|n| !n.is_key_atom());
            if absorb {
                let value = it.next().unwrap();
                let span = e.span.merge(&value.span);
                out.push(Expr::new(ExprKind::Pair { key, value: Some(Box::new(value)) }, span));
            } else {
                out.push(Expr::new(ExprKind::Pair { key, value: None }, e.span));
            }
        } else {
            out.push(e);
        }
    }
    out
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eof_span(&self) -> Span {
        match self.tokens.last() {
            Some(t) => Span::point(t.span.end, t.span.end_line, t.span.end_col + 1),
            None => Span::default(),
        }
    }

    fn expression(&mut self, allow_pairs: bool) -> Result<Expr> {
        let first = self.primary(allow_pairs)?;
        if !matches!(self.peek().map(|t| t.kind), Some(TokenKind::Pipe)) {
            return Ok(first);
        }
        let mut stages = vec![first];
        while matches!(self.peek().map(|t| t.kind), Some(TokenKind::Pipe)) {
            let pipe_span = self.next().unwrap().span;
            if self.at_end() || matches!(self.peek().map(|t| t.kind), Some(TokenKind::RParen | TokenKind::RBracket)) {
                return Err(PelError::parse("pipe is missing its right-hand expression", pipe_span)
                    .incomplete_input());
            }
            stages.push(self.primary(allow_pairs)?);
        }
        let span = stages[0].span.merge(&stages.last().unwrap().span);
        Ok(Expr::new(ExprKind::Pipe(stages), span))
    }

    fn primary(&mut self, allow_pairs: bool) -> Result<Expr> {
        let Some(tok) = self.next() else {
            return Err(PelError::parse("unexpected end of input", self.eof_span()).incomplete_input());
        };
        let tok = tok.clone();
        match tok.kind {
            TokenKind::Number => Ok(Expr::new(ExprKind::Num(PelNum::parse(&tok.text)), tok.span)),
            TokenKind::Str => {
                let inner = tok.text[1..tok.text.len() - 1].to_string();
                Ok(Expr::new(ExprKind::Str(inner), tok.span))
            }
            TokenKind::Bool => Ok(Expr::new(ExprKind::Bool(tok.text == "#t"), tok.span)),
            TokenKind::Nil => Ok(Expr::new(ExprKind::Nil, tok.span)),
            TokenKind::Key => Ok(Expr::new(ExprKind::Key(tok.text[1..].to_string()), tok.span)),
            TokenKind::Symbol => Ok(Expr::new(ExprKind::Symbol(tok.text.clone()), tok.span)),
            TokenKind::Quote => {
                if self.at_end() {
                    return Err(PelError::parse("quote at end of input", tok.span).incomplete_input());
                }
                let inner = self.expression(false)?;
                let span = tok.span.merge(&inner.span);
                Ok(Expr::new(ExprKind::Quoted(Box::new(inner)), span))
            }
            TokenKind::LParen => self.call(tok.span, allow_pairs),
            TokenKind::LBracket => {
                let (elems, close) = self.elements_until(TokenKind::RBracket, "]", allow_pairs)?;
                let elems = if allow_pairs { fold_pairs(elems) } else { elems };
                Ok(Expr::new(ExprKind::List(elems), tok.span.merge(&close)))
            }
            TokenKind::RParen => Err(PelError::parse("unexpected `)`", tok.span)),
            TokenKind::RBracket => Err(PelError::parse("unexpected `]`", tok.span)),
            TokenKind::Pipe => Err(PelError::parse("pipe is missing its left-hand expression", tok.span)),
        }
    }

    fn call(&mut self, open: Span, allow_pairs: bool) -> Result<Expr> {
        let (mut elems, close) = self.elements_until(TokenKind::RParen, ")", allow_pairs)?;
        let span = open.merge(&close);
        if elems.is_empty() {
            // () is the nil literal
            return Ok(Expr::new(ExprKind::Nil, span));
        }
        let op = elems.remove(0);
        let mut args = if allow_pairs { fold_pairs(elems) } else { elems };

        // (do a b c) sugar: wrap the arguments into one literal list
        if matches!(op.symbol_name(), Some("do") | Some("do/async"))
            && !(args.len() == 1 && matches!(args[0].kind, ExprKind::List(_)))
        {
            let list_span = match (args.first(), args.last()) {
                (Some(f), Some(l)) => f.span.merge(&l.span),
                _ => span,
            };
            args = vec![Expr::new(ExprKind::List(args), list_span)];
        }

        Ok(Expr::new(ExprKind::Call { op: Box::new(op), args }, span))
    }

    fn elements_until(
        &mut self,
        close: TokenKind,
        close_text: &str,
        allow_pairs: bool,
    ) -> Result<(Vec<Expr>, Span)> {
        let mut elems = Vec::new();
        loop {
            match self.peek() {
                None => {
                    return Err(PelError::parse(
                        format!("missing closing `{close_text}`"),
                        self.eof_span(),
                    )
                    .incomplete_input());
                }
                Some(t) if t.kind == close => {
                    let span = t.span;
                    self.pos += 1;
                    return Ok((elems, span));
                }
                Some(_) => elems.push(self.expression(allow_pairs)?),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ErrorKind;

    fn one(src: &str) -> Expr {
        let mut forms = parse_source(src).unwrap();
        assert_eq!(forms.len(), 1, "expected one form in {src:?}");
        forms.remove(0)
    }

    fn roundtrip(src: &str) -> String {
        one(src).to_string()
    }

    #[test]
    fn calls_are_operator_first() {
        let e = one("(+ 1 2)");
        match e.kind {
            ExprKind::Call { op, args } => {
                assert_eq!(op.symbol_name(), Some("+"));
                assert_eq!(args.len(), 2);
            }
            _ => panic!("not a call"),
        }
    }

    #[test]
    fn empty_parens_are_nil() {
        assert!(matches!(one("()").kind, ExprKind::Nil));
        assert!(matches!(one("( )").kind, ExprKind::Nil));
    }

    #[test]
    fn literal_lists_are_never_calls() {
        let e = one("[1 \"two\" #t #nil]");
        match e.kind {
            ExprKind::List(items) => assert_eq!(items.len(), 4),
            _ => panic!("not a list"),
        }
    }

    #[test]
    fn pair_folding_in_lists() {
        let e = one("[:name \"Pel\" :version 1]");
        match e.kind {
            ExprKind::List(items) => {
                assert_eq!(items.len(), 2);
                assert!(matches!(&items[0].kind, ExprKind::Pair { key, value: Some(_) } if key == "name"));
                assert!(matches!(&items[1].kind, ExprKind::Pair { key, value: Some(_) } if key == "version"));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn lone_keys_pair_with_nothing() {
        let e = one("[:flag]");
        match e.kind {
            ExprKind::List(items) => {
                assert!(matches!(&items[0].kind, ExprKind::Pair { value: None, .. }));
            }
            _ => panic!(),
        }
        // key followed by key: first one closes without a value
        let e = one("[:a :b 1]");
        match e.kind {
            ExprKind::List(items) => {
                assert_eq!(items.len(), 2);
                assert!(matches!(&items[0].kind, ExprKind::Pair { key, value: None } if key == "a"));
                assert!(matches!(&items[1].kind, ExprKind::Pair { key, value: Some(_) } if key == "b"));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn operator_slot_is_not_folded() {
        let e = one("(:a 1)");
        match e.kind {
            ExprKind::Call { op, args } => {
                assert!(matches!(op.kind, ExprKind::Key(_)));
                assert_eq!(args.len(), 1);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn no_pairs_under_quote() {
        let e = one("'[:a 1]");
        fn assert_no_pairs(e: &Expr) {
            match &e.kind {
                ExprKind::Pair { .. } => panic!("pair under quote"),
                ExprKind::Call { op, args } => {
                    assert_no_pairs(op);
                    args.iter().for_each(assert_no_pairs);
                }
                ExprKind::List(items) => items.iter().for_each(assert_no_pairs),
                ExprKind::Quoted(i) => assert_no_pairs(i),
                ExprKind::Pipe(s) => s.iter().for_each(assert_no_pairs),
                _ => {}
            }
        }
        assert_no_pairs(&e);
        match e.kind {
            ExprKind::Quoted(inner) => match inner.kind {
                ExprKind::List(items) => assert_eq!(items.len(), 2),
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn top_level_pairs_fold() {
        let forms = parse_source(":k 5").unwrap();
        assert_eq!(forms.len(), 1);
        assert!(matches!(&forms[0].kind, ExprKind::Pair { key, value: Some(_) } if key == "k"));
    }

    #[test]
    fn pipe_chains_are_flat() {
        let e = one("[1 2 3 4] ▷ (len) ▷ (+ 5)");
        match e.kind {
            ExprKind::Pipe(stages) => assert_eq!(stages.len(), 3),
            _ => panic!("not a pipe chain"),
        }
    }

    #[test]
    fn ascii_pipe_alias() {
        let e = one("5 |> (* 10 ^)");
        assert!(matches!(e.kind, ExprKind::Pipe(_)));
    }

    #[test]
    fn argument_slots_consume_pipe_chains_greedily() {
        let e = one("(if data ▷ (len) ▷ (gt 2) (print \"big\") (print \"small\"))");
        match e.kind {
            ExprKind::Call { args, .. } => {
                assert_eq!(args.len(), 3);
                assert!(matches!(args[0].kind, ExprKind::Pipe(_)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn pipes_continue_across_newlines() {
        let forms = parse_source("(f 1)\n▷ (def x ^)").unwrap();
        assert_eq!(forms.len(), 1);
        assert!(matches!(forms[0].kind, ExprKind::Pipe(_)));
    }

    #[test]
    fn do_sugar_wraps_arguments() {
        assert_eq!(roundtrip("(do\n  (print \"Starting...\")\n  (def x 5)\n  (+ x 10))"), "(do [(print \"Starting...\") (def x 5) (+ x 10)])");
        assert_eq!(roundtrip("(do/async (f) (g))"), "(do/async [(f) (g)])");
        assert_eq!(roundtrip("(do)"), "(do [])");
        // already in canonical shape: untouched
        assert_eq!(roundtrip("(do [(f) (g)])"), "(do [(f) (g)])");
        // other operators keep their arguments as written
        assert_eq!(roundtrip("(f (g) (h))"), "(f (g) (h))");
    }

    #[test]
    fn quote_wraps_the_whole_expression() {
        let e = one("'a ▷ (f)");
        match e.kind {
            ExprKind::Quoted(inner) => assert!(matches!(inner.kind, ExprKind::Pipe(_))),
            _ => panic!("quote should absorb the pipe chain"),
        }
    }

    #[test]
    fn parse_errors() {
        let err = parse_source("(+ 1").unwrap_err();
        assert_eq!(err.kind, ErrorKind::ParseError);
        assert!(err.incomplete);

        let err = parse_source(")").unwrap_err();
        assert!(err.message.contains("unexpected `)`"));
        assert!(!err.incomplete);

        let err = parse_source("]").unwrap_err();
        assert!(err.message.contains("unexpected `]`"));

        let err = parse_source("1 ▷").unwrap_err();
        assert!(err.message.contains("right-hand"));
        assert!(err.incomplete);

        let err = parse_source("'").unwrap_err();
        assert!(err.message.contains("quote at end"));

        let err = parse_source("▷ (f)").unwrap_err();
        assert!(err.message.contains("left-hand"));
    }

    #[test]
    fn spans_cover_whole_nodes() {
        let e = one("(print [\"hello\" name] :sep \" \")");
        assert_eq!(e.span.col, 1);
        assert_eq!(e.span.end_col, 31);
        assert_eq!(e.span.line, 1);
    }

    #[test]
    fn pretty_print_reparses_identically() {
        for src in [
            "(+ 1 2)",
            "[1 #t \"hello\"]",
            "(def greet (lambda [:name] (print \"Hello, \" name)))",
            "[1 2 3 4] ▷ (len) ▷ (+ 5)",
            "(print :vals [\"hello\" name] :sep \" \")",
            "'[:a 1]",
            "([:a 1 :b 2 :c 3] :at ':a)",
            "(for :coll [1 2 3] :iterator i :body (* i 2))",
            "(do [(print \"x\") (def x 5) (+ x 10)])",
            "[:flag :k 1]",
        ] {
            let first = parse_source(src).unwrap();
            let printed: Vec<String> = first.iter().map(|e| e.to_string()).collect();
            let second = parse_source(&printed.join("\n")).unwrap();
            assert_eq!(first, second, "round-trip failed for {src:?} -> {printed:?}");
        }
    }
}
