//! Tokenizer.
//!
//! Tokens are matched with maximal munch: at each position every terminal is
//! tried, the longest match wins, and ties go to the more specific class.
//! The classes, most specific first:
//!
//! ```text
//! BOOL    #t | #f
//! NIL     #nil
//! STRING  "[^"]*"          (no escapes; may span lines)
//! KEY     :[a-zA-Z0-9_+*/?!<=>.-]+
//! NUMBER  -?[0-9]+(.[0-9]+)?
//! PIPE    ▷ | |>
//! ( ) [ ] and '
//! SYMBOL  any run of chars not in { whitespace ( ) [ ] " ' ; ▷ | }
//! ```
//!
//! `;` starts a comment running to end of line. Whitespace and comments are
//! skipped and never surface as tokens. The caret `^` used by pipes is an
//! ordinary SYMBOL here.

use crate::error::{PelError, Result};
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Quote,
    Pipe,
    Bool,
    Nil,
    Str,
    Key,
    Number,
    Symbol,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Exact source text, including quotes for strings.
    pub text: String,
    pub span: Span,
}

fn is_key_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_+*/?!<=>.-".contains(c)
}

fn is_symbol_char(c: char) -> bool {
    !(c.is_whitespace() || "()[]\"';|▷".contains(c))
}

struct Scanner<'s> {
    src: &'s str,
    chars: Vec<(usize, char)>,
    /// Index into `chars`.
    pos: usize,
    line: u32,
    col: u32,
}

impl<'s> Scanner<'s> {
    fn new(src: &'s str) -> Scanner<'s> {
        Scanner { src, chars: src.char_indices().collect(), pos: 0, line: 1, col: 1 }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).map(|&(_, c)| c)
    }

    fn byte_at(&self, idx: usize) -> usize {
        self.chars.get(idx).map(|&(b, _)| b).unwrap_or(self.src.len())
    }

    /// Advance `n` chars, keeping line/col in sync, and return the span covered.
    fn bump(&mut self, n: usize) -> Span {
        debug_assert!(n > 0);
        let start = self.byte_at(self.pos);
        let (line, col) = (self.line, self.col);
        let mut end_line = self.line;
        let mut end_col = self.col;
        for _ in 0..n {
            let c = self.chars[self.pos].1;
            end_line = self.line;
            end_col = self.col;
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
            self.pos += 1;
        }
        let end = self.byte_at(self.pos);
        Span { start, end, line, col, end_line, end_col }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek(0) {
                Some(c) if c.is_whitespace() => {
                    self.bump(1);
                }
                Some(';') => {
                    while let Some(c) = self.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        self.bump(1);
                    }
                }
                _ => break,
            }
        }
    }

    /// Length in chars of each terminal matching at the current position.
    fn match_lengths(&self) -> Vec<(TokenKind, usize)> {
        let mut out = Vec::new();
        let at = |i: usize| self.peek(i);

        // bool / nil
        if at(0) == Some('#') {
            if matches!(at(1), Some('t') | Some('f')) {
                out.push((TokenKind::Bool, 2));
            }
            if at(1) == Some('n') && at(2) == Some('i') && at(3) == Some('l') {
                out.push((TokenKind::Nil, 4));
            }
        }
        // string
        if at(0) == Some('"') {
            let mut i = 1;
            loop {
                match at(i) {
                    Some('"') => {
                        out.push((TokenKind::Str, i + 1));
                        break;
                    }
                    Some(_) => i += 1,
                    None => break, // unterminated; handled by caller
                }
            }
        }
        // key
        if at(0) == Some(':') {
            let mut i = 1;
            while at(i).is_some_and(is_key_char) {
                i += 1;
            }
            if i > 1 {
                out.push((TokenKind::Key, i));
            }
        }
        // number
        {
            let mut i = 0;
            if at(i) == Some('-') {
                i += 1;
            }
            let digits_start = i;
            while at(i).is_some_and(|c| c.is_ascii_digit()) {
                i += 1;
            }
            if i > digits_start {
                if at(i) == Some('.') {
                    let mut j = i + 1;
                    while at(j).is_some_and(|c| c.is_ascii_digit()) {
                        j += 1;
                    }
                    if j > i + 1 {
                        i = j;
                    }
                }
                out.push((TokenKind::Number, i));
            }
        }
        // pipe
        if at(0) == Some('▷') {
            out.push((TokenKind::Pipe, 1));
        }
        if at(0) == Some('|') && at(1) == Some('>') {
            out.push((TokenKind::Pipe, 2));
        }
        // delimiters and quote
        match at(0) {
            Some('(') => out.push((TokenKind::LParen, 1)),
            Some(')') => out.push((TokenKind::RParen, 1)),
            Some('[') => out.push((TokenKind::LBracket, 1)),
            Some(']') => out.push((TokenKind::RBracket, 1)),
            Some('\'') => out.push((TokenKind::Quote, 1)),
            _ => {}
        }
        // symbol
        {
            let mut i = 0;
            while at(i).is_some_and(is_symbol_char) {
                i += 1;
            }
            if i > 0 {
                out.push((TokenKind::Symbol, i));
            }
        }
        out
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut sc = Scanner::new(src);
    let mut tokens = Vec::new();
    loop {
        sc.skip_trivia();
        let Some(c) = sc.peek(0) else { break };
        let candidates = sc.match_lengths();
        // Longest match wins; candidates are pushed most-specific first, and
        // `max_by_key` returns the last max, so prefer earlier entries by
        // scanning manually.
        let mut best: Option<(TokenKind, usize)> = None;
        for &(kind, len) in &candidates {
            if best.is_none_or(|(_, blen)| len > blen) {
                best = Some((kind, len));
            }
        }
        match best {
            Some((kind, len)) => {
                let start_byte = sc.byte_at(sc.pos);
                let span = sc.bump(len);
                let text = src[start_byte..span.end].to_string();
                tokens.push(Token { kind, text, span });
            }
            None => {
                let here = Span::point(sc.byte_at(sc.pos), sc.line, sc.col);
                if c == '"' {
                    let rest = sc.chars.len() - sc.pos;
                    let span = sc.bump(rest);
                    return Err(PelError::lex("unterminated string", span).incomplete_input());
                }
                if c == '|' {
                    return Err(PelError::lex("stray `|`; the pipe operator is `|>` or `▷`", here));
                }
                return Err(PelError::lex(format!("character `{c}` does not start any token"), here));
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn texts(src: &str) -> Vec<String> {
        tokenize(src).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn basic_call() {
        assert_eq!(
            kinds("(+ 1 2)"),
            vec![TokenKind::LParen, TokenKind::Symbol, TokenKind::Number, TokenKind::Number, TokenKind::RParen]
        );
    }

    #[test]
    fn literal_list_with_atoms() {
        assert_eq!(
            kinds("[1 #t \"hello\" #nil]"),
            vec![
                TokenKind::LBracket,
                TokenKind::Number,
                TokenKind::Bool,
                TokenKind::Str,
                TokenKind::Nil,
                TokenKind::RBracket
            ]
        );
    }

    #[test]
    fn keys_and_symbols() {
        assert_eq!(kinds(":name pel-sym MAIN/FINANCE ^"), vec![TokenKind::Key; 1].into_iter().chain([TokenKind::Symbol, TokenKind::Symbol, TokenKind::Symbol]).collect::<Vec<_>>());
        assert_eq!(texts(":with-dash.dot? x"), vec![":with-dash.dot?", "x"]);
    }

    #[test]
    fn both_pipe_spellings() {
        assert_eq!(kinds("a ▷ (f) |> (g)"), vec![
            TokenKind::Symbol,
            TokenKind::Pipe,
            TokenKind::LParen,
            TokenKind::Symbol,
            TokenKind::RParen,
            TokenKind::Pipe,
            TokenKind::LParen,
            TokenKind::Symbol,
            TokenKind::RParen,
        ]);
    }

    #[test]
    fn negative_and_decimal_numbers() {
        assert_eq!(kinds("-5 3.14 -0.5"), vec![TokenKind::Number; 3]);
        // `-` alone is the subtraction symbol, `1.` does not extend the number
        assert_eq!(kinds("-"), vec![TokenKind::Symbol]);
        assert_eq!(texts("3."), vec!["3."]); // symbol, by maximal munch
        assert_eq!(kinds("3."), vec![TokenKind::Symbol]);
    }

    #[test]
    fn maximal_munch_prefers_longer_symbol() {
        // #true is nobody's boolean: the 5-char symbol beats the 2-char bool
        assert_eq!(kinds("#true"), vec![TokenKind::Symbol]);
        assert_eq!(kinds("#t"), vec![TokenKind::Bool]);
        assert_eq!(kinds("#nil"), vec![TokenKind::Nil]);
        assert_eq!(kinds("#nile"), vec![TokenKind::Symbol]);
        assert_eq!(kinds("123abc"), vec![TokenKind::Symbol]);
        assert_eq!(kinds(":a,b"), vec![TokenKind::Symbol]);
    }

    #[test]
    fn comments_and_whitespace_are_skipped() {
        assert_eq!(kinds("(def pi 3.14)           ; Variable definition"), vec![
            TokenKind::LParen,
            TokenKind::Symbol,
            TokenKind::Symbol,
            TokenKind::Number,
            TokenKind::RParen,
        ]);
        assert_eq!(kinds("; only a comment\n"), vec![]);
        assert_eq!(kinds(""), vec![]);
    }

    #[test]
    fn string_may_span_lines() {
        let toks = tokenize("\"what's the budget\n   line two?\"").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].kind, TokenKind::Str);
        assert_eq!(toks[0].span.line, 1);
        assert_eq!(toks[0].span.end_line, 2);
    }

    #[test]
    fn quote_inside_string_is_plain_text() {
        let toks = tokenize("\"what's up\"").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].text, "\"what's up\"");
    }

    #[test]
    fn unterminated_string_is_a_lex_error() {
        let err = tokenize("(print \"oops").unwrap_err();
        assert!(err.message.contains("unterminated"));
        assert!(err.incomplete);
    }

    #[test]
    fn stray_bar_is_a_lex_error() {
        let err = tokenize("a | b").unwrap_err();
        assert!(err.message.contains("|>"));
        assert_eq!(err.span.unwrap().col, 3);
    }

    #[test]
    fn spans_are_one_based_and_inclusive() {
        let toks = tokenize("(print x)").unwrap();
        let print = &toks[1];
        assert_eq!(print.span.line, 1);
        assert_eq!(print.span.col, 2);
        assert_eq!(print.span.end_col, 6);
    }

    #[test]
    fn byte_spans_slice_back_to_token_text() {
        let src = "(print [\"hello\" name] :sep \" \") ; trailing note\n'x ▷ |> -1.5";
        for t in tokenize(src).unwrap() {
            assert_eq!(&src[t.span.start..t.span.end], t.text);
        }
    }

    #[test]
    fn tokens_are_ordered_and_non_overlapping() {
        let src = "(def add5 (add 5)) [1 2] 'sym :k \"s\"";
        let toks = tokenize(src).unwrap();
        for w in toks.windows(2) {
            assert!(w[0].span.end <= w[1].span.start);
        }
        // concatenating gap + token text reproduces the source
        let mut rebuilt = String::new();
        let mut at = 0;
        for t in &toks {
            rebuilt.push_str(&src[at..t.span.start]);
            rebuilt.push_str(&t.text);
            at = t.span.end;
        }
        rebuilt.push_str(&src[at..]);
        assert_eq!(rebuilt, src);
    }

    #[test]
    fn caret_is_a_symbol() {
        assert_eq!(kinds("^"), vec![TokenKind::Symbol]);
    }

    #[test]
    fn unicode_pipe_has_char_columns() {
        let toks = tokenize("x ▷ y").unwrap();
        assert_eq!(toks[1].span.col, 3);
        assert_eq!(toks[2].span.col, 5);
    }
}
