//! The interactive loop: restartable error handling around top-level form
//! evaluation.
//!
//! Each form evaluates against a snapshot of the global frame; on error the
//! snapshot is restored, the error renders with a source underline and the
//! failing callee's docstring, and a five-option restart menu takes over.
//! Bindings made by earlier successful forms always survive, whichever
//! restart runs. Answers may come from an interactive terminal or from a
//! scripted queue (which echoes them, so a scripted session transcript is a
//! pure function of program text, answers and mock script).

use std::collections::VecDeque;
use std::sync::Arc;

use crate::ast::Expr;
use crate::error::PelError;
use crate::eval::{eval, Interp};
use crate::llm;
use crate::parser::parse_source;
use crate::value::PelValue;

const MENU: &str = "Possible restarts:\n\
                    1. Rewrite entire program\n\
                    2. Rewrite from error point forward\n\
                    3. Rewrite only the current expression\n\
                    4. Abort evaluation\n\
                    5. Use self-healing mode\n";

/// Render an error against the source it came from: header, numbered source
/// lines, a caret underline across the error columns, and the docstring
/// context when the failing call carried one.
pub fn render_error(error: &PelError, source: &str) -> String {
    let mut out = format!("{error}\n");
    if let Some(span) = error.span {
        out.push('\n');
        let lines: Vec<&str> = source.lines().collect();
        let width = lines.len().to_string().len();
        let (err_line, col, end_col) =
            (span.line as usize, span.col as usize, span.end_col as usize);
        for (idx, line) in lines.iter().enumerate() {
            let n = idx + 1;
            out.push_str(&format!("{n:>width$} | {line}\n"));
            if n == err_line {
                let end_col = if span.end_line == span.line {
                    end_col
                } else {
                    line.chars().count().max(col)
                };
                out.push_str(&format!(
                    "{} | {}{}\n",
                    " ".repeat(width),
                    " ".repeat(col.saturating_sub(1)),
                    "^".repeat(end_col.saturating_sub(col) + 1),
                ));
            }
        }
    }
    if let Some(doc) = &error.context {
        out.push_str("\nerror context:\n\n");
        out.push_str(&doc.render());
    }
    out
}

struct QueuedForm {
    expr: Expr,
    /// The whole source text the form was parsed from, for error rendering.
    src: Arc<str>,
}

fn queue_from(src: &str) -> Result<Vec<QueuedForm>, PelError> {
    let shared: Arc<str> = Arc::from(src);
    Ok(parse_source(src)?
        .into_iter()
        .map(|expr| QueuedForm { expr, src: Arc::clone(&shared) })
        .collect())
}

enum Flow {
    /// Re-evaluate at the current queue index (the queue may have changed).
    Reeval,
    /// Restart 3 produced a value standing in for the failing form.
    Spliced(PelValue),
    Abort,
}

pub struct Session {
    pub interp: Interp,
    /// Scripted answers; None reads the terminal.
    answers: Option<VecDeque<String>>,
    auto_heal: bool,
    print_values: bool,
    /// Value of the last form that ran to completion.
    pub last: PelValue,
}

impl Session {
    pub fn new(interp: Interp) -> Session {
        Session { interp, answers: None, auto_heal: false, print_values: true, last: PelValue::Nil }
    }

    pub fn scripted(interp: Interp, answers: Vec<String>) -> Session {
        Session { interp, answers: Some(answers.into()), auto_heal: false, print_values: true, last: PelValue::Nil }
    }

    pub fn auto_heal(mut self, on: bool) -> Session {
        self.auto_heal = on;
        self
    }

    pub fn print_values(mut self, on: bool) -> Session {
        self.print_values = on;
        self
    }

    fn out(&self, s: &str) {
        self.interp.output.write_str(s);
    }

    /// One line of user input. Scripted answers echo after the prompt, the
    /// way a terminal session would read. Exhaustion means abort.
    fn read_answer(&mut self, prompt: &str) -> Option<String> {
        self.out(prompt);
        match &mut self.answers {
            Some(q) => {
                let ans = q.pop_front()?;
                self.out(&format!("{ans}\n"));
                Some(ans)
            }
            None => {
                use std::io::BufRead;
                let mut line = String::new();
                let n = std::io::stdin().lock().read_line(&mut line).ok()?;
                if n == 0 {
                    return None;
                }
                Some(line.trim_end_matches(['\r', '\n']).to_string())
            }
        }
    }

    /// Multi-line input terminated by an empty line.
    fn read_block(&mut self, prompt: &str) -> Option<String> {
        self.out(prompt);
        let mut lines = Vec::new();
        loop {
            let line = match &mut self.answers {
                Some(q) => match q.pop_front() {
                    Some(l) => {
                        self.out(&format!("{l}\n"));
                        l
                    }
                    // a missing terminator ends the block
                    None => break,
                },
                None => {
                    use std::io::BufRead;
                    let mut line = String::new();
                    match std::io::stdin().lock().read_line(&mut line) {
                        Ok(0) | Err(_) => break,
                        Ok(_) => line.trim_end_matches(['\r', '\n']).to_string(),
                    }
                }
            };
            if line.trim().is_empty() {
                break;
            }
            lines.push(line);
        }
        if lines.is_empty() {
            None
        } else {
            Some(lines.join("\n"))
        }
    }

    /// Evaluate a whole program under the restart protocol. Returns the
    /// process exit code: 0 ran to completion, 1 aborted or failed to parse.
    pub fn run_program(&mut self, src: &str) -> i32 {
        let queue = match queue_from(src) {
            Ok(q) => q,
            Err(e) => {
                self.out(&render_error(&e, src));
                return 1;
            }
        };
        match self.eval_queue(queue) {
            Ok(()) => 0,
            Err(()) => 1,
        }
    }

    /// Interactive loop: read balanced forms from the terminal until EOF.
    pub fn run_interactive(&mut self) -> i32 {
        use std::io::BufRead;
        let stdin = std::io::stdin();
        let mut pending = String::new();
        loop {
            self.out(if pending.is_empty() { "Pel> " } else { "...> " });
            let mut line = String::new();
            match stdin.lock().read_line(&mut line) {
                Ok(0) | Err(_) => return 0,
                Ok(_) => {}
            }
            pending.push_str(&line);
            if pending.trim().is_empty() {
                pending.clear();
                continue;
            }
            match queue_from(&pending) {
                Ok(queue) => {
                    pending.clear();
                    let _ = self.eval_queue(queue);
                }
                Err(e) if e.incomplete => {}
                Err(e) => {
                    self.out(&render_error(&e, &pending));
                    pending.clear();
                }
            }
        }
    }

    fn eval_queue(&mut self, mut queue: Vec<QueuedForm>) -> Result<(), ()> {
        let mut i = 0;
        let mut heals_used = 0usize;
        while i < queue.len() {
            let snapshot = self.interp.global.snapshot();
            match eval(&self.interp, &queue[i].expr, &self.interp.global) {
                Ok(v) => {
                    if self.print_values {
                        self.out(&format!("\u{21D2} {v}\n"));
                    }
                    self.last = v;
                    i += 1;
                    heals_used = 0;
                }
                Err(e) => {
                    self.interp.global.restore(snapshot);
                    match self.resolve_error(e, &mut queue, &mut i, &mut heals_used) {
                        Flow::Reeval => {}
                        Flow::Spliced(v) => {
                            if self.print_values {
                                self.out(&format!("\u{21D2} {v}\n"));
                            }
                            self.last = v;
                            i += 1;
                            heals_used = 0;
                        }
                        Flow::Abort => return Err(()),
                    }
                }
            }
        }
        Ok(())
    }

    /// The restart protocol for one failing form.
    fn resolve_error(
        &mut self,
        mut error: PelError,
        queue: &mut Vec<QueuedForm>,
        i: &mut usize,
        heals_used: &mut usize,
    ) -> Flow {
        self.out(&render_error(&error, &queue[*i].src));

        if self.auto_heal {
            while *heals_used < self.interp.heal_cap {
                *heals_used += 1;
                match self.propose_and_splice(&error, queue, *i, true) {
                    Ok(()) => return Flow::Reeval,
                    Err(msg) => self.out(&format!("{msg}\n")),
                }
            }
            // cap reached: fall through to the menu (non-interactive
            // sessions with no answers left will abort there)
        }

        loop {
            self.out(&format!("\n{MENU}\n"));
            let choice = loop {
                match self.read_answer("Select option (1-5): ") {
                    None => return Flow::Abort,
                    Some(c) if ["1", "2", "3", "4", "5"].contains(&c.trim()) => break c.trim().to_string(),
                    Some(_) => {}
                }
            };
            match choice.as_str() {
                "1" => {
                    let Some(src) = self.read_block("New program (finish with an empty line):\n") else {
                        return Flow::Abort;
                    };
                    match queue_from(&src) {
                        Ok(q) => {
                            *queue = q;
                            *i = 0;
                            return Flow::Reeval;
                        }
                        Err(e) => self.out(&format!("\n{e}\n")),
                    }
                }
                "2" => {
                    let Some(src) =
                        self.read_block("Replacement code from the failing form (finish with an empty line):\n")
                    else {
                        return Flow::Abort;
                    };
                    match queue_from(&src) {
                        Ok(q) => {
                            queue.truncate(*i);
                            queue.extend(q);
                            return Flow::Reeval;
                        }
                        Err(e) => self.out(&format!("\n{e}\n")),
                    }
                }
                "3" => {
                    let Some(src) = self.read_block("Replacement expression (finish with an empty line):\n")
                    else {
                        return Flow::Abort;
                    };
                    match queue_from(&src) {
                        Ok(q) if q.len() == 1 => {
                            let snapshot = self.interp.global.snapshot();
                            match eval(&self.interp, &q[0].expr, &self.interp.global) {
                                Ok(v) => return Flow::Spliced(v),
                                Err(e2) => {
                                    self.interp.global.restore(snapshot);
                                    self.out("\n");
                                    self.out(&render_error(&e2, &q[0].src));
                                    error = e2;
                                }
                            }
                        }
                        Ok(_) => self.out("\nexpected exactly one expression\n"),
                        Err(e) => self.out(&format!("\n{e}\n")),
                    }
                }
                "4" => return Flow::Abort,
                "5" => {
                    self.out("\nSELF-HEALING...\n");
                    match self.propose_and_splice(&error, queue, *i, false) {
                        Ok(()) => return Flow::Reeval,
                        Err(msg) => self.out(&format!("{msg}\n")),
                    }
                }
                _ => unreachable!("choice is pre-validated"),
            }
        }
    }

    /// Ask the helper for a fix, confirm it (interactively unless `auto`),
    /// and splice the replacement forms over the failing one. Errors return
    /// a printable message and leave the queue untouched.
    fn propose_and_splice(
        &mut self,
        error: &PelError,
        queue: &mut Vec<QueuedForm>,
        i: usize,
        auto: bool,
    ) -> Result<(), String> {
        if auto {
            self.out("SELF-HEALING...\n");
        }
        let snippet = queue[i].expr.to_string();
        let doc = error.context.clone();
        let proposal = llm::propose_fix(&*self.interp.backend, error, &snippet, doc.as_deref())
            .map_err(|e| format!("self-healing failed: {}", e.message))?;
        let proposal = proposal.trim().to_string();
        self.out(&format!("\nHelper agent proposed rewrite:\n\n{proposal}\n"));
        let mut accepted = proposal;
        if !auto {
            loop {
                self.out("\nPress 'a' to accept, 'e' to edit, 'r' to abort.\n\n");
                match self.read_answer("Choice (a/e/r)? ").as_deref().map(str::trim) {
                    Some("a") => break,
                    Some("e") => {
                        let Some(src) = self.read_block("Edited code (finish with an empty line):\n") else {
                            return Err("no edited code given".to_string());
                        };
                        accepted = src;
                        break;
                    }
                    Some("r") | None => return Err("fix rejected".to_string()),
                    Some(_) => {}
                }
            }
        }
        let fixed = queue_from(&accepted)
            .map_err(|e| format!("the proposed fix does not parse: {}", e.message))?;
        if fixed.is_empty() {
            return Err("the proposed fix is empty".to_string());
        }
        self.out("\n");
        for (n, line) in accepted.lines().enumerate() {
            self.out(&format!("{} {line}\n", n + 1));
        }
        queue.splice(i..i + 1, fixed);
        Ok(())
    }
}
