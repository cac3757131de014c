//! Shared program builders for the criterion benchmarks.

/// A program of `n` independent numeric defs followed by a combining sum;
/// the shape the scheduler can spread across workers.
pub fn fanout_program(n: usize) -> String {
    let mut forms: Vec<String> = (0..n)
        .map(|i| format!("(def v{i} (* {} (+ {i} 3)))", i + 1))
        .collect();
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    forms.push(format!("(+ [{}])", names.join(" ")));
    forms.join("\n")
}

/// A single pipe chain `k` stages long over a literal list.
pub fn chain_program(k: usize) -> String {
    let mut src = String::from("[1 2 3 4]");
    src.push_str(" \u{25B7} (len)");
    for _ in 1..k {
        src.push_str(" \u{25B7} (+ 5)");
    }
    src
}
