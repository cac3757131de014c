//! Source positions. Lines and columns are 1-based and columns count
//! characters, not bytes, so a span can be shown directly to a user.

/// Half-open byte range plus inclusive line/column endpoints.
///
/// `end_line`/`end_col` point at the last character of the region. For a
/// single-character token `col == end_col`. Strings may span lines, in which
/// case `end_line > line`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn point(offset: usize, line: u32, col: u32) -> Span {
        Span { start: offset, end: offset, line, col, end_line: line, end_col: col }
    }

    /// Smallest span covering both inputs. Assumes `self` starts first.
    pub fn merge(&self, other: &Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
            line: self.line,
            col: self.col,
            end_line: other.end_line.max(self.end_line),
            end_col: if other.end_line >= self.end_line { other.end_col } else { self.end_col },
        }
    }
}

impl Default for Span {
    fn default() -> Self {
        Span { start: 0, end: 0, line: 1, col: 1, end_line: 1, end_col: 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_covers_both_spans() {
        let a = Span { start: 0, end: 3, line: 1, col: 1, end_line: 1, end_col: 3 };
        let b = Span { start: 8, end: 12, line: 2, col: 4, end_line: 2, end_col: 7 };
        let m = a.merge(&b);
        assert_eq!(m.start, 0);
        assert_eq!(m.end, 12);
        assert_eq!((m.line, m.col), (1, 1));
        assert_eq!((m.end_line, m.end_col), (2, 7));
    }
}
