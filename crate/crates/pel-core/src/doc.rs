//! Structured documentation attached to callables. The error reporter prints
//! these records verbatim, so the section layout here is part of the UX.

/// One documented parameter: name, type label, free-form note.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocParam {
    pub name: String,
    pub ty: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Docstring {
    /// Canonical call shape, e.g. `(print :vals :sep "" :nl #t)`.
    pub signature: String,
    pub params: Vec<DocParam>,
    pub description: String,
    pub example: String,
}

impl Docstring {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("FUNCTION SIGNATURE: {}\n", self.signature));
        out.push_str("\nTYPES:\n");
        for p in &self.params {
            out.push_str(&format!("- {}: {} - {}\n", p.name, p.ty, p.note));
        }
        out.push_str("\nDESCRIPTION:\n");
        out.push_str(self.description.trim_end());
        out.push('\n');
        out.push_str("\nEXAMPLE USAGE:\n");
        out.push_str(self.example.trim_end());
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_has_all_four_sections_in_order() {
        let d = Docstring {
            signature: "(len :x)".into(),
            params: vec![DocParam { name: "x".into(), ty: "PelList | PelString".into(), note: "value to measure".into() }],
            description: "Returns the number of elements or characters.".into(),
            example: "(len [1 2 3])".into(),
        };
        let r = d.render();
        let sig = r.find("FUNCTION SIGNATURE:").unwrap();
        let types = r.find("TYPES:").unwrap();
        let desc = r.find("DESCRIPTION:").unwrap();
        let ex = r.find("EXAMPLE USAGE:").unwrap();
        assert!(sig < types && types < desc && desc < ex);
        assert!(r.contains("- x: PelList | PelString - value to measure"));
    }
}
