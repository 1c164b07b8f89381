//! The `.dyn` model format.
//!
//! ```text
//! # comments run to end of line
//! system example1
//! states x1 x2 x3 x4
//! params k = 1.5
//! deriv x1 = sin(x2) - x1 + x4
//! deriv x2 = x3
//! deriv x3 = x1^2
//! deriv x4 depends x4
//! output y = x2
//! ```
//!
//! Declarations may appear in any order and whitespace (including newlines)
//! is insignificant; an expression ends where the next declaration keyword
//! begins. `deriv`/`output` take either `= expr` or `depends a, b, ...`.

mod lexer;
mod parser;

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::model::{DynSystem, Rhs};
use lexer::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub message: String,
    /// The full source line containing the position.
    pub snippet: String,
}

pub type ParseDiagnostic = Diagnostic;

impl Diagnostic {
    fn new(severity: Severity, span: Span, message: impl Into<String>, src: &str) -> Self {
        let snippet = src
            .split('\n')
            .nth(span.line - 1)
            .unwrap_or("")
            .trim_end_matches('\r')
            .to_string();
        Diagnostic {
            severity,
            line: span.line,
            column: span.col,
            message: message.into(),
            snippet,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        writeln!(f, "{label}: {}", self.message)?;
        writeln!(f, " --> {}:{}", self.line, self.column)?;
        let gutter = self.line.to_string();
        writeln!(f, "{} |", " ".repeat(gutter.len()))?;
        writeln!(f, "{gutter} | {}", self.snippet)?;
        let pad: String = self
            .snippet
            .chars()
            .take(self.column.saturating_sub(1))
            .map(|c| if c == '\t' { '\t' } else { ' ' })
            .collect();
        write!(f, "{} | {pad}^", " ".repeat(gutter.len()))
    }
}

/// Parses and validates a model. Warnings are discarded; use
/// [`parse_with_warnings`] to keep them.
pub fn parse(text: &str) -> Result<DynSystem, Vec<Diagnostic>> {
    parse_with_warnings(text).map(|(s, _)| s)
}

pub fn parse_with_warnings(text: &str) -> Result<(DynSystem, Vec<Diagnostic>), Vec<Diagnostic>> {
    parser::parse_document(text)
}

/// Renders a system in the `.dyn` format. `parse(serialize(s)) == s`.
pub fn serialize(system: &DynSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "system {}", system.name());
    if !system.states().is_empty() {
        let _ = writeln!(out, "states {}", system.states().join(" "));
    }
    if !system.inputs().is_empty() {
        let _ = writeln!(out, "inputs {}", system.inputs().join(" "));
    }
    if !system.parameters().is_empty() {
        let params: Vec<String> = system
            .parameters()
            .iter()
            .map(|p| match p.default {
                Some(v) => format!("{} = {v:?}", p.name),
                None => p.name.clone(),
            })
            .collect();
        let _ = writeln!(out, "params {}", params.join(", "));
    }
    for (name, rhs) in system.states().iter().zip(system.derivatives()) {
        let _ = writeln!(out, "deriv {name}{}", render_rhs(rhs));
    }
    for o in system.outputs() {
        let _ = writeln!(out, "output {}{}", o.name, render_rhs(&o.rhs));
    }
    out
}

fn render_rhs(rhs: &Rhs) -> String {
    match rhs {
        Rhs::Expression(e) => format!(" = {e}"),
        Rhs::Depends(d) => {
            let names: Vec<&str> = d
                .states
                .iter()
                .chain(d.inputs.iter())
                .map(String::as_str)
                .collect();
            format!(" depends {}", names.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::model::DependencySpec;

    const EXAMPLE1: &str = "\
system example1
states x1 x2 x3 x4
deriv x1 = sin(x2) - x1 + x4
deriv x2 = x3
deriv x3 = x1^2
deriv x4 = x4
output y = x2
";

    #[test]
    fn parses_example1() {
        let s = parse(EXAMPLE1).unwrap();
        assert_eq!(s.states(), ["x1", "x2", "x3", "x4"]);
        assert!(s.is_fully_symbolic());
        let x = |n: &str| Expression::state(n);
        assert_eq!(
            s.derivatives()[0],
            Rhs::Expression(x("x2").sin() - x("x1") + x("x4"))
        );
        assert_eq!(s.derivatives()[2], Rhs::Expression(x("x1").powi(2)));
        assert_eq!(s.outputs()[0].name, "y");
    }

    #[test]
    fn missing_derivative() {
        let errs = parse("system s\nstates x1 x2\nderiv x1 = x2\n").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].message, "missing derivative for x2");
        assert_eq!((errs[0].line, errs[0].column), (2, 11));
    }

    #[test]
    fn dependency_form() {
        let src = "system m\nstates Eq1 Ed1 delta1 Efd1\ninputs VD1 VQ1\n\
                   deriv Eq1 depends Eq1, Ed1, delta1, Efd1\n\
                   deriv Ed1 depends Eq1, Ed1, delta1, VD1, VQ1\n\
                   deriv delta1 = 0\nderiv Efd1 depends Efd1\n";
        let s = parse(src).unwrap();
        assert_eq!(
            s.derivatives()[0],
            Rhs::Depends(DependencySpec::new(["Eq1", "Ed1", "delta1", "Efd1"], []))
        );
        assert_eq!(
            s.derivatives()[1],
            Rhs::Depends(DependencySpec::new(
                vec!["Eq1", "Ed1", "delta1"],
                vec!["VD1", "VQ1"]
            ))
        );
        assert!(!s.is_fully_symbolic());
    }

    #[test]
    fn undeclared_symbol_points_at_token() {
        let errs = parse("system s\nstates x\nderiv x = 2*x + foo\n").unwrap_err();
        assert_eq!(errs[0].message, "undeclared symbol 'foo'");
        assert_eq!((errs[0].line, errs[0].column), (3, 17));
        assert_eq!(errs[0].snippet, "deriv x = 2*x + foo");
    }

    #[test]
    fn one_form_per_item() {
        let errs = parse("system s\nstates x\nderiv x = x\nderiv x depends x\n").unwrap_err();
        assert_eq!(errs[0].message, "duplicate derivative for 'x'");
        assert_eq!(errs[0].line, 4);
    }

    #[test]
    fn parameters_not_allowed_in_dependency_lists() {
        let errs = parse("system s\nstates x\nparams k\nderiv x depends x, k\n").unwrap_err();
        assert!(errs[0]
            .message
            .contains("cannot appear in a dependency list"));
    }

    #[test]
    fn precedence_and_associativity() {
        let s = parse("system s\nstates x\nderiv x = -x^2 + 2*x/3 - 1 - -2^2^3").unwrap();
        let e = s.derivatives()[0].as_expression().unwrap();
        let x = Expression::state("x");
        let c = Expression::constant;
        let expected = -x.powi(2) + c(2.0) * x.clone() / c(3.0) - c(1.0) - -(c(2.0).powi(8));
        assert_eq!(*e, expected);
    }

    #[test]
    fn negative_literal_is_a_constant() {
        let s = parse("system s\nstates x\nderiv x = x*-1.5").unwrap();
        let e = s.derivatives()[0].as_expression().unwrap();
        assert_eq!(*e, Expression::state("x") * Expression::constant(-1.5));
    }

    #[test]
    fn exponent_must_be_integer_literal() {
        let errs = parse("system s\nstates x\nderiv x = x^1.5").unwrap_err();
        assert!(errs[0].message.contains("non-negative integer literal"));
        let errs = parse("system s\nstates x\nderiv x = x^-1").unwrap_err();
        assert!(errs[0].message.contains("non-negative integer literal"));
    }

    #[test]
    fn crlf_and_comments() {
        let src = EXAMPLE1.replace('\n', "  # trailing\r\n");
        assert_eq!(parse(&src).unwrap(), parse(EXAMPLE1).unwrap());
    }

    #[test]
    fn trailing_garbage_after_expression() {
        let errs = parse("system s\nstates x\nderiv x = x y").unwrap_err();
        assert_eq!((errs[0].line, errs[0].column), (3, 13));
    }

    #[test]
    fn deep_nesting_is_rejected_not_overflowed() {
        let src = format!(
            "system s\nstates x\nderiv x = {}x{}",
            "(".repeat(100_000),
            ")".repeat(100_000)
        );
        assert!(parse(&src).is_err());
        let src = format!("system s\nstates x\nderiv x = x{}", " + x".repeat(100_000));
        assert!(parse(&src).is_err());
        let src = format!("system s\nstates x\nderiv x = {}x", "-".repeat(100_000));
        assert!(parse(&src).is_err());
    }

    #[test]
    fn warns_on_unused_parameter() {
        let (_, w) =
            parse_with_warnings("system s\nstates x\nparams k = 2, j\nderiv x = k*x").unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].severity, Severity::Warning);
        assert!(w[0].message.contains("'j'"));
    }

    #[test]
    fn round_trips() {
        let s = parse(EXAMPLE1).unwrap();
        assert_eq!(parse(&serialize(&s)).unwrap(), s);

        let src = "system s\nstates a b\ninputs u\nparams k = -0.25, m\n\
                   deriv a depends a, b, u\nderiv b = -(2.0) - k*(-3.5)^2/m + exp(-a)\n\
                   output y depends b\noutput z = cos(a - (b - u))";
        let s = parse(src).unwrap();
        assert_eq!(parse(&serialize(&s)).unwrap(), s);
    }

    #[test]
    fn empty_inputs_line_omitted() {
        let s = parse("system s\nstates x\ninputs\nderiv x = x").unwrap();
        let text = serialize(&s);
        assert!(!text.contains("inputs"));
        assert_eq!(parse(&text).unwrap(), s);
    }

    #[test]
    fn diagnostic_display() {
        let errs = parse("system s\nstates x\nderiv x = 2*x + foo\n").unwrap_err();
        let shown = errs[0].to_string();
        assert!(shown.contains(" --> 3:17"), "{shown}");
        assert!(shown.ends_with("|                 ^"), "{shown}");
    }
}
