use std::collections::{HashMap, HashSet};

use super::lexer::{tokenize, Keyword, Span, Tok, Token};
use super::{Diagnostic, Severity};
use crate::expr::{share_subexpressions, Expression, Node, SymbolKind};
use crate::model::{DependencySpec, DynSystem, Output, Parameter, Rhs};

/// Deepest expression tree accepted; bounds recursion in every later pass.
const MAX_DEPTH: usize = 1024;
/// Deepest parenthesis/function/unary nesting accepted by the parser itself.
const MAX_NESTING: usize = 64;

#[derive(Debug)]
enum Raw {
    Num(f64),
    Ident(String, Span),
    Neg(Box<Raw>),
    Bin(Tok, Box<Raw>, Box<Raw>),
    Pow(Box<Raw>, u32),
    Func(Keyword, Box<Raw>),
}

#[derive(Debug)]
enum RawRhs {
    Expr(Raw),
    Depends(Vec<(String, Span)>),
}

type Named = (String, Span);

#[derive(Default)]
struct Decls {
    name: Option<Named>,
    states: Vec<Named>,
    inputs: Vec<Named>,
    params: Vec<(Named, Option<f64>)>,
    derivs: Vec<(Named, RawRhs)>,
    outputs: Vec<(Named, RawRhs)>,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, span: Span, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(Severity::Error, span, msg, self.src)
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        self.error(
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Named> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            Tok::Keyword(_) => Err(self.error(
                self.span(),
                format!("expected {what}, found reserved {}", self.peek().describe()),
            )),
            _ => Err(self.unexpected(what)),
        }
    }

    fn file(&mut self) -> PResult<Decls> {
        let mut d = Decls::default();
        self.expect(Tok::Keyword(Keyword::System), "'system' header")?;
        d.name = Some(self.ident("system name")?);
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Keyword(Keyword::States) => {
                    self.bump();
                    d.states.push(self.ident("state name")?);
                    while matches!(self.peek(), Tok::Ident(_)) {
                        d.states.push(self.ident("state name")?);
                    }
                }
                Tok::Keyword(Keyword::Inputs) => {
                    self.bump();
                    while matches!(self.peek(), Tok::Ident(_)) {
                        d.inputs.push(self.ident("input name")?);
                    }
                }
                Tok::Keyword(Keyword::Params) => {
                    self.bump();
                    loop {
                        let name = self.ident("parameter name")?;
                        let default = if *self.peek() == Tok::Eq {
                            self.bump();
                            Some(self.signed_number()?)
                        } else {
                            None
                        };
                        d.params.push((name, default));
                        if *self.peek() != Tok::Comma {
                            break;
                        }
                        self.bump();
                    }
                }
                Tok::Keyword(Keyword::Deriv) => {
                    self.bump();
                    let name = self.ident("state name")?;
                    let rhs = self.rhs()?;
                    d.derivs.push((name, rhs));
                }
                Tok::Keyword(Keyword::Output) => {
                    self.bump();
                    let name = self.ident("output name")?;
                    let rhs = self.rhs()?;
                    d.outputs.push((name, rhs));
                }
                _ => {
                    return Err(self.unexpected(
                        "a declaration ('states', 'inputs', 'params', 'deriv' or 'output')",
                    ))
                }
            }
        }
        Ok(d)
    }

    fn signed_number(&mut self) -> PResult<f64> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match *self.peek() {
            Tok::Number { value, .. } => {
                self.bump();
                Ok(if neg { -value } else { value })
            }
            _ => Err(self.unexpected("number")),
        }
    }

    fn rhs(&mut self) -> PResult<RawRhs> {
        match self.peek() {
            Tok::Eq => {
                self.bump();
                let (e, _) = self.expr(0)?;
                match self.peek() {
                    Tok::Eof => {}
                    Tok::Keyword(k) if k.starts_declaration() => {}
                    _ => return Err(self.unexpected("operator or next declaration")),
                }
                Ok(RawRhs::Expr(e))
            }
            Tok::Keyword(Keyword::Depends) => {
                self.bump();
                let mut list = vec![self.ident("state or input name")?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    list.push(self.ident("state or input name")?);
                }
                Ok(RawRhs::Depends(list))
            }
            _ => Err(self.unexpected("'=' or 'depends'")),
        }
    }

    fn too_deep(&self) -> Diagnostic {
        self.error(
            self.span(),
            format!(
                "expression nested too deeply (limits: {MAX_NESTING} brackets, depth {MAX_DEPTH})"
            ),
        )
    }

    // Each level returns (tree, depth) so the depth limit covers long
    // left-associative chains as well as nesting.
    fn expr(&mut self, nest: usize) -> PResult<(Raw, usize)> {
        if nest > MAX_NESTING {
            return Err(self.too_deep());
        }
        let (mut lhs, mut depth) = self.term(nest)?;
        while matches!(self.peek(), Tok::Plus | Tok::Minus) {
            let op = self.bump().tok;
            let (rhs, d) = self.term(nest)?;
            depth = depth.max(d) + 1;
            if depth > MAX_DEPTH {
                return Err(self.too_deep());
            }
            lhs = Raw::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok((lhs, depth))
    }

    fn term(&mut self, nest: usize) -> PResult<(Raw, usize)> {
        let (mut lhs, mut depth) = self.unary(nest)?;
        while matches!(self.peek(), Tok::Star | Tok::Slash) {
            let op = self.bump().tok;
            let (rhs, d) = self.unary(nest)?;
            depth = depth.max(d) + 1;
            if depth > MAX_DEPTH {
                return Err(self.too_deep());
            }
            lhs = Raw::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok((lhs, depth))
    }

    fn unary(&mut self, nest: usize) -> PResult<(Raw, usize)> {
        if *self.peek() != Tok::Minus {
            return self.power(nest);
        }
        if nest > MAX_NESTING {
            return Err(self.too_deep());
        }
        self.bump();
        // a negative literal is a single constant unless an exponent follows
        if let Tok::Number { value, .. } = *self.peek() {
            if *self.peek_at(1) != Tok::Caret {
                self.bump();
                return Ok((Raw::Num(-value), 1));
            }
        }
        let (inner, d) = self.unary(nest + 1)?;
        Ok((Raw::Neg(Box::new(inner)), d + 1))
    }

    fn power(&mut self, nest: usize) -> PResult<(Raw, usize)> {
        let (base, depth) = self.primary(nest)?;
        let mut exponents = Vec::new();
        while *self.peek() == Tok::Caret {
            self.bump();
            match *self.peek() {
                Tok::Number {
                    integer: Some(k), ..
                } => {
                    let span = self.bump().span;
                    exponents.push((k, span));
                }
                _ => {
                    return Err(self.error(
                        self.span(),
                        "exponent must be a non-negative integer literal",
                    ))
                }
            }
        }
        let Some(&(last, _)) = exponents.last() else {
            return Ok((base, depth));
        };
        // right-associative: a^b^c = a^(b^c)
        let mut k = last;
        for &(b, span) in exponents.iter().rev().skip(1) {
            k = u32::try_from(k)
                .ok()
                .and_then(|k| b.checked_pow(k))
                .ok_or_else(|| self.error(span, "exponent overflows"))?;
        }
        let k = u32::try_from(k).map_err(|_| self.error(exponents[0].1, "exponent overflows"))?;
        Ok((Raw::Pow(Box::new(base), k), depth + 1))
    }

    fn primary(&mut self, nest: usize) -> PResult<(Raw, usize)> {
        match self.peek().clone() {
            Tok::Number { value, .. } => {
                self.bump();
                Ok((Raw::Num(value), 1))
            }
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((Raw::Ident(s, span), 1))
            }
            Tok::LParen => {
                self.bump();
                let (e, d) = self.expr(nest + 1)?;
                self.expect(Tok::RParen, "')'")?;
                Ok((e, d))
            }
            Tok::Keyword(k @ (Keyword::Sin | Keyword::Cos | Keyword::Exp)) => {
                self.bump();
                self.expect(Tok::LParen, "'(' after function name")?;
                let (e, d) = self.expr(nest + 1)?;
                self.expect(Tok::RParen, "')'")?;
                Ok((Raw::Func(k, Box::new(e)), d + 1))
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

struct Resolver<'a> {
    src: &'a str,
    kinds: HashMap<String, SymbolKind>,
    used: HashSet<String>,
    errors: Vec<Diagnostic>,
    warnings: Vec<Diagnostic>,
}

impl Resolver<'_> {
    fn expr(&mut self, raw: &Raw) -> Option<Expression> {
        Some(match raw {
            Raw::Num(v) => Expression::constant(*v),
            Raw::Ident(name, span) => {
                self.used.insert(name.clone());
                match self.kinds.get(name) {
                    Some(SymbolKind::State) => Expression::state(name),
                    Some(SymbolKind::Input) => Expression::input(name),
                    Some(SymbolKind::Parameter) => Expression::parameter(name),
                    None => {
                        self.errors.push(Diagnostic::new(
                            Severity::Error,
                            *span,
                            format!("undeclared symbol '{name}'"),
                            self.src,
                        ));
                        return None;
                    }
                }
            }
            Raw::Neg(a) => -self.expr(a)?,
            Raw::Bin(op, a, b) => {
                let (a, b) = (self.expr(a), self.expr(b));
                let (a, b) = (a?, b?);
                Expression::new(match op {
                    Tok::Plus => Node::Add(a, b),
                    Tok::Minus => Node::Sub(a, b),
                    Tok::Star => Node::Mul(a, b),
                    _ => Node::Div(a, b),
                })
            }
            Raw::Pow(a, k) => self.expr(a)?.powi(*k),
            Raw::Func(k, a) => {
                let a = self.expr(a)?;
                match k {
                    Keyword::Sin => a.sin(),
                    Keyword::Cos => a.cos(),
                    _ => a.exp(),
                }
            }
        })
    }

    fn rhs(&mut self, raw: &RawRhs) -> Option<Rhs> {
        match raw {
            RawRhs::Expr(e) => self.expr(e).map(Rhs::Expression),
            RawRhs::Depends(list) => {
                let mut spec = DependencySpec::default();
                let mut ok = true;
                for (name, span) in list {
                    self.used.insert(name.clone());
                    let inserted = match self.kinds.get(name) {
                        Some(SymbolKind::State) => spec.states.insert(name.clone()),
                        Some(SymbolKind::Input) => spec.inputs.insert(name.clone()),
                        Some(SymbolKind::Parameter) => {
                            self.errors.push(Diagnostic::new(
                                Severity::Error,
                                *span,
                                format!("parameter '{name}' cannot appear in a dependency list"),
                                self.src,
                            ));
                            ok = false;
                            continue;
                        }
                        None => {
                            self.errors.push(Diagnostic::new(
                                Severity::Error,
                                *span,
                                format!("undeclared symbol '{name}'"),
                                self.src,
                            ));
                            ok = false;
                            continue;
                        }
                    };
                    if !inserted {
                        self.warnings.push(Diagnostic::new(
                            Severity::Warning,
                            *span,
                            format!("'{name}' listed more than once"),
                            self.src,
                        ));
                    }
                }
                ok.then_some(Rhs::Depends(spec))
            }
        }
    }
}

pub(crate) fn parse_document(src: &str) -> Result<(DynSystem, Vec<Diagnostic>), Vec<Diagnostic>> {
    let toks = tokenize(src).map_err(|d| vec![d])?;
    let mut parser = Parser { src, toks, pos: 0 };
    let decls = parser.file().map_err(|d| vec![d])?;
    let diag = |span: Span, msg: String| Diagnostic::new(Severity::Error, span, msg, src);

    let mut errors = Vec::new();
    let mut kinds: HashMap<String, SymbolKind> = HashMap::new();
    let mut taken: HashSet<&str> = HashSet::new();
    let declared = decls
        .states
        .iter()
        .map(|n| (n, Some(SymbolKind::State)))
        .chain(decls.inputs.iter().map(|n| (n, Some(SymbolKind::Input))))
        .chain(
            decls
                .params
                .iter()
                .map(|(n, _)| (n, Some(SymbolKind::Parameter))),
        )
        .chain(decls.outputs.iter().map(|(n, _)| (n, None)));
    for ((name, span), kind) in declared {
        if !taken.insert(name) {
            errors.push(diag(*span, format!("duplicate declaration of '{name}'")));
        } else if let Some(k) = kind {
            kinds.insert(name.clone(), k);
        }
    }

    let mut seen_deriv: HashSet<&str> = HashSet::new();
    for ((name, span), _) in &decls.derivs {
        if kinds.get(name) != Some(&SymbolKind::State) {
            errors.push(diag(
                *span,
                format!("derivative given for undeclared state '{name}'"),
            ));
        } else if !seen_deriv.insert(name) {
            errors.push(diag(*span, format!("duplicate derivative for '{name}'")));
        }
    }
    for (name, span) in &decls.states {
        if !seen_deriv.contains(name.as_str()) && kinds.get(name) == Some(&SymbolKind::State) {
            errors.push(diag(*span, format!("missing derivative for {name}")));
        }
    }

    let mut resolver = Resolver {
        src,
        kinds,
        used: HashSet::new(),
        errors: Vec::new(),
        warnings: Vec::new(),
    };
    let derivs: Vec<_> = decls
        .derivs
        .iter()
        .map(|((n, _), r)| (n.clone(), resolver.rhs(r)))
        .collect();
    let outputs: Vec<_> = decls
        .outputs
        .iter()
        .map(|((n, _), r)| (n.clone(), resolver.rhs(r)))
        .collect();
    errors.append(&mut resolver.errors);
    for ((name, span), _) in &decls.params {
        if !resolver.used.contains(name) {
            resolver.warnings.push(Diagnostic::new(
                Severity::Warning,
                *span,
                format!("parameter '{name}' is never used"),
                src,
            ));
        }
    }
    if !errors.is_empty() {
        errors.sort_by_key(|d| (d.line, d.column));
        return Err(errors);
    }

    // Store the document as one DAG: repeated subterms become shared nodes.
    let mut derivs: Vec<(String, Rhs)> = derivs
        .into_iter()
        .map(|(n, r)| (n, r.expect("resolved")))
        .collect();
    let mut outputs: Vec<(String, Rhs)> = outputs
        .into_iter()
        .map(|(n, r)| (n, r.expect("resolved")))
        .collect();
    let mut slots: Vec<&mut Expression> = derivs
        .iter_mut()
        .chain(outputs.iter_mut())
        .filter_map(|(_, r)| match r {
            Rhs::Expression(e) => Some(e),
            Rhs::Depends(_) => None,
        })
        .collect();
    let roots: Vec<Expression> = slots.iter().map(|e| (**e).clone()).collect();
    for (slot, shared) in slots.iter_mut().zip(share_subexpressions(&roots)) {
        **slot = shared;
    }

    let (name, name_span) = decls.name.expect("header parsed");
    let system = DynSystem::new(
        &name,
        decls.states.into_iter().map(|(n, _)| n).collect(),
        decls.inputs.into_iter().map(|(n, _)| n).collect(),
        decls
            .params
            .into_iter()
            .map(|((n, _), v)| Parameter {
                name: n,
                default: v,
            })
            .collect(),
        derivs,
        outputs
            .into_iter()
            .map(|(name, rhs)| Output { name, rhs })
            .collect(),
    )
    // every model rule was checked above with positions; this is a backstop
    .map_err(|e| vec![diag(name_span, e.to_string())])?;
    Ok((system, resolver.warnings))
}
