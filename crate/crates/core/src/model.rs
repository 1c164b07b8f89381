//! Validated dynamical-system models: `ẋ = f(x, u)`, `y = h(x, u)`.
//!
//! Each derivative and output carries either a closed-form [`Expression`] or
//! a bare [`DependencySpec`]. Graph analysis accepts both; the Lie oracle
//! needs every entry in expression form.

use rustc_hash::FxHashMap;

use indexmap::IndexSet;
use thiserror::Error;

use crate::expr::{self, Expression, SymbolKind};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DependencySpec {
    pub states: IndexSet<String>,
    pub inputs: IndexSet<String>,
}

impl DependencySpec {
    pub fn new<S: Into<String>>(
        states: impl IntoIterator<Item = S>,
        inputs: impl IntoIterator<Item = S>,
    ) -> Self {
        DependencySpec {
            states: states.into_iter().map(Into::into).collect(),
            inputs: inputs.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty() && self.inputs.is_empty()
    }
}

/// Right-hand side of a derivative or output.
#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    Expression(Expression),
    Depends(DependencySpec),
}

impl Rhs {
    pub fn as_expression(&self) -> Option<&Expression> {
        match self {
            Rhs::Expression(e) => Some(e),
            Rhs::Depends(_) => None,
        }
    }

    /// State names this entry depends on: syntactic occurrence after
    /// simplification for expressions, the declared set verbatim otherwise.
    pub fn state_dependencies(&self) -> Vec<String> {
        match self {
            Rhs::Expression(e) => expr::dependencies(e).into_iter().collect(),
            Rhs::Depends(d) => d.states.iter().cloned().collect(),
        }
    }
}

impl From<Expression> for Rhs {
    fn from(e: Expression) -> Self {
        Rhs::Expression(e)
    }
}

impl From<DependencySpec> for Rhs {
    fn from(d: DependencySpec) -> Self {
        Rhs::Depends(d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub default: Option<f64>,
}

impl Parameter {
    pub fn new(name: &str, default: Option<f64>) -> Self {
        Parameter {
            name: name.to_string(),
            default,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub rhs: Rhs,
}

impl Output {
    pub fn new(name: &str, rhs: impl Into<Rhs>) -> Self {
        Output {
            name: name.to_string(),
            rhs: rhs.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("duplicate declaration of '{0}'")]
    DuplicateName(String),
    #[error("derivative given for undeclared state '{0}'")]
    DerivativeForUndeclared(String),
    #[error("duplicate derivative for '{0}'")]
    DuplicateDerivative(String),
    #[error("missing derivative for {0}")]
    MissingDerivative(String),
    #[error("'{name}' used as {used} in {context} but it is not a declared {used}")]
    UndeclaredSymbol {
        name: String,
        used: SymbolKind,
        context: String,
    },
}

/// A validated system. Construct with [`DynSystem::new`] or by parsing DSL text.
#[derive(Debug, Clone)]
pub struct DynSystem {
    name: String,
    states: Vec<String>,
    inputs: Vec<String>,
    parameters: Vec<Parameter>,
    derivatives: Vec<Rhs>,
    outputs: Vec<Output>,
    index: FxHashMap<String, (SymbolKind, usize)>,
    /// State indices of each `depends` derivative row, resolved during
    /// validation; empty for expression rows.
    declared_rows: Vec<Vec<usize>>,
}

impl PartialEq for DynSystem {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.states == other.states
            && self.inputs == other.inputs
            && self.parameters == other.parameters
            && self.derivatives == other.derivatives
            && self.outputs == other.outputs
    }
}

impl DynSystem {
    /// Validates and assembles a system. `derivatives` may list states in any
    /// order; they are stored in state declaration order.
    pub fn new(
        name: &str,
        states: Vec<String>,
        inputs: Vec<String>,
        parameters: Vec<Parameter>,
        derivatives: Vec<(String, Rhs)>,
        outputs: Vec<Output>,
    ) -> Result<Self, ModelError> {
        let mut index = FxHashMap::with_capacity_and_hasher(
            states.len() + inputs.len() + parameters.len(),
            Default::default(),
        );
        let declared = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s, SymbolKind::State, i))
            .chain(
                inputs
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s, SymbolKind::Input, i)),
            )
            .chain(
                parameters
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (&p.name, SymbolKind::Parameter, i)),
            );
        for (n, kind, i) in declared {
            if index.insert(n.clone(), (kind, i)).is_some() {
                return Err(ModelError::DuplicateName(n.clone()));
            }
        }
        let mut output_names = std::collections::HashSet::new();
        for o in &outputs {
            if index.contains_key(&o.name) || !output_names.insert(o.name.as_str()) {
                return Err(ModelError::DuplicateName(o.name.clone()));
            }
        }

        let mut slots: Vec<Option<Rhs>> = vec![None; states.len()];
        for (n, rhs) in derivatives {
            match index.get(&n) {
                Some(&(SymbolKind::State, i)) => {
                    if slots[i].is_some() {
                        return Err(ModelError::DuplicateDerivative(n));
                    }
                    slots[i] = Some(rhs);
                }
                _ => return Err(ModelError::DerivativeForUndeclared(n)),
            }
        }
        let mut derivs = Vec::with_capacity(states.len());
        for (i, slot) in slots.into_iter().enumerate() {
            derivs.push(slot.ok_or_else(|| ModelError::MissingDerivative(states[i].clone()))?);
        }

        let system = DynSystem {
            name: name.to_string(),
            states,
            inputs,
            parameters,
            derivatives: derivs,
            outputs,
            index,
            declared_rows: Vec::new(),
        };
        for (i, rhs) in system.derivatives.iter().enumerate() {
            system.check_rhs(rhs, &format!("derivative of {}", system.states[i]))?;
        }
        let declared_rows = system
            .derivatives
            .iter()
            .map(|rhs| match rhs {
                Rhs::Depends(d) => d
                    .states
                    .iter()
                    .filter_map(|s| system.state_index(s))
                    .collect(),
                Rhs::Expression(_) => Vec::new(),
            })
            .collect();
        let system = DynSystem {
            declared_rows,
            ..system
        };
        for o in &system.outputs {
            system.check_rhs(&o.rhs, &format!("output {}", o.name))?;
        }
        Ok(system)
    }

    fn check_rhs(&self, rhs: &Rhs, context: &str) -> Result<(), ModelError> {
        let undeclared = |name: &str, used: SymbolKind| ModelError::UndeclaredSymbol {
            name: name.to_string(),
            used,
            context: context.to_string(),
        };
        match rhs {
            Rhs::Expression(e) => {
                for (kind, name) in e.free_symbols() {
                    if self.kind_of(&name) != Some(kind) {
                        return Err(undeclared(&name, kind));
                    }
                }
            }
            Rhs::Depends(d) => {
                for s in &d.states {
                    if self.kind_of(s) != Some(SymbolKind::State) {
                        return Err(undeclared(s, SymbolKind::State));
                    }
                }
                for s in &d.inputs {
                    if self.kind_of(s) != Some(SymbolKind::Input) {
                        return Err(undeclared(s, SymbolKind::Input));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    /// Derivative right-hand sides, aligned with [`DynSystem::states`].
    pub fn derivatives(&self) -> &[Rhs] {
        &self.derivatives
    }

    pub fn outputs(&self) -> &[Output] {
        &self.outputs
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        match self.index.get(name) {
            Some(&(SymbolKind::State, i)) => Some(i),
            _ => None,
        }
    }

    /// Resolved state indices of derivative `i` when it is a `depends` row.
    pub(crate) fn declared_row(&self, i: usize) -> Option<&[usize]> {
        matches!(self.derivatives[i], Rhs::Depends(_)).then(|| self.declared_rows[i].as_slice())
    }

    pub fn kind_of(&self, name: &str) -> Option<SymbolKind> {
        self.index.get(name).map(|&(k, _)| k)
    }

    /// True iff every derivative and output carries an expression.
    pub fn is_fully_symbolic(&self) -> bool {
        self.derivatives
            .iter()
            .chain(self.outputs.iter().map(|o| &o.rhs))
            .all(|r| matches!(r, Rhs::Expression(_)))
    }

    /// The same dynamics with a different output set.
    pub fn with_outputs(&self, outputs: Vec<Output>) -> Result<Self, ModelError> {
        DynSystem::new(
            &self.name,
            self.states.clone(),
            self.inputs.clone(),
            self.parameters.clone(),
            self.named_derivatives(),
            outputs,
        )
    }

    /// The same system with parameter defaults replaced.
    pub fn with_parameters(&self, parameters: Vec<Parameter>) -> Result<Self, ModelError> {
        DynSystem::new(
            &self.name,
            self.states.clone(),
            self.inputs.clone(),
            parameters,
            self.named_derivatives(),
            self.outputs.clone(),
        )
    }

    pub fn named_derivatives(&self) -> Vec<(String, Rhs)> {
        self.states
            .iter()
            .cloned()
            .zip(self.derivatives.iter().cloned())
            .collect()
    }
}
