use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;

use crate::net::Arrow;

use super::env::{Environment, Trail};
use super::value::Value;

/// A primitive signalled a hard error (as opposed to failing, which merely
/// triggers backtracking).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct PrimError(pub String);

impl PrimError {
    pub fn new(msg: impl Into<String>) -> Self {
        PrimError(msg.into())
    }
}

/// What a primitive sees: trailed variable access plus the execution RNG.
pub struct PrimCtx<'a> {
    pub(crate) env: &'a mut Environment,
    pub(crate) trail: &'a mut Trail,
    pub(crate) rng: &'a mut ChaCha8Rng,
}

impl PrimCtx<'_> {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.env.get(name)
    }

    /// Binds `name` (innermost frame if declared there, otherwise global).
    /// The old value is trailed and restored on backtracking.
    pub fn set(&mut self, name: &str, value: impl Into<Value>) {
        self.trail.set(self.env, name, value.into());
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        self.rng
    }

    pub fn number(&self, name: &str) -> Result<f64, PrimError> {
        self.get(name)
            .and_then(Value::as_number)
            .ok_or_else(|| PrimError::new(format!("`{name}` is not bound to a number")))
    }
}

/// `Ok(true)` = success, `Ok(false)` = failure (backtrack), `Err` = abort.
pub type PrimFn = Box<dyn Fn(&mut PrimCtx<'_>, &[Value]) -> Result<bool, PrimError> + Send + Sync>;

/// Side-effect-free numeric evaluator used by arrow-ordering options. It sees
/// the current environment and the arrow being ranked.
pub type EvalFn = Box<dyn Fn(&Environment, &Arrow) -> Result<f64, PrimError> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("primitive `{0}` registered twice")]
    DuplicatePrimitive(String),
    #[error("evaluator `{0}` registered twice")]
    DuplicateEvaluator(String),
}

/// Named primitives and evaluators available to a control network.
#[derive(Default)]
pub struct PrimitiveRegistry {
    prims: HashMap<String, PrimFn>,
    evals: HashMap<String, EvalFn>,
}

impl PrimitiveRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        f: impl Fn(&mut PrimCtx<'_>, &[Value]) -> Result<bool, PrimError> + Send + Sync + 'static,
    ) -> Result<(), RegistryError> {
        let name = name.into();
        if self.prims.contains_key(&name) {
            return Err(RegistryError::DuplicatePrimitive(name));
        }
        self.prims.insert(name, Box::new(f));
        Ok(())
    }

    pub fn register_evaluator(
        &mut self,
        name: impl Into<String>,
        f: impl Fn(&Environment, &Arrow) -> Result<f64, PrimError> + Send + Sync + 'static,
    ) -> Result<(), RegistryError> {
        let name = name.into();
        if self.evals.contains_key(&name) {
            return Err(RegistryError::DuplicateEvaluator(name));
        }
        self.evals.insert(name, Box::new(f));
        Ok(())
    }

    pub fn primitive(&self, name: &str) -> Option<&PrimFn> {
        self.prims.get(name)
    }

    pub fn evaluator(&self, name: &str) -> Option<&EvalFn> {
        self.evals.get(name)
    }
}

fn cmp_values(args: &[Value]) -> Result<std::cmp::Ordering, PrimError> {
    let [a, b] = args else {
        return Err(PrimError::new("comparison takes exactly two arguments"));
    };
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => x
            .partial_cmp(&y)
            .ok_or_else(|| PrimError::new("cannot compare NaN")),
        _ => match (a, b) {
            (Value::Str(x), Value::Str(y)) => Ok(x.cmp(y)),
            _ => Err(PrimError::new("cannot compare values of different kinds")),
        },
    }
}

/// General-purpose primitives available to every program run from the CLI:
/// `set(name, v)`, `inc(name, delta)`, `succeed`, `fail`, and the comparison
/// predicates `eq`/`ne`/`lt`/`le`/`gt`/`ge`.
pub fn base_registry() -> PrimitiveRegistry {
    use std::cmp::Ordering::*;
    let mut reg = PrimitiveRegistry::new();
    reg.register("set", |ctx, args| {
        let [Value::Str(name), value] = args else {
            return Err(PrimError::new("set takes a variable name and a value"));
        };
        ctx.set(name, value.clone());
        Ok(true)
    })
    .unwrap();
    reg.register("inc", |ctx, args| {
        let [Value::Str(name), delta] = args else {
            return Err(PrimError::new("inc takes a variable name and a number"));
        };
        let delta = delta
            .as_number()
            .ok_or_else(|| PrimError::new("inc delta must be a number"))?;
        let current = ctx.number(name)?;
        ctx.set(name, current + delta);
        Ok(true)
    })
    .unwrap();
    reg.register("succeed", |_, _| Ok(true)).unwrap();
    reg.register("fail", |_, _| Ok(false)).unwrap();
    for (name, accepted) in [
        ("eq", vec![Equal]),
        ("ne", vec![Less, Greater]),
        ("lt", vec![Less]),
        ("le", vec![Less, Equal]),
        ("gt", vec![Greater]),
        ("ge", vec![Greater, Equal]),
    ] {
        reg.register(name, move |_, args: &[Value]| {
            Ok(accepted.contains(&cmp_values(args)?))
        })
        .unwrap();
    }
    reg
}
