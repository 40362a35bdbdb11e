//! Numeric evaluation of expressions built from base operations.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::om::{OmObject, OmSymbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero at {0}")]
    DivisionByZero(String),
    #[error("no numeric meaning for {0}")]
    UnknownSymbol(String),
    #[error("free variable `{0}`")]
    FreeVariable(String),
    #[error("{0} is not a number")]
    NonNumericLeaf(String),
    #[error("{symbol} takes {expected} argument(s), got {got}")]
    ArityMismatch { symbol: String, expected: String, got: usize },
    #[error("result at {0} is not finite")]
    NotFinite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

impl Arity {
    fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }

    fn describe(self) -> String {
        match self {
            Arity::Exactly(k) => k.to_string(),
            Arity::AtLeast(k) => format!("at least {k}"),
        }
    }
}

/// Why an operation refused its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    DivisionByZero,
}

pub type OpFn = fn(&[f64]) -> Result<f64, Fault>;

#[derive(Debug, Clone, Copy)]
pub struct Operation {
    pub arity: Arity,
    pub apply: OpFn,
}

/// Symbols with a native numeric implementation.
#[derive(Debug, Clone, Default)]
pub struct BaseEnv {
    ops: BTreeMap<OmSymbol, Operation>,
}

impl BaseEnv {
    pub fn empty() -> Self {
        BaseEnv::default()
    }

    /// plus, times (n-ary), minus, divide, power (binary), unary_minus, abs.
    pub fn arith1() -> Self {
        let mut env = BaseEnv::empty();
        let mut add = |name: &str, arity, apply: OpFn| env.insert(OmSymbol::standard("arith1", name), Operation { arity, apply });
        add("plus", Arity::AtLeast(1), |xs| Ok(xs.iter().sum()));
        add("times", Arity::AtLeast(1), |xs| Ok(xs.iter().product()));
        add("minus", Arity::Exactly(2), |xs| Ok(xs[0] - xs[1]));
        add("divide", Arity::Exactly(2), |xs| {
            if xs[1] == 0.0 {
                Err(Fault::DivisionByZero)
            } else {
                Ok(xs[0] / xs[1])
            }
        });
        add("power", Arity::Exactly(2), |xs| Ok(xs[0].powf(xs[1])));
        add("unary_minus", Arity::Exactly(1), |xs| Ok(-xs[0]));
        add("abs", Arity::Exactly(1), |xs| Ok(xs[0].abs()));
        env
    }

    pub fn insert(&mut self, symbol: OmSymbol, op: Operation) {
        self.ops.insert(symbol, op);
    }

    pub fn contains(&self, symbol: &OmSymbol) -> bool {
        self.ops.contains_key(symbol)
    }

    pub fn get(&self, symbol: &OmSymbol) -> Option<&Operation> {
        self.ops.get(symbol)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &OmSymbol> {
        self.ops.keys()
    }
}

/// Evaluate a closed expression. Error locations are argument paths such as
/// `/2/1` (second argument of the root, then its first argument).
pub fn evaluate(obj: &OmObject, base: &BaseEnv) -> Result<f64, EvalError> {
    eval_at(obj, base, &mut String::new())
}

fn location(path: &str) -> String {
    if path.is_empty() {
        "/".to_string()
    } else {
        path.to_string()
    }
}

fn eval_at(obj: &OmObject, base: &BaseEnv, path: &mut String) -> Result<f64, EvalError> {
    match obj {
        OmObject::Integer(i) => Ok(i.to_f64().unwrap_or(f64::INFINITY)),
        OmObject::Float(x) => Ok(*x),
        OmObject::Variable(v) => Err(EvalError::FreeVariable(v.clone())),
        OmObject::Symbol(s) => Err(EvalError::UnknownSymbol(s.uri())),
        OmObject::String(s) => Err(EvalError::NonNumericLeaf(format!("string {s:?}"))),
        OmObject::Binding { .. } => Err(EvalError::NonNumericLeaf(format!("binding at {}", location(path)))),
        OmObject::Application { head, args } => {
            let symbol = match head.as_ref() {
                OmObject::Symbol(s) => s,
                other => return Err(EvalError::NonNumericLeaf(format!("head {other} at {}", location(path)))),
            };
            let op = base.get(symbol).ok_or_else(|| EvalError::UnknownSymbol(symbol.uri()))?;
            if !op.arity.accepts(args.len()) {
                return Err(EvalError::ArityMismatch {
                    symbol: symbol.uri(),
                    expected: op.arity.describe(),
                    got: args.len(),
                });
            }
            let mut values = Vec::with_capacity(args.len());
            for (i, a) in args.iter().enumerate() {
                let len = path.len();
                path.push_str(&format!("/{}", i + 1));
                values.push(eval_at(a, base, path)?);
                path.truncate(len);
            }
            let v = (op.apply)(&values).map_err(|f| match f {
                Fault::DivisionByZero => EvalError::DivisionByZero(location(path)),
            })?;
            if v.is_finite() || values.iter().any(|x| !x.is_finite()) {
                Ok(v)
            } else {
                Err(EvalError::NotFinite(location(path)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arith(name: &str, args: Vec<OmObject>) -> OmObject {
        OmObject::call(OmSymbol::standard("arith1", name), args)
    }

    #[test]
    fn geese_density() {
        let v = evaluate(&arith("divide", vec![OmObject::int(693), OmObject::int(380)]), &BaseEnv::arith1()).unwrap();
        assert_eq!(v, 1.8236842105263158);
    }

    #[test]
    fn all_base_operations() {
        let base = BaseEnv::arith1();
        let cases = [
            (arith("plus", vec![OmObject::int(1), OmObject::int(2), OmObject::Float(0.5)]), 3.5),
            (arith("times", vec![OmObject::int(2), OmObject::int(3), OmObject::int(4)]), 24.0),
            (arith("minus", vec![OmObject::int(2), OmObject::int(5)]), -3.0),
            (arith("power", vec![OmObject::int(2), OmObject::int(10)]), 1024.0),
            (arith("unary_minus", vec![OmObject::Float(1.5)]), -1.5),
            (arith("abs", vec![OmObject::int(-4)]), 4.0),
        ];
        for (t, want) in cases {
            assert_eq!(evaluate(&t, &base).unwrap(), want, "{t}");
        }
        assert_eq!(base.symbols().count(), 7);
        assert!(base.symbols().all(|s| s.cd == "arith1" && s.cdbase == crate::om::DEFAULT_CDBASE));
    }

    #[test]
    fn errors_name_their_cause() {
        let base = BaseEnv::arith1();
        let zero = arith("plus", vec![OmObject::int(1), arith("divide", vec![OmObject::int(1), OmObject::int(0)])]);
        assert_eq!(evaluate(&zero, &base), Err(EvalError::DivisionByZero("/2".into())));
        assert_eq!(
            evaluate(&arith("plus", vec![OmObject::var("x")]), &base),
            Err(EvalError::FreeVariable("x".into()))
        );
        let ln = OmObject::call(OmSymbol::standard("transc1", "ln"), vec![OmObject::int(1)]);
        assert_eq!(
            evaluate(&ln, &base),
            Err(EvalError::UnknownSymbol("http://www.openmath.org/cd/transc1#ln".into()))
        );
        assert!(matches!(
            evaluate(&arith("plus", vec![OmObject::String("a".into())]), &base),
            Err(EvalError::NonNumericLeaf(_))
        ));
        assert!(matches!(
            evaluate(&arith("minus", vec![OmObject::int(1)]), &base),
            Err(EvalError::ArityMismatch { got: 1, .. })
        ));
        assert!(matches!(
            evaluate(&arith("times", vec![OmObject::Float(1e300), OmObject::Float(1e300)]), &base),
            Err(EvalError::NotFinite(_))
        ));
    }
}
