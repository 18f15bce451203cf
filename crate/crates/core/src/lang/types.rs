use std::fmt;
use std::sync::Arc;

use super::value::Value;

/// Types of the expression language. Classical variables range over the
/// finite types; `distr`, `vec`, `op` and `meas` only occur as expression
/// types.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Bool,
    /// Integers modulo `n`; `bit` is `Int(2)`. `Int(0)` is the type of an
    /// unannotated integer literal.
    Int(u64),
    Enum(Arc<[String]>),
    Tuple(Vec<Type>),
    Func(Box<Type>, Box<Type>),
    Distr(Box<Type>),
    Set(Box<Type>),
    Vec(Box<Type>),
    /// Bounded operators `ℓ2[a] → ℓ2[b]`.
    Op(Box<Type>, Box<Type>),
    /// Projective measurements with outcomes in the first type on `ℓ2` of the second.
    Meas(Box<Type>, Box<Type>),
}

pub const BIT: Type = Type::Int(2);

impl Type {
    pub fn unit() -> Type {
        Type::Tuple(Vec::new())
    }

    pub fn pair(a: Type, b: Type) -> Type {
        Type::Tuple(vec![a, b])
    }

    /// Product type of a register list: the single type for one register,
    /// a tuple otherwise.
    pub fn product(mut parts: Vec<Type>) -> Type {
        if parts.len() == 1 {
            parts.pop().expect("one element")
        } else {
            Type::Tuple(parts)
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Type::Bool | Type::Enum(_) => true,
            Type::Int(n) => *n > 0,
            Type::Tuple(ts) => ts.iter().all(Type::is_finite),
            Type::Func(a, b) => a.is_finite() && b.is_finite(),
            _ => false,
        }
    }

    /// Number of elements, saturating at `u64::MAX`; `None` for infinite types.
    pub fn card(&self) -> Option<u64> {
        match self {
            Type::Bool => Some(2),
            Type::Int(0) => None,
            Type::Int(n) => Some(*n),
            Type::Enum(names) => Some(names.len() as u64),
            Type::Tuple(ts) => ts
                .iter()
                .try_fold(1u64, |acc, t| t.card().map(|c| acc.saturating_mul(c))),
            Type::Func(a, b) => {
                let (a, b) = (a.card()?, b.card()?);
                let mut acc = 1u64;
                for _ in 0..a {
                    acc = acc.saturating_mul(b);
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// All elements in canonical order (tuples lexicographic, first
    /// component most significant).
    pub fn elements(&self) -> Vec<Value> {
        match self {
            Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Type::Int(n) => (0..*n).map(|v| Value::int(v, *n)).collect(),
            Type::Enum(names) => (0..names.len())
                .map(|i| Value::Enum(i as u32, names.clone()))
                .collect(),
            Type::Tuple(ts) => {
                let mut out = vec![Vec::new()];
                for t in ts {
                    let es = t.elements();
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            es.iter().map(move |e| {
                                let mut p = prefix.clone();
                                p.push(e.clone());
                                p
                            })
                        })
                        .collect();
                }
                out.into_iter().map(Value::Tuple).collect()
            }
            Type::Func(a, b) => {
                let dom = a.elements();
                let cod = b.elements();
                let mut tables: Vec<Vec<(Value, Value)>> = vec![Vec::new()];
                for d in &dom {
                    tables = tables
                        .into_iter()
                        .flat_map(|t| {
                            cod.iter().map(move |c| {
                                let mut t2 = t.clone();
                                t2.push((d.clone(), c.clone()));
                                t2
                            })
                        })
                        .collect();
                }
                tables
                    .into_iter()
                    .map(|t| Value::Func(Arc::new(t.into_iter().collect())))
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// Position of `v` in [`Type::elements`].
    pub fn index_of(&self, v: &Value) -> Option<usize> {
        match (self, v) {
            (Type::Bool, Value::Bool(b)) => Some(*b as usize),
            (Type::Int(n), Value::Int(x, _)) if *x < *n => Some(*x as usize),
            (Type::Enum(names), Value::Enum(i, _)) if (*i as usize) < names.len() => {
                Some(*i as usize)
            }
            (Type::Tuple(ts), Value::Tuple(vs)) if ts.len() == vs.len() => {
                let mut idx = 0usize;
                for (t, x) in ts.iter().zip(vs) {
                    idx = idx * t.card()? as usize + t.index_of(x)?;
                }
                Some(idx)
            }
            _ => self.elements().iter().position(|e| e == v),
        }
    }

    /// Flattened list of atomic factors; two types describe the same
    /// Hilbert space layout iff their flattenings agree.
    pub fn flatten(&self) -> Vec<Type> {
        match self {
            Type::Tuple(ts) => ts.iter().flat_map(Type::flatten).collect(),
            t => vec![t.clone()],
        }
    }

    pub fn same_space(&self, other: &Type) -> bool {
        self.flatten() == other.flatten()
    }

    pub fn is_bool(&self) -> bool {
        matches!(self, Type::Bool)
    }
}

fn atomic(t: &Type) -> bool {
    !matches!(t, Type::Tuple(ts) if !ts.is_empty())
        && !matches!(
            t,
            Type::Func(..) | Type::Distr(_) | Type::Vec(_) | Type::Set(_)
        )
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bool => write!(f, "bool"),
            Type::Int(2) => write!(f, "bit"),
            Type::Int(0) => write!(f, "int"),
            Type::Int(n) => write!(f, "int<{n}>"),
            Type::Enum(names) => write!(f, "enum{{{}}}", names.join(",")),
            Type::Tuple(ts) if ts.is_empty() => write!(f, "unit"),
            Type::Tuple(ts) => {
                let parts: Vec<String> = ts
                    .iter()
                    .map(|t| {
                        if atomic(t) {
                            t.to_string()
                        } else {
                            format!("({t})")
                        }
                    })
                    .collect();
                write!(f, "{}", parts.join("*"))
            }
            Type::Func(a, b) => {
                let l = if matches!(**a, Type::Func(..)) {
                    format!("({a})")
                } else {
                    a.to_string()
                };
                write!(f, "{l}->{b}")
            }
            Type::Distr(t) => write!(f, "distr {}", wrap(t)),
            Type::Set(t) => write!(f, "set {}", wrap(t)),
            Type::Vec(t) => write!(f, "vec {}", wrap(t)),
            Type::Op(a, b) => write!(f, "op({a},{b})"),
            Type::Meas(a, b) => write!(f, "meas({a},{b})"),
        }
    }
}

fn wrap(t: &Type) -> String {
    if atomic(t) {
        t.to_string()
    } else {
        format!("({t})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinalities() {
        assert_eq!(Type::pair(BIT, Type::Int(3)).card(), Some(6));
        assert_eq!(
            Type::Func(Box::new(BIT), Box::new(Type::Int(3))).card(),
            Some(9)
        );
        assert_eq!(
            Type::Func(Box::new(BIT), Box::new(Type::Int(3)))
                .elements()
                .len(),
            9
        );
    }

    #[test]
    fn tuple_index_is_lexicographic() {
        let t = Type::pair(BIT, Type::Int(3));
        for (i, e) in t.elements().iter().enumerate() {
            assert_eq!(t.index_of(e), Some(i));
        }
    }

    #[test]
    fn flattening_identifies_layouts() {
        let a = Type::Tuple(vec![Type::pair(BIT, BIT), BIT]);
        let b = Type::Tuple(vec![BIT, BIT, BIT]);
        assert!(a.same_space(&b));
        assert!(!a.same_space(&Type::Int(8)));
    }
}
