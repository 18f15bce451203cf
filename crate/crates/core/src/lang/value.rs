use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use super::types::Type;
use crate::linalg::Matrix;

pub type Mat = Matrix<f64>;

/// Runtime values. Integers carry their modulus (`0` for an unannotated
/// literal); equality and ordering ignore it.
#[derive(Debug, Clone)]
pub enum Value {
    Bool(bool),
    Int(u64, u64),
    Enum(u32, Arc<[String]>),
    Tuple(Vec<Value>),
    Func(Arc<BTreeMap<Value, Value>>),
    Distr(Arc<Vec<(Value, Rational64)>>),
    Set(Arc<BTreeSet<Value>>),
    Vector(Arc<Vec<Complex64>>),
    Op(Arc<Mat>),
    Meas(Arc<BTreeMap<Value, Mat>>),
}

impl Value {
    pub fn int(v: u64, m: u64) -> Value {
        Value::Int(if m > 0 { v % m } else { v }, m)
    }

    pub fn bit(b: u64) -> Value {
        Value::Int(b & 1, 2)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Builds a normalized distribution, merging duplicate outcomes and
    /// dropping zero weights.
    pub fn distr(entries: impl IntoIterator<Item = (Value, Rational64)>) -> Value {
        let mut acc: BTreeMap<Value, Rational64> = BTreeMap::new();
        for (v, w) in entries {
            *acc.entry(v).or_insert_with(Rational64::zero) += w;
        }
        Value::Distr(Arc::new(
            acc.into_iter().filter(|(_, w)| !w.is_zero()).collect(),
        ))
    }

    pub fn set(items: impl IntoIterator<Item = Value>) -> Value {
        Value::Set(Arc::new(items.into_iter().collect()))
    }

    /// Re-annotates integers with the moduli of `ty`; used when a value is
    /// stored into a typed location.
    pub fn coerce(&self, ty: &Type) -> Value {
        match (self, ty) {
            (Value::Int(v, _), Type::Int(m)) => Value::int(*v, *m),
            (Value::Tuple(vs), Type::Tuple(ts)) if vs.len() == ts.len() => {
                Value::Tuple(vs.iter().zip(ts).map(|(v, t)| v.coerce(t)).collect())
            }
            (Value::Func(map), Type::Func(a, b)) => Value::Func(Arc::new(
                map.iter()
                    .map(|(k, v)| (k.coerce(a), v.coerce(b)))
                    .collect(),
            )),
            (Value::Distr(d), Type::Distr(t)) => {
                Value::Distr(Arc::new(d.iter().map(|(v, w)| (v.coerce(t), *w)).collect()))
            }
            (Value::Set(s), Type::Set(t)) => Value::set(s.iter().map(|v| v.coerce(t))),
            (Value::Meas(m), Type::Meas(o, _)) => Value::Meas(Arc::new(
                m.iter().map(|(k, v)| (k.coerce(o), v.clone())).collect(),
            )),
            (v, _) => v.clone(),
        }
    }

    /// Checks that the value is an element of the finite type `ty`.
    pub fn inhabits(&self, ty: &Type) -> bool {
        match (self, ty) {
            (Value::Bool(_), Type::Bool) => true,
            (Value::Int(v, _), Type::Int(m)) => *m == 0 || v < m,
            (Value::Enum(i, names), Type::Enum(n2)) => **names == **n2 && (*i as usize) < n2.len(),
            (Value::Tuple(vs), Type::Tuple(ts)) => {
                vs.len() == ts.len() && vs.iter().zip(ts).all(|(v, t)| v.inhabits(t))
            }
            (Value::Func(map), Type::Func(a, b)) => {
                map.iter().all(|(k, v)| k.inhabits(a) && v.inhabits(b))
                    && a.card().is_some_and(|c| c as usize == map.len())
            }
            _ => false,
        }
    }

    pub fn distr_total(d: &[(Value, Rational64)]) -> Rational64 {
        d.iter().fold(Rational64::zero(), |acc, (_, w)| acc + w)
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Int(..) => 1,
            Value::Enum(..) => 2,
            Value::Tuple(_) => 3,
            Value::Func(_) => 4,
            Value::Distr(_) => 5,
            Value::Set(_) => 6,
            Value::Vector(_) => 7,
            Value::Op(_) => 8,
            Value::Meas(_) => 9,
        }
    }
}

fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn cmp_mat(a: &Mat, b: &Mat) -> Ordering {
    (a.rows(), a.cols())
        .cmp(&(b.rows(), b.cols()))
        .then_with(|| {
            for (x, y) in a.data().iter().zip(b.data()) {
                let o = cmp_complex(x, y);
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Int(a, _), Value::Int(b, _)) => a.cmp(b),
            (Value::Enum(a, _), Value::Enum(b, _)) => a.cmp(b),
            (Value::Tuple(a), Value::Tuple(b)) => a.cmp(b),
            (Value::Func(a), Value::Func(b)) => a.cmp(b),
            (Value::Distr(a), Value::Distr(b)) => a.cmp(b),
            (Value::Set(a), Value::Set(b)) => a.cmp(b),
            (Value::Vector(a), Value::Vector(b)) => a.len().cmp(&b.len()).then_with(|| {
                a.iter()
                    .zip(b.iter())
                    .map(|(x, y)| cmp_complex(x, y))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            }),
            (Value::Op(a), Value::Op(b)) => cmp_mat(a, b),
            (Value::Meas(a), Value::Meas(b)) => a.len().cmp(&b.len()).then_with(|| {
                for ((ka, ma), (kb, mb)) in a.iter().zip(b.iter()) {
                    let o = ka.cmp(kb).then_with(|| cmp_mat(ma, mb));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            }),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Bool(b) => b.hash(state),
            Value::Int(v, _) => v.hash(state),
            Value::Enum(i, _) => i.hash(state),
            Value::Tuple(vs) => vs.hash(state),
            Value::Func(m) => {
                for (k, v) in m.iter() {
                    k.hash(state);
                    v.hash(state);
                }
            }
            Value::Distr(d) => {
                for (v, w) in d.iter() {
                    v.hash(state);
                    w.hash(state);
                }
            }
            Value::Set(s) => {
                for v in s.iter() {
                    v.hash(state);
                }
            }
            Value::Vector(v) => v.len().hash(state),
            Value::Op(m) => (m.rows(), m.cols()).hash(state),
            Value::Meas(m) => m.len().hash(state),
        }
    }
}

fn fmt_rational(w: &Rational64) -> String {
    if *w.denom() == 1 {
        w.numer().to_string()
    } else {
        format!("{}/{}", w.numer(), w.denom())
    }
}

fn fmt_complex(z: &Complex64) -> String {
    let re = z.re;
    let im = z.im;
    if im == 0.0 {
        format!("{re}")
    } else if re == 0.0 {
        format!("{im}*i")
    } else {
        format!("({re} + {im}*i)")
    }
}

fn fmt_rows(m: &Mat) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|r| {
            format!(
                "[{}]",
                m.row(r)
                    .iter()
                    .map(fmt_complex)
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(v, _) => write!(f, "{v}"),
            Value::Enum(i, names) => write!(f, "{}", names[*i as usize]),
            Value::Tuple(vs) => {
                write!(f, "(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                if vs.len() == 1 {
                    write!(f, ",")?;
                }
                write!(f, ")")
            }
            Value::Func(m) => {
                let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k} -> {v}")).collect();
                write!(f, "table[{}]", parts.join(", "))
            }
            Value::Distr(d) => {
                let parts: Vec<String> = d
                    .iter()
                    .map(|(v, w)| format!("{v} -> {}", fmt_rational(w)))
                    .collect();
                write!(f, "distr{{{}}}", parts.join(", "))
            }
            Value::Set(s) => {
                let parts: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
            Value::Vector(v) => {
                write!(
                    f,
                    "[{}]",
                    v.iter().map(fmt_complex).collect::<Vec<_>>().join(", ")
                )
            }
            Value::Op(m) => write!(f, "{}", fmt_rows(m)),
            Value::Meas(m) => {
                let parts: Vec<String> = m.values().map(fmt_rows).collect();
                write!(f, "[{}]", parts.join(", "))
            }
        }
    }
}

pub fn rational_to_f64(w: &Rational64) -> f64 {
    w.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_ints_compare_by_value() {
        assert_eq!(Value::Int(1, 0), Value::bit(1));
        assert_ne!(Value::Int(0, 0), Value::bit(1));
    }

    #[test]
    fn distr_merges_duplicates() {
        let d = Value::distr([
            (Value::bit(0), Rational64::new(1, 4)),
            (Value::bit(0), Rational64::new(1, 4)),
            (Value::bit(1), Rational64::new(0, 1)),
        ]);
        match d {
            Value::Distr(d) => assert_eq!(*d, vec![(Value::bit(0), Rational64::new(1, 2))]),
            _ => unreachable!(),
        }
    }
}
