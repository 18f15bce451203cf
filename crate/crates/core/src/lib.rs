//! qRHL proof assistant core: labeled linear algebra, the quantum
//! while-language, its denotational semantics, quantum predicates, the
//! tactic engine and semantic oracles.

pub mod lang;
pub mod linalg;
pub mod oracle;
pub mod registers;
pub mod predicates;
pub mod prover;
pub mod semantics;

pub type Complex = num_complex::Complex64;
pub type Matrix = linalg::Matrix<f64>;
pub type Space = registers::Space;
pub type Subspace = registers::Subspace<f64>;
pub type LabeledVector = registers::LabeledVector<f64>;
pub type LabeledOperator = registers::LabeledOperator<f64>;
