pub mod bench;
pub mod expr;
pub mod atomize;

pub mod ir;
pub mod lex;
pub mod oracle;
pub mod solver;
pub mod ste;
pub mod symsim;
