//! Exact verification engine for the character-theoretic parametrizations of
//! Sp6(2^a) and Sp4(2^a): index classes, generic character tables, ell-blocks,
//! radical subgroups, local characters, the local-global bijections and a
//! verification harness.

pub mod arith;
pub mod bijections;
pub mod blocks;
pub mod chartable;
pub mod harness;
pub mod indexing;
pub mod localchars;
pub mod radicals;

pub use arith::{classify_regime, group_order, DegreePolynomial, DivisorClass, Family, GroupSpec, PrimeRegime};
pub use bijections::{MapContext, MapKind, MapTable};
pub use blocks::{BlockId, BlockRules, BrauerData};
pub use chartable::{CharLabel, CharTable, Instance};
pub use harness::{run, validate_tables, Check, DataSet, EllSel, Report, Status, VerificationJob};
pub use indexing::{IndexClass, IndexKind, IndexTuple};
pub use radicals::RadicalTag;
