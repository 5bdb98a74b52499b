//! Finite additive subgroups of GF(p^n) up to dilation.
//!
//! * [`field`]: arithmetic in GF(p^n) with an explicit irreducible modulus.
//! * [`dickson`]: Dickson invariants of a subgroup basis, by product and by recursion.
//! * [`subspace`]: canonical forms, dilation orbits, stabilisers, partitions.
//! * [`monoid`]: the weight equation for invariant monomials and its primitive solutions.
//! * [`separating`]: closed-form separating invariants and exhaustive separation checks.
//! * [`structure`]: structural theorems cross-checked against brute force.

pub mod dickson;
pub mod field;
mod linalg;
pub mod monoid;
pub mod separating;
pub mod structure;
pub mod subspace;

pub use dickson::{dickson_eval, norm_poly, DicksonVector, SubgroupBasis};
pub use field::{make_field, FieldCtx, FqElem};
pub use subspace::{CanonicalSubspace, Partition};
