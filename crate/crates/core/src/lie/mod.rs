//! Exact construction of classical complex simple Lie algebras and their
//! real forms.

pub mod algebra;
pub mod basis;
pub mod real_form;
pub mod roots;

pub use algebra::{LieAlgebra, LieAlgebraSpec, SparseVec};
pub use basis::{build_for_type, build_normalized_basis, BasisData, BasisTag, NormalizationReport, SignedSqrt};
pub use real_form::{apply_real_form, EpsilonLabels, RealFormData};
pub use roots::{build_root_system, CartanType, Family, RootDatum};
