//! Finite-scale *-algebras, functionals, positive maps and channels.

pub mod element;
pub mod expr;
pub mod functional;
pub mod maps;
pub mod ops;

pub use element::{c, AlgebraElement, AlgebraKind, BoxDomain, CMat, MatrixLiteral, StarAlgebra};
pub use expr::{FnExpr, Point, PointMap};
pub use functional::{DiracAtom, Functional};
pub use maps::{check_positive_map, dagger, dagger_lazy, Channel, DualSpace, MapFlags, MapKind, PositiveMap};
pub use ops::{delta, interference_check, is_effect, mean_value, propensity, spectral_measure, Interference};
