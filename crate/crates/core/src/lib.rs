//! Numerical laboratory for pseudo-bosonic ladder operators built from a
//! deformation profile `alpha(x)`: the biorthogonal families, the deformed
//! su(1,1) triples they carry, and weak squeezed states.
//!
//! With `beta_a' = 1/alpha` the lowering and raising operators are
//! `a = k alpha D + beta_a` and `b = -alpha D`, and `[a, b] = 1`.

pub mod expr;
pub mod families;
pub mod figures;
pub mod function;
pub mod hermite;
pub mod jet;
pub mod operators;
pub mod pairing;
pub mod profile;
pub mod quadrature;
pub mod squeeze;
pub mod verify;

pub use expr::{parse, EvalError, Expr, ParseError};
pub use families::{Family, FamilyMember, Side, TowerIndex};
pub use figures::{plot_data, FigureId, PlotData};
pub use function::{Bump, BumpShape, ExprFn, Function1d};
pub use operators::{DiffOperator, OperatorError, Strategy};
pub use pairing::{inner_product, Method, PairingError, PairingResult};
pub use profile::{PbProfile, ProfileError, ProfileKind};
pub use squeeze::{SqueezeError, SqueezeParams};
pub use verify::{run_catalog, Record, VerifyOptions, VerifyReport};

/// Any error the library reports.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Squeeze(#[from] SqueezeError),
}
