//! Cokernels of random matrices over finite chain rings.

pub mod error;
pub mod experiments;
pub mod formulas;
pub mod matrix;
pub mod module;
pub mod random;
pub mod ring;
pub mod snf;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::{BlockOp, BlockPartition, RingMatrix};
pub use module::{ModuleType, Part};
pub use ring::{ChainRing, ChainRingElement, PolySpec, PrimePowerModulus};
pub use snf::{smith_normal_form, CokernelClass, SnfResult};
