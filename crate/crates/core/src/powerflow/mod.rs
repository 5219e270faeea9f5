//! Network solvers: lossless DC flow, the lossy DC flow kernel used by the
//! interior-point TNEP, fast-decoupled AC load flow and N-1 screening.

mod ac;
mod dc;
mod n1;

pub use ac::*;
pub use dc::*;
pub use n1::*;
