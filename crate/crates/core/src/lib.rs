//! Direct operational vector solver for nonlinear Volterra integral
//! equations of the first kind,
//!
//! ```text
//! f(t) = int_{t0}^t k(x, t) G(u(x)) dx,
//! ```
//!
//! over shifted Chebyshev and hybrid block-pulse/Chebyshev bases.

pub mod basis;
pub mod cli;
pub mod expr;
pub mod opalg;
pub mod oracle;
pub mod registry;
pub mod solver;
