//! Numerical building blocks: literals and fixed-precision `exp`, polynomials
//! and Sturm chains, adaptive quadrature, harmonic numbers.

pub mod decimal;
pub mod harmonic;
pub mod poly;
pub mod quad;
