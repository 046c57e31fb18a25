pub mod constraints;
pub mod experiments;
pub mod mp;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod wavefield;
