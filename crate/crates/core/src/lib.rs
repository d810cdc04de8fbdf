pub mod builtins;
pub mod calculus;
pub mod cli;
pub mod corpus;
pub mod extres;
pub mod json;
pub mod lattice;
pub mod rat;
pub mod setfun;
pub mod vectoropt;
pub mod vi;
