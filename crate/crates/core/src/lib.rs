pub mod annotations;
#[cfg(feature = "proptest")]
pub mod arbitrary;
pub mod cd;
pub mod decimal;
pub mod eval;
pub mod om;
pub mod pipeline;
pub mod rdf;
pub mod rewrite;
pub mod xml;
