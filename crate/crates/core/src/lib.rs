pub mod analysis;
pub mod check;
pub mod corpus;
pub mod lp;
pub mod machine;
pub mod pipeline;
pub mod potential;
pub mod rational;
pub mod subst;
pub mod surface;
pub mod syntax;
pub mod types;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("internal error: {0}")]
    Internal(String),
}
