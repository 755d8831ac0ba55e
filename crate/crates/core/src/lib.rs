pub mod certify;
pub mod divergence;
pub mod equations;
pub mod equiv;
pub mod lts;
pub mod model;
pub mod syntax;
pub mod term;

/// The guide's code samples, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/language.md")]
    mod language {}
    #[doc = include_str!("../../../book/src/lts.md")]
    mod lts {}
    #[doc = include_str!("../../../book/src/equivalences.md")]
    mod equivalences {}
    #[doc = include_str!("../../../book/src/equations.md")]
    mod equations {}
    #[doc = include_str!("../../../book/src/divergences.md")]
    mod divergences {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
