pub mod bases;
pub mod error;
pub mod json;
pub mod lab;
pub mod maps;
pub mod matrix;
pub mod povm;
pub mod random;
pub mod registry;
pub mod witness;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/bases.md")]
    mod bases {}
    #[doc = include_str!("../../../book/src/measurements.md")]
    mod measurements {}
    #[doc = include_str!("../../../book/src/maps.md")]
    mod maps {}
    #[doc = include_str!("../../../book/src/witnesses.md")]
    mod witnesses {}
    #[doc = include_str!("../../../book/src/certification.md")]
    mod certification {}
    #[doc = include_str!("../../../book/src/examples.md")]
    mod examples {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
