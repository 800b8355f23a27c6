//! Construction and classification of quadratic APN functions over GF(2)^n.

pub mod classify;
pub mod error;
pub mod estimate;
pub mod f2core;
pub mod field;
pub mod io;
pub mod orthoderiv;
pub mod quadspace;
pub mod search;
pub mod store;
pub mod vecfun;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/forms.md")]
    mod forms {}
    #[doc = include_str!("../../../book/src/apn-tests.md")]
    mod apn_tests {}
    #[doc = include_str!("../../../book/src/profiles.md")]
    mod profiles {}
    #[doc = include_str!("../../../book/src/bent-pipeline.md")]
    mod bent_pipeline {}
    #[doc = include_str!("../../../book/src/input-pipeline.md")]
    mod input_pipeline {}
    #[doc = include_str!("../../../book/src/classes.md")]
    mod classes {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
