pub mod adelic;
pub mod arakelov;
pub mod arith;
pub mod curve;
pub mod exactnum;
pub mod gl2;
pub mod indet;
pub mod padic;
pub mod scenario;
pub mod tate;
pub mod theta_data;

/// The book chapters, compiled so that their snippets run as doctests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/exact-values.md")]
    pub mod exact_values {}
    #[doc = include_str!("../../../book/src/curves.md")]
    pub mod curves {}
    #[doc = include_str!("../../../book/src/tate.md")]
    pub mod tate {}
    #[doc = include_str!("../../../book/src/divisors.md")]
    pub mod divisors {}
    #[doc = include_str!("../../../book/src/regions.md")]
    pub mod regions {}
    #[doc = include_str!("../../../book/src/indeterminacies.md")]
    pub mod indeterminacies {}
    #[doc = include_str!("../../../book/src/theta-data.md")]
    pub mod theta_data {}
    #[doc = include_str!("../../../book/src/workbench.md")]
    pub mod workbench {}
}
