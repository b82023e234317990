pub mod cli;
pub mod energy;
pub mod geodesic;
pub mod hankel;
pub mod kernel;
pub mod oracle;
pub mod quadrature;
pub mod specfun;
pub mod suite;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/modes.md")]
    mod modes {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/front.md")]
    mod front {}
    #[doc = include_str!("../../../book/src/hankel.md")]
    mod hankel {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/flow.md")]
    mod flow {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
