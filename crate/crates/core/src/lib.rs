//! Exact computation, search and analysis for the two-player Levine hat game.
//!
//! Each of two players wears a stack of black/white hats, sees only the
//! partner's stack, and must name the index of a black hat on their own stack.
//! The team wins when both succeed. This crate provides:
//!
//! * [`game`]: the finite game model (stacks, h-strategies, outcome grids) and
//!   the exact win-probability engine under the uniform and p-biased measures.
//! * [`search`]: best responses, exhaustive search for small heights and a
//!   seeded hill climber.
//! * [`recursive`]: closed-form values of recursive strategies that skip
//!   batches of hats, and propagation of lower bounds on the optimal value.
//! * [`pvariant`]: the biased game, where each hat is black with probability p.
//! * [`continuous`]: the continuous game played with real-valued indices.
//! * [`render`]: bitmap and SVG renderings of all of the above.
//!
//! Every exact probability is a [`Rat`].

pub mod continuous;
pub mod error;
pub mod game;
pub mod io;
pub mod poly;
pub mod presets;
pub mod pvariant;
pub mod rat;
pub mod recursive;
pub mod render;
pub mod rng;
pub mod search;
pub mod verify;

pub use error::{Error, Result};
pub use game::{BiasedMeasure, DeltaGrid, DeltaGrids, HStrategy, Stack};
pub use poly::{Poly, RationalFn};
pub use rat::Rat;
pub use recursive::{RecursivePair, SkipRule};
