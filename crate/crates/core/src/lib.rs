//! Markov chains on `[0,1]` whose states either square or fall to 0.
//!
//! The crate iterates finitely supported measures under the Markov operator,
//! measures how the iterates converge (total variation, uniformly over
//! starting points, and against continuous test functions), and checks
//! certificates:
//!
//! - Doob–Doeblin certificates for conditions (D) and (D̃), which imply the
//!   chain is quasicompact;
//! - criterion-(Z) witnesses, nested vanishing sets `Kₙ` with
//!   `p(x, Kₙ) ≥ 1 − εₙ` on `Kₙ₊₁`, which imply an invariant purely finitely
//!   additive measure localized on the `Kₙ`;
//! - the finite pairwise-singular invariant basis with stochastically closed
//!   carriers.
//!
//! Certificates are verified, never searched for. Passing checks are
//! evidence relative to the grids and set families used; failing checks come
//! with an exact counterexample.
//!
//! Modules:
//!
//! - [`measure`]: points, atomic measures, measurable sets, test functions.
//! - [`kernel`]: transition kernels, the operators `A` and `T`, builtin chains.
//! - [`analysis`]: convergence profiles, trajectory sets, Feller defects.
//! - [`certify`]: (Z), (D)/(D̃), and invariant-basis checks.
//! - [`cli`]: the `pfa` command line, kernel spec files, the `π(x)` grammar.

pub mod analysis;
pub mod certify;
pub mod cli;
pub mod kernel;
pub mod measure;
