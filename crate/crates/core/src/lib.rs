//! Three fully discrete routes to the quadratic functional
//!
//! ```text
//! Φ(x) = E[ ‖G X(T)‖² + ∫_0^T ‖R X(t)‖² dt ],   X(0) = x,
//! ```
//!
//! of the linear stochastic heat equation `dX = -A X dt + B(X) dW` on
//! `(0, 1)` with P1 finite elements and backward Euler in time:
//!
//! * [`lyapunov`]: the operator Lyapunov recursion, which yields the whole
//!   quadratic form at once;
//! * [`montecarlo`]: Euler–Maruyama paths and a Monte Carlo estimator;
//! * [`covariance`]: exact propagation of the second moment.
//!
//! [`experiment`] drives convergence and cost studies, and [`semigroup`]
//! checks the scalar rational-approximation bound behind the error
//! analysis.

pub mod covariance;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod fit;
pub mod linalg;
pub mod lyapunov;
pub mod montecarlo;
pub mod noise;
mod propagate;
pub mod semigroup;

pub use error::{Error, Result};
