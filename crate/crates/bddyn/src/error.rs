//! Error type shared by the analysis modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A model parameter violates its domain constraint.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A state or matrix passed to an operation contains NaN/inf.
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    /// A state has a strictly negative component (caller bug, not clamped).
    #[error("negative state component: {0}")]
    NegativeState(String),

    /// An operation was called in a way its contract forbids.
    #[error("usage error: {0}")]
    Usage(String),

    /// No feasible interior equilibrium exists at the given growth rate.
    #[error("no feasible interior equilibrium at r = {r}")]
    NoInteriorEquilibrium { r: f64 },

    /// The Hopf test function does not change sign on the search bracket.
    #[error(
        "C2 does not change sign on [{lo}, {hi}] (C2(lo) = {c2_lo:e}, C2(hi) = {c2_hi:e}); \
         no Hopf bifurcation in bracket"
    )]
    NoBifurcationInBracket {
        lo: f64,
        hi: f64,
        c2_lo: f64,
        c2_hi: f64,
    },

    /// A root of C2 was found but k2 <= 0 there, so the imaginary pair is absent.
    #[error("C2 vanishes at r = {r} but k2 = {k2:e} <= 0: not a Hopf point")]
    NotAHopfPoint { r: f64, k2: f64 },

    /// The eigenbasis construction hit a (near-)singular denominator.
    #[error("singular eigenbasis: {0}")]
    SingularBasis(String),

    /// k1 ~ 0 at the Hopf point makes the center-manifold system singular.
    #[error("degenerate Hopf point: k1 = {k1:e} makes the quadratic-coefficient system singular")]
    DegenerateHopf { k1: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
