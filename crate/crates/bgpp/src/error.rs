use thiserror::Error;

/// Everything that can go wrong across the crate.
///
/// Geometry errors (domain, singular angles), level-set errors (unattainable
/// invariants), special-function errors (modulus, characteristic pole) and
/// integration errors (step failure, domain exit) share one enum so that the
/// drivers and the command line can report them uniformly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter {name} = {value} is negative")]
    NegativeParameter { name: &'static str, value: f64 },

    #[error("{what} is not finite")]
    NonFinite { what: &'static str },

    #[error("{what} = {value} outside the allowed domain ({constraint})")]
    DomainError {
        what: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("coordinate chart degenerates: |sin theta| = {sin_theta:e} below tolerance")]
    SingularPoint { sin_theta: f64 },

    #[error("parameters do not define an Eguchi-Hanson limit: {reason}")]
    NotEhLimit { reason: &'static str },

    #[error("elliptic modulus k2 = {k2} outside [0, 1]")]
    ModulusOutOfRange { k2: f64 },

    #[error("characteristic n = {n} puts a pole on the integration path")]
    CharacteristicPole { n: f64 },

    #[error("{what} failed to converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("radial polynomial changes sign inside the requested interval near u = {near}")]
    TurningPointCrossed { near: f64 },

    #[error("level n2 = {n2} unattainable for m2 = {m2}: needs {lo} <= n2 <= {hi}")]
    UnattainableLevel { n2: f64, m2: f64, lo: f64, hi: f64 },

    #[error("total angular momentum vanishes; the closed-form solutions need m2 > 0")]
    ZeroCasimir,

    #[error("initial data inconsistent with the stated level set (residual {residual:e})")]
    InconsistentInitialData { residual: f64 },

    #[error("radial cubic has a (near-)degenerate root pair (separation {separation:e})")]
    DegenerateRoots { separation: f64 },

    #[error("levels are not on the degenerate locus: m3 = {m3}, mu2 - 2 e gamma = {defect}")]
    NotDegenerate { m3: f64, defect: f64 },

    #[error("orbit touches the bolt rho = gamma (m3 = 0); no regular closed-form parameter")]
    BoundaryBolt,

    #[error("step size collapsed to {h:e} at lambda = {lambda}: {reason}")]
    StepFailure {
        h: f64,
        lambda: f64,
        reason: &'static str,
    },

    #[error("trajectory left the domain at lambda = {lambda} ({what} = {value})")]
    DomainExit {
        lambda: f64,
        what: &'static str,
        value: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
