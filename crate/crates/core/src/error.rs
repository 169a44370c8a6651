use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {what} = {value:e}")]
    InvalidState { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vacuum forms: velocity jump {jump:e} reaches the two-rarefaction bound {bound:e}")]
    Vacuum { jump: f64, bound: f64 },

    #[error("inflow is subsonic (Mach {mach:.4}); an attached oblique shock needs Mach > 1")]
    SubsonicInflow { mach: f64 },

    #[error(
        "shock detaches: deflection {alpha_deg:.4} deg exceeds the maximum attached deflection \
         {max_deg:.4} deg at Mach {mach:.4}"
    )]
    Detachment {
        alpha_deg: f64,
        max_deg: f64,
        mach: f64,
    },

    #[error("positivity lost in cell {cell} at t = {t:e}: {what} = {value:e}")]
    Positivity {
        cell: usize,
        t: f64,
        what: &'static str,
        value: f64,
    },

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("time must be positive, got {0:e}")]
    NonpositiveTime(f64),

    #[error("need at least {need} snapshots, got {got}")]
    TooFewSnapshots { need: usize, got: usize },

    #[error("test function support leaves the sampled window")]
    SupportOutsideWindow,

    #[error("sampling window leaves the mesh at t = {t:e}")]
    WindowOutsideMesh { t: f64 },

    #[error("step carries no interface flux record")]
    MissingFluxRecord,
}

pub type Result<T> = std::result::Result<T, Error>;
