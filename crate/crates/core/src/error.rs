use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Constraint that kept a fleet size from being feasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Binding {
    /// A tour takes longer than the maximum revisit time.
    Revisit,
    /// A tour needs more than one battery charge.
    Energy,
    /// Edge compute load could not be brought under capacity.
    Capacity,
    /// The fleet-size cap was reached.
    Fleet,
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Binding::Revisit => "revisit time",
            Binding::Energy => "energy",
            Binding::Capacity => "edge capacity",
            Binding::Fleet => "fleet size",
        })
    }
}

struct BindingList<'a>(&'a [Binding]);

impl fmt::Display for BindingList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cannot seed {m} centers from {edges} edge nodes and {sensors} sensors")]
    NotEnoughSeeds { m: usize, edges: usize, sensors: usize },

    #[error("cannot form {m} clusters from {sensors} sensors")]
    TooFewSensors { m: usize, sensors: usize },

    #[error("sensor {0} is not covered by the plan")]
    SensorUnassigned(usize),

    #[error("unknown sensor id {0}")]
    UnknownSensor(usize),

    #[error("no UAV-served sensor has fire history")]
    NoHighRiskSensors,

    #[error("no reachable edge node")]
    NoReachableEdge,

    #[error("no feasible plan with at most {m_max} UAVs (binding: {})", BindingList(.binding))]
    Infeasible { m_max: usize, binding: Vec<Binding> },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
