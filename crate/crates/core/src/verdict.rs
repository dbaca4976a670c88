//! Three-valued verdicts with certificates and witnesses.

use serde::{Deserialize, Serialize};

use crate::index::Index;
use crate::limits::Limits;
use crate::order::Order;
use crate::xpos::XPos;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
    Unknown,
}

/// Why a verdict is `Unknown`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownReason {
    /// The searched levels or indices were not enough.
    Horizon,
    /// Approximate values were too close to decide.
    Tolerance,
    /// No decision rule covers this family shape.
    NoRule,
    /// No proved criterion exists; the question is left open.
    CitationGap,
}

impl UnknownReason {
    /// Whether more resources or another rule could settle the question.
    pub fn is_resolvable(self) -> bool {
        !matches!(self, UnknownReason::CitationGap)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizon {
    pub levels: u32,
    pub indices: u64,
}

impl From<&Limits> for Horizon {
    fn from(l: &Limits) -> Self {
        Horizon {
            levels: l.levels,
            indices: l.horizon,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SumSide {
    Left,
    Right,
}

impl SumSide {
    pub fn wrap(self, idx: Index) -> Index {
        match self {
            SumSide::Left => Index::left(idx),
            SumSide::Right => Index::right(idx),
        }
    }
}

/// `sup_i v_m(i)/v_n(i)^2 <= bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct W3Triple {
    pub n: u32,
    pub m: u32,
    pub bound: XPos,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelBound {
    pub level: u32,
    pub bound: XPos,
}

/// A convergent majorant for `Σ_i v_n(i)^p`; `j` below is the last coordinate of `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SeriesBound {
    /// Finitely many terms.
    Finite { terms: Vec<Index>, sum: XPos },
    /// `v_n(i)^p <= first·ratio^(j-1)`, at most `multiplicity` indices per `j`.
    Geometric {
        first: XPos,
        ratio: XPos,
        multiplicity: u64,
        sum: XPos,
    },
    /// `v_n(i)^p <= coef·j^(-exponent)` with `exponent > 1`, at most `multiplicity` indices per `j`.
    PSeries {
        coef: XPos,
        exponent: XPos,
        multiplicity: u64,
        sum: XPos,
    },
    /// Exact partial sum over `j < from`, then `v_n(j)^p <= last·ratio^(j-from)` by the declared monotone tail.
    TailGeometric {
        from: u64,
        partial: XPos,
        last: XPos,
        ratio: XPos,
        sum: XPos,
    },
}

impl SeriesBound {
    pub fn sum(&self) -> &XPos {
        match self {
            SeriesBound::Finite { sum, .. }
            | SeriesBound::Geometric { sum, .. }
            | SeriesBound::PSeries { sum, .. }
            | SeriesBound::TailGeometric { sum, .. } => sum,
        }
    }
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    W3 {
        witness_map: Vec<W3Triple>,
        rule: String,
    },
    /// `v_level(i) <= bound` for every index.
    Bounded { level: u32, bound: XPos },
    Summable {
        level: u32,
        order: Order,
        series: SeriesBound,
    },
    /// `v_level(i) -> 0`.
    Vanishing {
        level: u32,
        reason: String,
        samples: Vec<Index>,
    },
    /// An infinite set `R` (prefix listed) with `v_m/v_1 >= lower_bounds[m]` on `R`.
    MontelObstruction {
        points: Vec<Index>,
        lower_bounds: Vec<LevelBound>,
    },
    /// `v_n <= C_n v_{n+1}` on the whole set.
    BanachRows { constants: Vec<LevelBound> },
    DirectSum {
        left: Box<Certificate>,
        right: Box<Certificate>,
    },
    /// A derived verdict; the statement names the rule.
    Rule { statement: String },
}

/// `v_m(index)/v_level(index)^2 >= at_least`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub m: u32,
    pub index: Index,
    pub at_least: XPos,
}

/// `v_level(index) >= at_least`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub level: u32,
    pub index: Index,
    pub at_least: XPos,
}

/// `v_m(index)/v_1(index) <= at_most`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub m: u32,
    pub index: Index,
    pub at_most: XPos,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelIndex {
    pub level: u32,
    pub index: Index,
}

/// Pointwise lower bound for `v_n(i)^p`, `j` the last coordinate of `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum LowerBound {
    Constant { value: XPos },
    /// `coef·j^(-exponent)` with `exponent <= 1`.
    PowerLaw { coef: XPos, exponent: XPos },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub level: u32,
    pub lower: LowerBound,
    pub points: Vec<Index>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// `r_level^2 <= R < r_m` for every `m`, with sampled growth of `v_m/v_level^2`.
    RatioUnbounded {
        level: u32,
        r_level: XPos,
        limit: XPos,
        samples: Vec<RatioSample>,
    },
    Growth { samples: Vec<GrowthSample> },
    InfiniteWeight { points: Vec<LevelIndex> },
    /// Infinitely many terms bounded below at every level.
    Divergence {
        order: Order,
        rows: Vec<DivergenceRow>,
        argument: String,
    },
    /// Row `row` of `S` is infinite; `v_level/v_{level+1}` grows along it.
    InfiniteRow {
        row: u64,
        level: u32,
        samples: Vec<GrowthSample>,
    },
    /// Every candidate ratio `v_m/v_1` tends to 0 (sampled decay listed).
    NoObstruction {
        argument: String,
        samples: Vec<DecaySample>,
    },
    /// An infinite set (prefix listed) with `v_m/v_1 >= lower_bounds[m]`, refuting the Montel property.
    Obstruction {
        points: Vec<Index>,
        lower_bounds: Vec<LevelBound>,
    },
    Side {
        side: SumSide,
        witness: Box<Witness>,
    },
    /// Both summands fail.
    DirectSum {
        left: Box<Witness>,
        right: Box<Witness>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub horizon: Horizon,
    pub rule_citation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unknown_reason: Option<UnknownReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn holds(certificate: Certificate, citation: impl Into<String>, limits: &Limits) -> Self {
        Verdict {
            outcome: Outcome::Holds,
            certificate: Some(certificate),
            witness: None,
            horizon: limits.into(),
            rule_citation: citation.into(),
            unknown_reason: None,
            note: None,
        }
    }

    pub fn fails(witness: Witness, citation: impl Into<String>, limits: &Limits) -> Self {
        Verdict {
            outcome: Outcome::Fails,
            certificate: None,
            witness: Some(witness),
            horizon: limits.into(),
            rule_citation: citation.into(),
            unknown_reason: None,
            note: None,
        }
    }

    pub fn unknown(
        reason: UnknownReason,
        citation: impl Into<String>,
        note: impl Into<String>,
        limits: &Limits,
    ) -> Self {
        Verdict {
            outcome: Outcome::Unknown,
            certificate: None,
            witness: None,
            horizon: limits.into(),
            rule_citation: citation.into(),
            unknown_reason: Some(reason),
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_citation(mut self, citation: impl Into<String>) -> Self {
        self.rule_citation = citation.into();
        self
    }

    pub fn is_holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }

    pub fn is_unknown(&self) -> bool {
        self.outcome == Outcome::Unknown
    }

    /// The same outcome with the certificate or witness of `self`, under a new rule.
    pub fn derived(&self, citation: impl Into<String>) -> Verdict {
        let mut v = self.clone();
        v.rule_citation = citation.into();
        v
    }

    /// Tags a certificate or witness as belonging to one summand of a direct sum.
    pub fn on_side(mut self, side: SumSide) -> Verdict {
        if let Some(w) = self.witness.take() {
            self.witness = Some(Witness::Side {
                side,
                witness: Box::new(w),
            });
        }
        self
    }

    /// Checks the structural invariants: certificates on `Holds`, witnesses on `Fails`,
    /// a reason on `Unknown`.
    pub fn is_well_formed(&self) -> bool {
        match self.outcome {
            Outcome::Holds => self.certificate.is_some() && self.witness.is_none(),
            Outcome::Fails => self.witness.is_some() && self.certificate.is_none(),
            Outcome::Unknown => {
                self.unknown_reason.is_some() && self.certificate.is_none() && self.witness.is_none()
            }
        }
    }
}
