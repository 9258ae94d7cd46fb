//! JSON documents for instances, coalitions, reports and plans.
//!
//! Rationals travel as strings: decimals (`"0.35"`) or fractions (`"4/11"`)
//! on input, lowest-terms fractions on output. Agent positions are 1-based.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{EquilibriumReport, Rejection};
use crate::hardness::{ReductionArtifact, ReductionMeta};
use crate::interventions::{ExternalPlan, MatchingPlan};
use crate::model::{Agent, Coalition, GameInstance, ModelError};
use crate::rational::{format_rational, parse_rational, ParseRationalError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Syntax(String),
    #[error("tau: {0}")]
    Threshold(ParseRationalError),
    #[error("agent {}: {field}: {source}", .index + 1)]
    AgentField {
        index: usize,
        field: &'static str,
        source: ParseRationalError,
    },
    #[error("{field}: {source}")]
    Field {
        field: &'static str,
        source: ParseRationalError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("meta: {0}")]
    Meta(String),
}

impl From<serde_json::Error> for DocumentError {
    fn from(err: serde_json::Error) -> Self {
        DocumentError::Syntax(err.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentDocument {
    pub endowment: String,
    pub reward_level: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub tau: String,
    pub agents: Vec<AgentDocument>,
    /// Reserved for generated instances; ignored when solving.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<MetaDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaDocument {
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "M")]
    pub m: String,
    #[serde(rename = "N")]
    pub n: String,
    pub tau: String,
    /// 1-based value position of each of the first `2T` agents.
    pub positions: Vec<usize>,
}

impl InstanceDocument {
    pub fn from_game(game: &GameInstance) -> Self {
        Self {
            tau: format_rational(game.tau()),
            agents: game
                .agents()
                .iter()
                .map(|a| AgentDocument {
                    endowment: format_rational(&a.endowment),
                    reward_level: format_rational(&a.reward_level),
                })
                .collect(),
            meta: None,
        }
    }

    pub fn from_artifact(art: &ReductionArtifact) -> Self {
        let meta = &art.meta;
        Self {
            meta: Some(MetaDocument {
                t: meta.t,
                m: meta.m.to_string(),
                n: meta.n.to_string(),
                tau: format_rational(&meta.tau),
                positions: meta.positions.iter().map(|p| p + 1).collect(),
            }),
            ..Self::from_game(&art.game)
        }
    }

    pub fn to_game(&self) -> Result<GameInstance, DocumentError> {
        let tau = parse_rational(&self.tau).map_err(DocumentError::Threshold)?;
        let agents = self
            .agents
            .iter()
            .enumerate()
            .map(|(index, a)| {
                let field = |field, text: &str| {
                    parse_rational(text).map_err(|source| DocumentError::AgentField {
                        index,
                        field,
                        source,
                    })
                };
                Ok(Agent::new(
                    field("endowment", &a.endowment)?,
                    field("reward_level", &a.reward_level)?,
                ))
            })
            .collect::<Result<Vec<_>, DocumentError>>()?;
        Ok(GameInstance::new(tau, agents)?)
    }

    /// The game with its reduction metadata; fails when `meta` is absent.
    pub fn to_artifact(&self) -> Result<ReductionArtifact, DocumentError> {
        let game = self.to_game()?;
        let meta = self
            .meta
            .as_ref()
            .ok_or_else(|| DocumentError::Meta("instance carries no reduction metadata".into()))?;
        let integer = |text: &str| {
            text.parse::<BigInt>()
                .map_err(|_| DocumentError::Meta(format!("{text:?} is not an integer")))
        };
        let positions = meta
            .positions
            .iter()
            .map(|&p| {
                p.checked_sub(1)
                    .ok_or_else(|| DocumentError::Meta("positions are 1-based".into()))
            })
            .collect::<Result<_, _>>()?;
        Ok(ReductionArtifact {
            game,
            meta: ReductionMeta {
                t: meta.t,
                m: integer(&meta.m)?,
                n: integer(&meta.n)?,
                tau: parse_rational(&meta.tau).map_err(|source| DocumentError::Field {
                    field: "meta.tau",
                    source,
                })?,
                positions,
            },
        })
    }
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<GameInstance, DocumentError> {
    serde_json::from_str::<InstanceDocument>(text)?.to_game()
}

pub fn render_instance(game: &GameInstance) -> String {
    serde_json::to_string_pretty(&InstanceDocument::from_game(game)).expect("serializable")
}

/// Input of the hardness generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionDocument {
    pub values: Vec<i64>,
}

/// A coalition as 1-based positions, optionally inside a larger object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoalitionDocument {
    Bare(Vec<usize>),
    Wrapped { coalition: Vec<usize> },
}

impl CoalitionDocument {
    pub fn positions(&self) -> &[usize] {
        match self {
            CoalitionDocument::Bare(p) | CoalitionDocument::Wrapped { coalition: p } => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlackDocument {
    pub agent: usize,
    pub above_lower: String,
    pub below_upper: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub coalition: Vec<usize>,
    pub total: String,
    pub certified_by: String,
    pub slack: Vec<SlackDocument>,
}

impl ReportDocument {
    pub fn from_report(report: &EquilibriumReport) -> Self {
        Self {
            coalition: report.coalition.positions(),
            total: format_rational(report.coalition.total()),
            certified_by: match report.certified_by {
                crate::equilibrium::Certification::Characterization => "characterization",
                crate::equilibrium::Certification::DeviationCheck => "deviation-check",
            }
            .into(),
            slack: report
                .slack
                .iter()
                .map(|s| SlackDocument {
                    agent: s.agent + 1,
                    above_lower: format_rational(&s.above_lower),
                    below_upper: format_rational(&s.below_upper),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionDocument {
    pub agent: usize,
    pub side: String,
    pub total: String,
    pub bound: String,
}

impl RejectionDocument {
    pub fn from_rejection(rejection: &Rejection) -> Self {
        Self {
            agent: rejection.agent + 1,
            side: rejection.side.to_string(),
            total: format_rational(&rejection.total),
            bound: format_rational(&rejection.bound),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalPlanDocument {
    pub coalition: Vec<usize>,
    pub delta: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<String>,
}

impl ExternalPlanDocument {
    pub fn from_plan(plan: &ExternalPlan) -> Self {
        Self {
            coalition: plan.coalition.positions(),
            delta: format_rational(&plan.delta),
            cost: Some(format_rational(plan.cost())),
        }
    }

    /// The plan on `game`; a supplied `cost` is informational only.
    pub fn to_plan(&self, game: &GameInstance) -> Result<ExternalPlan, DocumentError> {
        Ok(ExternalPlan::new(
            Coalition::from_positions(game, &self.coalition)?,
            parse_rational(&self.delta).map_err(|source| DocumentError::Field {
                field: "delta",
                source,
            })?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingPlanDocument {
    pub coalition: Vec<usize>,
    pub rate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<String>,
}

impl MatchingPlanDocument {
    pub fn from_plan(plan: &MatchingPlan) -> Self {
        Self {
            coalition: plan.coalition.positions(),
            rate: format_rational(&plan.rate),
            cost: Some(format_rational(&plan.cost())),
        }
    }

    pub fn to_plan(&self, game: &GameInstance) -> Result<MatchingPlan, DocumentError> {
        Ok(MatchingPlan::new(
            Coalition::from_positions(game, &self.coalition)?,
            parse_rational(&self.rate).map_err(|source| DocumentError::Field {
                field: "rate",
                source,
            })?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::hardness::{gen_from_partition, PartitionInstance};
    use crate::rational::ratio;
    use proptest::prelude::*;

    const FREE_RIDER: &str = r#"{"tau": "10", "agents": [
        {"endowment": "2", "reward_level": "0.2"},
        {"endowment": "2", "reward_level": "0.2"},
        {"endowment": "2", "reward_level": "0.2"},
        {"endowment": "9", "reward_level": "0.5"}]}"#;

    #[test]
    fn parses_free_rider() {
        assert_eq!(parse_instance(FREE_RIDER).unwrap(), fixtures::free_rider());
    }

    #[test]
    fn reward_level_one_is_rejected() {
        let text = r#"{"tau": "3", "agents": [{"endowment": "1", "reward_level": "1"}]}"#;
        let err = parse_instance(text).unwrap_err();
        assert!(matches!(
            err,
            DocumentError::Model(ModelError::InvalidAgent {
                index: 0,
                field: "reward_level",
                ..
            })
        ));
        assert!(err.to_string().starts_with("agent 1: reward_level"));
    }

    #[test]
    fn exact_ratio() {
        let text = r#"{"tau": "3", "agents": [{"endowment": "5", "reward_level": "0.35"}]}"#;
        let game = parse_instance(text).unwrap();
        assert_eq!(game.reward_level(0), &ratio(7, 20));
        assert_eq!(game.endowment(0) / game.reward_level(0), ratio(100, 7));
    }

    #[test]
    fn errors_name_agent_and_field() {
        let bad = |body: &str| parse_instance(body).unwrap_err().to_string();
        assert_eq!(
            bad(
                r#"{"tau": "3", "agents": [{"endowment": "1", "reward_level": "0.5"}, {"endowment": "x", "reward_level": "0.5"}]}"#
            ),
            "agent 2: endowment: malformed rational literal \"x\""
        );
        assert!(
            bad(r#"{"tau": "0", "agents": [{"endowment": "1", "reward_level": "0.5"}]}"#)
                .contains("tau")
        );
        assert!(bad(r#"{"tau": "1", "agents": []}"#).contains("no agents"));
        assert!(
            bad(r#"{"tau": "1", "agents": [{"endowment": "-1", "reward_level": "0.5"}]}"#)
                .starts_with("agent 1: endowment")
        );
        assert!(bad(r#"{"tau": 1}"#).starts_with("malformed document"));
    }

    #[test]
    fn meta_round_trip() {
        let art = gen_from_partition(&PartitionInstance::new(&[3, 1]).unwrap());
        let doc = InstanceDocument::from_artifact(&art);
        let text = serde_json::to_string(&doc).unwrap();
        let back: InstanceDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_artifact().unwrap(), art);
        assert_eq!(parse_instance(&text).unwrap(), art.game);
        assert!(matches!(
            InstanceDocument::from_game(&art.game).to_artifact(),
            Err(DocumentError::Meta(_))
        ));
    }

    #[test]
    fn plan_documents() {
        let game = fixtures::priced_out();
        let plan = MatchingPlan::new(Coalition::grand(&game), ratio(2, 3));
        let doc = MatchingPlanDocument::from_plan(&plan);
        assert_eq!(
            serde_json::to_string(&doc).unwrap(),
            r#"{"coalition":[1,2,3],"rate":"2/3","cost":"6"}"#
        );
        assert_eq!(doc.to_plan(&game).unwrap(), plan);
        let external = ExternalPlan::fallback(&game);
        let doc = ExternalPlanDocument::from_plan(&external);
        assert_eq!(doc.delta, "11");
        assert_eq!(doc.to_plan(&game).unwrap(), external);
        let doc: CoalitionDocument = serde_json::from_str(r#"{"coalition": [1, 3]}"#).unwrap();
        assert_eq!(doc.positions(), &[1, 3]);
    }

    proptest! {
        #[test]
        fn instance_round_trip(game in fixtures::arb_game(8)) {
            let text = render_instance(&game);
            let back = parse_instance(&text).unwrap();
            prop_assert_eq!(&back, &game);
            prop_assert_eq!(render_instance(&back), text);
        }
    }
}
