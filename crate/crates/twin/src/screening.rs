//! Administering a questionnaire to an aligned model.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use twin_core::screen::{criteria, item_prompt, rank_results, Answer, ItemResponses, Questionnaire, ScreeningResult};

use crate::derive_seed;
use crate::error::{Result, TwinError};
use crate::providers::{GenParams, Provider};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdministerPlan {
    pub samples: usize,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Extra completions allowed per item to replace unparsable answers.
    pub retry_budget: usize,
    pub seed: u64,
}

/// Everything collected for one community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSet {
    pub community: String,
    pub items: Vec<ItemResponses>,
    /// Replacement completions requested, per item id.
    pub retries: BTreeMap<String, usize>,
}

impl ResponseSet {
    pub fn majority_votes(&self) -> BTreeMap<String, Answer> {
        self.items
            .iter()
            .filter_map(|r| r.majority.map(|m| (r.item.clone(), m)))
            .collect()
    }
}

/// `samples` answers per item; unparsable answers are re-asked while the
/// budget lasts and excluded from the vote after that.
pub fn administer(
    provider: &Provider,
    community: &str,
    q: &Questionnaire,
    plan: &AdministerPlan,
) -> Result<ResponseSet> {
    if plan.samples == 0 {
        return Err(TwinError::Config(
            "screening needs at least one sample per item (no responses)".into(),
        ));
    }
    let requests: Vec<(String, GenParams)> = q
        .items
        .iter()
        .map(|item| {
            let seed = derive_seed(plan.seed, &["screen", community, &item.id]);
            (
                item_prompt(item),
                GenParams::new(plan.temperature, plan.max_tokens, plan.samples, seed),
            )
        })
        .collect();
    let first = provider.generate_many(&requests)?;

    let mut items = Vec::with_capacity(q.items.len());
    let mut retries = BTreeMap::new();
    for ((item, (prompt, _)), mut raw) in q.items.iter().zip(&requests).zip(first) {
        let mut budget = plan.retry_budget;
        let mut round = 0u64;
        loop {
            let failed: Vec<usize> = raw
                .iter()
                .enumerate()
                .filter(|(_, r)| twin_core::screen::parse_response(r, item).is_none())
                .map(|(i, _)| i)
                .collect();
            if failed.is_empty() || budget == 0 {
                break;
            }
            round += 1;
            let n = failed.len().min(budget);
            budget -= n;
            let seed = derive_seed(plan.seed, &["screen-retry", community, &item.id, &round.to_string()]);
            let again = provider.generate(prompt, &GenParams::new(plan.temperature, plan.max_tokens, n, seed))?;
            for (slot, answer) in failed.into_iter().zip(again) {
                raw[slot] = answer;
            }
        }
        retries.insert(item.id.clone(), plan.retry_budget - budget);
        let tallied = ItemResponses::tally(item, raw);
        if tallied.majority.is_none() {
            return Err(twin_core::Error::NoVotes(item.id.clone()).into());
        }
        items.push(tallied);
    }
    Ok(ResponseSet {
        community: community.into(),
        items,
        retries,
    })
}

pub fn score(q: &Questionnaire, responses: &ResponseSet) -> Result<ScreeningResult> {
    let votes = responses.majority_votes();
    Ok(ScreeningResult {
        community: responses.community.clone(),
        criteria: criteria(q, &votes)?,
        votes,
    })
}

/// A questionnaire from TOML or JSON (by extension).
pub fn load_questionnaire(path: &Path) -> Result<Questionnaire> {
    let text = std::fs::read_to_string(path).map_err(|e| TwinError::io(path, e))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| TwinError::Config(format!("{}: {e}", path.display())))
}

/// One majority vote per row, as in a published vote table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteRow {
    pub community: String,
    pub item: String,
    pub vote: String,
}

/// Recomputes criteria from recorded majority votes, ranked for reporting.
pub fn results_from_votes(q: &Questionnaire, rows: &[VoteRow]) -> Result<Vec<ScreeningResult>> {
    let mut by_community: BTreeMap<&str, BTreeMap<String, Answer>> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        let vote = Answer::parse_display(&r.vote).ok_or_else(|| twin_core::Error::InvalidVote {
            item: r.item.clone(),
            vote: r.vote.clone(),
        })?;
        if !by_community.contains_key(r.community.as_str()) {
            order.push(&r.community);
        }
        by_community
            .entry(&r.community)
            .or_default()
            .insert(r.item.clone(), vote);
    }
    let mut results = order
        .into_iter()
        .map(|c| {
            let votes = by_community.remove(c).expect("collected above");
            Ok(ScreeningResult {
                community: c.to_string(),
                criteria: criteria(q, &votes)?,
                votes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rank_results(&mut results);
    Ok(results)
}

/// Published criteria for comparison: `community,c1,c2,c3,c4` with T/F.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub community: String,
    pub c1: f64,
    pub c2: String,
    pub c3: String,
    pub c4: String,
}

impl ReferenceRow {
    pub fn criteria(&self) -> Result<twin_core::screen::Criteria> {
        let flag = |s: &str| match s.trim() {
            "T" | "t" | "true" | "True" => Ok(true),
            "F" | "f" | "false" | "False" => Ok(false),
            other => Err(TwinError::Config(format!("reference flag `{other}` is not T or F"))),
        };
        Ok(twin_core::screen::Criteria {
            c1: self.c1,
            c2: flag(&self.c2)?,
            c3: flag(&self.c3)?,
            c4: flag(&self.c4)?,
        })
    }
}
