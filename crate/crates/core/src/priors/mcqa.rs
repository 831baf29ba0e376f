use serde::{Deserialize, Serialize};

use super::provider::{ChatRequest, Intent, Provider};
use super::{build_mcqa_prompt, CacheKind, PriorError, Result};

/// Log-probability assigned to an option letter absent from the top tokens.
pub const MISSING_LOGPROB: f64 = -20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McqaLevel {
    Room,
    Surface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McqaQuery {
    pub object: String,
    pub options: Vec<(char, String)>,
    pub level: McqaLevel,
}

impl McqaQuery {
    /// Letters A, B, C, ... in label order; 2 to 26 options.
    pub fn new(object: impl Into<String>, labels: Vec<String>, level: McqaLevel) -> Result<Self> {
        if !(2..=26).contains(&labels.len()) {
            return Err(PriorError::Query(format!("{} options, need 2 to 26", labels.len())));
        }
        let options = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| ((b'A' + i as u8) as char, l))
            .collect();
        Ok(Self {
            object: object.into(),
            options,
            level,
        })
    }

    pub fn letters(&self) -> Vec<char> {
        self.options.iter().map(|(l, _)| *l).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorRecord {
    pub query: McqaQuery,
    pub option_logprobs: Vec<f64>,
    pub prior: Vec<f64>,
    pub provider_id: String,
    /// Unix seconds when the response was first obtained.
    pub timestamp: u64,
}

/// Max-shifted softmax.
pub fn logprobs_to_prior(logprobs: &[f64]) -> Result<Vec<f64>> {
    if logprobs.len() < 2 {
        return Err(PriorError::Provider("need at least two option logprobs".into()));
    }
    if logprobs.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
        return Err(PriorError::Provider(format!("invalid logprobs {logprobs:?}")));
    }
    let max = logprobs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(PriorError::Provider("every option has zero probability".into()));
    }
    let exp: Vec<f64> = logprobs.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    Ok(exp.into_iter().map(|e| e / total).collect())
}

/// Logprob of each option letter among the returned top tokens, accepting
/// the bare letter and its leading-space variant; absent letters get
/// [`MISSING_LOGPROB`].
pub fn extract_option_logprobs(top: &[(String, f64)], letters: &[char]) -> Vec<f64> {
    letters
        .iter()
        .map(|&l| {
            let bare = l.to_string();
            let spaced = format!(" {l}");
            top.iter()
                .filter(|(t, _)| *t == bare || *t == spaced)
                .map(|(_, lp)| *lp)
                .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
                .unwrap_or(MISSING_LOGPROB)
        })
        .collect()
}

/// Asks the provider one MCQA question. `room` names the room whose
/// surfaces are the options of a surface-level query.
pub fn generate_prior(provider: &Provider, query: &McqaQuery, room: Option<&str>) -> Result<PriorRecord> {
    let prompt = build_mcqa_prompt(query);
    let req = ChatRequest::logprob_query(None, prompt);
    let intent = Intent::Mcqa {
        object: query.object.clone(),
        level: query.level,
        room: room.map(str::to_string),
        labels: query.options.iter().map(|(_, l)| l.clone()).collect(),
    };
    let (top, timestamp) = provider.logprobs(CacheKind::Mcqa, &req, &intent)?;
    let option_logprobs = extract_option_logprobs(&top, &query.letters());
    let prior = logprobs_to_prior(&option_logprobs)?;
    Ok(PriorRecord {
        query: query.clone(),
        option_logprobs,
        prior,
        provider_id: provider.id(),
        timestamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_examples() {
        assert_eq!(logprobs_to_prior(&[-1.0; 4]).unwrap(), vec![0.25; 4]);
        let p = logprobs_to_prior(&[0.0, -(3f64.ln())]).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);
        assert!(logprobs_to_prior(&[f64::NEG_INFINITY, f64::NEG_INFINITY]).is_err());
        assert!(logprobs_to_prior(&[0.0]).is_err());
    }

    #[test]
    fn letter_variants() {
        let top = vec![
            ("A".to_string(), -0.5),
            (" A".to_string(), -0.2),
            (" B".to_string(), -1.5),
            ("C.".to_string(), -0.1),
        ];
        assert_eq!(extract_option_logprobs(&top, &['A', 'B', 'C']), vec![-0.2, -1.5, MISSING_LOGPROB]);
    }

    #[test]
    fn option_bounds() {
        assert!(McqaQuery::new("x", vec!["a".into()], McqaLevel::Room).is_err());
        assert!(McqaQuery::new("x", (0..27).map(|i| i.to_string()).collect(), McqaLevel::Room).is_err());
    }
}
