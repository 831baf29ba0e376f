use std::collections::BTreeMap;
use std::sync::Arc;

use super::display_name;
use super::mcqa::McqaLevel;
use super::provider::{ChatRequest, Intent, LanguageModel};
use super::{PriorError, Result};
use crate::sim::PlacementDataset;

const EMBED_DIMS: usize = 512;

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "by", "can", "for", "from", "has", "have", "in", "into", "is", "it",
    "its", "of", "on", "or", "often", "that", "the", "their", "them", "they", "this", "to", "used", "with", "you",
    "your",
];

/// How the mock answers LGBU queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LgbuMockMode {
    /// Discounts the inspected location by its visibility after a miss and
    /// concentrates on it after a hit.
    #[default]
    Heuristic,
    /// Keeps pointing at the location that was just inspected.
    Adversarial,
    /// Equal logprobs for every option.
    Uniform,
}

/// Deterministic offline backend. Location knowledge comes from a placement
/// dataset; any answer can be overridden per object.
#[derive(Debug, Clone)]
pub struct MockModel {
    dataset: Option<Arc<PlacementDataset>>,
    alpha: f64,
    logprobs: BTreeMap<String, BTreeMap<String, f64>>,
    descriptions: BTreeMap<String, String>,
    embeddings: BTreeMap<String, Vec<f64>>,
    toggle_answers: BTreeMap<String, String>,
    lgbu: LgbuMockMode,
    identity_weight: f64,
}

impl Default for MockModel {
    fn default() -> Self {
        Self {
            dataset: None,
            alpha: 0.05,
            logprobs: BTreeMap::new(),
            descriptions: BTreeMap::new(),
            embeddings: BTreeMap::new(),
            toggle_answers: BTreeMap::new(),
            lgbu: LgbuMockMode::default(),
            identity_weight: 0.5,
        }
    }
}

/// Dataset key of a displayed label.
fn key(label: &str) -> String {
    label.trim().to_lowercase().replace(' ', "_")
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Bag-of-words embedding: lowercase alphanumeric tokens minus stopwords,
/// hashed into a fixed number of count buckets.
pub fn feature_hash_embedding(text: &str) -> Vec<f64> {
    let mut v = vec![0.0; EMBED_DIMS];
    for tok in text.split(|c: char| !c.is_alphanumeric()).filter(|t| t.len() > 1) {
        let tok = tok.to_lowercase();
        if STOPWORDS.contains(&tok.as_str()) {
            continue;
        }
        v[(fnv1a(&tok) % EMBED_DIMS as u64) as usize] += 1.0;
    }
    v
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v
    } else {
        v.into_iter().map(|x| x / n).collect()
    }
}

/// Deterministic Gaussian direction seeded by the name.
fn name_direction(name: &str) -> Vec<f64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(fnv1a(name));
    (0..EMBED_DIMS).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn letter_tokens(logprobs: &[f64]) -> Vec<(String, f64)> {
    logprobs
        .iter()
        .enumerate()
        .map(|(i, &lp)| (((b'A' + i as u8) as char).to_string(), lp))
        .collect()
}

fn normalise(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    if total > 0.0 && total.is_finite() {
        w.iter().map(|x| x / total).collect()
    } else {
        vec![1.0 / w.len() as f64; w.len()]
    }
}

impl MockModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dataset(mut self, dataset: Arc<PlacementDataset>) -> Self {
        self.dataset = Some(dataset);
        self
    }

    /// Mass spread uniformly over the options on top of the dataset answer.
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha.clamp(0.0, 1.0);
        self
    }

    /// Fixed logprob for `location` in every MCQA query about `object`;
    /// options without an entry get -10.
    pub fn with_logprob(mut self, object: &str, location: &str, logprob: f64) -> Self {
        self.logprobs.entry(key(object)).or_default().insert(key(location), logprob);
        self
    }

    pub fn with_description(mut self, object: &str, text: impl Into<String>) -> Self {
        self.descriptions.insert(key(object), text.into());
        self
    }

    pub fn with_embedding(mut self, object: &str, embedding: Vec<f64>) -> Self {
        self.embeddings.insert(key(object), embedding);
        self
    }

    pub fn with_toggle_answer(mut self, object: &str, answer: impl Into<String>) -> Self {
        self.toggle_answers.insert(key(object), answer.into());
        self
    }

    /// Share of the squared embedding norm given to a pseudo-random
    /// direction seeded by the object's name. Bag-of-words vectors of
    /// category-templated descriptions are nearly identical within a
    /// category; the name component stands in for the object-specific
    /// content a real embedding carries.
    pub fn with_identity_weight(mut self, w: f64) -> Self {
        self.identity_weight = w.clamp(0.0, 1.0);
        self
    }

    pub fn with_lgbu(mut self, mode: LgbuMockMode) -> Self {
        self.lgbu = mode;
        self
    }

    /// Probabilities the dataset implies for the options, mixed with alpha.
    fn mcqa_probs(&self, object: &str, level: McqaLevel, room: Option<&str>, labels: &[String]) -> Vec<f64> {
        let n = labels.len();
        let Some(ds) = &self.dataset else {
            return vec![1.0 / n as f64; n];
        };
        let obj = key(object);
        let w: Vec<f64> = labels
            .iter()
            .map(|l| match level {
                McqaLevel::Room => ds.room_affinity(&obj, &key(l)),
                McqaLevel::Surface => match room {
                    Some(r) => ds.surface_probability(&obj, &key(r), &key(l)),
                    None => ds
                        .rooms()
                        .iter()
                        .map(|r| ds.surface_probability(&obj, r, &key(l)))
                        .fold(0.0, f64::max),
                },
            })
            .collect();
        normalise(&w)
            .into_iter()
            .map(|p| p * (1.0 - self.alpha) + self.alpha / n as f64)
            .collect()
    }

    fn mcqa_logprobs(&self, object: &str, level: McqaLevel, room: Option<&str>, labels: &[String]) -> Vec<f64> {
        if let Some(fixed) = self.logprobs.get(&key(object)) {
            return labels.iter().map(|l| fixed.get(&key(l)).copied().unwrap_or(-10.0)).collect();
        }
        self.mcqa_probs(object, level, room, labels)
            .into_iter()
            .map(f64::ln)
            .collect()
    }

    fn same_category(&self, a: &str, b: &str) -> bool {
        let Some(ds) = &self.dataset else { return false };
        match (ds.category_of(&key(a)), ds.category_of(&key(b))) {
            (Some(x), Some(y)) => x.name == y.name,
            _ => false,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn lgbu_logprobs(
        &self,
        object: &str,
        labels: &[String],
        current: &[f64],
        inspected: Option<usize>,
        visibility: f64,
        found: bool,
        co_detected: &[String],
    ) -> Vec<f64> {
        let n = labels.len();
        match self.lgbu {
            LgbuMockMode::Uniform => vec![-1.0; n],
            LgbuMockMode::Adversarial => {
                let peak = inspected.unwrap_or_else(|| {
                    current
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.total_cmp(b.1))
                        .map_or(0, |(i, _)| i)
                });
                (0..n).map(|i| if i == peak { 0.0 } else { -6.0 }).collect()
            }
            LgbuMockMode::Heuristic => {
                let mut w: Vec<f64> = if current.len() == n {
                    current.to_vec()
                } else {
                    vec![1.0; n]
                };
                if let Some(i) = inspected {
                    if found {
                        w = (0..n).map(|j| if j == i { 1.0 } else { 0.0 }).collect();
                    } else {
                        w[i] *= 1.0 - 0.9 * visibility.clamp(0.0, 1.0);
                        if co_detected.iter().any(|c| self.same_category(object, c)) {
                            w[i] *= 3.0;
                        }
                    }
                }
                normalise(&w)
                    .into_iter()
                    .map(|p| (p * (1.0 - self.alpha) + self.alpha / n as f64).ln())
                    .collect()
            }
        }
    }

    fn description(&self, object: &str) -> String {
        if let Some(text) = self.descriptions.get(&key(object)) {
            return text.clone();
        }
        let shown = display_name(object);
        let cat = self.dataset.as_ref().and_then(|ds| ds.category_of(&key(object)));
        match cat {
            Some(c) => c
                .description
                .iter()
                .map(|s| s.replace("{object}", &shown))
                .collect::<Vec<_>>()
                .join(" "),
            None => format!(
                "A {shown} is a common household item. People keep a {shown} where it is needed. It is handled during everyday chores."
            ),
        }
    }
}

impl LanguageModel for MockModel {
    fn id(&self) -> String {
        "mock".into()
    }

    fn top_logprobs(&self, _req: &ChatRequest, intent: &Intent) -> Result<Vec<(String, f64)>> {
        let lps = match intent {
            Intent::Mcqa {
                object,
                level,
                room,
                labels,
            } => self.mcqa_logprobs(object, *level, room.as_deref(), labels),
            Intent::Lgbu {
                object,
                labels,
                current,
                inspected,
                visibility,
                found,
                co_detected,
            } => self.lgbu_logprobs(object, labels, current, *inspected, *visibility, *found, co_detected),
            other => return Err(PriorError::Provider(format!("mock has no logprobs for {other:?}"))),
        };
        Ok(letter_tokens(&lps))
    }

    fn complete(&self, _req: &ChatRequest, intent: &Intent) -> Result<String> {
        match intent {
            Intent::Describe { object } => Ok(self.description(object)),
            Intent::Toggle { object } => {
                if let Some(a) = self.toggle_answers.get(&key(object)) {
                    return Ok(a.clone());
                }
                let distributed = self
                    .dataset
                    .as_ref()
                    .and_then(|ds| ds.category_of(&key(object)))
                    .is_some_and(|c| c.distributed);
                Ok(if distributed { "True" } else { "False" }.into())
            }
            other => Err(PriorError::Provider(format!("mock has no completion for {other:?}"))),
        }
    }

    fn embed(&self, text: &str, intent: &Intent) -> Result<Vec<f64>> {
        let object = match intent {
            Intent::Embed { object } => {
                if let Some(v) = self.embeddings.get(&key(object)) {
                    return Ok(v.clone());
                }
                Some(key(object))
            }
            _ => None,
        };
        let words = unit(feature_hash_embedding(text));
            let Some(object) = object.filter(|_| self.identity_weight > 0.0 && words.iter().any(|&x| x != 0.0)) else {
            return Ok(words);
        };
        let w = self.identity_weight;
        let identity = unit(name_direction(&object));
        Ok(words
            .iter()
            .zip(&identity)
            .map(|(a, b)| (1.0 - w).sqrt() * a + w.sqrt() * b)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashing_ignores_stopwords_and_case() {
        assert_eq!(feature_hash_embedding("The Apple"), feature_hash_embedding("apple of the"));
        assert!(feature_hash_embedding("the of a").iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dataset_prior_prefers_kitchen_for_apple() {
        let ds = Arc::new(crate::sim::synthetic_dataset(10, 0));
        let m = MockModel::new().with_dataset(ds);
        let labels: Vec<String> = ["bathroom", "kitchen", "garage"].map(String::from).to_vec();
        let p = m.mcqa_probs("apple", McqaLevel::Room, None, &labels);
        assert!(p[1] > p[0] && p[1] > p[2]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.05 / 3.0 - 1e-15));
    }

    #[test]
    fn adversarial_points_at_inspected() {
        let m = MockModel::new().with_lgbu(LgbuMockMode::Adversarial);
        let lp = m.lgbu_logprobs("apple", &["a".into(), "b".into()], &[0.5, 0.5], Some(1), 1.0, false, &[]);
        assert!(lp[1] > lp[0]);
    }
}
