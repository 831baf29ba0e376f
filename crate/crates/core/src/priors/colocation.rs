use super::cache::CacheKind;
use super::prompts::{describe_prompt, toggle_prompt, TOGGLE_SYSTEM_PROMPT};
use super::provider::{ChatRequest, Intent, Provider};
use super::{PriorError, Result};
use crate::belief::SimilarityMatrix;

/// Three-sentence description of what the object is used for.
pub fn describe_object_uses(provider: &Provider, object: &str) -> Result<String> {
    let req = ChatRequest::text(None, describe_prompt(object), 200);
    let intent = Intent::Describe {
        object: object.to_string(),
    };
    let text = provider.text(CacheKind::Describe, &req, &intent)?;
    if text.trim().is_empty() {
        return Err(PriorError::Provider(format!("empty description for {object}")));
    }
    Ok(text)
}

/// Sentences joined by single spaces, as sent to the embedding model.
pub fn embedding_text(description: &str) -> String {
    description.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(PriorError::Provider(format!(
            "embedding lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(PriorError::Provider("zero-norm embedding".into()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

fn object_embedding(provider: &Provider, object: &str) -> Result<Vec<f64>> {
    let text = embedding_text(&describe_object_uses(provider, object)?);
    provider.embedding(
        &text,
        &Intent::Embed {
            object: object.to_string(),
        },
    )
}

/// Cosine similarity of the two objects' use-description embeddings.
pub fn similarity(provider: &Provider, a: &str, b: &str) -> Result<f64> {
    let ea = object_embedding(provider, a)?;
    if a == b {
        cosine(&ea, &ea)?;
        return Ok(1.0);
    }
    let eb = object_embedding(provider, b)?;
    cosine(&ea, &eb)
}

/// Whether co-location evidence should flow from this object. A "True"
/// answer (the object is spread throughout the house) disables it;
/// unparseable answers keep it enabled.
pub fn colocation_toggle(provider: &Provider, object: &str) -> Result<bool> {
    let req = ChatRequest::text(Some(TOGGLE_SYSTEM_PROMPT.to_string()), toggle_prompt(object), 5);
    let intent = Intent::Toggle {
        object: object.to_string(),
    };
    let answer = provider.text(CacheKind::Toggle, &req, &intent)?;
    let norm = answer.trim().trim_end_matches('.').to_lowercase();
    match norm.as_str() {
        "true" => Ok(false),
        "false" => Ok(true),
        _ => {
            log::warn!("unparseable toggler answer {answer:?} for {object}; keeping co-location enabled");
            Ok(true)
        }
    }
}

/// Pairwise similarities and toggles for `objects`, indexed like the input.
pub fn similarity_matrix(provider: &Provider, objects: &[String]) -> Result<SimilarityMatrix> {
    let embeddings = objects
        .iter()
        .map(|o| object_embedding(provider, o))
        .collect::<Result<Vec<_>>>()?;
    let n = objects.len();
    let mut sim = vec![vec![0.0; n]; n];
    for i in 0..n {
        sim[i][i] = 1.0;
        for j in i + 1..n {
            let s = cosine(&embeddings[i], &embeddings[j])?;
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    let toggle = objects
        .iter()
        .map(|o| colocation_toggle(provider, o))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimilarityMatrix::new(sim, toggle)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::MockModel;

    #[test]
    fn closed_form_cosines() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0, 0.0], &[1.0, 0.0, 1.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!(cosine(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn mock_embeddings_drive_similarity() {
        let p = Provider::mock(
            MockModel::new()
                .with_embedding("x", vec![1.0, 1.0, 0.0])
                .with_embedding("y", vec![1.0, 0.0, 1.0])
                .with_embedding("z", vec![0.0, 0.0, 0.0]),
        );
        assert!((similarity(&p, "x", "y").unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(similarity(&p, "x", "x").unwrap(), 1.0);
        assert!(similarity(&p, "x", "z").is_err());
    }

    #[test]
    fn toggler_answers() {
        let p = Provider::mock(
            MockModel::new()
                .with_toggle_answer("light switch", "True")
                .with_toggle_answer("banana", "False")
                .with_toggle_answer("mug", "I am not sure"),
        );
        assert!(!colocation_toggle(&p, "light switch").unwrap());
        assert!(colocation_toggle(&p, "banana").unwrap());
        assert!(colocation_toggle(&p, "mug").unwrap());
    }

    #[test]
    fn descriptions() {
        let p = Provider::mock(MockModel::new().with_description("toaster", "Fixed text.").with_description("void", "  "));
        assert_eq!(describe_object_uses(&p, "toaster").unwrap(), "Fixed text.");
        assert!(describe_object_uses(&p, "void").is_err());
        assert_eq!(embedding_text("One.\nTwo.  Three."), "One. Two. Three.");
    }
}
