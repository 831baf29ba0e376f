use super::cache::CacheKind;
use super::mcqa::{extract_option_logprobs, logprobs_to_prior};
use super::prompts::{build_lgbu_prompt, display_name};
use super::provider::{ChatRequest, Intent, Provider};
use super::{PriorError, Result};
use crate::belief::{HierarchicalBelief, ObservationEvent};
use crate::ids::SurfaceId;
use crate::planner::LgbuUpdater;
use crate::sim::EnvironmentSpec;

/// What the last detect saw, in the fields the LGBU prompt lists.
#[derive(Debug, Clone, PartialEq)]
pub struct LgbuObservation {
    pub observation_location: String,
    pub visibility: f64,
    pub found: bool,
    pub co_detected: Vec<String>,
}

/// Asks for a replacement distribution over `labels` given the current one.
/// `inspected` is the option index of the observation location, if any.
pub fn lgbu_update(
    provider: &Provider,
    object: &str,
    labels: &[String],
    current: &[f64],
    obs: &LgbuObservation,
    inspected: Option<usize>,
) -> Result<Vec<f64>> {
    if labels.len() < 2 || labels.len() > 26 || current.len() != labels.len() {
        return Err(PriorError::Query(format!(
            "{} labels with {} belief entries",
            labels.len(),
            current.len()
        )));
    }
    let belief_text = labels
        .iter()
        .zip(current)
        .map(|(l, p)| format!("{l}: {p:.2}"))
        .collect::<Vec<_>>()
        .join(", ");
    let options: Vec<(char, String)> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| ((b'A' + i as u8) as char, l.clone()))
        .collect();
    let (system, user) = build_lgbu_prompt(
        object,
        &belief_text,
        &obs.observation_location,
        obs.visibility,
        obs.found,
        &obs.co_detected,
        &options,
    );
    let req = ChatRequest::logprob_query(Some(system), user);
    let intent = Intent::Lgbu {
        object: object.to_string(),
        labels: labels.to_vec(),
        current: current.to_vec(),
        inspected,
        visibility: obs.visibility,
        found: obs.found,
        co_detected: obs.co_detected.clone(),
    };
    let (top, _) = provider.logprobs(CacheKind::Lgbu, &req, &intent)?;
    let letters: Vec<char> = options.iter().map(|(l, _)| *l).collect();
    logprobs_to_prior(&extract_option_logprobs(&top, &letters))
}

/// Room-level replacement over all rooms, then surface-level replacement
/// within the inspected room; other rooms keep their surface beliefs.
impl LgbuUpdater for Provider {
    fn replace(
        &self,
        env: &EnvironmentSpec,
        belief: &HierarchicalBelief,
        event: &ObservationEvent,
        inspected: SurfaceId,
    ) -> std::result::Result<(Vec<f64>, Vec<Vec<f64>>), String> {
        let object = display_name(&env.object(event.target).label);
        let found = event.detection_of(event.target).is_some();
        let co_detected: Vec<String> = event
            .detections
            .iter()
            .filter(|d| d.object != event.target && d.surface == inspected)
            .map(|d| display_name(&env.object(d.object).label))
            .collect();
        let surface = env.surface(inspected);
        let room = belief.room_of(inspected);

        let mut rooms = belief.room_belief().to_vec();
        if rooms.len() >= 2 {
            let labels: Vec<String> = env.rooms.iter().map(|r| display_name(&r.label)).collect();
            let obs = LgbuObservation {
                observation_location: display_name(&env.room(room).label),
                visibility: event.visibility.v_room()[room.index()],
                found,
                co_detected: co_detected.clone(),
            };
            rooms = lgbu_update(self, &object, &labels, &rooms, &obs, Some(room.index())).map_err(|e| e.to_string())?;
        }

        let mut surfaces = belief.surface_beliefs().to_vec();
        let members = &belief.room_surfaces()[room.index()];
        if members.len() >= 2 {
            let labels: Vec<String> = members.iter().map(|&s| display_name(&env.surface(s).label)).collect();
            let obs = LgbuObservation {
                observation_location: display_name(&surface.label),
                visibility: event.visibility.v_surface()[inspected.index()],
                found,
                co_detected,
            };
            let local = belief.local_index(inspected);
            surfaces[room.index()] = lgbu_update(self, &object, &labels, &surfaces[room.index()], &obs, Some(local))
                .map_err(|e| e.to_string())?;
        }
        Ok((rooms, surfaces))
    }
}
