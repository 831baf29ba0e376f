use super::mcqa::McqaQuery;

pub const TOGGLE_SYSTEM_PROMPT: &str = "You will be given an object that commonly appears in a typical household environment. Using common sense, determine if the object tends to be distributed throughout a typical household, such as doorknobs and light switches.";

pub const LGBU_SYSTEM_PROMPT: &str = "You will receive:
- Current belief about where an object might be located.
- observation_location: the location that was just inspected.
- visibility: how much of the location was visible. 0 means not visible at all, 1 means fully visible.
- result: whether the object was found there.
- co_detected: other objects found at the same location.
Based on this information and common sense, predict where the object is most likely to be now. Choose the most likely location from the given options.";

/// Label as it appears in prompts: underscores become spaces.
pub fn display_name(label: &str) -> String {
    label.replace('_', " ")
}

/// Multiple-choice location prompt, one lettered option per line.
pub fn build_mcqa_prompt(query: &McqaQuery) -> String {
    let mut out = format!("Predict the location of a {}.\n", query.object);
    for (letter, label) in &query.options {
        out.push_str(&format!("({letter}) {label}\n"));
    }
    out.push_str("Return the letter that represents the location:");
    out
}

pub fn describe_prompt(object: &str) -> String {
    format!("Explain the common use of a {object} in three sentences.")
}

pub fn toggle_prompt(object: &str) -> String {
    format!("The following is the object: {object}")
}

fn option_block(options: &[(char, String)]) -> String {
    options.iter().map(|(l, s)| format!("\n({l}) {s}")).collect()
}

/// System and user prompt of one LGBU query.
pub fn build_lgbu_prompt(
    object: &str,
    belief_text: &str,
    observation_location: &str,
    visibility: f64,
    found: bool,
    co_detected: &[String],
    options: &[(char, String)],
) -> (String, String) {
    let co = if co_detected.is_empty() {
        "none".to_string()
    } else {
        co_detected.join(", ")
    };
    let user = format!(
        "- Current belief about {object}: {belief_text}\n- observation_location: {observation_location}\n- visibility: {visibility:.2}\n- result: {}\n- co_detected: {co}\nGiven this information, where is {object} most likely to be?{}",
        if found { "found" } else { "not found" },
        option_block(options)
    );
    (LGBU_SYSTEM_PROMPT.to_string(), user)
}
