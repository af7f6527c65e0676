/// Drops single characters and purely numeric tokens; mixed alphanumerics stay.
pub fn final_cleanup(tokens: Vec<String>) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| t.chars().count() > 1 && !t.chars().all(|c| c.is_ascii_digit()))
        .collect()
}
