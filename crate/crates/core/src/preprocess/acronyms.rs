use std::collections::BTreeMap;

pub fn default_acronyms() -> BTreeMap<String, String> {
    [
        ("imo", "in my opinion"),
        ("imho", "in my humble opinion"),
        ("tbh", "to be honest"),
        ("idk", "i do not know"),
        ("afaik", "as far as i know"),
        ("iirc", "if i recall correctly"),
        ("btw", "by the way"),
        ("fyi", "for your information"),
        ("irl", "in real life"),
        ("tldr", "too long did not read"),
        ("smh", "shaking my head"),
        ("ama", "ask me anything"),
        ("til", "today i learned"),
        ("ymmv", "your mileage may vary"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Replaces each mapped token in place by the tokens of its expansion.
pub fn expand_acronyms(tokens: &[String], map: &BTreeMap<String, String>) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    for t in tokens {
        match map.get(t) {
            Some(expansion) => out.extend(expansion.split_whitespace().map(str::to_string)),
            None => out.push(t.clone()),
        }
    }
    out
}
