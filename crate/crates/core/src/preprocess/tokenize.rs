/// Lowercase alphabetic runs; everything else separates tokens. Tokens outside
/// `[min_len, max_len]` characters are dropped.
pub fn tokenize(text: &str, min_len: usize, max_len: usize) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| {
            let n = t.chars().count();
            n >= min_len && n <= max_len
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn punctuation_stripped() {
        assert_eq!(tokenize("Hello, World!", 2, 15), vec!["hello", "world"]);
    }

    #[test]
    fn length_floor() {
        assert!(tokenize("a b", 2, 15).is_empty());
    }

    #[test]
    fn length_ceiling() {
        let long = "x".repeat(34);
        assert!(tokenize(&long, 2, 15).is_empty());
        assert_eq!(tokenize(&"y".repeat(15), 2, 15).len(), 1);
    }

    #[test]
    fn digits_and_underscores_split() {
        assert_eq!(tokenize("abc123def foo_bar", 2, 15), vec!["abc", "def", "foo", "bar"]);
    }

    #[test]
    fn unicode_letters_kept() {
        assert_eq!(tokenize("Café naïve", 2, 15), vec!["café", "naïve"]);
    }
}
