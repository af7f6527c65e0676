use std::sync::LazyLock;

use regex::Regex;

static MARKUP: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?x)
        https?://\S+        # links
        | www\.\S+
        | </?[A-Za-z][^<>\n]{0,200}>   # html tags
        | &(?:[A-Za-z]+|\#[0-9]+);     # entities
    ")
    .expect("markup pattern")
});

const QUOTES: [char; 10] = ['\u{201C}', '\u{201D}', '\u{2018}', '\u{2019}', '\u{201E}', '\u{201F}', '\u{00AB}', '\u{00BB}', '\u{2039}', '\u{203A}'];

/// Cyrillic letters that render like Latin ones.
fn latin_lookalike(c: char) -> Option<char> {
    Some(match c {
        'а' => 'a',
        'в' => 'b',
        'е' => 'e',
        'ё' => 'e',
        'к' => 'k',
        'м' => 'm',
        'н' => 'h',
        'о' => 'o',
        'р' => 'p',
        'с' => 'c',
        'т' => 't',
        'у' => 'y',
        'х' => 'x',
        'і' => 'i',
        'ј' => 'j',
        'ѕ' => 's',
        'ԁ' => 'd',
        'ԛ' => 'q',
        'ԝ' => 'w',
        'А' => 'A',
        'В' => 'B',
        'Е' => 'E',
        'К' => 'K',
        'М' => 'M',
        'Н' => 'H',
        'О' => 'O',
        'Р' => 'P',
        'С' => 'C',
        'Т' => 'T',
        'У' => 'Y',
        'Х' => 'X',
        'І' => 'I',
        'Ј' => 'J',
        'Ѕ' => 'S',
        _ => return None,
    })
}

/// Maps Cyrillic lookalikes to Latin, drops curly quotes, and replaces markup
/// (tags, entities, links) with a space.
pub fn normalize_text(text: &str) -> String {
    let stripped = MARKUP.replace_all(text, " ");
    stripped
        .chars()
        .filter(|c| !QUOTES.contains(c))
        .map(|c| latin_lookalike(c).unwrap_or(c))
        .collect()
}
