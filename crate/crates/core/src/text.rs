use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// NFKD decomposition, lowercasing, and removal of combining marks.
pub fn fold_diacritics_lower(s: &str) -> String {
    let lowered: String = s.nfkd().collect::<String>().to_lowercase();
    lowered.nfkd().filter(|c| !is_combining_mark(*c)).collect()
}

pub fn is_dash(c: char) -> bool {
    matches!(c, '-' | '\u{2010}'..='\u{2015}' | '\u{2212}' | '\u{fe63}' | '\u{ff0d}')
}

/// Joins whitespace-separated words with single spaces.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Title key for record linkage: folded, alphanumerics only, single spaces.
pub fn normalize_title(title: &str) -> String {
    let folded = fold_diacritics_lower(title);
    let kept: String = folded
        .chars()
        .filter_map(|c| {
            if c.is_alphanumeric() {
                Some(c)
            } else if c.is_whitespace() {
                Some(' ')
            } else {
                None
            }
        })
        .collect();
    collapse_whitespace(&kept)
}
