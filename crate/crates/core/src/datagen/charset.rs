//! Built-in character sets.

/// ASCII punctuation kept in the Latin set (printable ASCII minus
/// `` ` ^ ~ | \ { } `` and space).
const LATIN_PUNCT: &str = "!\"#$%&'()*+,-./:;<=>?@[]_";
const LATIN_EXTRA: &str = "ÄÖÜäöüßàèéìòùÀÈÉÙ";

/// 104-character Latin set shared by English, German and Italian text.
pub fn latin() -> Vec<char> {
    ('A'..='Z')
        .chain('a'..='z')
        .chain('0'..='9')
        .chain(LATIN_PUNCT.chars())
        .chain(LATIN_EXTRA.chars())
        .collect()
}

/// Basic Greek letters, upper and lower case, without accents.
pub fn greek() -> Vec<char> {
    ('Α'..='Ω').chain('α'..='ω').filter(|c| *c != '\u{03A2}').collect()
}

pub fn builtin(name: &str) -> Option<Vec<char>> {
    match name {
        "latin" => Some(latin()),
        "greek" => Some(greek()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn latin_has_104_unique() {
        let set = latin();
        assert_eq!(set.len(), 104);
        assert_eq!(set.iter().collect::<HashSet<_>>().len(), 104);
        assert!(!set.contains(&' '));
    }

    #[test]
    fn greek_is_unique() {
        let set = greek();
        assert_eq!(set.len(), set.iter().collect::<HashSet<_>>().len());
        assert!(set.contains(&'λ') && set.contains(&'Ω'));
        assert!(builtin("klingon").is_none());
    }
}
