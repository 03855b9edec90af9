use super::CorpusError;

/// Splits caption text into lowercase tokens.
///
/// Text is lowercased and split on whitespace. Leading and trailing ASCII
/// punctuation is peeled off each word, one token per character, so
/// `"a man, smiling."` becomes `a man , smiling .`. Punctuation inside a
/// word (`"don't"`, `"e.g"`) stays attached.
pub fn tokenize(text: &str) -> Result<Vec<String>, CorpusError> {
    let lowered = text.to_lowercase();
    let mut tokens = Vec::new();
    for word in lowered.split_whitespace() {
        split_word(word, &mut tokens);
    }
    if tokens.is_empty() {
        return Err(CorpusError::EmptyText);
    }
    Ok(tokens)
}

/// The normalized surface form scorers see: tokens joined by single spaces.
pub fn normalize(text: &str) -> Result<String, CorpusError> {
    Ok(tokenize(text)?.join(" "))
}

fn split_word(word: &str, out: &mut Vec<String>) {
    let is_punct = |c: char| c.is_ascii_punctuation();
    let Some(start) = word.find(|c: char| !is_punct(c)) else {
        out.extend(word.chars().map(String::from));
        return;
    };
    // `start` exists, so a last non-punctuation char exists too.
    let (last_idx, last_char) = word.char_indices().rev().find(|&(_, c)| !is_punct(c)).unwrap();
    let end = last_idx + last_char.len_utf8();

    out.extend(word[..start].chars().map(String::from));
    out.push(word[start..end].to_string());
    out.extend(word[end..].chars().map(String::from));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s).unwrap()
    }

    #[test]
    fn caption_from_table() {
        assert_eq!(
            toks("a fire hydrant on a city street"),
            ["a", "fire", "hydrant", "on", "a", "city", "street"]
        );
    }

    #[test]
    fn single_token_is_lowercased() {
        assert_eq!(toks("A"), ["a"]);
    }

    #[test]
    fn punctuation_is_split_off() {
        assert_eq!(toks("a man, smiling."), ["a", "man", ",", "smiling", "."]);
        assert_eq!(toks("(wow)!!"), ["(", "wow", ")", "!", "!"]);
        assert_eq!(toks("..."), [".", ".", "."]);
    }

    #[test]
    fn inner_punctuation_is_kept() {
        assert_eq!(toks("don't e.g."), ["don't", "e.g", "."]);
    }

    #[test]
    fn whitespace_only_is_an_error() {
        assert!(matches!(tokenize(""), Err(CorpusError::EmptyText)));
        assert!(matches!(tokenize(" \t\n "), Err(CorpusError::EmptyText)));
    }

    #[test]
    fn non_ascii_is_lowercased_and_kept() {
        assert_eq!(toks("Café ÜBER"), ["café", "über"]);
    }

    proptest! {
        #[test]
        fn idempotent_under_join(text in "[ a-zA-Z.,!?'()\\-éÜ\t]{0,40}") {
            if let Ok(first) = tokenize(&text) {
                let again = tokenize(&first.join(" ")).unwrap();
                prop_assert_eq!(&again, &first);
                prop_assert!(first.iter().all(|t| !t.is_empty()));
            }
        }
    }
}
