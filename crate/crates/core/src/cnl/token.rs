//! Longest-match tokenizer over function words and the lexicon.

use std::fmt;
use std::ops::Range;

use serde::Serialize;

use super::lexicon::{EntryId, FormSlot, Lexicon};

/// Function words of the grammar, in their canonical lower-case spelling.
/// Multi-word entries are matched as one token.
pub const FUNCTION_WORDS: &[&str] = &[
    "every",
    "no",
    "if",
    "then",
    "everything",
    "which",
    "what",
    "a",
    "an",
    "is",
    "are",
    "by",
    "that",
    "and",
    "something",
    "more than",
    "at most",
    "at least",
    "exactly",
];

pub const VARIABLES: [&str; 3] = ["X", "Y", "Z"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    FunctionWord,
    Lexical,
    Variable,
    Number,
    Period,
    QuestionMark,
}

/// One way of reading a token. A surface can have several readings when the
/// same text is, say, both a noun and a proper name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reading {
    Function(&'static str),
    Lexical { entry: EntryId, slot: FormSlot },
    Variable,
    Number(u64),
    Period,
    QuestionMark,
}

impl Reading {
    pub fn kind(&self) -> TokenKind {
        match self {
            Reading::Function(_) => TokenKind::FunctionWord,
            Reading::Lexical { .. } => TokenKind::Lexical,
            Reading::Variable => TokenKind::Variable,
            Reading::Number(_) => TokenKind::Number,
            Reading::Period => TokenKind::Period,
            Reading::QuestionMark => TokenKind::QuestionMark,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Character offsets into the tokenized text.
    pub span: Range<usize>,
    pub readings: Vec<Reading>,
}

impl Token {
    pub fn kind(&self) -> TokenKind {
        self.readings[0].kind()
    }

    pub fn lexical_entries(&self) -> impl Iterator<Item = (EntryId, FormSlot)> + '_ {
        self.readings.iter().filter_map(|r| match r {
            Reading::Lexical { entry, slot } => Some((*entry, *slot)),
            _ => None,
        })
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

/// A word the tokenizer could not match, with the tokens before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unmatched {
    pub word: String,
    pub span: Range<usize>,
    pub preceding: Vec<Token>,
}

struct Word {
    text: String,
    span: Range<usize>,
    punct: bool,
}

fn split_words(text: &str) -> Vec<Word> {
    let chars: Vec<char> = text.chars().collect();
    let mut words = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let mut end = i;
        // A trailing "." or "?" closes the sentence and is its own token.
        let trailing = if end - start > 1 && matches!(chars[end - 1], '.' | '?') {
            end -= 1;
            true
        } else {
            false
        };
        let word: String = chars[start..end].iter().collect();
        let punct = matches!(word.as_str(), "." | "?");
        words.push(Word { text: word, span: start..end, punct });
        if trailing {
            words.push(Word { text: chars[end].to_string(), span: end..end + 1, punct: true });
        }
    }
    words
}

fn flip_initial(text: &str) -> Option<String> {
    let mut chars = text.chars();
    let first = chars.next()?;
    let flipped: String = if first.is_uppercase() {
        first.to_lowercase().collect()
    } else if first.is_lowercase() {
        first.to_uppercase().collect()
    } else {
        return None;
    };
    Some(flipped + chars.as_str())
}

fn readings_for(candidate: &str, lexicon: &Lexicon, single_word: bool, sentence_start: bool) -> Vec<Reading> {
    let mut readings = Vec::new();
    let mut variants = vec![candidate.to_string()];
    if sentence_start {
        if let Some(flipped) = flip_initial(candidate) {
            variants.push(flipped);
        }
    }
    for variant in &variants {
        if let Some(word) = FUNCTION_WORDS.iter().find(|w| **w == variant) {
            let reading = Reading::Function(word);
            if !readings.contains(&reading) {
                readings.push(reading);
            }
        }
        for (entry, slot) in lexicon.lookup(variant) {
            let reading = Reading::Lexical { entry: *entry, slot: *slot };
            if !readings.contains(&reading) {
                readings.push(reading);
            }
        }
    }
    if single_word {
        if VARIABLES.contains(&candidate) {
            readings.insert(0, Reading::Variable);
        } else if !candidate.is_empty() && candidate.chars().all(|c| c.is_ascii_digit()) {
            if let Ok(n) = candidate.parse::<u64>() {
                readings.insert(0, Reading::Number(n));
            }
        }
    }
    readings
}

/// Splits `text` into tokens, preferring the longest match at every position.
pub fn tokenize(text: &str, lexicon: &Lexicon) -> Result<Vec<Token>, Unmatched> {
    let words = split_words(text);
    let max_words = lexicon.max_words().max(2);
    let mut tokens: Vec<Token> = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let word = &words[i];
        if word.punct {
            let reading = if word.text == "." { Reading::Period } else { Reading::QuestionMark };
            tokens.push(Token { surface: word.text.clone(), span: word.span.clone(), readings: vec![reading] });
            i += 1;
            continue;
        }
        let sentence_start = tokens.is_empty();
        let mut matched = None;
        let mut upto = i;
        while upto < words.len() && upto - i < max_words && !words[upto].punct {
            upto += 1;
        }
        for end in (i + 1..=upto).rev() {
            let candidate =
                words[i..end].iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ");
            let readings = readings_for(&candidate, lexicon, end == i + 1, sentence_start);
            if !readings.is_empty() {
                matched = Some((end, candidate, readings));
                break;
            }
        }
        match matched {
            Some((end, surface, readings)) => {
                let span = words[i].span.start..words[end - 1].span.end;
                tokens.push(Token { surface, span, readings });
                i = end;
            }
            None => {
                return Err(Unmatched { word: word.text.clone(), span: word.span.clone(), preceding: tokens });
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon() -> Lexicon {
        Lexicon::parse(
            "noun | class | classes\nnoun | code element | code elements\n\
             proper-name | Simon Denier\nproper-name | Simon\nproper-name | The EventManager Tutorial\n\
             proper-name | EmergencyHandler-isActive\nproper-name | EventHandler\nproper-name | Handler\n\
             of-construct | class of | classes of\ntransitive-verb | describes | describe | described\n",
        )
        .unwrap()
    }

    fn surfaces(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    #[test]
    fn multiword_noun_is_one_token() {
        let tokens = tokenize("Every class is a code element.", &lexicon()).unwrap();
        assert_eq!(surfaces(&tokens), ["Every", "class", "is", "a", "code element", "."]);
        assert_eq!(tokens[0].readings, vec![Reading::Function("every")]);
        assert_eq!(tokens[5].kind(), TokenKind::Period);
        assert_eq!(tokens[4].span, 17..29);
    }

    #[test]
    fn empty_input_gives_no_tokens() {
        assert!(tokenize("", &lexicon()).unwrap().is_empty());
        assert!(tokenize("   ", &lexicon()).unwrap().is_empty());
    }

    #[test]
    fn names_with_spaces_hyphens_and_articles() {
        let lex = lexicon();
        let tokens =
            tokenize("The EventManager Tutorial describes Simon Denier?", &lex).unwrap();
        assert_eq!(surfaces(&tokens), ["The EventManager Tutorial", "describes", "Simon Denier", "?"]);
        let tokens = tokenize("EmergencyHandler-isActive", &lex).unwrap();
        assert_eq!(tokens.len(), 1);
        assert_eq!(tokens[0].kind(), TokenKind::Lexical);
    }

    #[test]
    fn longest_match_prefers_of_construct() {
        let tokens = tokenize("Which class of Simon", &lexicon()).unwrap();
        assert_eq!(surfaces(&tokens), ["Which", "class of", "Simon"]);
    }

    #[test]
    fn unknown_word_reports_span_and_prefix() {
        let err = tokenize("EventHandler frobnicates Handler.", &lexicon()).unwrap_err();
        assert_eq!(err.word, "frobnicates");
        assert_eq!(err.span, 13..24);
        assert_eq!(err.preceding.len(), 1);
    }

    #[test]
    fn case_folding_only_at_sentence_start() {
        let lex = lexicon();
        assert!(tokenize("every class", &lex).is_ok());
        assert!(tokenize("Every class", &lex).is_ok());
        assert!(tokenize("Class", &lex).is_ok());
        let err = tokenize("Simon is Every", &lex).unwrap_err();
        assert_eq!(err.word, "Every");
        assert!(tokenize("a Class", &lex).is_err());
    }

    #[test]
    fn variables_and_numbers() {
        let tokens = tokenize("X 80 Y", &Lexicon::new()).unwrap();
        assert_eq!(tokens[0].readings, vec![Reading::Variable]);
        assert_eq!(tokens[1].readings, vec![Reading::Number(80)]);
        assert!(tokenize("W", &Lexicon::new()).is_err());
        assert!(tokenize("-3", &Lexicon::new()).is_err());
    }

    #[test]
    fn multiword_function_words() {
        let tokens = tokenize("more than 80 at most", &Lexicon::new()).unwrap();
        assert_eq!(surfaces(&tokens), ["more than", "80", "at most"]);
    }
}
