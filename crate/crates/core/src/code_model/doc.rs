//! Tagged documentation sentences in line comments.

use serde::Serialize;
use thiserror::Error;

pub const TAG: &str = "@cnl:";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DocComment {
    pub sentence: String,
    pub file: String,
    pub line: usize,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DocCommentError {
    #[error("{file}:{line}: tagged comment `{text}` does not end with `.` or `?`")]
    Malformed { file: String, line: usize, text: String },
}

/// Every full-line comment (for one of `prefixes`) whose body starts with
/// the tag, in file order.
pub fn extract_doc_comments(file: &str, text: &str, prefixes: &[String]) -> Result<Vec<DocComment>, DocCommentError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let trimmed = raw.trim_start();
        let Some(body) = prefixes
            .iter()
            .filter(|p| !p.is_empty())
            .find_map(|p| trimmed.strip_prefix(p.as_str()))
        else {
            continue;
        };
        let Some(rest) = body.trim_start().strip_prefix(TAG) else {
            continue;
        };
        let sentence = rest.trim().to_string();
        if !(sentence.ends_with('.') || sentence.ends_with('?')) {
            return Err(DocCommentError::Malformed { file: file.to_string(), line: i + 1, text: sentence });
        }
        out.push(DocComment { sentence, file: file.to_string(), line: i + 1 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slashes() -> Vec<String> {
        vec!["//".into()]
    }

    #[test]
    fn finds_tagged_lines_in_order() {
        let text = "fn main() {}\n  // @cnl: Every subclass of MOShape belongs to Shapes.\n// plain\n\
                    //@cnl: What belongs to Core?\n";
        let docs = extract_doc_comments("shape.rs", text, &slashes()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].sentence, "Every subclass of MOShape belongs to Shapes.");
        assert_eq!(docs[0].line, 2);
        assert_eq!(docs[1].line, 4);
    }

    #[test]
    fn untagged_file_is_empty() {
        assert!(extract_doc_comments("a.rs", "// nothing\nlet x = 1;\n", &slashes()).unwrap().is_empty());
    }

    #[test]
    fn missing_punctuation_is_reported() {
        let err = extract_doc_comments("a.py", "x = 1\n# @cnl: Core is a component\n", &["#".into()]).unwrap_err();
        assert_eq!(
            err,
            DocCommentError::Malformed { file: "a.py".into(), line: 2, text: "Core is a component".into() }
        );
    }
}
