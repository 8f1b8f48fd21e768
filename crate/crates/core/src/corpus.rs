//! Documents, corpora, and the text curation steps applied before anything
//! else sees community text.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Where a corpus came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Human-written posts collected from the community.
    #[default]
    Original,
    /// Generated by a model tuned on the community's demonstrations.
    Finetuned,
    /// Generated by an untuned model prompted with community exemplars.
    Context,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Original => "original",
            Provenance::Finetuned => "finetuned",
            Provenance::Context => "context",
        }
    }
}

/// One social post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub community: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default)]
    pub is_repost: bool,
    #[serde(default)]
    pub is_reply: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perplexity: Option<f64>,
    #[serde(default)]
    pub provenance: Provenance,
    /// Generation topic, set on synthetic documents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, community: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            community: community.into(),
            text: text.into(),
            author: None,
            is_repost: false,
            is_reply: false,
            perplexity: None,
            provenance: Provenance::Original,
            topic: None,
        }
    }

    pub fn with_topic(mut self, topic: impl Into<String>) -> Self {
        self.topic = Some(topic.into());
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

/// A community's ordered post collection.
///
/// All documents share the corpus community and no two share an id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub community: String,
    documents: Vec<Document>,
}

impl Corpus {
    pub fn new(community: impl Into<String>) -> Self {
        Corpus {
            community: community.into(),
            documents: Vec::new(),
        }
    }

    pub fn from_documents(community: impl Into<String>, documents: Vec<Document>) -> Result<Self> {
        let mut corpus = Corpus::new(community);
        for doc in documents {
            corpus.push(doc)?;
        }
        Ok(corpus)
    }

    pub fn push(&mut self, doc: Document) -> Result<()> {
        if doc.community != self.community {
            return Err(Error::ForeignDocument {
                id: doc.id,
                expected: self.community.clone(),
                found: doc.community,
            });
        }
        if self.documents.iter().any(|d| d.id == doc.id) {
            return Err(Error::DuplicateId(doc.id));
        }
        self.documents.push(doc);
        Ok(())
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn documents_mut(&mut self) -> &mut [Document] {
        &mut self.documents
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().map(|d| d.text.as_str())
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Replaces the document list with a subset that is known to satisfy the
    /// invariants already (filtering an existing corpus).
    pub(crate) fn retain_documents(community: String, documents: Vec<Document>) -> Self {
        Corpus { community, documents }
    }
}

/// Options for [`clean_text_with`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanOptions {
    #[serde(default)]
    pub lowercase: bool,
    /// Literal substrings removed before anything else (platform artifacts
    /// such as `&amp;` or `RT :`).
    #[serde(default)]
    pub extra_patterns: Vec<String>,
}

/// Strips URLs, @-mentions, #-hashtags and emoji, then collapses whitespace.
pub fn clean_text(raw: &str) -> String {
    clean_text_with(raw, &CleanOptions::default())
}

pub fn clean_text_with(raw: &str, options: &CleanOptions) -> String {
    let mut text = clean_pass(raw, options);
    // Pattern removal can splice two halves of a pattern together.
    if options.extra_patterns.iter().any(|p| !p.is_empty()) {
        loop {
            let next = clean_pass(&text, options);
            if next == text {
                break;
            }
            text = next;
        }
    }
    text
}

fn clean_pass(raw: &str, options: &CleanOptions) -> String {
    let mut text: String = if options.lowercase {
        raw.to_lowercase()
    } else {
        String::from(raw)
    };
    text.retain(|c| !is_emoji(c));
    for pattern in options.extra_patterns.iter().filter(|p| !p.is_empty()) {
        if text.contains(pattern.as_str()) {
            text = text.replace(pattern.as_str(), " ");
        }
    }

    let chars: Vec<char> = text.chars().collect();
    let stripped = strip_tokens(&chars);

    let mut out = String::with_capacity(stripped.len());
    for word in stripped.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn starts_with_ignore_case(chars: &[char], prefix: &str) -> bool {
    let mut n = 0;
    for (i, p) in prefix.chars().enumerate() {
        match chars.get(i) {
            Some(c) if c.to_ascii_lowercase() == p => n += 1,
            _ => return false,
        }
    }
    n > 0
}

// Decisions look at the last emitted char rather than the last input char so
// that a second pass never finds anything new.
fn strip_tokens(chars: &[char]) -> String {
    let mut out = String::with_capacity(chars.len());
    let mut last: Option<char> = None;
    let mut i = 0;
    while i < chars.len() {
        let at_boundary = last.is_none_or(|c| !c.is_alphanumeric());
        let rest = &chars[i..];
        if at_boundary
            && (starts_with_ignore_case(rest, "http://")
                || starts_with_ignore_case(rest, "https://")
                || starts_with_ignore_case(rest, "www."))
        {
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
            continue;
        }
        let c = chars[i];
        if (c == '@' || c == '#') && at_boundary && rest.get(1).copied().is_some_and(is_word_char) {
            i += 1;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            continue;
        }
        out.push(c);
        last = Some(c);
        i += 1;
    }
    out
}

/// Emoji and emoji-sequence components, by Unicode block.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF
        | 0x2600..=0x27BF
        | 0x2300..=0x23FF
        | 0x2B00..=0x2BFF
        | 0x2194..=0x2199
        | 0x21A9..=0x21AA
        | 0x25AA..=0x25AB
        | 0x25B6
        | 0x25C0
        | 0x25FB..=0x25FE
        | 0x2934..=0x2935
        | 0x3030
        | 0x303D
        | 0x3297
        | 0x3299
        | 0x00A9
        | 0x00AE
        | 0x203C
        | 0x2049
        | 0x2122
        | 0x2139
        | 0x24C2
        | 0x200D
        | 0x20E3
        | 0xFE0E..=0xFE0F
        | 0xE0020..=0xE007F)
}

/// Keeps only posts that are neither reposts nor replies.
pub fn filter_originals(docs: Vec<Document>) -> Vec<Document> {
    docs.into_iter().filter(|d| !d.is_repost && !d.is_reply).collect()
}

fn by_perplexity_then_id(a: &Document, b: &Document) -> Ordering {
    let pa = a.perplexity.unwrap_or(f64::INFINITY);
    let pb = b.perplexity.unwrap_or(f64::INFINITY);
    pa.total_cmp(&pb).then_with(|| a.id.cmp(&b.id))
}

/// Keeps the `cap` documents with the lowest perplexity.
///
/// Every document must already carry a perplexity. Output is ordered by
/// ascending perplexity, ties by id.
pub fn select_lowest_perplexity(corpus: Corpus, cap: usize) -> Result<Corpus> {
    if cap == 0 {
        return Err(Error::InvalidParameter("curation cap must be positive"));
    }
    let Corpus {
        community,
        mut documents,
    } = corpus;
    if let Some(doc) = documents.iter().find(|d| d.perplexity.is_none()) {
        return Err(Error::Unscored(doc.id.clone()));
    }
    documents.sort_by(by_perplexity_then_id);
    documents.truncate(cap);
    Ok(Corpus::retain_documents(community, documents))
}

/// Drops later documents whose text exactly equals an earlier one.
pub fn dedup_exact(corpus: Corpus) -> Corpus {
    let Corpus { community, documents } = corpus;
    let mut seen = BTreeSet::new();
    let kept = documents.into_iter().filter(|d| seen.insert(d.text.clone())).collect();
    Corpus::retain_documents(community, kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn doc(id: &str, text: &str) -> Document {
        Document::new(id, "c", text)
    }

    #[test]
    fn clean_removes_each_rule_once() {
        assert_eq!(clean_text("check https://t.co/x @bob #thinspo now"), "check now");
        assert_eq!(clean_text("plain text"), "plain text");
        assert_eq!(clean_text("a   b\n c"), "a b c");
    }

    #[test]
    fn clean_keeps_case_and_emails() {
        assert_eq!(clean_text("Mail me at a@b.com"), "Mail me at a@b.com");
        assert_eq!(clean_text("Skinny 🙂 Legend 👍🏽"), "Skinny Legend");
        assert_eq!(clean_text("www.example.com/x is down"), "is down");
        assert_eq!(clean_text("price #1 deal"), "price deal");
        assert_eq!(clean_text("@ alone"), "@ alone");
    }

    #[test]
    fn clean_lowercase_and_patterns() {
        let opts = CleanOptions {
            lowercase: true,
            extra_patterns: vec!["&amp;".into()],
        };
        assert_eq!(clean_text_with("Salt &amp; Pepper", &opts), "salt pepper");
    }

    #[test]
    fn clean_spliced_patterns_are_stable() {
        let once = clean_text("a #tag@x b");
        assert_eq!(once, "a b");
        let once = clean_text("h🙂ttps://x.y z");
        assert_eq!(clean_text(&once), once);
    }

    #[test]
    fn originals_only() {
        let mut repost = doc("2", "r");
        repost.is_repost = true;
        let mut reply = doc("3", "p");
        reply.is_reply = true;
        let out = filter_originals(vec![doc("1", "o"), repost, reply]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].id, "1");
        assert!(filter_originals(vec![]).is_empty());
    }

    #[test]
    fn lowest_perplexity_with_ties() {
        let mut docs = vec![doc("a", "x"), doc("b", "y"), doc("c", "z")];
        for (d, p) in docs.iter_mut().zip([5.0, 1.0, 9.0]) {
            d.perplexity = Some(p);
        }
        let corpus = Corpus::from_documents("c", docs.clone()).unwrap();
        let kept = select_lowest_perplexity(corpus.clone(), 2).unwrap();
        let ids: Vec<_> = kept.documents().iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["b", "a"]);
        assert_eq!(select_lowest_perplexity(corpus, 10).unwrap().len(), 3);

        docs[0].perplexity = Some(1.0);
        let corpus = Corpus::from_documents("c", docs).unwrap();
        let kept = select_lowest_perplexity(corpus, 1).unwrap();
        assert_eq!(kept.documents()[0].id, "a");
    }

    #[test]
    fn unscored_documents_rejected() {
        let corpus = Corpus::from_documents("c", vec![doc("a", "x")]).unwrap();
        assert!(select_lowest_perplexity(corpus, 1).is_err());
    }

    #[test]
    fn dedup_is_case_sensitive() {
        let c = Corpus::from_documents("c", vec![doc("1", "a"), doc("2", "a"), doc("3", "b")]).unwrap();
        let texts: Vec<_> = dedup_exact(c).texts().map(String::from).collect();
        assert_eq!(texts, ["a", "b"]);
        let c = Corpus::from_documents("c", vec![doc("1", "a"), doc("2", "A")]).unwrap();
        assert_eq!(dedup_exact(c).len(), 2);
    }

    #[test]
    fn corpus_invariants() {
        let mut c = Corpus::new("c");
        c.push(doc("1", "a")).unwrap();
        assert_eq!(c.push(doc("1", "b")), Err(Error::DuplicateId("1".into())));
        assert!(matches!(
            c.push(Document::new("2", "other", "b")),
            Err(Error::ForeignDocument { .. })
        ));
    }
}
