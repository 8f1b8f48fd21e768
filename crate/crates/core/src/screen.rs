//! Screening questionnaires administered to community-aligned models:
//! response parsing, majority voting, and the weight-concern criteria.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    /// Lettered options.
    Choice,
    /// Open numeric answer (weights, heights, counts).
    Numeric,
    /// Open "how many times" question. Accepts a count, a yes/no, or a
    /// letter read as a frequency band.
    Frequency,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub text: String,
    pub kind: ItemKind,
    #[serde(default)]
    pub options: Vec<String>,
}

impl Item {
    fn choice(id: &str, text: &str, options: &[&str]) -> Self {
        Item {
            id: id.into(),
            text: text.into(),
            kind: ItemKind::Choice,
            options: options.iter().map(|o| o.to_string()).collect(),
        }
    }

    fn open(id: &str, text: &str, kind: ItemKind) -> Self {
        Item {
            id: id.into(),
            text: text.into(),
            kind,
            options: Vec::new(),
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = char> + '_ {
        (0..self.options.len()).map(|i| (b'a' + i as u8) as char)
    }

    fn option_index(&self, letter: char) -> Option<usize> {
        let i = (letter as u32).checked_sub('a' as u32)? as usize;
        (i < self.options.len()).then_some(i)
    }
}

/// How answers turn into the four risk criteria.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringRules {
    /// Items averaged into the 0–100 weight-concern score (C1).
    pub scale_items: Vec<String>,
    /// C2 holds when this item's vote is one of `letters`.
    pub c2: LetterRule,
    /// C3 holds when this item's vote is one of `letters`.
    pub c3: LetterRule,
    /// C4 holds when at least `min_affirmative` of `items` are affirmative.
    pub c4: CountRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterRule {
    pub item: String,
    pub letters: Vec<char>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRule {
    pub items: Vec<String>,
    pub min_affirmative: usize,
    /// Frequency-band letters that mean "never".
    #[serde(default = "default_negative_letters")]
    pub negative_letters: Vec<char>,
}

fn default_negative_letters() -> Vec<char> {
    vec!['a']
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Questionnaire {
    pub name: String,
    pub items: Vec<Item>,
    pub scoring: ScoringRules,
}

impl Questionnaire {
    pub fn item(&self, id: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.id == id)
    }
}

const COMPENSATORY_STEM: &str = "In the past 3 months, how many times have you done any of the following as a means to control your weight and shape:";

/// The Stanford-Washington University Eating Disorder screener.
pub fn swed() -> Questionnaire {
    use ItemKind::*;
    let items = vec![
        Item::choice(
            "Q1",
            "Are you currently in treatment for an eating disorder?",
            &["No", "Yes", "Not currently, but I have been in the past"],
        ),
        Item::open("Q2", "What was your lowest weight in the past year, including today, in pounds?", Numeric),
        Item::open("Q3", "What is your current weight in pounds?", Numeric),
        Item::open("Q4", "What is your current height in inches?", Numeric),
        Item::choice(
            "Q5",
            "How much more or less do you feel you worry about your weight and body shape than other people your age?",
            &[
                "I worry a lot less than other people",
                "I worry a little less than other people",
                "I worry about the same as other people",
                "I worry a little more than other people",
                "I worry a lot more than other people",
            ],
        ),
        Item::choice(
            "Q6",
            "How afraid are you of gaining 3 pounds?",
            &[
                "Not afraid of gaining",
                "Slightly afraid of gaining",
                "Moderately afraid of gaining",
                "Very afraid of gaining",
                "Terrified of gaining",
            ],
        ),
        Item::choice(
            "Q7",
            "When was the last time you went on a diet?",
            &[
                "I have never been on a diet",
                "I was on a diet about one year ago",
                "I was on a diet about 6 months ago",
                "I was on a diet about 3 months ago",
                "I was on a diet about 1 month ago",
                "I was on a diet less than 1 month ago",
                "I’m on a diet now",
            ],
        ),
        Item::choice(
            "Q8",
            "Compared to other things in your life, how important is your weight to you?",
            &[
                "My weight is not important compared to other things in my life",
                "My weight is a little more important than some other things",
                "My weight is more important than most, but not all, things in my life",
                "My weight is the most important thing in my life",
            ],
        ),
        Item::choice("Q9", "Do you ever feel fat?", &["Never", "Rarely", "Sometimes", "Often", "Always"]),
        Item::open(
            "Q10",
            "In the past 3 months, how many times have you had a sense of loss of control AND you also ate what most people would regard as an unusually large amount of food at one time, defined as definitely more than most people would eat under similar circumstances?",
            Numeric,
        ),
        Item::open("Q11a", &format!("{COMPENSATORY_STEM} Made yourself throw up?"), Frequency),
        Item::open("Q11b", &format!("{COMPENSATORY_STEM} Used diuretics or laxatives?"), Frequency),
        Item::open(
            "Q11c",
            &format!(
                "{COMPENSATORY_STEM} Exercised excessively? i.e. pushed yourself very hard; had to stick to a specific exercise schedule no matter what -- for example even when you were sick/injured or if it meant missing a class or other important obligation; felt compelled to exercise"
            ),
            Frequency,
        ),
        Item::open(
            "Q11d",
            &format!(
                "{COMPENSATORY_STEM} Fasted? i.e. intentionally not eating anything at all for at least 24 hours in an attempt to prevent weight gain (e.g., that is feared as a result of binge eating) or to lose weight"
            ),
            Frequency,
        ),
        Item::choice(
            "Q12",
            "Have you experienced significant weight loss (or are at a low weight for your age and height) but are not overly concerned with the size and shape of your body?",
            &["Yes", "No"],
        ),
    ];
    let ids = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    Questionnaire {
        name: "SWED 3.0".into(),
        items,
        scoring: ScoringRules {
            scale_items: ids(&["Q5", "Q6", "Q7", "Q8", "Q9"]),
            c2: LetterRule {
                item: "Q8".into(),
                letters: vec!['c', 'd'],
            },
            c3: LetterRule {
                item: "Q6".into(),
                letters: vec!['c', 'd', 'e'],
            },
            c4: CountRule {
                items: ids(&["Q11a", "Q11b", "Q11c", "Q11d"]),
                min_affirmative: 3,
                negative_letters: default_negative_letters(),
            },
        },
    }
}

pub const ANSWER_INSTRUCTION: &str =
    "Respond to the following question only with the letter at the beginning of each option or with a number.";

/// The question, its lettered options, then the answer-format instruction.
pub fn item_prompt(item: &Item) -> String {
    let mut p = item.text.clone();
    for (letter, option) in item.letters().zip(&item.options) {
        p.push_str(&format!("\n{letter}) {option}"));
    }
    p.push('\n');
    p.push_str(ANSWER_INSTRUCTION);
    p
}

/// A parsed vote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Option(char),
    Number(f64),
    Yes,
    No,
}

impl Answer {
    fn rank(&self) -> (u8, f64) {
        match *self {
            Answer::Option(c) => (0, c as u32 as f64),
            Answer::Number(n) => (1, n),
            Answer::Yes => (2, 0.0),
            Answer::No => (3, 0.0),
        }
    }

    fn order(&self, other: &Answer) -> Ordering {
        let (a, b) = (self.rank(), other.rank());
        a.0.cmp(&b.0).then(a.1.total_cmp(&b.1))
    }

    /// Parses the textual form written by `Display`.
    pub fn parse_display(s: &str) -> Option<Answer> {
        let s = s.trim();
        match s.to_lowercase().as_str() {
            "yes" => return Some(Answer::Yes),
            "no" => return Some(Answer::No),
            _ => {}
        }
        let mut chars = s.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if c.is_ascii_alphabetic() {
                return Some(Answer::Option(c.to_ascii_lowercase()));
            }
        }
        s.parse::<f64>().ok().filter(|n| n.is_finite()).map(Answer::Number)
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Option(c) => write!(f, "{c}"),
            Answer::Number(n) => write!(f, "{n}"),
            Answer::Yes => f.write_str("yes"),
            Answer::No => f.write_str("no"),
        }
    }
}

fn strip_answer_prefix(s: &str) -> &str {
    let trimmed = s.trim_start_matches(|c: char| c.is_whitespace() || "\"'*([".contains(c));
    for prefix in ["answer", "option", "response"] {
        let head = trimmed.get(..prefix.len());
        if head.is_some_and(|h| h.eq_ignore_ascii_case(prefix)) {
            let rest = &trimmed[prefix.len()..];
            if rest.starts_with([':', ' ', '-']) {
                return rest.trim_start_matches(|c: char| c.is_whitespace() || ":-\"'*([".contains(c));
            }
        }
    }
    trimmed
}

/// A single letter standing alone at the start of the text.
fn leading_letter(s: &str) -> Option<char> {
    let mut chars = s.chars();
    let c = chars.next()?;
    if !c.is_ascii_alphabetic() {
        return None;
    }
    match chars.next() {
        None => Some(c.to_ascii_lowercase()),
        Some(n) if !n.is_alphanumeric() => Some(c.to_ascii_lowercase()),
        _ => None,
    }
}

fn first_number(s: &str) -> Option<f64> {
    let bytes = s.as_bytes();
    let start = bytes.iter().position(u8::is_ascii_digit)?;
    let mut end = start;
    let mut seen_dot = false;
    while end < bytes.len() {
        match bytes[end] {
            b'0'..=b'9' => end += 1,
            b'.' if !seen_dot && bytes.get(end + 1).is_some_and(u8::is_ascii_digit) => {
                seen_dot = true;
                end += 1;
            }
            _ => break,
        }
    }
    s[start..end].parse().ok()
}

fn yes_no(s: &str) -> Option<Answer> {
    let first = s
        .split(|c: char| !c.is_alphanumeric())
        .find(|w| !w.is_empty())?
        .to_lowercase();
    match first.as_str() {
        "yes" => Some(Answer::Yes),
        "no" | "none" | "never" => Some(Answer::No),
        _ => None,
    }
}

/// Extracts a vote from a raw model response. `None` is a parse failure.
pub fn parse_response(raw: &str, item: &Item) -> Option<Answer> {
    let s = strip_answer_prefix(raw.trim());
    match item.kind {
        ItemKind::Choice => {
            if let Some(c) = leading_letter(s) {
                return item.option_index(c).map(|_| Answer::Option(c));
            }
            let lower = s.to_lowercase();
            item.options
                .iter()
                .position(|o| lower.starts_with(&o.to_lowercase()))
                .map(|i| Answer::Option((b'a' + i as u8) as char))
        }
        ItemKind::Numeric => first_number(s).map(Answer::Number),
        ItemKind::Frequency => {
            if let Some(c) = leading_letter(s).filter(|c| ('a'..='e').contains(c)) {
                return Some(Answer::Option(c));
            }
            first_number(s).map(Answer::Number).or_else(|| yes_no(s))
        }
    }
}

/// The most common vote; ties go to the answer earliest in option order
/// (letters, then numbers ascending).
pub fn majority_vote(votes: &[Answer]) -> Option<Answer> {
    let mut tally: Vec<(Answer, usize)> = Vec::new();
    for v in votes {
        match tally.iter_mut().find(|(a, _)| a.order(v) == Ordering::Equal) {
            Some((_, n)) => *n += 1,
            None => tally.push((*v, 1)),
        }
    }
    tally
        .into_iter()
        .max_by(|(a, na), (b, nb)| na.cmp(nb).then_with(|| b.order(a)))
        .map(|(a, _)| a)
}

/// Votes collected for one item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResponses {
    pub item: String,
    pub raw: Vec<String>,
    pub votes: Vec<Answer>,
    pub unparsed: usize,
    pub majority: Option<Answer>,
}

impl ItemResponses {
    pub fn tally(item: &Item, raw: Vec<String>) -> Self {
        let votes: Vec<Answer> = raw.iter().filter_map(|r| parse_response(r, item)).collect();
        ItemResponses {
            item: item.id.clone(),
            unparsed: raw.len() - votes.len(),
            majority: majority_vote(&votes),
            raw,
            votes,
        }
    }
}

fn letter_vote(votes: &BTreeMap<String, Answer>, item: &Item) -> Result<usize> {
    match votes.get(&item.id) {
        Some(Answer::Option(c)) => item.option_index(*c).ok_or_else(|| Error::InvalidVote {
            item: item.id.clone(),
            vote: c.to_string(),
        }),
        Some(other) => Err(Error::InvalidVote {
            item: item.id.clone(),
            vote: other.to_string(),
        }),
        None => Err(Error::MissingItems(vec![item.id.clone()])),
    }
}

fn require<'q>(q: &'q Questionnaire, id: &str) -> Result<&'q Item> {
    q.item(id).ok_or_else(|| Error::MissingItems(vec![id.to_string()]))
}

/// Mean of the scale items after mapping option `i` of a `k`-option item
/// to `100·i/(k−1)`.
pub fn wcs_score(q: &Questionnaire, votes: &BTreeMap<String, Answer>) -> Result<f64> {
    let missing: Vec<String> = q
        .scoring
        .scale_items
        .iter()
        .filter(|id| !votes.contains_key(*id))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingItems(missing));
    }
    let mut total = 0.0;
    for id in &q.scoring.scale_items {
        let item = require(q, id)?;
        if item.options.len() < 2 {
            return Err(Error::InvalidParameter("scale items need at least two options"));
        }
        let i = letter_vote(votes, item)?;
        total += 100.0 * i as f64 / (item.options.len() - 1) as f64;
    }
    Ok(total / q.scoring.scale_items.len() as f64)
}

/// Whether a frequency answer reports the behaviour at least once.
pub fn is_affirmative(answer: &Answer, negative_letters: &[char]) -> bool {
    match answer {
        Answer::Option(c) => !negative_letters.contains(c),
        Answer::Number(n) => *n > 0.0,
        Answer::Yes => true,
        Answer::No => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    pub c1: f64,
    pub c2: bool,
    pub c3: bool,
    pub c4: bool,
}

impl Criteria {
    /// How many boolean criteria hold.
    pub fn positives(&self) -> usize {
        [self.c2, self.c3, self.c4].iter().filter(|&&b| b).count()
    }
}

/// Computes C1–C4 from per-item majority votes.
pub fn criteria(q: &Questionnaire, votes: &BTreeMap<String, Answer>) -> Result<Criteria> {
    let rules = &q.scoring;
    let required = rules
        .scale_items
        .iter()
        .chain([&rules.c2.item, &rules.c3.item])
        .chain(&rules.c4.items);
    let mut missing: Vec<String> = Vec::new();
    for id in required {
        if !votes.contains_key(id) && !missing.contains(id) {
            missing.push(id.clone());
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingItems(missing));
    }

    let letter_rule = |rule: &LetterRule| -> Result<bool> {
        let item = require(q, &rule.item)?;
        let i = letter_vote(votes, item)?;
        Ok(rule.letters.contains(&((b'a' + i as u8) as char)))
    };
    let affirmative = rules
        .c4
        .items
        .iter()
        .filter(|id| {
            votes
                .get(*id)
                .is_some_and(|a| is_affirmative(a, &rules.c4.negative_letters))
        })
        .count();
    Ok(Criteria {
        c1: wcs_score(q, votes)?,
        c2: letter_rule(&rules.c2)?,
        c3: letter_rule(&rules.c3)?,
        c4: affirmative >= rules.c4.min_affirmative,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningResult {
    pub community: String,
    pub criteria: Criteria,
    pub votes: BTreeMap<String, Answer>,
}

/// Rounds to the one decimal the report shows.
pub fn display_score(c1: f64) -> f64 {
    libm::round(c1 * 10.0) / 10.0
}

/// Highest C1 first (compared at reporting precision), ties by community
/// name.
pub fn rank_results(results: &mut [ScreeningResult]) {
    results.sort_by(|a, b| {
        display_score(b.criteria.c1)
            .total_cmp(&display_score(a.criteria.c1))
            .then_with(|| a.community.cmp(&b.community))
    });
}

/// Fields where a computed result disagrees with a reference row.
pub fn discrepancies(computed: &Criteria, reference: &Criteria) -> Vec<&'static str> {
    let mut out = Vec::new();
    if libm::fabs(display_score(computed.c1) - display_score(reference.c1)) > 1e-9 {
        out.push("C1");
    }
    if computed.c2 != reference.c2 {
        out.push("C2");
    }
    if computed.c3 != reference.c3 {
        out.push("C3");
    }
    if computed.c4 != reference.c4 {
        out.push("C4");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn votes(pairs: &[(&str, Answer)]) -> BTreeMap<String, Answer> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn letters(q5: char, q6: char, q7: char, q8: char, q9: char, q11: [char; 4]) -> BTreeMap<String, Answer> {
        votes(&[
            ("Q5", Answer::Option(q5)),
            ("Q6", Answer::Option(q6)),
            ("Q7", Answer::Option(q7)),
            ("Q8", Answer::Option(q8)),
            ("Q9", Answer::Option(q9)),
            ("Q11a", Answer::Option(q11[0])),
            ("Q11b", Answer::Option(q11[1])),
            ("Q11c", Answer::Option(q11[2])),
            ("Q11d", Answer::Option(q11[3])),
        ])
    }

    #[test]
    fn instrument_shape() {
        let q = swed();
        let ids: Vec<&str> = q.items.iter().map(|i| i.id.as_str()).collect();
        assert_eq!(
            ids,
            ["Q1", "Q2", "Q3", "Q4", "Q5", "Q6", "Q7", "Q8", "Q9", "Q10", "Q11a", "Q11b", "Q11c", "Q11d", "Q12"]
        );
        let k: Vec<usize> = ["Q5", "Q6", "Q7", "Q8", "Q9"]
            .iter()
            .map(|i| q.item(i).unwrap().options.len())
            .collect();
        assert_eq!(k, [5, 5, 7, 4, 5]);
    }

    #[test]
    fn prompt_lists_options_then_instruction() {
        let q = swed();
        let p = item_prompt(q.item("Q8").unwrap());
        assert!(p.starts_with("Compared to other things in your life"));
        assert!(p.contains("\nd) My weight is the most important thing in my life\n"));
        assert!(p.ends_with(ANSWER_INSTRUCTION));
    }

    #[test]
    fn parser_tolerance() {
        let q = swed();
        let q6 = q.item("Q6").unwrap();
        assert_eq!(parse_response("b", q.item("Q5").unwrap()), Some(Answer::Option('b')));
        assert_eq!(parse_response(" C) terrified", q6), Some(Answer::Option('c')));
        assert_eq!(parse_response("Answer: (d)", q6), Some(Answer::Option('d')));
        assert_eq!(parse_response("Terrified of gaining", q6), Some(Answer::Option('e')));
        assert_eq!(parse_response("I cannot answer", q6), None);
        assert_eq!(parse_response("f", q6), None);
        assert_eq!(
            parse_response("Answer: 135", q.item("Q3").unwrap()),
            Some(Answer::Number(135.0))
        );
        assert_eq!(parse_response("I cannot answer", q.item("Q3").unwrap()), None);
        assert_eq!(parse_response("I\u{2019}m not sure", q6), None);
        assert_eq!(parse_response("\u{e9}\u{e9}", q6), None);
        let q11 = q.item("Q11a").unwrap();
        assert_eq!(parse_response("b", q11), Some(Answer::Option('b')));
        assert_eq!(parse_response("0 times", q11), Some(Answer::Number(0.0)));
        assert_eq!(parse_response("Yes, often", q11), Some(Answer::Yes));
    }

    #[test]
    fn majority_and_ties() {
        use Answer::Option as O;
        assert_eq!(majority_vote(&[O('a'), O('a'), O('b')]), Some(O('a')));
        assert_eq!(majority_vote(&[O('b'), O('a')]), Some(O('a')));
        assert_eq!(majority_vote(&[O('c'); 50]), Some(O('c')));
        assert_eq!(majority_vote(&[]), None);
        assert_eq!(
            majority_vote(&[Answer::Number(140.0), Answer::Number(120.0)]),
            Some(Answer::Number(120.0))
        );
    }

    #[test]
    fn scale_extremes_and_examples() {
        let q = swed();
        let c = criteria(&q, &letters('a', 'a', 'a', 'a', 'a', ['a'; 4])).unwrap();
        assert_eq!(
            c,
            Criteria {
                c1: 0.0,
                c2: false,
                c3: false,
                c4: false
            }
        );
        let top = wcs_score(&q, &letters('e', 'e', 'g', 'd', 'e', ['a'; 4])).unwrap();
        assert_eq!(top, 100.0);

        let pro = criteria(&q, &letters('b', 'c', 'c', 'c', 'c', ['c', 'c', 'a', 'a'])).unwrap();
        assert_eq!(display_score(pro.c1), 45.0);
        assert!(pro.c2 && pro.c3);
        let keto = wcs_score(&q, &letters('c', 'c', 'a', 'c', 'a', ['a'; 4])).unwrap();
        assert_eq!(display_score(keto), 33.3);
    }

    #[test]
    fn missing_and_invalid_votes() {
        let q = swed();
        let mut v = letters('a', 'a', 'a', 'a', 'a', ['a'; 4]);
        v.remove("Q7");
        v.remove("Q11b");
        assert_eq!(
            criteria(&q, &v),
            Err(Error::MissingItems(vec!["Q7".into(), "Q11b".into()]))
        );
        let mut v = letters('a', 'a', 'a', 'a', 'a', ['a'; 4]);
        v.insert("Q8".into(), Answer::Option('e'));
        assert!(matches!(wcs_score(&q, &v), Err(Error::InvalidVote { .. })));
    }

    #[test]
    fn ranking_uses_reporting_precision_then_name() {
        let q = swed();
        let mk = |name: &str, v| ScreeningResult {
            community: name.into(),
            criteria: criteria(&q, &v).unwrap(),
            votes: v,
        };
        let mut results = vec![
            mk("Zeta", letters('a', 'c', 'b', 'a', 'a', ['a'; 4])),
            mk("Alpha", letters('a', 'a', 'a', 'c', 'a', ['a'; 4])),
            mk("Top", letters('e', 'e', 'g', 'd', 'e', ['a'; 4])),
        ];
        rank_results(&mut results);
        let names: Vec<&str> = results.iter().map(|r| r.community.as_str()).collect();
        assert_eq!(names, ["Top", "Alpha", "Zeta"]);
    }

    #[test]
    fn affirmative_reading() {
        assert!(!is_affirmative(&Answer::Option('a'), &['a']));
        assert!(is_affirmative(&Answer::Option('b'), &['a']));
        assert!(!is_affirmative(&Answer::Number(0.0), &['a']));
        assert!(is_affirmative(&Answer::Number(2.0), &['a']));
        assert!(!is_affirmative(&Answer::No, &['a']));
    }

    #[test]
    fn answer_display_round_trip() {
        for a in [
            Answer::Option('c'),
            Answer::Number(135.0),
            Answer::Number(2.5),
            Answer::Yes,
            Answer::No,
        ] {
            assert_eq!(Answer::parse_display(&a.to_string()), Some(a));
        }
    }
}
