//! Generation prompts: parameter domains, sampling, rendering and the
//! hardness tier used to route a prompt to a model.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topics::TopicPair;
use crate::types::Category;

/// Bumped whenever a template text changes.
pub const TEMPLATE_VERSION: &str = "1";

const SHORT_LONG: &str = include_str!("../templates/short-long.txt");
const LONG_SHORT: &str = include_str!("../templates/long-short.txt");
const SHORT_SHORT: &str = include_str!("../templates/short-short.txt");
const LONG_LONG: &str = include_str!("../templates/long-long.txt");
const STS: &str = include_str!("../templates/sts.txt");

pub const LOCAL_INSTRUCTION: &str = "If possible, try to generate the example in the Flemish or Dutch context (e.g. including Flemish/Dutch entities, events, etc.).";
pub const LOCAL_INSTRUCTION_STS: &str = "If possible, try to generate them in the Flemish or Dutch context (e.g. including Flemish/Dutch entities, events, etc.).";
pub const LEXICAL_OVERLAP_CLAUSE: &str = " and have Minimum lexical overlap with the \"positive document\"";

/// Query length value that earns a hardness point.
pub const LONG_QUERY_LENGTH: &str = "At least 12 words";

pub fn template(category: Category) -> &'static str {
    match category {
        Category::ShortLong => SHORT_LONG,
        Category::LongShort => LONG_SHORT,
        Category::ShortShort => SHORT_SHORT,
        Category::LongLong => LONG_LONG,
        Category::Sts => STS,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QueryType {
    #[serde(rename = "Extremely long-tail")]
    ExtremelyLongTail,
    #[serde(rename = "Long-tail")]
    LongTail,
    #[serde(rename = "Common")]
    Common,
}

impl QueryType {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryType::ExtremelyLongTail => "Extremely long-tail",
            QueryType::LongTail => "Long-tail",
            QueryType::Common => "Common",
        }
    }

    fn points(self) -> u32 {
        match self {
            QueryType::Common => 0,
            QueryType::LongTail => 1,
            QueryType::ExtremelyLongTail => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Clarity {
    #[serde(rename = "Clear")]
    Clear,
    #[serde(rename = "Understandable with some effort")]
    WithEffort,
    #[serde(rename = "Ambiguous")]
    Ambiguous,
}

impl Clarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Clarity::Clear => "Clear",
            Clarity::WithEffort => "Understandable with some effort",
            Clarity::Ambiguous => "Ambiguous",
        }
    }

    fn points(self) -> u32 {
        match self {
            Clarity::Clear => 0,
            Clarity::WithEffort => 1,
            Clarity::Ambiguous => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Difficulty {
    #[serde(rename = "Layman")]
    Layman,
    #[serde(rename = "High school")]
    HighSchool,
    #[serde(rename = "Bachelor's degree")]
    Bachelor,
    #[serde(rename = "Master's degree or higher")]
    Master,
}

impl Difficulty {
    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Layman => "Layman",
            Difficulty::HighSchool => "High school",
            Difficulty::Bachelor => "Bachelor's degree",
            Difficulty::Master => "Master's degree or higher",
        }
    }

    fn points(self) -> u32 {
        match self {
            Difficulty::Layman => 0,
            Difficulty::HighSchool => 1,
            Difficulty::Bachelor => 2,
            Difficulty::Master => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Sentence,
    Phrase,
    Passage,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Sentence => "sentence",
            Unit::Phrase => "phrase",
            Unit::Passage => "passage",
        }
    }
}

/// Value domains of every template parameter plus the two flag rates.
///
/// The defaults are the published domains; the companion crate loads an
/// editable copy from `config/param_domains.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamDomains {
    pub local_flag_probability: f64,
    pub lexical_overlap_probability: f64,
    pub short_long_tasks: Vec<String>,
    pub short_short_tasks: Vec<String>,
    pub long_long_tasks: Vec<String>,
    pub long_short_tasks: Vec<String>,
    pub query_types: Vec<QueryType>,
    pub short_long_query_lengths: Vec<String>,
    pub long_short_query_lengths: Vec<String>,
    pub clarities: Vec<Clarity>,
    pub num_words: Vec<u32>,
    pub difficulties: Vec<Difficulty>,
    pub units: Vec<Unit>,
    pub high_scores: Vec<f64>,
    pub low_scores: Vec<f64>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for ParamDomains {
    fn default() -> Self {
        ParamDomains {
            local_flag_probability: 0.3,
            lexical_overlap_probability: 0.5,
            short_long_tasks: strings(&[
                "Given a question, retrieve documents that can help to answer the question.",
                "Given a query, retrieve documents that fulfill the informational needs of the query; e.g. explain, expand, analyze, etc.",
                "Given a claim, retrieve documents that support or refute it.",
            ]),
            short_short_tasks: strings(&[
                "Given the title of a forum post (e.g. from StackExchange, Reddit, etc.), find post titles that belong to the same forum category/topic.",
                "Given a news headline, find others that belong to the same category/topic.",
                "Given a premise, find entailing hypotheses.",
                "Given the title of a scientific paper, find titles that belong to the same scientific disciplines/categories/topics.",
            ]),
            long_long_tasks: strings(&[
                "Given a forum post (e.g. from StackExchange, Reddit, etc.), find posts that belong to the same forum category/topic.",
                "Given a news article, find others that belong to the same category/topic.",
                "Given a document that supports a debatable argument, find documents that contain opposite arguments.",
                "Given a scientific abstract, find abstracts that belong to the same scientific disciplines/categories/topics.",
            ]),
            long_short_tasks: strings(&[
                "Identifying the polarity of a user opinion, review or post",
                "Identifying the positivity level of a user opinion, review",
                "Identifying the intent or scenario of a user utterance, input, query or command",
                "Identifying the emotion of a user opinion, review or post",
                "Identifying the toxicity of a user opinion, review or post",
                "Identifying the topic of a text like question, query, news, forum post, etc.",
                "Identifying the category of a text like news headline or summary, article title or abstract, forum post, etc.",
            ]),
            query_types: vec![QueryType::ExtremelyLongTail, QueryType::LongTail, QueryType::Common],
            short_long_query_lengths: strings(&["Less than 7 words", "7 to 17 words", LONG_QUERY_LENGTH]),
            long_short_query_lengths: strings(&["less than 10", "at least 10", "at least 50", "at least 100", "at least 200"]),
            clarities: vec![Clarity::Clear, Clarity::WithEffort, Clarity::Ambiguous],
            num_words: vec![50, 100, 200, 300, 400, 500],
            difficulties: vec![Difficulty::Layman, Difficulty::HighSchool, Difficulty::Bachelor, Difficulty::Master],
            units: vec![Unit::Sentence, Unit::Phrase, Unit::Passage],
            high_scores: vec![4.0, 4.5, 5.0],
            low_scores: vec![2.5, 3.0, 3.5],
        }
    }
}

impl ParamDomains {
    pub fn validate(&self) -> Result<()> {
        let p_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !p_ok(self.local_flag_probability) || !p_ok(self.lexical_overlap_probability) {
            return Err(Error::invalid("parameter domains", "flag probability outside [0, 1]"));
        }
        let lens = [
            ("short_long_tasks", self.short_long_tasks.len()),
            ("short_short_tasks", self.short_short_tasks.len()),
            ("long_long_tasks", self.long_long_tasks.len()),
            ("long_short_tasks", self.long_short_tasks.len()),
            ("query_types", self.query_types.len()),
            ("short_long_query_lengths", self.short_long_query_lengths.len()),
            ("long_short_query_lengths", self.long_short_query_lengths.len()),
            ("clarities", self.clarities.len()),
            ("num_words", self.num_words.len()),
            ("difficulties", self.difficulties.len()),
            ("units", self.units.len()),
            ("high_scores", self.high_scores.len()),
            ("low_scores", self.low_scores.len()),
        ];
        if let Some((name, _)) = lens.iter().find(|(_, n)| *n == 0) {
            return Err(Error::invalid("parameter domains", format!("{name} is empty")));
        }
        let min_high = self.high_scores.iter().copied().fold(f64::INFINITY, f64::min);
        let max_low = self.low_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if min_high <= max_low {
            return Err(Error::invalid("parameter domains", "every high score must exceed every low score"));
        }
        Ok(())
    }

    fn tasks(&self, category: Category) -> Option<&[String]> {
        match category {
            Category::ShortLong => Some(&self.short_long_tasks),
            Category::ShortShort => Some(&self.short_short_tasks),
            Category::LongLong => Some(&self.long_long_tasks),
            Category::LongShort => Some(&self.long_short_tasks),
            Category::Sts => None,
        }
    }
}

/// Filled-in parameters for one prompt. Optional fields are present exactly
/// when the category's template uses them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptParams {
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_type: Option<QueryType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_length: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clarity: Option<Clarity>,
    pub lexical_overlap_flag: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_words: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<Difficulty>,
    pub local_flag: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Unit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low_score: Option<f64>,
    pub topics: TopicPair,
}

#[derive(Clone, Copy)]
struct Uses {
    task: bool,
    query_type: bool,
    query_length: bool,
    clarity: bool,
    num_words: bool,
    difficulty: bool,
    unit: bool,
    scores: bool,
    lexical_overlap: bool,
}

fn uses(category: Category) -> Uses {
    let none = Uses {
        task: false,
        query_type: false,
        query_length: false,
        clarity: false,
        num_words: false,
        difficulty: false,
        unit: false,
        scores: false,
        lexical_overlap: false,
    };
    match category {
        Category::ShortLong => Uses {
            task: true,
            query_type: true,
            query_length: true,
            clarity: true,
            num_words: true,
            difficulty: true,
            lexical_overlap: true,
            ..none
        },
        Category::LongShort => Uses { task: true, query_length: true, clarity: true, difficulty: true, ..none },
        Category::ShortShort | Category::LongLong => Uses { task: true, ..none },
        Category::Sts => Uses { unit: true, scores: true, difficulty: true, ..none },
    }
}

impl PromptParams {
    pub fn validate(&self) -> Result<()> {
        let u = uses(self.category);
        let checks: [(&'static str, bool, bool); 8] = [
            ("task", u.task, self.task.is_some()),
            ("query-type", u.query_type, self.query_type.is_some()),
            ("query-length", u.query_length, self.query_length.is_some()),
            ("clarity", u.clarity, self.clarity.is_some()),
            ("num-words", u.num_words, self.num_words.is_some()),
            ("difficulty", u.difficulty, self.difficulty.is_some()),
            ("unit", u.unit, self.unit.is_some()),
            ("high-score", u.scores, self.high_score.is_some() && self.low_score.is_some()),
        ];
        for (name, expected, present) in checks {
            if expected && !present {
                return Err(Error::MissingParameter(name));
            }
            if !expected && present {
                return Err(Error::invalid("prompt params", format!("{name} not used by {}", self.category)));
            }
        }
        if let (Some(h), Some(l)) = (self.high_score, self.low_score) {
            if h <= l {
                return Err(Error::invalid("prompt params", "high score must exceed low score"));
            }
        }
        Ok(())
    }
}

fn pick<T: Clone, R: Rng + ?Sized>(rng: &mut R, domain: &[T]) -> T {
    domain[rng.gen_range(0..domain.len())].clone()
}

/// Draws template parameters uniformly from their domains; both flags are
/// Bernoulli draws taken for every category.
pub fn sample_params<R: Rng + ?Sized>(
    category: Category,
    topics: TopicPair,
    domains: &ParamDomains,
    rng: &mut R,
) -> PromptParams {
    let u = uses(category);
    let task = domains.tasks(category).filter(|_| u.task).map(|t| pick(rng, t));
    let query_type = u.query_type.then(|| pick(rng, &domains.query_types));
    let query_length = u.query_length.then(|| {
        let lengths = if category == Category::LongShort {
            &domains.long_short_query_lengths
        } else {
            &domains.short_long_query_lengths
        };
        pick(rng, lengths)
    });
    let clarity = u.clarity.then(|| pick(rng, &domains.clarities));
    let num_words = u.num_words.then(|| pick(rng, &domains.num_words));
    let difficulty = u.difficulty.then(|| pick(rng, &domains.difficulties));
    let unit = u.unit.then(|| pick(rng, &domains.units));
    let high_score = u.scores.then(|| pick(rng, &domains.high_scores));
    let low_score = u.scores.then(|| pick(rng, &domains.low_scores));
    let lexical_overlap_flag = rng.gen_bool(domains.lexical_overlap_probability);
    let local_flag = rng.gen_bool(domains.local_flag_probability);
    PromptParams {
        category,
        task,
        query_type,
        query_length,
        clarity,
        lexical_overlap_flag,
        num_words,
        difficulty,
        local_flag,
        unit,
        high_score,
        low_score,
        topics,
    }
}

fn topics_clause(t: &TopicPair) -> String {
    match &t.second {
        Some(second) => format!("{} and {}", t.first, second),
        None => t.first.clone(),
    }
}

/// Substitutes every placeholder of the category template.
pub fn render_prompt(params: &PromptParams) -> Result<String> {
    params.validate()?;
    let category = params.category;
    let local = if category == Category::Sts { LOCAL_INSTRUCTION_STS } else { LOCAL_INSTRUCTION };

    let mut out = String::with_capacity(2048);
    for line in template(category).lines() {
        if line == "- {local-flag}" && !params.local_flag {
            continue;
        }
        let line = if params.local_flag {
            line.replace("{local-flag}", local)
        } else {
            line.replace(" {local-flag}", "").replace("{local-flag}", "")
        };
        out.push_str(&substitute(&line, params)?);
        out.push('\n');
    }
    Ok(out)
}

fn substitute(line: &str, p: &PromptParams) -> Result<String> {
    let mut out = String::with_capacity(line.len() + 64);
    let mut rest = line;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        let end = after.find('}').ok_or(Error::MissingParameter("unterminated placeholder"))?;
        let value: String = match &after[..end] {
            "task" => p.task.clone().ok_or(Error::MissingParameter("task"))?,
            "topics" => topics_clause(&p.topics),
            "query-type" => p.query_type.ok_or(Error::MissingParameter("query-type"))?.as_str().into(),
            "query-length" => p.query_length.clone().ok_or(Error::MissingParameter("query-length"))?,
            "clarity" => p.clarity.ok_or(Error::MissingParameter("clarity"))?.as_str().into(),
            "lexical-overlap" => {
                if p.lexical_overlap_flag {
                    LEXICAL_OVERLAP_CLAUSE.into()
                } else {
                    String::new()
                }
            }
            "num-words" => p.num_words.ok_or(Error::MissingParameter("num-words"))?.to_string(),
            "difficulty" => p.difficulty.ok_or(Error::MissingParameter("difficulty"))?.as_str().into(),
            "unit" => p.unit.ok_or(Error::MissingParameter("unit"))?.as_str().into(),
            "high-score" => format!("{}", p.high_score.ok_or(Error::MissingParameter("high-score"))?),
            "low-score" => format!("{}", p.low_score.ok_or(Error::MissingParameter("low-score"))?),
            _ => return Err(Error::MissingParameter("unknown placeholder")),
        };
        out.push_str(&value);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Nano,
    Mini,
    Full,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Nano, Tier::Mini, Tier::Full];

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Nano => "nano",
            Tier::Mini => "mini",
            Tier::Full => "full",
        }
    }

    pub fn from_score(score: u32) -> Tier {
        match score {
            0..=2 => Tier::Nano,
            3..=5 => Tier::Mini,
            _ => Tier::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardnessTier {
    pub tier: Tier,
    pub score: u32,
}

/// Point score over difficulty, clarity, lexical overlap, length and query
/// type, cut into three tiers (≤2 nano, 3–5 mini, ≥6 full). The overlap flag
/// only counts where the template renders it.
pub fn hardness_tier(p: &PromptParams) -> HardnessTier {
    let mut score = 0;
    score += p.difficulty.map_or(0, Difficulty::points);
    score += p.clarity.map_or(0, Clarity::points);
    if p.lexical_overlap_flag && uses(p.category).lexical_overlap {
        score += 2;
    }
    score += match p.num_words {
        Some(n) if n >= 500 => 2,
        Some(n) if n >= 300 => 1,
        _ => 0,
    };
    if p.query_length.as_deref() == Some(LONG_QUERY_LENGTH) {
        score += 1;
    }
    score += p.query_type.map_or(0, QueryType::points);
    HardnessTier { tier: Tier::from_score(score), score }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn topics() -> TopicPair {
        TopicPair { first: "/Sports".into(), second: Some("/Sports/Cycling".into()) }
    }

    fn short_long(
        difficulty: Difficulty,
        clarity: Clarity,
        overlap: bool,
        words: u32,
        qt: QueryType,
    ) -> PromptParams {
        PromptParams {
            category: Category::ShortLong,
            task: Some("Given a question, retrieve documents that can help to answer the question.".into()),
            query_type: Some(qt),
            query_length: Some("7 to 17 words".into()),
            clarity: Some(clarity),
            lexical_overlap_flag: overlap,
            num_words: Some(words),
            difficulty: Some(difficulty),
            local_flag: false,
            unit: None,
            high_score: None,
            low_score: None,
            topics: topics(),
        }
    }

    #[test]
    fn tier_examples() {
        let p = short_long(Difficulty::Layman, Clarity::Clear, false, 50, QueryType::Common);
        assert_eq!(hardness_tier(&p), HardnessTier { tier: Tier::Nano, score: 0 });
        let p = short_long(Difficulty::Master, Clarity::Ambiguous, true, 500, QueryType::ExtremelyLongTail);
        assert_eq!(hardness_tier(&p), HardnessTier { tier: Tier::Full, score: 11 });
        let p = short_long(Difficulty::Bachelor, Clarity::WithEffort, false, 300, QueryType::Common);
        assert_eq!(hardness_tier(&p), HardnessTier { tier: Tier::Mini, score: 4 });
    }

    #[test]
    fn short_long_without_overlap() {
        let p = short_long(Difficulty::Layman, Clarity::Clear, false, 50, QueryType::Common);
        let text = render_prompt(&p).unwrap();
        assert!(text.contains("a random user search query"));
        assert!(!text.contains("Minimum lexical overlap"));
        assert!(!text.contains("Flemish"));
        assert!(text.contains("should be about /Sports and /Sports/Cycling."));
        assert!(text.contains("should be Common, 7 to 17 words, Clear."));
        let mut q = p.clone();
        q.lexical_overlap_flag = true;
        assert!(render_prompt(&q).unwrap().contains("Clear and have Minimum lexical overlap with the \"positive document\"."));
    }

    #[test]
    fn long_short_local_flag_closes_guidelines() {
        let mut r = rng::seeded(1);
        let mut p = sample_params(Category::LongShort, topics(), &ParamDomains::default(), &mut r);
        p.local_flag = true;
        let text = render_prompt(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let n = lines.len();
        assert_eq!(lines[n - 2], format!("- {LOCAL_INSTRUCTION}"));
        assert!(lines[n - 1].starts_with("Your output must always be a JSON object only"));
        p.local_flag = false;
        let text = render_prompt(&p).unwrap();
        assert!(!text.contains("Flemish"));
        assert_eq!(text.lines().count(), n - 1);
    }

    #[test]
    fn sts_substitution() {
        let p = PromptParams {
            category: Category::Sts,
            task: None,
            query_type: None,
            query_length: None,
            clarity: None,
            lexical_overlap_flag: false,
            num_words: None,
            difficulty: Some(Difficulty::HighSchool),
            local_flag: false,
            unit: Some(Unit::Sentence),
            high_score: Some(4.5),
            low_score: Some(3.0),
            topics: TopicPair { first: "/Food".into(), second: None },
        };
        let text = render_prompt(&p).unwrap();
        assert!(text.contains("The similarity score between S1 and S2 should be 4.5."));
        assert!(text.contains("The similarity score between S1 and S3 should be 3."));
        assert!(text.contains("The sentences should be about /Food.\n"));
        assert!(text.contains("write a sentence triple"));
        let mut local = p.clone();
        local.local_flag = true;
        assert!(render_prompt(&local).unwrap().contains(&format!("about /Food. {LOCAL_INSTRUCTION_STS}")));
    }

    #[test]
    fn sts_params_shape() {
        let mut r = rng::seeded(9);
        let p = sample_params(Category::Sts, topics(), &ParamDomains::default(), &mut r);
        assert!(p.unit.is_some() && p.high_score.is_some() && p.low_score.is_some());
        assert!(p.query_type.is_none() && p.task.is_none());
        p.validate().unwrap();
    }

    #[test]
    fn missing_parameter_is_reported() {
        let mut p = short_long(Difficulty::Layman, Clarity::Clear, false, 50, QueryType::Common);
        p.num_words = None;
        assert_eq!(render_prompt(&p), Err(Error::MissingParameter("num-words")));
    }

    #[test]
    fn all_categories_render_without_placeholders() {
        let d = ParamDomains::default();
        d.validate().unwrap();
        let mut r = rng::seeded(42);
        for c in Category::ALL {
            for _ in 0..200 {
                let p = sample_params(c, topics(), &d, &mut r);
                let text = render_prompt(&p).unwrap();
                assert!(!text.contains('{') && !text.contains('}'), "{c}: {text}");
                assert_eq!(text, render_prompt(&p).unwrap());
            }
        }
    }

    #[test]
    fn flag_rates() {
        let d = ParamDomains::default();
        let mut r = rng::seeded(2024);
        let n = 10_000;
        let (mut local, mut overlap) = (0, 0);
        for i in 0..n {
            let c = Category::ALL[i % 5];
            let p = sample_params(c, topics(), &d, &mut r);
            local += p.local_flag as usize;
            overlap += p.lexical_overlap_flag as usize;
        }
        let local = local as f64 / n as f64;
        let overlap = overlap as f64 / n as f64;
        assert!((0.27..=0.33).contains(&local), "{local}");
        assert!((0.47..=0.53).contains(&overlap), "{overlap}");
    }
}
