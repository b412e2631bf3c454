use embedforge_core::prompts::PromptParams;
use embedforge_core::{Category, StsTargets, Triplet};
use serde_json::Value;

use crate::io::{nfc, parse_triplet};

/// Drops a surrounding markdown code fence (with or without a language tag).
pub fn strip_fences(text: &str) -> &str {
    let t = text.trim();
    let Some(rest) = t.strip_prefix("```") else { return t };
    let Some(body) = rest.strip_suffix("```") else { return t };
    match body.split_once('\n') {
        Some((tag, inner)) if !tag.trim().contains(['{', '[']) => inner.trim(),
        _ => body.trim(),
    }
}

/// Parses a model reply into a triplet. The reply must be one JSON object
/// with exactly the category's keys, each a non-empty string. STS targets
/// come from the prompt parameters.
pub fn parse_response(text: &str, params: &PromptParams, id: &str) -> Result<Triplet, String> {
    let category = params.category;
    let value: Value = serde_json::from_str(strip_fences(text)).map_err(|e| format!("reply is not JSON: {e}"))?;
    let obj = value.as_object().ok_or("reply is not a JSON object")?;
    let keys = category.response_keys();
    if let Some(extra) = obj.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(format!("unexpected key {extra:?}"));
    }
    let mut fields = serde_json::Map::new();
    for k in keys {
        match obj.get(k) {
            Some(Value::String(s)) if !s.trim().is_empty() => {
                fields.insert(k.to_string(), Value::String(nfc(s.trim())));
            }
            Some(_) => return Err(format!("key {k:?} is not a non-empty string")),
            None => return Err(format!("missing key {k:?}")),
        }
    }
    if category == Category::Sts {
        let (Some(high), Some(low)) = (params.high_score, params.low_score) else {
            return Err("sts parameters lack target scores".into());
        };
        let t = StsTargets { high, low };
        fields.insert("high-score".into(), t.high.into());
        fields.insert("low-score".into(), t.low.into());
    }
    parse_triplet(&Value::Object(fields), Some(category), id)
}
