use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::mpsc;
use std::time::Duration;

use embedforge_core::prompts::{hardness_tier, render_prompt, sample_params, HardnessTier, ParamDomains, PromptParams, Tier, TEMPLATE_VERSION};
use embedforge_core::rng::{stream, stream_id};
use embedforge_core::topics::{TopicDistribution, TopicSampler};
use embedforge_core::{Category, Triplet};
use serde::Serialize;

use super::config::{CampaignConfig, TierRoute};
use super::journal::{read_journal, JournalEntry, JournalWriter, Status};
use super::response::parse_response;
use super::transport::{CompletionRequest, Transport, TransportFailure, Usage};
use crate::error::{Error, Result};
use crate::io::{parse_triplet, sha256_hex, triplet_to_json};

/// A fully determined prompt for one campaign slot.
#[derive(Debug, Clone)]
pub struct SlotPrompt {
    pub category: Category,
    pub slot: u64,
    pub id: String,
    pub params: PromptParams,
    pub prompt: String,
    pub prompt_hash: String,
    pub hardness: HardnessTier,
}

/// Slot `k` of a category always yields the same prompt for a given seed,
/// independent of which other slots were issued.
pub fn slot_prompt(
    category: Category,
    slot: u64,
    seed: u64,
    sampler: &TopicSampler,
    domains: &ParamDomains,
) -> Result<SlotPrompt> {
    let mut rng = stream(seed, stream_id(category.index(), slot));
    let topics = sampler.sample(&mut rng);
    let params = sample_params(category, topics, domains, &mut rng);
    let prompt = render_prompt(&params)?;
    Ok(SlotPrompt {
        category,
        slot,
        id: format!("{}-{slot:06}", category.as_str()),
        prompt_hash: sha256_hex(prompt.as_bytes()),
        hardness: hardness_tier(&params),
        params,
        prompt,
    })
}

/// Outcome of one slot with its request accounting.
#[derive(Debug)]
pub struct Attempted {
    pub result: Result<Triplet>,
    pub requests: u32,
    pub schema_failures: u32,
    pub transport_failures: u32,
    pub usage: Usage,
    pub cost: f64,
}

impl Attempted {
    pub fn retries(&self) -> u32 {
        self.requests.saturating_sub(1)
    }
}

fn provenance(t: &mut Triplet, slot: &SlotPrompt, route: &TierRoute) {
    let topics = match &slot.params.topics.second {
        Some(second) => format!("{}|{second}", slot.params.topics.first),
        None => slot.params.topics.first.clone(),
    };
    let meta = &mut t.meta;
    meta.insert("model".into(), route.model.clone());
    meta.insert("tier".into(), slot.hardness.tier.as_str().into());
    meta.insert("hardness".into(), slot.hardness.score.to_string());
    meta.insert("topics".into(), topics);
    meta.insert("params".into(), serde_json::to_string(&slot.params).expect("params serialize"));
    meta.insert("prompt_hash".into(), slot.prompt_hash.clone());
    meta.insert("template_version".into(), TEMPLATE_VERSION.into());
}

/// Requests a completion and parses it, retrying the same prompt on schema
/// failures and transient transport errors up to `route.max_retries` times.
pub fn generate_triplet(transport: &dyn Transport, slot: &SlotPrompt, route: &TierRoute, temperature: f64) -> Attempted {
    let req = CompletionRequest {
        endpoint: &route.endpoint,
        model: &route.model,
        prompt: &slot.prompt,
        temperature,
        timeout: route.timeout(),
    };
    let mut out = Attempted {
        result: Err(Error::Transport("no attempt made".into())),
        requests: 0,
        schema_failures: 0,
        transport_failures: 0,
        usage: Usage::default(),
        cost: 0.0,
    };
    let mut backoff = route.backoff_ms;
    while out.requests <= route.max_retries {
        out.requests += 1;
        match transport.complete(&req) {
            Ok(c) => {
                out.usage.add(c.usage);
                out.cost += route.cost(c.usage.prompt_tokens, c.usage.completion_tokens);
                match parse_response(&c.text, &slot.params, &slot.id) {
                    Ok(mut t) => {
                        provenance(&mut t, slot, route);
                        out.result = Ok(t);
                        return out;
                    }
                    Err(reason) => {
                        log::debug!("{}: schema failure on attempt {}: {reason}", slot.id, out.requests);
                        out.schema_failures += 1;
                        out.result = Err(Error::Schema(format!("{}: {reason}", slot.id)));
                    }
                }
            }
            Err(TransportFailure::Retryable(m)) => {
                log::debug!("{}: transient failure on attempt {}: {m}", slot.id, out.requests);
                out.transport_failures += 1;
                out.result = Err(Error::Transport(format!("{}: {m}", slot.id)));
                if out.requests <= route.max_retries && backoff > 0 {
                    std::thread::sleep(Duration::from_millis(backoff));
                    backoff = backoff.saturating_mul(2);
                }
            }
            Err(TransportFailure::Fatal(m)) => {
                out.transport_failures += 1;
                out.result = Err(Error::Transport(format!("{}: {m}", slot.id)));
                return out;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TierStats {
    pub requests: u64,
    pub failures: u64,
    pub slots_ok: u64,
    pub slots_failed: u64,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CampaignStats {
    pub tiers: BTreeMap<Tier, TierStats>,
    pub requests: u64,
    pub cost: f64,
    /// Slots restored from the journal instead of requested.
    pub replayed: u64,
}

impl CampaignStats {
    fn record(&mut self, tier: Tier, requests: u32, failures: u32, ok: bool, cost: f64) {
        let t = self.tiers.entry(tier).or_default();
        t.requests += requests as u64;
        t.failures += failures as u64;
        if ok {
            t.slots_ok += 1;
        } else {
            t.slots_failed += 1;
        }
        t.cost += cost;
        self.requests += requests as u64;
        self.cost += cost;
    }
}

#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    /// Successful triplets ordered by category, then slot.
    pub triplets: Vec<Triplet>,
    pub stats: CampaignStats,
}

fn tier_from_str(s: &str) -> Option<Tier> {
    Tier::ALL.into_iter().find(|t| t.as_str() == s)
}

/// Runs (or resumes) a campaign until every category has its target count
/// of valid triplets. Failed slots are replaced by fresh ones; a persistent
/// transport error or an exhausted budget stops dispatch, waits for the
/// requests already in flight, and returns the error with the journal
/// holding every finished slot.
pub fn run_campaign(
    cfg: &CampaignConfig,
    dist: &TopicDistribution,
    domains: &ParamDomains,
    transport: &dyn Transport,
    journal_path: &Path,
) -> Result<CampaignOutcome> {
    cfg.validate()?;
    domains.validate()?;
    let sampler = dist.sampler()?;
    let mut stats = CampaignStats::default();

    let mut done: BTreeSet<(Category, u64)> = BTreeSet::new();
    let mut ok_triplets: BTreeMap<(Category, u64), Triplet> = BTreeMap::new();
    for e in read_journal(journal_path)? {
        if !done.insert((e.category, e.slot)) {
            log::warn!("journal repeats slot {} {}; keeping the first entry", e.category, e.slot);
            continue;
        }
        let tier = tier_from_str(&e.tier).ok_or_else(|| Error::Journal {
            path: journal_path.to_path_buf(),
            reason: format!("unknown tier {:?}", e.tier),
        })?;
        let ok = e.status == Status::Ok;
        let failures = if ok { e.attempt.saturating_sub(1) } else { e.attempt };
        stats.record(tier, e.attempt, failures, ok, e.cost);
        stats.replayed += 1;
        if ok {
            let value = e.triplet.as_ref().ok_or_else(|| Error::Journal {
                path: journal_path.to_path_buf(),
                reason: format!("ok entry for slot {} has no triplet", e.slot),
            })?;
            let t = parse_triplet(value, Some(e.category), "").map_err(|reason| Error::Journal {
                path: journal_path.to_path_buf(),
                reason: format!("slot {}: {reason}", e.slot),
            })?;
            ok_triplets.insert((e.category, e.slot), t);
        }
    }

    let mut writer = JournalWriter::open(journal_path)?;
    let mut stop: Option<Error> = None;

    std::thread::scope(|scope| -> Result<()> {
        let (tx, rx) = mpsc::channel::<(SlotPrompt, Attempted)>();
        let mut in_flight: BTreeMap<Tier, usize> = BTreeMap::new();

        for (&category, &target) in &cfg.targets {
            let mut ok = ok_triplets.range((category, 0)..=(category, u64::MAX)).count();
            let mut cat_in_flight = 0usize;
            let mut next_slot = 0u64;
            let mut pending: Option<SlotPrompt> = None;

            loop {
                while stop.is_none() && ok + cat_in_flight < target {
                    let slot = match pending.take() {
                        Some(p) => p,
                        None => {
                            while done.contains(&(category, next_slot)) {
                                next_slot += 1;
                            }
                            next_slot += 1;
                            slot_prompt(category, next_slot - 1, cfg.seed, &sampler, domains)?
                        }
                    };
                    let tier = slot.hardness.tier;
                    let route = cfg.route.get(tier);
                    if in_flight.get(&tier).copied().unwrap_or(0) >= route.max_in_flight {
                        pending = Some(slot);
                        break;
                    }
                    if let Some(limit) = cfg.budget.filter(|l| stats.cost >= *l) {
                        stop = Some(Error::BudgetExceeded { spent: stats.cost, limit });
                        break;
                    }
                    *in_flight.entry(tier).or_default() += 1;
                    cat_in_flight += 1;
                    let tx = tx.clone();
                    let temperature = cfg.temperature;
                    scope.spawn(move || {
                        let outcome = generate_triplet(transport, &slot, route, temperature);
                        let _ = tx.send((slot, outcome));
                    });
                }
                if cat_in_flight == 0 {
                    break;
                }
                let (slot, outcome) = rx.recv().expect("workers hold a sender");
                let tier = slot.hardness.tier;
                *in_flight.get_mut(&tier).expect("tier was counted") -= 1;
                cat_in_flight -= 1;
                let route = cfg.route.get(tier);
                let entry = |status, triplet, error| JournalEntry {
                    category,
                    slot: slot.slot,
                    prompt_hash: slot.prompt_hash.clone(),
                    status,
                    attempt: outcome.requests,
                    tier: tier.as_str().into(),
                    model: route.model.clone(),
                    triplet,
                    error,
                    usage: outcome.usage,
                    cost: outcome.cost,
                };
                let failures = outcome.schema_failures + outcome.transport_failures;
                match &outcome.result {
                    Ok(t) => {
                        writer.append(&entry(Status::Ok, Some(triplet_to_json(t)), None))?;
                        stats.record(tier, outcome.requests, failures, true, outcome.cost);
                        done.insert((category, slot.slot));
                        ok_triplets.insert((category, slot.slot), t.clone());
                        ok += 1;
                    }
                    Err(e @ Error::Schema(_)) => {
                        log::warn!("{}", e);
                        writer.append(&entry(Status::Failed, None, Some(e.to_string())))?;
                        stats.record(tier, outcome.requests, failures, false, outcome.cost);
                        done.insert((category, slot.slot));
                    }
                    Err(e) => {
                        // Left out of the journal so a resume retries the slot.
                        stats.requests += outcome.requests as u64;
                        stats.cost += outcome.cost;
                        if stop.is_none() {
                            stop = Some(Error::Transport(e.to_string()));
                        }
                    }
                }
                if let Some(limit) = cfg.budget.filter(|l| stats.cost >= *l) {
                    if stop.is_none() && ok < target {
                        stop = Some(Error::BudgetExceeded { spent: stats.cost, limit });
                    }
                }
            }
            if stop.is_some() {
                break;
            }
        }
        Ok(())
    })?;

    if let Some(e) = stop {
        return Err(e);
    }
    let mut triplets = Vec::new();
    for (&category, &target) in &cfg.targets {
        triplets.extend(
            ok_triplets.range((category, 0)..=(category, u64::MAX)).take(target).map(|(_, t)| t.clone()),
        );
    }
    Ok(CampaignOutcome { triplets, stats })
}
