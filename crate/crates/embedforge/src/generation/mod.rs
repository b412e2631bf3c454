//! The LLM generation campaign: prompt slots are sampled deterministically,
//! routed to a model by hardness tier, validated against the category's
//! response schema and journaled so an interrupted run can resume.

mod campaign;
mod config;
mod journal;
mod response;
mod transport;

pub use campaign::{generate_triplet, run_campaign, slot_prompt, Attempted, CampaignOutcome, CampaignStats, SlotPrompt, TierStats};
pub use config::{load_campaign_config, load_param_domains, CampaignConfig, ModelRoute, TierRoute};
pub use journal::{read_journal, JournalEntry, JournalWriter, Status};
pub use response::{parse_response, strip_fences};
pub(crate) use transport::{agent, classify};
pub use transport::{Completion, CompletionRequest, HttpTransport, Transport, TransportFailure, Usage, API_KEY_ENV};
