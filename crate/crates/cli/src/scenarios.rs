//! Scripted sessions mirroring the study tasks: extend by one or three
//! sentences, shorten by one or three, and the two combinations. Each
//! records one task into an event log against the seeded mock provider.

use anyhow::{anyhow, Result};
use gesturetext::engine::EngineInput;
use gesturetext::gesture::DeviceProfile;
use gesturetext::log::{EventLog, LogHeader};
use gesturetext::render::Variant;
use gesturetext::sim::Recorder;
use gesturetext::text::LayoutConfig;
use gesturetext_gateway::{LatencyModel, MockProvider};

use crate::MockTokenSource;

pub const ENGINE_SEED: u64 = 42;
pub const MOCK_SEED: u64 = 7;
pub const LATENCY_SEED: u64 = 11;

pub const CLIMATE: &str = include_str!("../../../fixtures/texts/climate.txt");
pub const CLIMATE_INCOMPLETE: &str = include_str!("../../../fixtures/texts/climate_incomplete.txt");
pub const INTERNET: &str = include_str!("../../../fixtures/texts/internet.txt");
pub const INTERNET_INCOMPLETE: &str = include_str!("../../../fixtures/texts/internet_incomplete.txt");
pub const PHOTOSYNTHESIS: &str = include_str!("../../../fixtures/texts/photosynthesis.txt");
pub const TOMATOES: &str = include_str!("../../../fixtures/texts/tomatoes_irrelevant.txt");

type Rec = Recorder<MockTokenSource>;

pub struct Scenario {
    pub name: &'static str,
    pub text: &'static str,
    script: fn(&mut Rec) -> Result<u64>,
}

pub const ALL: [Scenario; 9] = [
    Scenario { name: "extend-one-sentence", text: CLIMATE, script: extend_one },
    Scenario { name: "extend-three-sentences", text: CLIMATE, script: extend_three },
    Scenario { name: "shorten-one-sentence", text: INTERNET, script: shorten_one },
    Scenario { name: "shorten-three-sentences", text: INTERNET, script: shorten_three },
    Scenario { name: "extend-two-remove-one", text: PHOTOSYNTHESIS, script: extend_two_remove_one },
    Scenario { name: "shorten-two-add-one", text: PHOTOSYNTHESIS, script: shorten_two_add_one },
    Scenario { name: "extend-incomplete", text: CLIMATE_INCOMPLETE, script: extend_one },
    Scenario { name: "remove-incomplete", text: INTERNET_INCOMPLETE, script: shorten_one },
    Scenario { name: "remove-irrelevant", text: TOMATOES, script: remove_irrelevant },
];

pub fn find(name: &str) -> Option<&'static Scenario> {
    ALL.iter().find(|s| s.name == name)
}

pub fn provider() -> MockProvider {
    MockProvider::seeded(MOCK_SEED).with_latency(LatencyModel::calibrated(), LATENCY_SEED)
}

impl Scenario {
    pub fn document(&self) -> &'static str {
        self.text.trim_end_matches('\n')
    }

    pub fn header(&self) -> LogHeader {
        LogHeader {
            task_id: self.name.to_string(),
            profile: DeviceProfile::default(),
            layout: LayoutConfig::default(),
            seed: ENGINE_SEED,
            variant: Variant::Bubbles,
            document: self.document().to_string(),
        }
    }

    pub fn record(&self) -> Result<(EventLog, String)> {
        let mut rec = Recorder::new(self.header(), MockTokenSource::new(provider()))?;
        rec.task_start(0, self.name)?;
        let t = (self.script)(&mut rec)?;
        rec.task_end(t + 10, self.name)?;
        let (log, engine) = rec.finish(t + 10)?;
        Ok((log, engine.document().text().to_string()))
    }
}

const THINK_MS: u64 = 800;

fn last_sentence(rec: &Rec) -> usize {
    rec.engine().document().sentences().len() - 1
}

fn words_in_sentence(rec: &Rec, index: usize) -> usize {
    rec.engine().document().words().iter().filter(|w| w.sentence == index).count()
}

/// Words the mock will stream for the next `n` requests.
fn upcoming_words(rec: &Rec, n: u64) -> usize {
    let first = rec.engine().next_request_id();
    (first..first + n).map(|id| provider().deltas(id, None).concat().split_whitespace().count()).sum()
}

fn confirm(rec: &mut Rec, t: u64) -> Result<u64> {
    let t = rec.drain()?.max(t) + THINK_MS;
    rec.feed(t, EngineInput::Confirm)?;
    Ok(t)
}

/// A quick flick: the sentence snap completes exactly one sentence.
fn flick(rec: &mut Rec, t: u64) -> Result<u64> {
    let s = last_sentence(rec);
    let end = rec.stretch(t, s, 3.0, 150, 3)?;
    if !rec.engine().track().is_some_and(|tr| tr.is_snapping() || tr.words_in_bubbles() > 0) {
        return Err(anyhow!("flick did not snap"));
    }
    confirm(rec, end)
}

/// A slow spread to exactly the length of the next `sentences` streamed sentences.
fn spread_sentences(rec: &mut Rec, t: u64, sentences: u64) -> Result<u64> {
    let words = upcoming_words(rec, sentences);
    let s = last_sentence(rec);
    let end = rec.stretch(t, s, words as f64, 600 * sentences, 12 * sentences as u32)?;
    confirm(rec, end)
}

/// A pinch that marks the last `sentences` sentences.
fn pinch_sentences(rec: &mut Rec, t: u64, sentences: usize) -> Result<u64> {
    let last = last_sentence(rec);
    let words: usize = (last + 1 - sentences..=last).map(|i| words_in_sentence(rec, i)).sum();
    let end = rec.stretch(t, last, -(words as f64), 1200, 12)?;
    confirm(rec, end)
}

fn extend_one(rec: &mut Rec) -> Result<u64> {
    flick(rec, THINK_MS)
}

fn extend_three(rec: &mut Rec) -> Result<u64> {
    spread_sentences(rec, THINK_MS, 3)
}

fn shorten_one(rec: &mut Rec) -> Result<u64> {
    pinch_sentences(rec, THINK_MS, 1)
}

fn shorten_three(rec: &mut Rec) -> Result<u64> {
    pinch_sentences(rec, THINK_MS, 3)
}

fn extend_two_remove_one(rec: &mut Rec) -> Result<u64> {
    let t = spread_sentences(rec, THINK_MS, 2)?;
    pinch_sentences(rec, t + THINK_MS, 1)
}

fn shorten_two_add_one(rec: &mut Rec) -> Result<u64> {
    let t = pinch_sentences(rec, THINK_MS, 2)?;
    flick(rec, t + THINK_MS)
}

/// Pinch anchored on the second sentence, which is off-topic.
fn remove_irrelevant(rec: &mut Rec) -> Result<u64> {
    let words = words_in_sentence(rec, 1);
    let end = rec.stretch(THINK_MS, 1, -(words as f64), 1200, 12)?;
    confirm(rec, end)
}
