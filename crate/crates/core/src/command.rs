use serde::{Deserialize, Serialize};

use crate::gesture::{GestureKind, LongPressTarget};
use crate::render::DisplayModel;

/// Everything the engine asks its host (UI, gateway client, log writer) to
/// do. Serialized one per line in command traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EngineCommand {
    ShowConfirmWidget,
    SnapToOneSentence,
    RequestGeneration { request_id: u64, paragraph: String },
    CancelGeneration { request_id: u64 },
    Commit { revision: u64, kind: GestureKind, words: i64 },
    Revert,
    LongPress { target: LongPressTarget },
    DisplayUpdate { model: DisplayModel },
}

impl EngineCommand {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("commands serialize")
    }
}
