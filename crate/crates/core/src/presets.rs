//! Bundled configurations for the worked examples.

use crate::codes::{example_rs_4_2, lrc_field, lrc_generator, parity_check_3_2, LinearCode, LrcProfile};
use crate::lrc_protocol::{plan_lrc_retrieval, LrcRetrievalPlan};
use crate::protocol::{DssConfig, ProtocolError};

#[derive(Clone, Debug)]
pub enum PresetScheme {
    Mds(DssConfig),
    Lrc { code: LinearCode, plan: LrcRetrievalPlan },
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub scheme: PresetScheme,
    /// Requested file, 0-based.
    pub file: usize,
}

pub const PRESET_NAMES: [&str; 3] = ["example-3-2", "example-4-2", "lrc-8-4-2-3"];

pub fn preset(name: &str) -> Result<Preset, ProtocolError> {
    let p = match name {
        "example-3-2" => Preset {
            name: "example-3-2",
            summary: "[3,2] parity-check code over GF(4), t = 1, m = 2",
            scheme: PresetScheme::Mds(DssConfig::new(parity_check_3_2(), 1, 2, 1)?),
            file: 0,
        },
        "example-4-2" => Preset {
            name: "example-4-2",
            summary: "[4,2] self-dual Reed-Solomon code over GF(4), t = 2, m = 2",
            scheme: PresetScheme::Mds(DssConfig::new(example_rs_4_2(), 2, 2, 1)?),
            file: 0,
        },
        "lrc-8-4-2-3" => {
            let field = lrc_field(8, 4)?;
            let (code, profile): (LinearCode, LrcProfile) = lrc_generator(field, 8, 4, 2, 3)?;
            let plan = plan_lrc_retrieval(&code, &profile, 2, 2, 1)?;
            Preset {
                name: "lrc-8-4-2-3",
                summary: "[8,4] LRC with r = 2, rho = 3, t = 2, m = 2",
                scheme: PresetScheme::Lrc { code, plan },
                file: 0,
            }
        }
        other => {
            return Err(ProtocolError::InvalidConfig(format!(
                "unknown preset '{other}' (known: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(p)
}
