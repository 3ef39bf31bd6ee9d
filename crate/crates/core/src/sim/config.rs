//! Experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelState, C64};
use crate::codes;
use crate::error::{Error, Result};
use crate::gf::{GfField, GfSymbol};
use crate::ldpc::{lift_to_gfq, ParityCheckMatrix};
use crate::pcd::{CheckKernel, StopRule};

/// Relay processing schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Per-symbol XOR detection, no code.
    UncodedXor,
    /// Per-symbol detection on the adaptive second-stage map, no code.
    UncodedCnc,
    /// Sum-product decoding of the XOR word on the shared code.
    XorBp,
    /// Pairwise check decoding on the first-stage map, hard decision on the
    /// second-stage map.
    TsCncPcd,
    /// Pairwise check decoding with the second-stage map for both roles.
    OneStageCncPcd,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::UncodedXor,
        Scheme::UncodedCnc,
        Scheme::XorBp,
        Scheme::TsCncPcd,
        Scheme::OneStageCncPcd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::UncodedXor => "uncoded-xor",
            Scheme::UncodedCnc => "uncoded-cnc",
            Scheme::XorBp => "xor-bp",
            Scheme::TsCncPcd => "ts-cnc-pcd",
            Scheme::OneStageCncPcd => "one-stage-cnc-pcd",
        }
    }

    pub fn is_coded(self) -> bool {
        !matches!(self, Scheme::UncodedXor | Scheme::UncodedCnc)
    }

    pub fn uses_catalog(self) -> bool {
        matches!(self, Scheme::UncodedCnc | Scheme::TsCncPcd | Scheme::OneStageCncPcd)
    }
}

/// Channel gains for the multiple-access phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelMode {
    /// Fixed gains given as `[re, im]`.
    Deterministic { h_ac: [f64; 2], h_bc: [f64; 2] },
    /// Independent unit-power Rayleigh gains per frame.
    Rayleigh {},
}

impl ChannelMode {
    pub fn fixed_state(&self, sigma2: f64) -> Option<ChannelState> {
        match *self {
            ChannelMode::Deterministic { h_ac, h_bc } => Some(ChannelState::new(
                C64::new(h_ac[0], h_ac[1]),
                C64::new(h_bc[0], h_bc[1]),
                sigma2,
            )),
            ChannelMode::Rayleigh {} => None,
        }
    }
}

/// Source of the binary base matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum CodeSource {
    /// The built-in length-504 (3,6)-regular code.
    Regular504,
    /// The built-in 4 x 6 example code.
    Toy,
    /// An alist file on disk.
    Alist(PathBuf),
}

impl CodeSource {
    pub fn load(&self) -> Result<ParityCheckMatrix> {
        match self {
            CodeSource::Regular504 => Ok(codes::regular_504()),
            CodeSource::Toy => Ok(codes::toy_code()),
            CodeSource::Alist(p) => ParityCheckMatrix::parse_alist(&std::fs::read_to_string(p)?),
        }
    }
}

/// Check-kernel choice as written in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    #[default]
    Auto,
    Tabs,
    Pair,
}

impl From<KernelName> for CheckKernel {
    fn from(k: KernelName) -> Self {
        match k {
            KernelName::Auto => CheckKernel::Auto,
            KernelName::Tabs => CheckKernel::Tabs,
            KernelName::Pair => CheckKernel::PairConvolution,
        }
    }
}

/// Stop-rule choice as written in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRuleName {
    HardMap,
    #[default]
    Both,
}

impl From<StopRuleName> for StopRule {
    fn from(s: StopRuleName) -> Self {
        match s {
            StopRuleName::HardMap => StopRule::HardMap,
            StopRuleName::Both => StopRule::Both,
        }
    }
}

fn default_frame_errors() -> usize {
    100
}
fn default_max_iter() -> usize {
    30
}
fn default_code() -> CodeSource {
    CodeSource::Regular504
}
fn default_q() -> usize {
    4
}
fn default_eta() -> u8 {
    2
}
fn default_batch() -> usize {
    64
}
fn default_true() -> bool {
    true
}

/// A full experiment: schemes, channel, SNR grid and budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub channel: ChannelMode,
    pub snr_db: Vec<f64>,
    /// Frame budget per (SNR, scheme).
    pub max_frames: usize,
    /// Stop a point early after this many relay frame errors.
    #[serde(default = "default_frame_errors")]
    pub max_frame_errors: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_code")]
    pub code: CodeSource,
    /// Field order of both codes.
    #[serde(default = "default_q")]
    pub q: usize,
    /// Nonzero value replacing the ones of the binary base matrix for code A.
    #[serde(default = "default_eta")]
    pub eta: u8,
    /// Lift for code B; defaults to `eta`.
    #[serde(default)]
    pub xi: Option<u8>,
    /// Code rate for the SNR definition of coded schemes; defaults to the
    /// code dimension over length.
    #[serde(default)]
    pub rate: Option<f64>,
    /// Run the broadcast phase and decode at both sources.
    #[serde(default = "default_true")]
    pub decode_sources: bool,
    #[serde(default)]
    pub kernel: KernelName,
    /// Convergence test of the pairwise check decoder.
    #[serde(default)]
    pub stop_rule: StopRuleName,
    /// Frames per deterministic batch; the stop rule is checked between
    /// batches.
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.schemes.is_empty() {
            return bad("at least one scheme is required");
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("snr_db must be a non-empty list of finite values");
        }
        if self.max_frames == 0 || self.max_frame_errors == 0 || self.batch == 0 {
            return bad("frame budget, error target and batch must be at least 1");
        }
        GfField::new(self.q).map_err(|e| Error::Config(e.to_string()))?;
        for v in [Some(self.eta), self.xi].into_iter().flatten() {
            if v == 0 || v as usize >= self.q {
                return bad("lift values must be nonzero field elements");
            }
        }
        if self.schemes.contains(&Scheme::XorBp) && self.xi.is_some_and(|x| x != self.eta) {
            return bad("xor-bp needs identical codes (xi equal to eta)");
        }
        if self.schemes.iter().any(|s| s.uses_catalog()) && self.q != 4 {
            return bad("adaptive mapping schemes use the 4-ary catalog (q = 4)");
        }
        if let Some(r) = self.rate {
            if !(r > 0.0 && r <= 1.0) {
                return bad("rate must lie in (0, 1]");
            }
        }
        if let ChannelMode::Deterministic { h_ac, h_bc } = self.channel {
            if h_ac.iter().chain(&h_bc).any(|v| !v.is_finite()) {
                return bad("gains must be finite");
            }
            if h_ac == [0.0, 0.0] && h_bc == [0.0, 0.0] {
                return bad("both gains are zero");
            }
        }
        Ok(())
    }

    /// Lifted parity-check matrices for both sources.
    pub fn codes(&self) -> Result<(ParityCheckMatrix, ParityCheckMatrix)> {
        let base = self.code.load()?;
        let field = GfField::new(self.q)?;
        let ha = lift_to_gfq(&base, GfSymbol(self.eta), &field)?;
        let hb = lift_to_gfq(&base, GfSymbol(self.xi.unwrap_or(self.eta)), &field)?;
        Ok((ha, hb))
    }
}
