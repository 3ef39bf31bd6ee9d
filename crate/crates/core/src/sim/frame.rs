//! One end-to-end frame: encode, multiple access, relay processing,
//! broadcast, and decoding at both sources.

use std::collections::HashMap;

use rand::Rng;

use crate::bp::BpDecoder;
use crate::catalog::MappingCatalog;
use crate::channel::{
    bc_transmit, ma_superimpose, sample_rayleigh_pair, snr_to_sigma2, ChannelState, Constellation, C64,
};
use crate::error::{Error, Result};
use crate::ldpc::{ParityCheckMatrix, SystematicEncoder};
use crate::mapping::{xor_map, ClusterMap};
use crate::outage::stream;
use crate::pcd::{init_messages, PcdDecoder, PcdGraph};
use crate::prob::{argmax, normalize};
use crate::tab::TabCache;

use super::config::{ChannelMode, ExperimentConfig, Scheme};

/// Outcome of one frame for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    /// Relay symbols per frame.
    pub symbols: usize,
    pub relay_symbol_errors: usize,
    pub relay_frame_error: bool,
    /// Source A's estimate of B's word was wrong; `None` when sources are
    /// not decoded.
    pub src_a_error: Option<bool>,
    pub src_b_error: Option<bool>,
    pub iterations: usize,
    pub converged: bool,
    /// Catalog indices `(first, second)` used at the relay.
    pub selection: Option<(usize, usize)>,
    /// The relay's broadcast word satisfies every hard-map row constraint.
    pub broadcast_satisfies: Option<bool>,
}

/// Everything shared by the frames of one experiment.
#[derive(Debug)]
pub struct FrameContext {
    cfg: ExperimentConfig,
    ha: ParityCheckMatrix,
    hb: ParityCheckMatrix,
    enc_a: SystematicEncoder,
    enc_b: SystematicEncoder,
    k_src: Constellation,
    catalog: MappingCatalog,
    xor: ClusterMap,
    coded_rate: f64,
    two_stage: HashMap<(usize, usize), PcdGraph>,
    one_stage: HashMap<usize, PcdGraph>,
}

impl FrameContext {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let (ha, hb) = cfg.codes()?;
        let enc_a = SystematicEncoder::new(&ha);
        let enc_b = SystematicEncoder::new(&hb);
        if enc_a.dimension() != enc_b.dimension() {
            return Err(Error::Config("the two codes have different dimensions".into()));
        }
        let coded_rate = cfg.rate.unwrap_or(enc_a.dimension() as f64 / ha.cols() as f64);
        snr_to_sigma2(0.0, coded_rate)?;
        let catalog = MappingCatalog::qpsk4();
        let cache = TabCache::new();
        let kernel = cfg.kernel.into();
        let mut two_stage = HashMap::new();
        let mut one_stage = HashMap::new();
        if cfg.schemes.contains(&Scheme::TsCncPcd) {
            for (j, block) in catalog.blocks().iter().enumerate() {
                for &i in block {
                    let g = PcdGraph::with_cache(
                        &ha,
                        &hb,
                        &catalog.first_stage()[i],
                        &catalog.second_stage()[j],
                        kernel,
                        &cache,
                    )?;
                    two_stage.insert((i, j), g);
                }
            }
        }
        if cfg.schemes.contains(&Scheme::OneStageCncPcd) {
            for (j, mh) in catalog.second_stage().iter().enumerate() {
                one_stage.insert(j, PcdGraph::with_cache(&ha, &hb, mh, mh, kernel, &cache)?);
            }
        }
        Ok(Self {
            k_src: Constellation::for_order(cfg.q),
            xor: xor_map(cfg.q)?,
            cfg: cfg.clone(),
            ha,
            hb,
            enc_a,
            enc_b,
            catalog,
            coded_rate,
            two_stage,
            one_stage,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn code_rate(&self) -> f64 {
        self.coded_rate
    }

    pub fn codes(&self) -> (&ParityCheckMatrix, &ParityCheckMatrix) {
        (&self.ha, &self.hb)
    }

    /// Noise variance per real dimension for `scheme` at `snr_db`; uncoded
    /// schemes carry one information symbol per channel use.
    pub fn sigma2(&self, scheme: Scheme, snr_db: f64) -> Result<f64> {
        snr_to_sigma2(snr_db, if scheme.is_coded() { self.coded_rate } else { 1.0 })
    }

    /// Runs frame `frame` of SNR point `point`. All randomness comes from a
    /// stream keyed by `(seed, point, frame)`; schemes at the same point see
    /// the same fades, messages and (for coded schemes) noise.
    pub fn run_frame(&self, scheme: Scheme, point: usize, frame: usize) -> Result<FrameResult> {
        let snr = self.cfg.snr_db[point];
        let mut rng = stream(self.cfg.seed, point as u64, frame as u64);
        self.run_frame_with(scheme, snr, &mut rng)
    }

    pub fn run_frame_with<R: Rng>(&self, scheme: Scheme, snr_db: f64, rng: &mut R) -> Result<FrameResult> {
        let sigma2 = self.sigma2(scheme, snr_db)?;
        let ch = match self.cfg.channel {
            ChannelMode::Rayleigh {} => {
                let (a, b) = sample_rayleigh_pair(rng);
                ChannelState::new(a, b, sigma2)
            }
            mode => mode.fixed_state(sigma2).expect("deterministic gains"),
        };
        let q = self.cfg.q;
        let kdim = self.enc_a.dimension();
        let info_a: Vec<u8> = (0..kdim).map(|_| rng.gen_range(0..q as u8)).collect();
        let info_b: Vec<u8> = (0..kdim).map(|_| rng.gen_range(0..q as u8)).collect();
        let (ca, cb) = if scheme.is_coded() {
            (self.enc_a.encode(&info_a)?.0, self.enc_b.encode(&info_b)?.0)
        } else {
            (info_a, info_b)
        };
        let xa = self.k_src.modulate(&ca)?;
        let xb = self.k_src.modulate(&cb)?;
        let y = ma_superimpose(&xa, &xb, &ch, rng)?;

        let selection = if scheme.uses_catalog() {
            let s = self.catalog.select(&ch, &self.k_src)?;
            Some((s.first_index, s.second_index))
        } else {
            None
        };
        let relay = self.relay(scheme, &y, &ch, selection)?;
        let mh = relay.hard_map;
        let truth: Vec<u16> = ca.iter().zip(&cb).map(|(&a, &b)| mh.get(a, b) as u16).collect();
        let relay_symbol_errors = truth.iter().zip(&relay.word).filter(|(t, w)| t != w).count();

        let (src_a_error, src_b_error) = if self.cfg.decode_sources {
            let k_bc = Constellation::for_order(mh.q_prime());
            let xc = k_bc.modulate(&relay.word.iter().map(|&s| s as u8).collect::<Vec<_>>())?;
            let ya = bc_transmit(&xc, ch.h_ac, ch.sigma2, rng)?;
            let yb = bc_transmit(&xc, ch.h_bc, ch.sigma2, rng)?;
            let est_b = self.source_decode(scheme, &ya, ch.h_ac, ch.sigma2, &k_bc, mh, &ca, true);
            let est_a = self.source_decode(scheme, &yb, ch.h_bc, ch.sigma2, &k_bc, mh, &cb, false);
            (Some(est_b != cb), Some(est_a != ca))
        } else {
            (None, None)
        };

        Ok(FrameResult {
            symbols: ca.len(),
            relay_symbol_errors,
            relay_frame_error: relay_symbol_errors > 0,
            src_a_error,
            src_b_error,
            iterations: relay.iterations,
            converged: relay.converged,
            selection,
            broadcast_satisfies: relay.satisfies,
        })
    }

    fn relay<'a>(
        &'a self,
        scheme: Scheme,
        y: &[C64],
        ch: &ChannelState,
        selection: Option<(usize, usize)>,
    ) -> Result<RelayOutput<'a>> {
        match scheme {
            Scheme::UncodedXor => Ok(self.detect(&self.xor, y, ch)?),
            Scheme::UncodedCnc => {
                let (_, j) = selection.expect("catalog scheme");
                self.detect(&self.catalog.second_stage()[j], y, ch)
            }
            Scheme::XorBp => {
                let u = init_messages(y, ch, &self.xor, &self.k_src)?;
                let out = BpDecoder::new(&self.ha).decode(&u, self.cfg.max_iter);
                Ok(RelayOutput {
                    word: out.word.iter().map(|&s| s as u16).collect(),
                    hard_map: &self.xor,
                    iterations: out.iterations,
                    converged: out.converged,
                    satisfies: Some(out.converged),
                })
            }
            Scheme::TsCncPcd | Scheme::OneStageCncPcd => {
                let (i, j) = selection.expect("catalog scheme");
                let g = if scheme == Scheme::TsCncPcd {
                    &self.two_stage[&(i, j)]
                } else {
                    &self.one_stage[&j]
                };
                let out = PcdDecoder::new(g)
                    .with_stop_rule(self.cfg.stop_rule.into())
                    .decode(y, ch, &self.k_src, self.cfg.max_iter)?;
                let satisfies = g.hard_word_satisfies(&out.word);
                Ok(RelayOutput {
                    word: out.word,
                    hard_map: g.hard_map(),
                    iterations: out.iterations,
                    converged: out.converged,
                    satisfies: Some(satisfies),
                })
            }
        }
    }

    /// Per-symbol MAP detection of the mapped symbol.
    fn detect<'a>(&self, map: &'a ClusterMap, y: &[C64], ch: &ChannelState) -> Result<RelayOutput<'a>> {
        let u = init_messages(y, ch, map, &self.k_src)?;
        let word = u.chunks_exact(map.q_prime()).map(|p| argmax(p) as u16).collect();
        Ok(RelayOutput {
            word,
            hard_map: map,
            iterations: 0,
            converged: true,
            satisfies: None,
        })
    }

    /// Estimates the partner's word from the broadcast observation and the
    /// node's own word. `own_is_a` says whether `own` is the first pair slot.
    #[allow(clippy::too_many_arguments)]
    fn source_decode(
        &self,
        scheme: Scheme,
        y: &[C64],
        gain: C64,
        sigma2: f64,
        k_bc: &Constellation,
        mh: &ClusterMap,
        own: &[u8],
        own_is_a: bool,
    ) -> Vec<u8> {
        let q = self.cfg.q;
        let mut lik = vec![0.0; k_bc.order()];
        let mut priors = vec![0.0; own.len() * q];
        for (n, (&yn, &c)) in y.iter().zip(own).enumerate() {
            k_bc.likelihoods(yn, gain, sigma2, &mut lik);
            let p = &mut priors[n * q..(n + 1) * q];
            for (v, out) in p.iter_mut().enumerate() {
                let k = if own_is_a { mh.get(c, v as u8) } else { mh.get(v as u8, c) };
                *out = lik[k];
            }
            normalize(p);
        }
        if scheme.is_coded() {
            let h = if own_is_a { &self.hb } else { &self.ha };
            BpDecoder::new(h).decode(&priors, self.cfg.max_iter).word
        } else {
            priors.chunks_exact(q).map(|p| argmax(p) as u8).collect()
        }
    }
}

struct RelayOutput<'a> {
    word: Vec<u16>,
    hard_map: &'a ClusterMap,
    iterations: usize,
    converged: bool,
    satisfies: Option<bool>,
}
