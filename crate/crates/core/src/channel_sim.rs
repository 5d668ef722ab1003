//! BPSK over AWGN and the Monte Carlo harness.
//!
//! Frame `f` of SNR point `s` draws its message and noise from a ChaCha12
//! stream keyed by `(seed, s, f)`, so results do not depend on worker
//! scheduling and runs with different constraint settings see identical
//! frames.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::bitlin::BitVec;
use crate::codes::{CodeError, CodeId, LinearCode};
use crate::constraints::{derive_constraints, ConstraintError};
use crate::decoder::{prepare_frame, DecodeBudget, GrandDecoder, ReceivedFrame};

/// Identifier recorded in reports for the per-frame generator.
pub const RNG_ALGORITHM: &str =
    "ChaCha12 (rand_chacha 0.9), key = seed || snr index || frame index (u64 LE), StandardNormal ziggurat";

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("invalid channel parameters: {0}")]
    Channel(String),
    #[error("invalid simulation config: {0}")]
    Config(String),
}

/// `σ² = 1 / (2·R·10^(Eb/N0 / 10))` for unit-energy BPSK.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    pub rate: f64,
    pub sigma: f64,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, rate: f64) -> Result<Self, SimError> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(SimError::Channel(format!("rate {rate} outside (0, 1]")));
        }
        if !ebn0_db.is_finite() {
            return Err(SimError::Channel(format!("Eb/N0 {ebn0_db} dB")));
        }
        let sigma = (1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt();
        if sigma <= 0.0 {
            return Err(SimError::Channel(format!("Eb/N0 {ebn0_db} dB gives zero noise")));
        }
        Ok(Self { ebn0_db, rate, sigma })
    }
}

/// `r_i = (1 − 2c_i) + σ·g_i` with `g_i` standard normal.
pub fn transmit<R: Rng + ?Sized>(c: &BitVec, sigma: f64, rng: &mut R) -> Vec<f64> {
    c.iter()
        .map(|bit| {
            let x = if bit { -1.0 } else { 1.0 };
            let g: f64 = rng.sample(StandardNormal);
            x + sigma * g
        })
        .collect()
}

/// Generator for frame `frame` of SNR point `snr_index`.
pub fn frame_rng(seed: u64, snr_index: u64, frame: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&snr_index.to_le_bytes());
    key[16..24].copy_from_slice(&frame.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// The transmitted codeword and received frame for one simulation slot.
pub fn paired_frame(
    code: &LinearCode,
    params: &ChannelParams,
    seed: u64,
    snr_index: u64,
    frame: u64,
) -> (BitVec, ReceivedFrame) {
    let mut rng = frame_rng(seed, snr_index, frame);
    let k = code.k();
    let message = BitVec::from_bools(&(0..k).map(|_| rng.random::<bool>()).collect::<Vec<_>>());
    let c = code.encode(&message).expect("message length is k");
    let r = transmit(&c, params.sigma, &mut rng);
    let frame = prepare_frame(r).expect("Gaussian samples are finite");
    (c, frame)
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub code: CodeId,
    pub snrs_db: Vec<f64>,
    pub frames: u64,
    pub budget: DecodeBudget,
    pub constraints: usize,
    pub seed: u64,
}

/// Statistics for one Eb/N0 value.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub block_errors: u64,
    pub abandons: u64,
    pub total_queries_checked: u64,
    pub total_candidates_generated: u64,
}

impl SnrPoint {
    pub fn bler(&self) -> f64 {
        self.block_errors as f64 / self.frames as f64
    }

    /// Mean over every frame, abandoned ones counted at their full usage.
    pub fn avg_queries_checked(&self) -> f64 {
        self.total_queries_checked as f64 / self.frames as f64
    }

    pub fn avg_candidates_generated(&self) -> f64 {
        self.total_candidates_generated as f64 / self.frames as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportMeta {
    pub code_name: String,
    pub n: usize,
    pub k: usize,
    pub constraints: usize,
    pub budget: DecodeBudget,
    pub seed: u64,
    pub rng: &'static str,
    /// How average queries are formed.
    pub averaging: &'static str,
    /// What counts toward `b′`.
    pub candidate_accounting: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub meta: ReportMeta,
    pub points: Vec<SnrPoint>,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    frames: u64,
    errors: u64,
    abandons: u64,
    checked: u64,
    generated: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            frames: self.frames + o.frames,
            errors: self.errors + o.errors,
            abandons: self.abandons + o.abandons,
            checked: self.checked + o.checked,
            generated: self.generated + o.generated,
        }
    }
}

/// Simulates `frames` frames at one SNR point.
pub fn simulate_point(
    code: &LinearCode,
    decoder: &GrandDecoder,
    snr_index: u64,
    snr_db: f64,
    frames: u64,
    budget: DecodeBudget,
    seed: u64,
) -> Result<SnrPoint, SimError> {
    let params = ChannelParams::new(snr_db, code.rate())?;
    let tally = (0..frames)
        .into_par_iter()
        .map(|f| {
            let (c, frame) = paired_frame(code, &params, seed, snr_index, f);
            let out = decoder.decode(&frame, budget).expect("frame matches code length");
            Tally {
                frames: 1,
                errors: (out.codeword() != Some(&c)) as u64,
                abandons: out.is_abandoned() as u64,
                checked: out.queries_checked,
                generated: out.candidates_generated,
            }
        })
        .reduce(Tally::default, Tally::merge);
    Ok(SnrPoint {
        snr_db,
        frames: tally.frames,
        block_errors: tally.errors,
        abandons: tally.abandons,
        total_queries_checked: tally.checked,
        total_candidates_generated: tally.generated,
    })
}

/// Runs the configured sweep on an already built code.
pub fn run_montecarlo_with_code(code: &LinearCode, config: &SimConfig) -> Result<SimReport, SimError> {
    if config.frames == 0 {
        return Err(SimError::Config("frames must be at least 1".into()));
    }
    if config.snrs_db.is_empty() {
        return Err(SimError::Config("empty SNR list".into()));
    }
    let layout = derive_constraints(code.parity_check(), config.constraints)?;
    let decoder = GrandDecoder::new(code, Some(layout));
    let points = config
        .snrs_db
        .iter()
        .enumerate()
        .map(|(i, &snr)| simulate_point(code, &decoder, i as u64, snr, config.frames, config.budget, config.seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimReport {
        meta: ReportMeta {
            code_name: code.name().to_string(),
            n: code.n(),
            k: code.k(),
            constraints: config.constraints,
            budget: config.budget,
            seed: config.seed,
            rng: RNG_ALGORITHM,
            averaging: "all frames, abandoned frames at their consumed count",
            candidate_accounting: "patterns with every part <= n, discarded ones included",
        },
        points,
    })
}

pub fn run_montecarlo(config: &SimConfig) -> Result<SimReport, SimError> {
    let code = config.code.build()?;
    run_montecarlo_with_code(&code, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::build_ebch;

    #[test]
    fn sigma_from_ebn0() {
        let p = ChannelParams::new(0.0, 0.5).unwrap();
        assert!((p.sigma - 1.0).abs() < 1e-12);
        let p = ChannelParams::new(10.0, 1.0).unwrap();
        assert!((p.sigma * p.sigma - 0.05).abs() < 1e-12);
        assert!(ChannelParams::new(3.0, 0.0).is_err());
        assert!(ChannelParams::new(3.0, 1.5).is_err());
        assert!(ChannelParams::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn tiny_noise_keeps_hard_decision() {
        let c: BitVec = "10110010".parse().unwrap();
        let mut rng = frame_rng(1, 0, 0);
        let r = transmit(&c, 1e-9, &mut rng);
        let f = prepare_frame(r).unwrap();
        assert_eq!(f.hard_decision(), &c);
    }

    #[test]
    fn zero_codeword_mean_is_one() {
        let n = 100_000;
        let sigma = 0.8;
        let c = BitVec::zeros(n);
        let r = transmit(&c, sigma, &mut frame_rng(0, 0, 0));
        let mean = r.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 3.0 * sigma / (n as f64).sqrt(), "mean {mean}");
        let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let c: BitVec = "0110".parse().unwrap();
        let a = transmit(&c, 0.7, &mut frame_rng(5, 1, 2));
        let b = transmit(&c, 0.7, &mut frame_rng(5, 1, 2));
        assert_eq!(a, b);
        let d = transmit(&c, 0.7, &mut frame_rng(5, 1, 3));
        assert_ne!(a, d);
    }

    #[test]
    fn high_snr_decodes_everything_in_one_query() {
        let config = SimConfig {
            code: CodeId::Ebch8,
            snrs_db: vec![60.0],
            frames: 200,
            budget: DecodeBudget::uniform(100),
            constraints: 1,
            seed: 3,
        };
        let report = run_montecarlo(&config).unwrap();
        let p = &report.points[0];
        assert_eq!(p.block_errors, 0);
        assert_eq!(p.avg_queries_checked(), 1.0);
        assert_eq!(report.meta.k, 4);
    }

    #[test]
    fn config_errors() {
        let mut config = SimConfig {
            code: CodeId::Ebch8,
            snrs_db: vec![3.0],
            frames: 10,
            budget: DecodeBudget::uniform(10),
            constraints: 9,
            seed: 0,
        };
        assert!(matches!(
            run_montecarlo(&config),
            Err(SimError::Constraint(ConstraintError::Insufficient { .. }))
        ));
        config.constraints = 0;
        config.frames = 0;
        assert!(matches!(run_montecarlo(&config), Err(SimError::Config(_))));
    }

    #[test]
    fn paired_bler_is_identical_across_constraints() {
        let code = build_ebch(4, 2).unwrap();
        let mk = |p| SimConfig {
            code: CodeId::Ebch8,
            snrs_db: vec![2.0, 4.0],
            frames: 2000,
            budget: DecodeBudget::uniform(200),
            constraints: p,
            seed: 11,
        };
        let base = run_montecarlo_with_code(&code, &mk(0)).unwrap();
        for p in 1..=2 {
            let other = run_montecarlo_with_code(&code, &mk(p)).unwrap();
            for (a, b) in base.points.iter().zip(&other.points) {
                assert_eq!(a.block_errors, b.block_errors);
                assert!(b.total_queries_checked <= a.total_queries_checked);
            }
        }
    }

    #[test]
    fn bler_decreases_with_snr() {
        let code = build_ebch(4, 2).unwrap();
        let config = SimConfig {
            code: CodeId::Ebch8,
            snrs_db: vec![1.0, 3.0, 5.0],
            frames: 4000,
            budget: DecodeBudget::uniform(500),
            constraints: 1,
            seed: 2,
        };
        let report = run_montecarlo_with_code(&code, &config).unwrap();
        for w in report.points.windows(2) {
            let se = (w[0].bler() * (1.0 - w[0].bler()) / w[0].frames as f64).sqrt();
            assert!(w[1].bler() <= w[0].bler() + se, "{:?}", report.points);
        }
    }
}
