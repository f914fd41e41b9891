//! Monte Carlo estimates for the enhanced scheme and the comparison table.
//!
//! Every trial draws from its own stream, `SimRng::for_trial(seed, index)`,
//! so results do not depend on the worker count or scheduling.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::code::{CodeId, CodeSpec};
use crate::dense::{to_dense, DEFAULT_DENSE_CAP};
use crate::enhanced::{
    alice_verify_classical, alice_verify_quantum, bob_answer_challenge, bob_decrypt,
    bob_decrypt_with_guess, bob_delete_quantum, cheat_ball_povm, cheat_measure_forge,
    cheat_measure_forge_with_guess, encrypt_enhanced, make_classical_challenge, AliceRecord,
    BobReading, CiphertextBundle, ClassicalCertificate, EncryptOptions, ErrorMode, GlobalBasis,
    ReturnedState,
};
use crate::error::ProtocolError;
use crate::pke::{keygen, PkeScheme};
use crate::rng::{child_seed, SimRng};

pub const DEFAULT_LAMBDA: u32 = 128;
pub const DEFAULT_MESSAGE_BITS: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("strategy {strategy} unavailable for n = {n} (dense cap {cap})")]
    StrategyUnavailable {
        strategy: Strategy,
        n: usize,
        cap: usize,
    },
    #[error("bound formula outside its domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    HonestRead,
    HonestDelete,
    MeasureForge,
    BallPovm,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::HonestRead => "honest-read",
            Strategy::HonestDelete => "honest-delete",
            Strategy::MeasureForge => "measure-forge",
            Strategy::BallPovm => "ball-povm",
        })
    }
}

impl FromStr for Strategy {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "honest-read" => Strategy::HonestRead,
            "honest-delete" => Strategy::HonestDelete,
            "measure-forge" => Strategy::MeasureForge,
            "ball-povm" => Strategy::BallPovm,
            other => {
                return Err(ExperimentError::InvalidConfig(format!(
                    "unknown strategy {other:?}"
                )))
            }
        })
    }
}

/// Which deletion certificate the honest-delete estimate exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificatePath {
    #[default]
    Quantum,
    Classical,
    /// Uniformly random classical certificate, as a reference point.
    RandomBaseline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub code: CodeId,
    pub error_mode: ErrorMode,
    /// Error qubits per ciphertext; `None` means the code's correction radius.
    pub error_count: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub strategy: Strategy,
    /// PKE scheme; `None` picks `toy-k` for the code's dimension `k`.
    pub pke: Option<PkeScheme>,
    /// Diagnostic: Bob's basis guess is always the right one.
    pub force_correct_guess: bool,
    pub certificate: CertificatePath,
    /// 1 runs serially; 0 uses rayon's default pool; otherwise a pool of that size.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(code: CodeId, strategy: Strategy, trials: usize, seed: u64) -> Self {
        Self {
            code,
            error_mode: ErrorMode::default(),
            error_count: None,
            trials,
            seed,
            strategy,
            pke: None,
            force_correct_guess: false,
            certificate: CertificatePath::default(),
            workers: 0,
        }
    }

    fn pke_scheme(&self, code: &CodeSpec) -> Result<PkeScheme, ExperimentError> {
        let scheme = match self.pke {
            Some(s) => s,
            None => PkeScheme::toy(code.k()).map_err(ProtocolError::from)?,
        };
        if scheme.ciphertext_bits() != code.k() {
            return Err(ExperimentError::InvalidConfig(format!(
                "{scheme} produces {}-bit ciphertexts, {} needs {}",
                scheme.ciphertext_bits(),
                code.id(),
                code.k()
            )));
        }
        Ok(scheme)
    }

    fn validate(&self, allowed: &[Strategy]) -> Result<CodeSpec, ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::InvalidConfig(
                "trials must be at least 1".into(),
            ));
        }
        if !allowed.contains(&self.strategy) {
            return Err(ExperimentError::InvalidConfig(format!(
                "strategy {} not valid here (expected one of {})",
                self.strategy,
                allowed
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        let code = CodeSpec::from_id(self.code);
        if self.strategy == Strategy::BallPovm && code.n() > DEFAULT_DENSE_CAP {
            return Err(ExperimentError::StrategyUnavailable {
                strategy: self.strategy,
                n: code.n(),
                cap: DEFAULT_DENSE_CAP,
            });
        }
        if let Some(count) = self.error_count {
            if count > code.e() {
                return Err(ExperimentError::InvalidConfig(format!(
                    "{count} error qubits exceed correction radius {} of {}",
                    code.e(),
                    code.id()
                )));
            }
        }
        self.pke_scheme(&code)?;
        Ok(code)
    }

    fn options(&self) -> EncryptOptions {
        EncryptOptions {
            error_mode: self.error_mode,
            error_count: self.error_count,
            ..EncryptOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub std_err: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Estimate {
    pub fn from_count(name: impl Into<String>, hits: usize, trials: usize, seed: u64) -> Self {
        let value = hits as f64 / trials as f64;
        Self {
            name: name.into(),
            value,
            std_err: (value * (1.0 - value) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }

    /// Whether `target` lies within `k` standard errors. With a zero standard
    /// error the value must match exactly.
    pub fn within_sigma(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_err
    }
}

/// Runs `trial(index, rng)` for every index, serially or on a rayon pool.
/// Output order always follows the trial index.
fn run_trials<T, F>(cfg: &ExperimentConfig, trial: F) -> Result<Vec<T>, ExperimentError>
where
    T: Send,
    F: Fn(&mut SimRng) -> Result<T, ExperimentError> + Sync,
{
    let one = |i: usize| trial(&mut SimRng::for_trial(cfg.seed, i as u64));
    if cfg.workers == 1 {
        return (0..cfg.trials).map(one).collect();
    }
    let run = || (0..cfg.trials).into_par_iter().map(one).collect();
    if cfg.workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| ExperimentError::InvalidConfig(format!("thread pool: {e}")))?
            .install(run)
    }
}

struct Instance {
    message: BitString,
    bundle: CiphertextBundle,
    record: AliceRecord,
    sk: crate::pke::SecretKey,
}

fn fresh_instance(
    cfg: &ExperimentConfig,
    code: &CodeSpec,
    rng: &mut SimRng,
) -> Result<Instance, ExperimentError> {
    let scheme = cfg.pke_scheme(code)?;
    let kp = keygen(scheme, DEFAULT_LAMBDA, rng);
    let message = BitString::random(scheme.plaintext_bits(), rng);
    let (bundle, record) = encrypt_enhanced(&kp.pk, &message, code, &cfg.options(), rng)?;
    Ok(Instance {
        message,
        bundle,
        record,
        sk: kp.sk,
    })
}

fn guess_for(cfg: &ExperimentConfig, record: &AliceRecord, rng: &mut SimRng) -> GlobalBasis {
    if cfg.force_correct_guess {
        record.global_basis
    } else {
        GlobalBasis::random(rng)
    }
}

fn read_ok(reading: &BobReading, message: &BitString) -> bool {
    reading.outcome.plaintext() == Some(message)
}

/// Fraction of trials where the honest reader recovers exactly the plaintext.
pub fn estimate_p_reading(cfg: &ExperimentConfig) -> Result<Estimate, ExperimentError> {
    let code = cfg.validate(&[Strategy::HonestRead])?;
    let hits = run_trials(cfg, |rng| {
        let mut inst = fresh_instance(cfg, &code, rng)?;
        let reading = if cfg.force_correct_guess {
            let guess = inst.record.global_basis;
            bob_decrypt_with_guess(&inst.sk, &mut inst.bundle, &code, guess, rng)?
        } else {
            bob_decrypt(&inst.sk, &mut inst.bundle, &code, rng)?
        };
        Ok(read_ok(&reading, &inst.message))
    })?;
    Ok(Estimate::from_count(
        "p_reading",
        count(&hits),
        cfg.trials,
        cfg.seed,
    ))
}

/// Per-trial record of a cheating run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheatTrial {
    pub guess_correct: bool,
    pub read: bool,
    pub accepted: bool,
    /// Largest amplitude change caused by the attack (ball-POVM only).
    pub disturbance: Option<f64>,
}

fn cheat_trial(
    cfg: &ExperimentConfig,
    code: &CodeSpec,
    rng: &mut SimRng,
) -> Result<CheatTrial, ExperimentError> {
    let mut inst = fresh_instance(cfg, code, rng)?;
    let (reading, returned, disturbance) = match cfg.strategy {
        Strategy::MeasureForge => {
            let (reading, returned) = if cfg.force_correct_guess {
                let guess = inst.record.global_basis;
                cheat_measure_forge_with_guess(&inst.sk, &mut inst.bundle, code, guess, rng)?
            } else {
                cheat_measure_forge(&inst.sk, &mut inst.bundle, code, rng)?
            };
            (reading, returned, None)
        }
        Strategy::BallPovm => {
            let before = to_dense(&inst.record.prepared_register(), DEFAULT_DENSE_CAP)
                .map_err(ProtocolError::from)?;
            let guess = guess_for(cfg, &inst.record, rng);
            let (reading, returned) =
                cheat_ball_povm(&inst.sk, &mut inst.bundle, code, guess, rng)?;
            let diff = match &returned {
                ReturnedState::Dense(after) => after.max_abs_diff(&before),
                ReturnedState::Product(_) => unreachable!("ball attack returns a dense state"),
            };
            (reading, returned, Some(diff))
        }
        other => unreachable!("{other} is not a cheating strategy"),
    };
    let accepted = alice_verify_quantum(&inst.record, &returned, rng)?;
    Ok(CheatTrial {
        guess_correct: reading.guess == inst.record.global_basis,
        read: read_ok(&reading, &inst.message),
        accepted,
        disturbance,
    })
}

/// Raw per-trial outcomes of a cheating strategy, in trial order.
pub fn run_cheat_trials(cfg: &ExperimentConfig) -> Result<Vec<CheatTrial>, ExperimentError> {
    let code = cfg.validate(&[Strategy::MeasureForge, Strategy::BallPovm])?;
    run_trials(cfg, |rng| cheat_trial(cfg, &code, rng))
}

/// Fraction of trials where Alice rejects the cheater's returned state.
pub fn estimate_p_dist(cfg: &ExperimentConfig) -> Result<Estimate, ExperimentError> {
    let trials = run_cheat_trials(cfg)?;
    let rejected = trials.iter().filter(|t| !t.accepted).count();
    Ok(Estimate::from_count(
        format!("p_dist[{}]", cfg.strategy),
        rejected,
        cfg.trials,
        cfg.seed,
    ))
}

/// Aggregates of a cheating run beyond the plain rejection rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheatSummary {
    pub strategy: Strategy,
    pub detection: Estimate,
    /// Plaintext read and certificate accepted in the same trial.
    pub joint: Estimate,
    /// Acceptance restricted to trials with the right basis guess.
    pub accept_given_correct_guess: Estimate,
    pub correct_guesses: usize,
    /// Worst amplitude change over correct-guess trials, when measured.
    pub max_disturbance_correct_guess: Option<f64>,
}

pub fn summarize_cheat(cfg: &ExperimentConfig) -> Result<CheatSummary, ExperimentError> {
    let trials = run_cheat_trials(cfg)?;
    let correct: Vec<&CheatTrial> = trials.iter().filter(|t| t.guess_correct).collect();
    let max_disturbance = correct
        .iter()
        .filter_map(|t| t.disturbance)
        .fold(None, |acc: Option<f64>, d| {
            Some(acc.map_or(d, |a| a.max(d)))
        });
    Ok(CheatSummary {
        strategy: cfg.strategy,
        detection: Estimate::from_count(
            format!("p_dist[{}]", cfg.strategy),
            trials.iter().filter(|t| !t.accepted).count(),
            cfg.trials,
            cfg.seed,
        ),
        joint: Estimate::from_count(
            "read_and_accepted",
            trials.iter().filter(|t| t.read && t.accepted).count(),
            cfg.trials,
            cfg.seed,
        ),
        accept_given_correct_guess: Estimate::from_count(
            "accept_given_correct_guess",
            correct.iter().filter(|t| t.accepted).count(),
            correct.len().max(1),
            cfg.seed,
        ),
        correct_guesses: correct.len(),
        max_disturbance_correct_guess: max_disturbance,
    })
}

/// Fraction of honest-deleter certificates Alice accepts.
pub fn estimate_p_nfp(cfg: &ExperimentConfig) -> Result<Estimate, ExperimentError> {
    let code = cfg.validate(&[Strategy::HonestDelete])?;
    let hits = run_trials(cfg, |rng| {
        let mut inst = fresh_instance(cfg, &code, rng)?;
        Ok(match cfg.certificate {
            CertificatePath::Quantum => {
                let returned = bob_delete_quantum(&mut inst.bundle)?;
                alice_verify_quantum(&inst.record, &returned, rng)?
            }
            CertificatePath::Classical => {
                let challenge = make_classical_challenge(&inst.record, rng);
                let cert = bob_answer_challenge(&mut inst.bundle, &challenge, rng)?;
                alice_verify_classical(&inst.record, &cert)?
            }
            CertificatePath::RandomBaseline => {
                let cert = ClassicalCertificate {
                    bits: BitString::random(code.n(), rng),
                };
                alice_verify_classical(&inst.record, &cert)?
            }
        })
    })?;
    let name = match cfg.certificate {
        CertificatePath::Quantum => "p_nfp[quantum]",
        CertificatePath::Classical => "p_nfp[classical]",
        CertificatePath::RandomBaseline => "p_nfp[random-baseline]",
    };
    Ok(Estimate::from_count(
        name,
        count(&hits),
        cfg.trials,
        cfg.seed,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForgePoint {
    pub e: usize,
    pub acceptance: Estimate,
}

/// Measure-and-forge acceptance with a correct basis guess, for each error
/// count in `error_counts`. The code in `base` must correct at least the
/// largest count; smaller counts place fewer error qubits in the same code.
/// Each point uses the child seed `child_seed(base.seed, e)`.
pub fn estimate_forge_curve(
    base: &ExperimentConfig,
    error_counts: &[usize],
) -> Result<Vec<ForgePoint>, ExperimentError> {
    error_counts
        .iter()
        .map(|&e| {
            let cfg = ExperimentConfig {
                strategy: Strategy::MeasureForge,
                error_count: Some(e),
                force_correct_guess: true,
                seed: child_seed(base.seed, e as u64),
                ..base.clone()
            };
            let trials = run_cheat_trials(&cfg)?;
            let accepted = trials.iter().filter(|t| t.accepted).count();
            Ok(ForgePoint {
                e,
                acceptance: Estimate::from_count(
                    format!("forge_accept[e={e}]"),
                    accepted,
                    cfg.trials,
                    cfg.seed,
                ),
            })
        })
        .collect()
}

/// Least-squares slope of `log2(acceptance)` against `e`. Points with zero
/// acceptance are skipped.
pub fn log2_slope(points: &[ForgePoint]) -> Option<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.acceptance.value > 0.0)
        .map(|p| (p.e as f64, p.acceptance.value.log2()))
        .collect();
    if xy.len() < 2 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SealBounds {
    pub p_dist: f64,
    pub p_nfp: f64,
    /// The detection bound came out above 1; it is reported raw, not clamped.
    pub p_dist_above_one: bool,
}

/// Reading-vs-detection tradeoff bounds for a quantum seal with reading
/// probability `p` and `m` message bits:
/// `1/2 + (2 sqrt(1-p) + 1 - p) / 4` and `1 - p^2 - (1-p)^2 / (m-1)`.
pub fn seal_bounds(p: f64, m: u64) -> Result<SealBounds, ExperimentError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ExperimentError::Domain(format!(
            "p = {p} is not a probability"
        )));
    }
    if m < 2 {
        return Err(ExperimentError::Domain(format!(
            "message bits M = {m}, need at least 2"
        )));
    }
    let q = 1.0 - p;
    let p_dist = 0.5 + 0.25 * (2.0 * q.sqrt() + q);
    let p_nfp = 1.0 - p * p - q * q / (m - 1) as f64;
    Ok(SealBounds {
        p_dist,
        p_nfp,
        p_dist_above_one: p_dist > 1.0,
    })
}

fn count(hits: &[bool]) -> usize {
    hits.iter().filter(|&&h| h).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Config {
    pub trials: usize,
    pub seed: u64,
    pub error_mode: ErrorMode,
    pub workers: usize,
    /// Reading probability plugged into the bound formulas.
    pub p: f64,
    pub message_bits: u64,
}

impl Table1Config {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            error_mode: ErrorMode::default(),
            workers: 0,
            p: 0.5,
            message_bits: DEFAULT_MESSAGE_BITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistCell {
    pub value: f64,
    pub strategy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub scheme: String,
    pub p_reading: f64,
    pub p_dist: DistCell,
    pub p_nfp: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub version: String,
    pub error_mode: ErrorMode,
    pub rows: Vec<Table1Row>,
    pub notes: Vec<String>,
}

/// Measured rows for the enhanced scheme next to the reference values and
/// the seal bound formulas.
///
/// Sub-experiments use child seeds 1..=4 of the master seed:
/// reading on BCH(31,16,7), ball-POVM on Hamming(7,4,3), measure-forge on
/// BCH(31,16,7), honest quantum deletion on BCH(31,16,7).
pub fn table1_report(cfg: &Table1Config) -> Result<Table1Report, ExperimentError> {
    let sub = |code: CodeId, strategy: Strategy, index: u64| ExperimentConfig {
        error_mode: cfg.error_mode,
        workers: cfg.workers,
        ..ExperimentConfig::new(code, strategy, cfg.trials, child_seed(cfg.seed, index))
    };
    let reading = estimate_p_reading(&sub(CodeId::Bch31_16_7, Strategy::HonestRead, 1))?;
    let ball = estimate_p_dist(&sub(CodeId::Hamming7_4_3, Strategy::BallPovm, 2))?;
    let forge = estimate_p_dist(&sub(CodeId::Bch31_16_7, Strategy::MeasureForge, 3))?;
    let nfp = estimate_p_nfp(&sub(CodeId::Bch31_16_7, Strategy::HonestDelete, 4))?;
    let bounds = seal_bounds(cfg.p, cfg.message_bits)?;

    let measured = |scheme: &str, dist: &Estimate, strategy: Strategy| Table1Row {
        scheme: scheme.to_string(),
        p_reading: reading.value,
        p_dist: DistCell {
            value: dist.value,
            strategy: strategy.to_string(),
        },
        p_nfp: nfp.value,
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let rows = vec![
        measured("ours (measured)", &ball, Strategy::BallPovm),
        measured(
            "ours (measured; measure-forge)",
            &forge,
            Strategy::MeasureForge,
        ),
        Table1Row {
            scheme: "ours (reference)".into(),
            p_reading: 0.5,
            p_dist: DistCell {
                value: 0.5,
                strategy: "unspecified".into(),
            },
            p_nfp: 0.5,
            trials: 0,
            seed: cfg.seed,
        },
        Table1Row {
            scheme: "upper bound (formula)".into(),
            p_reading: cfg.p,
            p_dist: DistCell {
                value: bounds.p_dist,
                strategy: "formula".into(),
            },
            p_nfp: bounds.p_nfp,
            trials: 0,
            seed: cfg.seed,
        },
    ];
    let mut notes = vec![
        format!("error_mode={}", cfg.error_mode),
        "p_reading: honest reader on bch-31-16-7".to_string(),
        "p_dist: fraction of trials where Alice rejects the named strategy; ball-povm on hamming-7-4-3, measure-forge on bch-31-16-7".to_string(),
        "p_nfp: honest quantum deletion on bch-31-16-7 is accepted with probability 1 by construction; the reference value 0.5 is not reproduced".to_string(),
        format!("bound row: p={}, M={}", cfg.p, cfg.message_bits),
    ];
    if bounds.p_dist_above_one {
        notes.push("bound row: p_dist formula evaluates above 1 and is reported unclamped".into());
    }
    Ok(Table1Report {
        version: crate::VERSION.to_string(),
        error_mode: cfg.error_mode,
        rows,
        notes,
    })
}

impl Table1Report {
    /// Fixed column order `scheme,p_reading,p_dist,p_nfp,trials,seed`,
    /// preceded by one `#` line naming the tool version and error mode.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# pkecd {} error_mode={}\n", self.version, self.error_mode);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scheme", "p_reading", "p_dist", "p_nfp", "trials", "seed"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.scheme.clone(),
                format!("{:.6}", r.p_reading),
                format!("{:.6}", r.p_dist.value),
                format!("{:.6}", r.p_nfp),
                r.trials.to_string(),
                r.seed.to_string(),
            ])
            .expect("in-memory write");
        }
        out.push_str(
            &String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv"),
        );
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(code: CodeId, strategy: Strategy, trials: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig::new(code, strategy, trials, seed)
    }

    #[test]
    fn seal_bounds_values() {
        // 1/2 + (2 sqrt(0.5) + 0.5)/4 = 0.5 + 0.353553.. + 0.125
        let b = seal_bounds(0.5, 1_000_000).unwrap();
        let expected = 0.5 + (2.0 * 0.5f64.sqrt() + 0.5) / 4.0;
        assert!((b.p_dist - expected).abs() < 1e-15);
        assert!((b.p_dist - 0.978553).abs() < 1e-6);
        assert!((b.p_nfp - 0.75).abs() < 1e-3);
        let one = seal_bounds(1.0, 7).unwrap();
        assert_eq!((one.p_dist, one.p_nfp), (0.5, 0.0));
        let zero = seal_bounds(0.0, 2).unwrap();
        assert_eq!(zero.p_dist, 1.25);
        assert!(zero.p_dist_above_one);
        assert!(seal_bounds(1.5, 10).is_err());
        assert!(seal_bounds(0.5, 1).is_err());
    }

    #[test]
    fn std_err_formula() {
        let e = Estimate::from_count("x", 25, 100, 0);
        assert!((e.std_err - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert!(Estimate::from_count("x", 10, 10, 0).within_sigma(1.0, 3.0));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(estimate_p_reading(&cfg(CodeId::Bch31_16_7, Strategy::HonestRead, 0, 1)).is_err());
        assert!(estimate_p_reading(&cfg(CodeId::Bch31_16_7, Strategy::BallPovm, 10, 1)).is_err());
        assert!(matches!(
            estimate_p_dist(&cfg(CodeId::Bch31_16_7, Strategy::BallPovm, 10, 1)),
            Err(ExperimentError::StrategyUnavailable { n: 31, .. })
        ));
        let mut c = cfg(CodeId::Hamming7_4_3, Strategy::HonestRead, 10, 1);
        c.error_count = Some(2);
        assert!(estimate_p_reading(&c).is_err());
        let mut c = cfg(CodeId::Hamming7_4_3, Strategy::HonestRead, 10, 1);
        c.pke = Some(PkeScheme::toy(16).unwrap());
        assert!(matches!(
            estimate_p_reading(&c),
            Err(ExperimentError::InvalidConfig(_))
        ));
    }

    #[test]
    fn forced_guess_reading_is_exact() {
        let mut c = cfg(CodeId::Bch31_16_7, Strategy::HonestRead, 1000, 3);
        c.force_correct_guess = true;
        assert_eq!(estimate_p_reading(&c).unwrap().value, 1.0);
    }

    #[test]
    fn repetition_code_reading_is_three_quarters() {
        let c = cfg(CodeId::Repetition(5), Strategy::HonestRead, 10_000, 4);
        let est = estimate_p_reading(&c).unwrap();
        // k = 1: a wrong guess still decodes and matches with probability 1/2,
        // so reading succeeds with 1/2 + 1/4.
        assert!(est.within_sigma(0.75, 3.0), "{est:?}");
        let mut c = cfg(CodeId::Repetition(5), Strategy::HonestRead, 10_000, 4);
        c.error_count = Some(0);
        assert!(estimate_p_reading(&c).unwrap().within_sigma(0.75, 3.0));
    }

    #[test]
    fn measure_forge_with_no_errors_detects_wrong_guesses_only() {
        let mut c = cfg(CodeId::Bch31_16_7, Strategy::MeasureForge, 10_000, 5);
        c.error_count = Some(0);
        let est = estimate_p_dist(&c).unwrap();
        assert!((est.value - 0.5).abs() < 0.02, "{est:?}");
    }

    #[test]
    fn honest_certificates_always_accepted() {
        for path in [CertificatePath::Quantum, CertificatePath::Classical] {
            let mut c = cfg(CodeId::Bch31_16_7, Strategy::HonestDelete, 2000, 6);
            c.certificate = path;
            assert_eq!(estimate_p_nfp(&c).unwrap().value, 1.0);
        }
        let mut c = cfg(CodeId::Bch31_16_7, Strategy::HonestDelete, 20_000, 6);
        c.certificate = CertificatePath::RandomBaseline;
        assert!(estimate_p_nfp(&c).unwrap().within_sigma(0.125, 3.0));
    }

    #[test]
    fn forge_curve_zero_errors_is_one() {
        let base = cfg(CodeId::Bch31_16_7, Strategy::MeasureForge, 500, 7);
        let pts = estimate_forge_curve(&base, &[0]).unwrap();
        assert_eq!(pts[0].acceptance.value, 1.0);
    }

    #[test]
    fn slope_of_exact_halving_is_minus_one() {
        let pts: Vec<ForgePoint> = (1..=3)
            .map(|e| ForgePoint {
                e,
                acceptance: Estimate {
                    name: String::new(),
                    value: 0.5f64.powi(e as i32),
                    std_err: 0.0,
                    trials: 1,
                    seed: 0,
                },
            })
            .collect();
        assert!((log2_slope(&pts).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(log2_slope(&pts[..1]), None);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let mut c = cfg(CodeId::Hamming7_4_3, Strategy::BallPovm, 300, 8);
        c.workers = 1;
        let serial = run_cheat_trials(&c).unwrap();
        for workers in [0, 3] {
            c.workers = workers;
            assert_eq!(run_cheat_trials(&c).unwrap(), serial);
        }
    }

    #[test]
    fn table1_csv_shape_and_determinism() {
        let mut t = Table1Config::new(200, 9);
        let a = table1_report(&t).unwrap();
        t.workers = 1;
        let b = table1_report(&t).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let csv = a.to_csv();
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("# pkecd "));
        assert_eq!(
            lines.next().unwrap(),
            "scheme,p_reading,p_dist,p_nfp,trials,seed"
        );
        assert!(csv.contains("upper bound (formula),0.500000,0.978553,0.750000,0,9"));
        let json: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(json["rows"][0]["p_dist"]["strategy"], "ball-povm");
        assert_eq!(json["rows"][0]["p_nfp"], 1.0);
        assert!(json["notes"].as_array().unwrap().len() >= 4);
    }
}
