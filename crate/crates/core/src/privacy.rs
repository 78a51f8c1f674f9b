//! Privacy audits.
//!
//! * User privacy: the joint distribution of the queries seen by a colluding
//!   set must not depend on the requested file. Exhaustive mode enumerates
//!   every random vector `Z` and compares exact counts.
//! * Server privacy: paired runs that differ only in non-requested files must
//!   decode the same file and show the user identical `G` labels, which are
//!   uniformly distributed.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::field::{Field, FieldElement};
use crate::lrc_protocol::LrcRetrievalPlan;
use crate::protocol::{random_files, run_retrieval, DssConfig, ProtocolError};
use crate::quantum::BackendKind;

/// Largest number of `Z` assignments enumerated per distribution.
pub const ENUMERATION_BUDGET: u64 = 1 << 20;

/// Total-variation threshold of sampled audits.
pub const SAMPLED_THRESHOLD: f64 = 0.02;

/// Smallest trial count accepted by [`audit_server_privacy`].
pub const MIN_SERVER_TRIALS: usize = 1000;

/// Significance level of the uniformity test on `G` labels.
pub const UNIFORMITY_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("enumeration of {space} assignments exceeds the budget of {budget}")]
    Budget { space: String, budget: u64 },
    #[error("server {server} out of range for {n} working servers")]
    ServerOutOfRange { server: usize, n: usize },
    #[error("collusion control needs a set of size t + 1 = {expected}, got {got}")]
    ControlSize { expected: usize, got: usize },
    #[error("server privacy needs at least {MIN_SERVER_TRIALS} trials, got {0}")]
    TooFewTrials(usize),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditMode {
    Exhaustive,
    /// `samples` random draws of `Z` per file index; non-conclusive.
    Sampled { samples: usize, seed: u64 },
}

/// Exact distribution of an observation over a uniformly enumerated space:
/// `counts[key] / total`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistributionTable {
    pub counts: BTreeMap<Vec<u8>, u64>,
    pub total: u64,
}

impl DistributionTable {
    fn from_counts(counts: BTreeMap<Vec<u8>, u64>) -> DistributionTable {
        let total = counts.values().sum();
        DistributionTable { counts, total }
    }

    pub fn probability(&self, key: &[u8]) -> Ratio<u64> {
        Ratio::new(self.counts.get(key).copied().unwrap_or(0), self.total)
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    /// Every one of `outcomes` values has the same count.
    pub fn is_uniform_over(&self, outcomes: u64) -> bool {
        self.counts.len() as u64 == outcomes
            && self.total % outcomes == 0
            && self.counts.values().all(|&c| c == self.total / outcomes)
    }

    /// Exact total-variation distance `½ Σ |p − q|`.
    pub fn total_variation(&self, other: &DistributionTable) -> Ratio<u64> {
        let mut num: u128 = 0;
        let keys = self.counts.keys().chain(other.counts.keys().filter(|k| !self.counts.contains_key(*k)));
        for key in keys {
            let a = self.counts.get(key).copied().unwrap_or(0) as u128 * other.total as u128;
            let b = other.counts.get(key).copied().unwrap_or(0) as u128 * self.total as u128;
            num += a.abs_diff(b);
        }
        let den = 2 * self.total as u128 * other.total as u128;
        let g = gcd(num, den);
        Ratio::new((num / g) as u64, (den / g) as u64)
    }

    /// Distribution of the single entry at `pos` of every key.
    pub fn marginal(&self, pos: usize) -> DistributionTable {
        let mut counts = BTreeMap::new();
        for (k, &c) in &self.counts {
            *counts.entry(vec![k[pos]]).or_insert(0) += c;
        }
        DistributionTable { counts, total: self.total }
    }

    /// Total-variation distance as a float (for sampled tables).
    pub fn total_variation_f64(&self, other: &DistributionTable) -> f64 {
        let tv = self.total_variation(other);
        *tv.numer() as f64 / *tv.denom() as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Counts `observe(z)` over all `z ∈ {0..q}^len`.
fn enumerate<F>(q: usize, len: usize, observe: F) -> Result<DistributionTable, AuditError>
where
    F: Fn(&[u8]) -> Vec<u8> + Sync,
{
    let space = (q as u128).checked_pow(len as u32).filter(|&s| s <= ENUMERATION_BUDGET as u128);
    let Some(space) = space else {
        return Err(AuditError::Budget { space: format!("{q}^{len}"), budget: ENUMERATION_BUDGET });
    };
    let counts = (0..space as u64)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<Vec<u8>, u64>, idx| {
            let mut z = vec![0u8; len];
            let mut rest = idx;
            for v in z.iter_mut() {
                *v = (rest % q as u64) as u8;
                rest /= q as u64;
            }
            *acc.entry(observe(&z)).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, merge);
    Ok(DistributionTable::from_counts(counts))
}

fn merge(mut a: BTreeMap<Vec<u8>, u64>, b: BTreeMap<Vec<u8>, u64>) -> BTreeMap<Vec<u8>, u64> {
    for (k, c) in b {
        *a.entry(k).or_insert(0) += c;
    }
    a
}

fn sample<F>(q: usize, len: usize, samples: usize, seed: u64, observe: F) -> DistributionTable
where
    F: Fn(&[u8]) -> Vec<u8>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    let mut z = vec![0u8; len];
    for _ in 0..samples {
        for v in z.iter_mut() {
            *v = rng.gen_range(0..q) as u8;
        }
        *counts.entry(observe(&z)).or_insert(0) += 1;
    }
    DistributionTable::from_counts(counts)
}

/// Dual generator entries as field elements, `d[j][s]`.
fn dual_entries(cfg: &DssConfig) -> Vec<Vec<FieldElement>> {
    cfg.dual_generator().row_vecs()
}

#[allow(clippy::too_many_arguments)]
/// Observation of set `set` for one piece, given `Z` packed as `z[j·m + i]`.
fn observe_queries(
    field: Field,
    d: &[Vec<FieldElement>],
    m: usize,
    file: usize,
    piece: usize,
    set: &[usize],
    z: &[u8],
    out: &mut Vec<u8>,
) {
    for &s in set {
        for i in 0..m {
            let mut acc = field.zero();
            for (j, row) in d.iter().enumerate() {
                acc += field.element(z[j * m + i] as u16).expect("in range") * row[s];
            }
            if s == piece && i == file {
                acc += field.one();
            }
            out.push(acc.value());
        }
    }
}

/// Distribution of `{Q_s : s ∈ set}` for piece `piece` when file `file` is
/// requested, by enumerating every `Z`.
pub fn query_distribution(
    cfg: &DssConfig,
    file: usize,
    piece: usize,
    set: &[usize],
) -> Result<DistributionTable, AuditError> {
    check_set(cfg, set)?;
    let d = dual_entries(cfg);
    let (field, m) = (cfg.field(), cfg.m());
    enumerate(field.order(), d.len() * m, |z| {
        let mut out = Vec::with_capacity(set.len() * m);
        observe_queries(field, &d, m, file, piece, set, z, &mut out);
        out
    })
}

fn check_set(cfg: &DssConfig, set: &[usize]) -> Result<(), AuditError> {
    match set.iter().find(|&&s| s >= cfg.n()) {
        Some(&server) => Err(AuditError::ServerOutOfRange { server, n: cfg.n() }),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PieceAudit {
    pub piece: usize,
    /// Largest distance between the distributions of two file indices.
    pub max_distance: Ratio<u64>,
    /// Float estimate in sampled mode.
    pub estimate: f64,
    /// Every per-file distribution is uniform over all query values.
    pub uniform: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserPrivacyReport {
    /// Colluding working servers (0-based).
    pub set: Vec<usize>,
    pub t: usize,
    pub conclusive: bool,
    pub pieces: Vec<PieceAudit>,
}

impl UserPrivacyReport {
    pub fn max_distance(&self) -> Ratio<u64> {
        self.pieces.iter().map(|p| p.max_distance).max().unwrap_or_else(|| Ratio::new(0, 1))
    }

    /// No piece reveals anything about the file index.
    pub fn independent(&self) -> bool {
        if self.conclusive {
            self.pieces.iter().all(|p| *p.max_distance.numer() == 0)
        } else {
            self.pieces.iter().all(|p| p.estimate < SAMPLED_THRESHOLD)
        }
    }

    /// PASS: the set is within the collusion bound and the queries are
    /// independent of the file index and uniform (exhaustive mode only).
    pub fn pass(&self) -> bool {
        self.set.len() <= self.t && self.independent() && (!self.conclusive || self.pieces.iter().all(|p| p.uniform))
    }
}

impl fmt::Display for UserPrivacyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set: Vec<String> = self.set.iter().map(|s| (s + 1).to_string()).collect();
        write!(
            f,
            "user-privacy T={{{}}} t={} mode={} max_tv={} uniform={} result={}",
            set.join(","),
            self.t,
            if self.conclusive { "exhaustive" } else { "sampled(non-conclusive)" },
            if self.conclusive {
                self.max_distance().to_string()
            } else {
                format!("{:.4}", self.pieces.iter().map(|p| p.estimate).fold(0.0, f64::max))
            },
            self.pieces.iter().all(|p| p.uniform),
            if self.pass() { "PASS" } else { "FAIL" }
        )
    }
}

/// Compares the colluders' query distributions across all file indices for
/// every piece.
pub fn audit_user_privacy(cfg: &DssConfig, set: &[usize], mode: AuditMode) -> Result<UserPrivacyReport, AuditError> {
    check_set(cfg, set)?;
    let (field, m) = (cfg.field(), cfg.m());
    let d = dual_entries(cfg);
    let outcomes = (field.order() as u64).checked_pow((m * set.len()) as u32);
    let mut pieces = Vec::with_capacity(cfg.k());
    for piece in 0..cfg.k() {
        let tables: Vec<DistributionTable> = (0..m)
            .map(|file| {
                let observe = |z: &[u8]| {
                    let mut out = Vec::with_capacity(set.len() * m);
                    observe_queries(field, &d, m, file, piece, set, z, &mut out);
                    out
                };
                match mode {
                    AuditMode::Exhaustive => enumerate(field.order(), d.len() * m, observe),
                    AuditMode::Sampled { samples, seed } => {
                        Ok(sample(field.order(), d.len() * m, samples, seed ^ (file as u64) << 32 ^ piece as u64, observe))
                    }
                }
            })
            .collect::<Result<_, _>>()?;
        let mut max_distance = Ratio::new(0, 1);
        let mut estimate: f64 = 0.0;
        for a in 0..m {
            for b in a + 1..m {
                match mode {
                    AuditMode::Exhaustive => {
                        let tv = tables[a].total_variation(&tables[b]);
                        estimate = estimate.max(*tv.numer() as f64 / *tv.denom() as f64);
                        max_distance = max_distance.max(tv);
                    }
                    // sampled joint tables are too sparse; compare per-entry marginals
                    AuditMode::Sampled { .. } => {
                        for pos in 0..set.len() * m {
                            let tv = tables[a].marginal(pos).total_variation_f64(&tables[b].marginal(pos));
                            estimate = estimate.max(tv);
                        }
                    }
                }
            }
        }
        let uniform = match (mode, outcomes) {
            (AuditMode::Exhaustive, Some(o)) => tables.iter().all(|t| t.is_uniform_over(o)),
            _ => false,
        };
        pieces.push(PieceAudit { piece, max_distance, estimate, uniform });
    }
    Ok(UserPrivacyReport { set: set.to_vec(), t: cfg.t(), conclusive: mode == AuditMode::Exhaustive, pieces })
}

/// All subsets of `0..n` with at most `max_size` elements, by size then
/// lexicographically.
pub fn subsets_up_to(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=max_size.min(n) {
        let mut s: Vec<usize> = (0..size).collect();
        loop {
            out.push(s.clone());
            let Some(i) = (0..size).rev().find(|&i| s[i] < n - size + i) else { break };
            s[i] += 1;
            for j in i + 1..size {
                s[j] = s[j - 1] + 1;
            }
        }
    }
    out
}

/// Exhaustive audit of every colluding set of size at most `t`.
pub fn audit_all_sets(cfg: &DssConfig) -> Result<Vec<UserPrivacyReport>, AuditError> {
    subsets_up_to(cfg.n(), cfg.t())
        .into_par_iter()
        .map(|set| audit_user_privacy(cfg, &set, AuditMode::Exhaustive))
        .collect()
}

/// Negative control: a set of `t + 1` servers. The caller expects a positive
/// distance for at least one piece.
pub fn audit_collusion_failure(cfg: &DssConfig, set: &[usize]) -> Result<UserPrivacyReport, AuditError> {
    if set.len() != cfg.t() + 1 {
        return Err(AuditError::ControlSize { expected: cfg.t() + 1, got: set.len() });
    }
    audit_user_privacy(cfg, set, AuditMode::Exhaustive)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LrcCollusionReport {
    /// Physical positions of the colluders.
    pub colluders: Vec<usize>,
    /// Colluders inside the working set of each group.
    pub per_group: Vec<usize>,
    pub t: usize,
    pub max_distance: Ratio<u64>,
    pub uniform: bool,
}

impl LrcCollusionReport {
    /// At most `t` colluders per group and an index-independent joint view.
    pub fn pass(&self) -> bool {
        self.per_group.iter().all(|&c| c <= self.t) && *self.max_distance.numer() == 0 && self.uniform
    }
}

impl fmt::Display for LrcCollusionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.colluders.iter().map(|s| (s + 1).to_string()).collect();
        let g: Vec<String> = self.per_group.iter().map(|s| s.to_string()).collect();
        write!(
            f,
            "lrc-collusion colluders={{{}}} per_group={} t={} max_tv={} uniform={} result={}",
            c.join(","),
            g.join(","),
            self.t,
            self.max_distance,
            self.uniform,
            if self.pass() { "PASS" } else { "FAIL" }
        )
    }
}

/// Joint distribution of everything the colluders (physical positions)
/// receive across all groups and pieces, enumerated over the randomness of
/// every group at once.
pub fn audit_lrc_collusion(plan: &LrcRetrievalPlan, colluders: &[usize]) -> Result<LrcCollusionReport, AuditError> {
    let field = plan.code.field();
    let m = plan.m();
    // per group: dual entries, pieces, the colluders' working indices
    let groups: Vec<(Vec<Vec<FieldElement>>, usize, Vec<usize>)> = plan
        .configs
        .iter()
        .map(|cfg| {
            let local: Vec<usize> =
                colluders.iter().filter_map(|c| cfg.working().iter().position(|w| w == c)).collect();
            (dual_entries(cfg), cfg.k(), local)
        })
        .collect();
    let per_group: Vec<usize> = groups.iter().map(|g| g.2.len()).collect();
    let len: usize = groups.iter().map(|(d, k, _)| d.len() * m * k).sum();
    let observed: usize = groups.iter().map(|(_, k, local)| k * local.len() * m).sum();
    let tables: Vec<DistributionTable> = (0..m)
        .map(|file| {
            enumerate(field.order(), len, |z| {
                let mut out = Vec::new();
                let mut offset = 0;
                for (d, k, local) in &groups {
                    let chunk = d.len() * m;
                    for piece in 0..*k {
                        let zp = &z[offset..offset + chunk];
                        observe_queries(field, d, m, file, piece, local, zp, &mut out);
                        offset += chunk;
                    }
                }
                out
            })
        })
        .collect::<Result<_, _>>()?;
    let mut max_distance = Ratio::new(0, 1);
    for a in 0..m {
        for b in a + 1..m {
            max_distance = max_distance.max(tables[a].total_variation(&tables[b]));
        }
    }
    let outcomes = (field.order() as u64).pow(observed as u32);
    let uniform = tables.iter().all(|t| t.is_uniform_over(outcomes));
    Ok(LrcCollusionReport { colluders: colluders.to_vec(), per_group, t: plan.t, max_distance, uniform })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ServerPrivacyReport {
    pub trials: usize,
    /// Only one file is stored, so there is nothing to hide.
    pub vacuous: bool,
    pub decode_failures: usize,
    /// Paired runs whose user-visible labels differ.
    pub pair_mismatches: usize,
    pub chi_squared: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

impl ServerPrivacyReport {
    pub fn pass(&self) -> bool {
        self.vacuous
            || (self.decode_failures == 0 && self.pair_mismatches == 0 && self.p_value > UNIFORMITY_ALPHA)
    }
}

impl fmt::Display for ServerPrivacyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vacuous {
            return write!(f, "server-privacy trials={} vacuous (m = 1) result=PASS", self.trials);
        }
        write!(
            f,
            "server-privacy trials={} decode_failures={} pair_mismatches={} chi2={:.3} dof={} p={:.4} result={}",
            self.trials,
            self.decode_failures,
            self.pair_mismatches,
            self.chi_squared,
            self.degrees_of_freedom,
            self.p_value,
            if self.pass() { "PASS" } else { "FAIL" }
        )
    }
}

/// Paired runs with identical seeds whose storage differs only in the
/// non-requested files, plus a chi-squared test of the user's `G` labels.
pub fn audit_server_privacy(
    cfg: &DssConfig,
    backend: BackendKind,
    trials: usize,
    seed: u64,
) -> Result<ServerPrivacyReport, AuditError> {
    if trials < MIN_SERVER_TRIALS {
        return Err(AuditError::TooFewTrials(trials));
    }
    if cfg.m() == 1 {
        return Ok(ServerPrivacyReport {
            trials,
            vacuous: true,
            decode_failures: 0,
            pair_mismatches: 0,
            chi_squared: 0.0,
            degrees_of_freedom: 0,
            p_value: 1.0,
        });
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(u64, u64)> = (0..trials).map(|_| (master.gen(), master.gen())).collect();
    type Outcome = (bool, bool, Vec<usize>);
    let results: Vec<Result<Outcome, ProtocolError>> = jobs
        .into_par_iter()
        .map(|(file_seed, run_seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(file_seed);
            let k = cfg.code().k();
            let files = random_files(cfg.field(), k, cfg.m(), cfg.beta(), &mut rng);
            let target = rng.gen_range(0..cfg.m());
            let mut other = random_files(cfg.field(), k, cfg.m(), cfg.beta(), &mut rng);
            other[target] = files[target].clone();
            let (a, ta) = run_retrieval(cfg, &files, target, backend, run_seed)?;
            let (b, tb) = run_retrieval(cfg, &other, target, backend, run_seed)?;
            let decoded_ok = a == files[target] && b == files[target];
            let same_view = ta.user_observations() == tb.user_observations()
                && ta.slices.iter().zip(&tb.slices).all(|(x, y)| x.g == y.g && x.outcome == y.outcome)
                && ta.queries == tb.queries;
            Ok((decoded_ok, same_view, ta.user_observations().iter().map(|w| w.index()).collect()))
        })
        .collect();
    let mut decode_failures = 0;
    let mut pair_mismatches = 0;
    let mut counts: Vec<[u64; 4]> = Vec::new();
    for r in results {
        let (decoded_ok, same_view, obs) = r?;
        decode_failures += !decoded_ok as usize;
        pair_mismatches += !same_view as usize;
        if counts.len() < obs.len() {
            counts.resize(obs.len(), [0; 4]);
        }
        for (pos, &label) in obs.iter().enumerate() {
            counts[pos][label] += 1;
        }
    }
    let (chi_squared, degrees_of_freedom, p_value) = uniformity_test(&counts);
    Ok(ServerPrivacyReport {
        trials,
        vacuous: false,
        decode_failures,
        pair_mismatches,
        chi_squared,
        degrees_of_freedom,
        p_value,
    })
}

/// Pearson statistic summed over observation positions, each tested against
/// the uniform distribution on four labels.
pub fn uniformity_test(counts: &[[u64; 4]]) -> (f64, usize, f64) {
    let mut stat = 0.0;
    let mut dof = 0;
    for c in counts {
        let total: u64 = c.iter().sum();
        if total == 0 {
            continue;
        }
        let expected = total as f64 / 4.0;
        stat += c.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum::<f64>();
        dof += 3;
    }
    if dof == 0 {
        return (0.0, 0, 1.0);
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    (stat, dof, 1.0 - dist.cdf(stat))
}

/// Text report of a batch of user-privacy audits.
pub fn render_reports(reports: &[UserPrivacyReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "qpir-audit v1");
    for r in reports {
        let _ = writeln!(out, "{r}");
        for p in &r.pieces {
            let _ = writeln!(
                out,
                "  piece {} tv={} uniform={}",
                p.piece + 1,
                if r.conclusive { p.max_distance.to_string() } else { format!("{:.4}", p.estimate) },
                p.uniform
            );
        }
    }
    out
}
