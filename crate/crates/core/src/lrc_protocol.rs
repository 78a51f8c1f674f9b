//! QPIR over locally repairable storage: the MDS protocol runs inside `k/r`
//! repair groups, each group recovering `r` symbols of an information set.

use std::fmt::Write as _;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codes::{LinearCode, LrcProfile};
use crate::field::FieldElement;
use crate::protocol::{
    run_pieces, DssConfig, File, OddMode, ProtocolError, ResourceReport, RetrievalTranscript, Storage,
};
use crate::quantum::BackendKind;

/// The groups, positions and per-group configurations of an LRC retrieval.
#[derive(Clone, Debug)]
pub struct LrcRetrievalPlan {
    pub code: LinearCode,
    pub profile: LrcProfile,
    pub t: usize,
    /// Indices into `profile.groups` of the groups used.
    pub groups: Vec<usize>,
    /// Physical positions retrieved in each used group (`r` each).
    pub targets: Vec<Vec<usize>>,
    /// One configuration per used group: the first `r + t` group positions.
    pub configs: Vec<DssConfig>,
}

impl LrcRetrievalPlan {
    /// Union of the target positions in group order.
    pub fn information_set(&self) -> Vec<usize> {
        self.targets.concat()
    }

    pub fn m(&self) -> usize {
        self.configs[0].m()
    }

    pub fn beta(&self) -> usize {
        self.configs[0].beta()
    }

    pub fn with_odd_mode(mut self, mode: OddMode) -> LrcRetrievalPlan {
        self.configs = self.configs.into_iter().map(|c| c.with_odd_mode(mode)).collect();
        self
    }
}

/// Uses the first `k/r` repair groups; in each, the first `r + t` positions
/// form the working servers and the first `r` of them are retrieved.
pub fn plan_lrc_retrieval(
    code: &LinearCode,
    profile: &LrcProfile,
    t: usize,
    m: usize,
    beta: usize,
) -> Result<LrcRetrievalPlan, ProtocolError> {
    let r = profile.r;
    if t >= profile.rho {
        return Err(ProtocolError::InvalidConfig(format!(
            "collusion parameter t = {t} must be below rho = {}",
            profile.rho
        )));
    }
    if r == 0 || code.k() % r != 0 || profile.mu() < code.k() / r {
        return Err(ProtocolError::InvalidConfig(format!(
            "profile with r = {r} and {} groups does not fit k = {}",
            profile.mu(),
            code.k()
        )));
    }
    let used = code.k() / r;
    let mut targets = Vec::with_capacity(used);
    let mut configs = Vec::with_capacity(used);
    for g in 0..used {
        let group = &profile.groups[g];
        let working = group[..r + t].to_vec();
        let cfg = DssConfig::with_working(code.clone(), working, t, m, beta)?;
        if cfg.k() != r {
            return Err(ProtocolError::InvalidConfig(format!(
                "group {} has local dimension {}, expected r = {r}",
                g + 1,
                cfg.k()
            )));
        }
        targets.push(cfg.piece_positions().to_vec());
        configs.push(cfg);
    }
    let plan = LrcRetrievalPlan {
        code: code.clone(),
        profile: profile.clone(),
        t,
        groups: (0..used).collect(),
        targets,
        configs,
    };
    if !code.is_information_set(&plan.information_set())? {
        return Err(ProtocolError::InvalidConfig(format!(
            "positions {:?} are not an information set",
            plan.information_set()
        )));
    }
    Ok(plan)
}

/// `2/(r+t)` for even `r+t`, else `2/(r+t+1)`.
pub fn lrc_rate(r: usize, t: usize) -> Ratio<u64> {
    crate::protocol::rate(r, t)
}

/// Seed of the run in group `g`, derived from the master seed.
pub fn group_seed(seed: u64, g: usize) -> u64 {
    seed.wrapping_add((g as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Clone, Debug)]
pub struct LrcTranscript {
    pub groups: Vec<RetrievalTranscript>,
    pub targets: Vec<Vec<usize>>,
    pub decoded: File,
    pub resources: ResourceReport,
}

impl LrcTranscript {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qpir-lrc-transcript v1");
        for (g, (tr, targets)) in self.groups.iter().zip(&self.targets).enumerate() {
            let pos: Vec<String> = targets.iter().map(|p| (p + 1).to_string()).collect();
            let _ = writeln!(out, "group {} targets {}", g + 1, pos.join(","));
            out.push_str(&tr.to_text());
            let _ = writeln!(out, "end group {}", g + 1);
        }
        for (b, x) in self.decoded.iter().enumerate() {
            let row: Vec<String> = x.iter().map(|e| e.to_string()).collect();
            let _ = writeln!(out, "decoded b={} {}", b + 1, row.join(" "));
        }
        let _ = writeln!(out, "resources {}", self.resources);
        out
    }
}

/// Runs the group protocols and decodes file `file` (0-based) from the
/// retrieved information set.
pub fn run_lrc_retrieval(
    plan: &LrcRetrievalPlan,
    storage: &Storage,
    file: usize,
    backend: BackendKind,
    seed: u64,
) -> Result<(File, LrcTranscript), ProtocolError> {
    let mut groups = Vec::with_capacity(plan.configs.len());
    let mut resources: Option<ResourceReport> = None;
    // symbols[b] collects the target symbols of all groups in order
    let mut symbols: Vec<Vec<FieldElement>> = vec![Vec::new(); plan.beta()];
    for (g, cfg) in plan.configs.iter().enumerate() {
        let gs = group_seed(seed, g);
        let mut rng = ChaCha8Rng::seed_from_u64(gs);
        let run = run_pieces(cfg, storage, file, backend, &mut rng)?;
        for (b, row) in symbols.iter_mut().enumerate() {
            row.extend(run.symbols.iter().map(|ys| ys[b]));
        }
        resources = Some(match resources {
            Some(acc) => acc.combine(&run.resources),
            None => run.resources,
        });
        groups.push(RetrievalTranscript::from_run(cfg, backend, gs, run));
    }
    let info = plan.information_set();
    let mut decoded = Vec::with_capacity(plan.beta());
    for y in &symbols {
        decoded.push(plan.code.decode_from(&info, y)?);
    }
    let transcript = LrcTranscript {
        groups,
        targets: plan.targets.clone(),
        decoded: decoded.clone(),
        resources: resources.expect("at least one group"),
    };
    Ok((decoded, transcript))
}
