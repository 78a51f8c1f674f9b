use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_rational::Ratio;
use qpir::codes::LinearCode;
use qpir::field::Field;
use qpir::lrc_protocol::{lrc_rate, run_lrc_retrieval};
use qpir::privacy::{
    audit_all_sets, audit_collusion_failure, audit_lrc_collusion, audit_server_privacy, audit_user_privacy,
    render_reports, subsets_up_to, AuditError, AuditMode,
};
use qpir::protocol::{
    expected_resources, random_files, rate, run_retrieval_on_storage, DssConfig, File, ProtocolError,
    ResourceReport, Storage,
};
use qpir::quantum::BackendKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Audit, BackendChoice, Experiment, Scheme};
use crate::CliError;

const DATA_SALT: u64 = 0xD1B5_4A32_D192_ED03;

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> CliError {
        if e.is_internal() {
            CliError::Internal(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> CliError {
        match e {
            AuditError::Protocol(p) => p.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn hex(row: &[qpir::field::FieldElement]) -> String {
    row.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
}

/// Files stored for a run with `seed`.
fn stored_files(scheme: &Scheme, seed: u64) -> Vec<File> {
    let code = scheme.code();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ DATA_SALT);
    random_files(code.field(), code.k(), scheme.m(), scheme.beta(), &mut rng)
}

struct RunResult {
    decoded: File,
    transcript: String,
    resources: ResourceReport,
    observations: Vec<usize>,
}

fn retrieve(exp: &Experiment, files: &[File], backend: BackendKind, seed: u64) -> Result<RunResult, CliError> {
    let storage = Storage::encode(exp.scheme.code(), files)?;
    match &exp.scheme {
        Scheme::Mds(cfg) => {
            let (decoded, tr) = run_retrieval_on_storage(cfg, &storage, exp.file, backend, seed)?;
            if tr.resources != expected_resources(cfg) {
                return Err(CliError::Internal(format!(
                    "resources {} differ from the closed form {}",
                    tr.resources,
                    expected_resources(cfg)
                )));
            }
            let observations = tr.user_observations().iter().map(|w| w.index()).collect();
            Ok(RunResult { decoded, transcript: tr.to_text(), resources: tr.resources, observations })
        }
        Scheme::Lrc { plan, .. } => {
            let (decoded, tr) = run_lrc_retrieval(plan, &storage, exp.file, backend, seed)?;
            let observations =
                tr.groups.iter().flat_map(|g| g.user_observations()).map(|w| w.index()).collect();
            Ok(RunResult { decoded, transcript: tr.to_text(), resources: tr.resources, observations })
        }
    }
}

/// Drops the line naming the backend so transcripts of both backends can be
/// compared.
fn without_backend(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with("backend ")).collect::<Vec<_>>().join("\n")
}

/// One retrieval per selected backend; writes transcripts and a summary to
/// `out` and returns the summary.
pub fn cmd_run(exp: &Experiment, out: Option<&Path>) -> Result<String, CliError> {
    let files = stored_files(&exp.scheme, exp.seed);
    let mut summary = String::new();
    let _ = writeln!(summary, "qpir-summary v1");
    let _ = writeln!(summary, "experiment {}", exp.name);
    let _ = writeln!(summary, "scheme {}", exp.scheme.describe());
    let _ = writeln!(summary, "seed {}", exp.seed);
    let _ = writeln!(summary, "file {}", exp.file + 1);
    let mut transcripts: Vec<(BackendKind, String)> = Vec::new();
    for backend in exp.backend.kinds() {
        let r = retrieve(exp, &files, backend, exp.seed)?;
        if r.decoded != files[exp.file] {
            return Err(CliError::Internal(format!("{backend} backend decoded a wrong file")));
        }
        let _ = writeln!(summary, "backend {backend} retrieval ok");
        if transcripts.is_empty() {
            for (b, row) in r.decoded.iter().enumerate() {
                let _ = writeln!(summary, "decoded b={} {}", b + 1, hex(row));
            }
            let _ = writeln!(summary, "resources {}", r.resources);
        }
        transcripts.push((backend, r.transcript));
    }
    if let [(_, a), (_, b)] = transcripts.as_slice() {
        if without_backend(a) != without_backend(b) {
            return Err(CliError::Internal("exact and symbolic transcripts differ".into()));
        }
        let _ = writeln!(summary, "backends agree");
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| CliError::Validation(format!("--out {}: {e}", dir.display())))?;
        for (backend, text) in &transcripts {
            write_file(&dir.join(format!("transcript-{backend}.txt")), text)?;
        }
        write_file(&dir.join("summary.txt"), &summary)?;
    }
    Ok(summary)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

/// `count` seeded retrievals per experiment and backend. Returns the report
/// and whether every retrieval succeeded.
pub fn cmd_trials(exps: &[Experiment], count: usize) -> Result<(String, bool), CliError> {
    let mut out = String::new();
    let _ = writeln!(out, "qpir-trials v1");
    let mut all_ok = true;
    for exp in exps {
        for backend in exp.backend.kinds() {
            let results: Vec<Result<(bool, [u64; 4]), CliError>> = (0..count as u64)
                .into_par_iter()
                .map(|i| {
                    let seed = exp.seed.wrapping_add(i);
                    let files = stored_files(&exp.scheme, seed);
                    let r = retrieve(exp, &files, backend, seed)?;
                    let mut hist = [0u64; 4];
                    for o in r.observations {
                        hist[o] += 1;
                    }
                    Ok((r.decoded == files[exp.file], hist))
                })
                .collect();
            let mut ok = 0usize;
            let mut hist = [0u64; 4];
            let mut first_error = None;
            for r in results {
                match r {
                    Ok((success, h)) => {
                        ok += success as usize;
                        for (a, b) in hist.iter_mut().zip(h) {
                            *a += b;
                        }
                    }
                    Err(e @ CliError::Validation(_)) => return Err(e),
                    Err(e) => {
                        first_error.get_or_insert(e.to_string());
                    }
                }
            }
            all_ok &= ok == count;
            let _ = writeln!(
                out,
                "trials {} scheme {} backend {} seed {} runs {} success {}/{} fraction {}",
                exp.name,
                exp.scheme.describe(),
                backend,
                exp.seed,
                count,
                ok,
                count,
                Ratio::new(ok as u64, count.max(1) as u64)
            );
            let _ = writeln!(
                out,
                "g-histogram (0,0) {} (0,1) {} (1,0) {} (1,1) {}",
                hist[0], hist[1], hist[2], hist[3]
            );
            if let Some(e) = first_error {
                let _ = writeln!(out, "error {e}");
            }
        }
    }
    Ok((out, all_ok))
}

fn control(cfg: &DssConfig, label: &str, out: &mut String) -> Result<bool, CliError> {
    let size = cfg.t() + 1;
    if size > cfg.n() {
        let _ = writeln!(out, "collusion-control{label} skipped (t + 1 > n)");
        return Ok(true);
    }
    for set in subsets_up_to(cfg.n(), size).into_iter().filter(|s| s.len() == size) {
        let r = audit_collusion_failure(cfg, &set)?;
        if *r.max_distance().numer() > 0 {
            let _ = writeln!(out, "collusion-control{label} leak detected: {r}");
            return Ok(true);
        }
    }
    let _ = writeln!(out, "collusion-control{label} no (t+1)-set leaks result=FAIL");
    Ok(false)
}

fn user_privacy(cfg: &DssConfig, colluders: Option<&[usize]>, out: &mut String) -> Result<bool, CliError> {
    let reports = match colluders {
        Some(set) => vec![audit_user_privacy(cfg, set, AuditMode::Exhaustive)?],
        None => audit_all_sets(cfg)?,
    };
    out.push_str(render_reports(&reports).trim_start_matches("qpir-audit v1\n"));
    Ok(reports.iter().all(|r| r.pass()))
}

/// Runs the selected audits. Returns the report and the overall verdict.
pub fn cmd_audit(exp: &Experiment) -> Result<(String, bool), CliError> {
    let mut out = String::new();
    let _ = writeln!(out, "qpir-audit v1");
    let _ = writeln!(out, "experiment {}", exp.name);
    let _ = writeln!(out, "scheme {}", exp.scheme.describe());
    let mut pass = true;
    for audit in &exp.audits {
        match (&exp.scheme, audit) {
            (Scheme::Mds(cfg), Audit::UserPrivacy) => pass &= user_privacy(cfg, exp.colluders.as_deref(), &mut out)?,
            (Scheme::Mds(cfg), Audit::CollusionControl) => pass &= control(cfg, "", &mut out)?,
            (Scheme::Mds(cfg), Audit::ServerPrivacy) => {
                for backend in exp.backend.kinds() {
                    let r = audit_server_privacy(cfg, backend, exp.server_trials, exp.seed)?;
                    let _ = writeln!(out, "{r} backend={backend}");
                    pass &= r.pass();
                }
            }
            (Scheme::Lrc { plan, .. }, Audit::UserPrivacy) => {
                for (g, cfg) in plan.configs.iter().enumerate() {
                    let _ = writeln!(out, "group {}", g + 1);
                    pass &= user_privacy(cfg, None, &mut out)?;
                }
            }
            (Scheme::Lrc { plan, .. }, Audit::CollusionControl) => {
                for (g, cfg) in plan.configs.iter().enumerate() {
                    pass &= control(cfg, &format!(" group {}", g + 1), &mut out)?;
                }
            }
            (Scheme::Lrc { plan, .. }, Audit::LrcCollusion) => {
                let colluders = match &exp.colluders {
                    Some(c) => c.clone(),
                    None => plan.configs.iter().map(|c| c.working()[0]).collect(),
                };
                match audit_lrc_collusion(plan, &colluders) {
                    Ok(r) => {
                        let _ = writeln!(out, "{r}");
                        pass &= r.pass();
                    }
                    Err(AuditError::Budget { space, budget }) => {
                        let _ = writeln!(out, "lrc-collusion skipped: {space} assignments exceed {budget}");
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            (Scheme::Lrc { .. }, Audit::ServerPrivacy) => {
                let _ = writeln!(out, "server-privacy skipped: not defined for group runs");
            }
            (Scheme::Mds(_), Audit::LrcCollusion) => {
                return Err(CliError::Validation("lrc-collusion needs scheme = \"lrc\"".into()));
            }
        }
    }
    let _ = writeln!(out, "result {}", if pass { "PASS" } else { "FAIL" });
    Ok((out, pass))
}

/// Achieved rates next to the literature capacity constants.
pub fn cmd_rate_table(max_n: usize, seed: u64) -> Result<String, CliError> {
    if !(2..=16).contains(&max_n) {
        return Err(CliError::Validation(format!("--max-n {max_n} outside 2..=16")));
    }
    let mut out = String::new();
    let _ = writeln!(out, "qpir-rate-table v1");
    let _ = writeln!(
        out,
        "# [simulated] measured from a symbolic run; [closed-form] rate formula of this scheme; [literature] capacity constants from prior work, not simulated"
    );
    let _ = writeln!(
        out,
        "# columns: n k t L qpir[simulated] qpir[closed-form] pir-replicated[literature]=1-1/n pir-replicated-t[literature]=1-t/n pir-mds-t-conjectured[literature]=1-(k+t-1)/n qpir-replicated[literature]=1 qpir-replicated-t[literature]>=2/(t+2)"
    );
    let one_minus = |x: usize, n: usize| Ratio::new((n - x) as u64, n as u64);
    for n in 2..=max_n {
        for k in 1..n {
            let t = n - k;
            let field = Field::for_length(n).map_err(|e| CliError::Validation(e.to_string()))?;
            let code = LinearCode::grs_default(field, n, k).map_err(|e| CliError::Internal(e.to_string()))?;
            let cfg = DssConfig::new(code, t, 2, 1)?;
            let files = random_files(field, k, 2, 1, &mut ChaCha8Rng::seed_from_u64(seed ^ DATA_SALT));
            let storage = Storage::encode(cfg.code(), &files)?;
            let (_, tr) = run_retrieval_on_storage(&cfg, &storage, 0, BackendKind::Symbolic, seed)?;
            let _ = writeln!(
                out,
                "mds n {n} k {k} t {t} L {} simulated {} closed-form {} literature {} {} {} 1 >={}",
                field.degree(),
                tr.resources.rate(),
                rate(k, t),
                one_minus(1, n),
                one_minus(t, n),
                one_minus(k + t - 1, n),
                Ratio::new(2u64, t as u64 + 2),
            );
        }
    }
    let _ = writeln!(out, "# lrc rows: rate depends on r and t only");
    for n in [8usize, 12] {
        let exp_cfg = crate::config::ExperimentConfig {
            scheme: Some("lrc".into()),
            n: Some(n),
            k: Some(4),
            r: Some(2),
            rho: Some(3),
            t: Some(2),
            ..Default::default()
        };
        let exp = Experiment::resolve(&exp_cfg, Some(seed), Some(BackendChoice::Symbolic))?;
        let files = stored_files(&exp.scheme, seed);
        let r = retrieve(&exp, &files, BackendKind::Symbolic, seed)?;
        let _ = writeln!(
            out,
            "lrc n {n} k 4 r 2 rho 3 t 2 simulated {} closed-form {}",
            r.resources.rate(),
            lrc_rate(2, 2)
        );
    }
    Ok(out)
}
