use std::fmt::Write as _;

use crate::field::FieldElement;
use crate::quantum::{BackendKind, WeylLabel};

use super::{DssConfig, File, OddMode, PieceRun, QuerySet, ResourceReport};

pub const TRANSCRIPT_VERSION: &str = "qpir-transcript v1";

/// Labels seen on one `(p, b, l)` slice. `g` holds `G_s` of the interior
/// servers in server order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceRecord {
    pub piece: usize,
    pub stripe: usize,
    pub level: usize,
    pub h: Vec<WeylLabel>,
    pub g: Vec<WeylLabel>,
    pub pair_sums: Vec<WeylLabel>,
    pub aux: Option<WeylLabel>,
    pub aggregate: WeylLabel,
    pub outcome: WeylLabel,
}

#[derive(Clone, Debug)]
pub struct RetrievalTranscript {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub degree: usize,
    pub m: usize,
    pub beta: usize,
    pub servers_total: usize,
    pub working: Vec<usize>,
    pub odd_mode: OddMode,
    pub backend: BackendKind,
    pub seed: u64,
    pub queries: QuerySet,
    pub slices: Vec<SliceRecord>,
    pub symbols: Vec<Vec<FieldElement>>,
    pub decoded: File,
    pub resources: ResourceReport,
}

fn hex(v: &[FieldElement]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
}

fn labels(v: &[WeylLabel]) -> String {
    if v.is_empty() {
        return "-".into();
    }
    v.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
}

impl RetrievalTranscript {
    pub(crate) fn new(
        cfg: &DssConfig,
        backend: BackendKind,
        seed: u64,
        run: PieceRun,
        decoded: File,
    ) -> RetrievalTranscript {
        RetrievalTranscript {
            n: cfg.n(),
            k: cfg.k(),
            t: cfg.t(),
            degree: cfg.degree(),
            m: cfg.m(),
            beta: cfg.beta(),
            servers_total: cfg.server_count_total(),
            working: cfg.working().to_vec(),
            odd_mode: cfg.odd_mode(),
            backend,
            seed,
            queries: run.queries,
            slices: run.slices,
            symbols: run.symbols,
            decoded,
            resources: run.resources,
        }
    }

    /// Transcript of a run that retrieves pieces without decoding a file.
    pub(crate) fn from_run(cfg: &DssConfig, backend: BackendKind, seed: u64, run: PieceRun) -> RetrievalTranscript {
        RetrievalTranscript::new(cfg, backend, seed, run, Vec::new())
    }

    /// All `G` labels the user observes (two-sum outputs and the auxiliary
    /// output), in slice order.
    pub fn user_observations(&self) -> Vec<WeylLabel> {
        self.slices.iter().flat_map(|s| s.pair_sums.iter().copied().chain(s.aux)).collect()
    }

    /// Line-oriented text form. Indices of files, servers, pieces, stripes
    /// and levels are 1-based; field elements are packed hex.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w: Vec<String> = self.working.iter().map(|s| (s + 1).to_string()).collect();
        let _ = writeln!(out, "{TRANSCRIPT_VERSION}");
        let _ = writeln!(
            out,
            "config n {} k {} t {} L {} m {} beta {} servers {} working {} odd_mode {}",
            self.n,
            self.k,
            self.t,
            self.degree,
            self.m,
            self.beta,
            self.servers_total,
            w.join(","),
            self.odd_mode
        );
        let _ = writeln!(out, "backend {}", self.backend);
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "file {}", self.queries.file + 1);
        for (p, zp) in self.queries.z.iter().enumerate() {
            for (j, z) in zp.iter().enumerate() {
                let _ = writeln!(out, "z p={} j={} {}", p + 1, j + 1, hex(z));
            }
        }
        for (p, qp) in self.queries.q.iter().enumerate() {
            for (s, q) in qp.iter().enumerate() {
                let _ = writeln!(out, "query p={} s={} {}", p + 1, s + 1, hex(q));
            }
        }
        for s in &self.slices {
            let _ = writeln!(
                out,
                "slice p={} b={} l={} h {} g {} pairs {} aux {} aggregate {} outcome {}",
                s.piece + 1,
                s.stripe + 1,
                s.level + 1,
                labels(&s.h),
                labels(&s.g),
                labels(&s.pair_sums),
                s.aux.map_or("-".to_string(), |a| a.to_string()),
                s.aggregate,
                s.outcome
            );
        }
        for (p, ys) in self.symbols.iter().enumerate() {
            let _ = writeln!(out, "symbols p={} {}", p + 1, hex(ys));
        }
        for (b, x) in self.decoded.iter().enumerate() {
            let _ = writeln!(out, "decoded b={} {}", b + 1, hex(x));
        }
        let r = &self.resources;
        let _ = writeln!(
            out,
            "resources q_in {} q_ent {} q_out {} info_bits {} upload_bits {} rate {}",
            r.q_in,
            r.q_ent,
            r.q_out,
            r.info_bits,
            r.upload_bits,
            r.rate()
        );
        out
    }
}
