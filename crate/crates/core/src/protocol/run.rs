use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{FieldElement, Gf4};
use crate::quantum::{BackendKind, QuantumRegister, QubitId, WeylLabel};

use super::resources::expected_resources;
use super::{
    generate_queries, DssConfig, File, OddMode, ProtocolError, QuerySet, ResourceReport, RetrievalTranscript,
    SliceRecord, Storage,
};

/// Qubit layout of one `(p, b, l)` slice. Servers are 0-based here: chain
/// pair `j` joins the right qubit of server `j` to the left qubit of server
/// `j + 1`; cross pair `c` joins the two-sum qubits of servers `2c + 1` and
/// `2c + 2`; for odd `n` the auxiliary pair belongs to server `n − 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceTopology {
    pub piece: usize,
    pub stripe: usize,
    pub level: usize,
    pub chain: Vec<(QubitId, QubitId)>,
    pub cross: Vec<(QubitId, QubitId)>,
    pub aux: Option<(QubitId, QubitId)>,
}

impl SliceTopology {
    fn new(n: usize, piece: usize, stripe: usize, level: usize, base: u32) -> SliceTopology {
        let mut next = base;
        let mut pair = || {
            let p = (QubitId(next), QubitId(next + 1));
            next += 2;
            p
        };
        let chain = (0..n - 1).map(|_| pair()).collect();
        let cross = (0..(n / 2).saturating_sub(1)).map(|_| pair()).collect();
        let aux = (n % 2 == 1).then(&mut pair);
        SliceTopology { piece, stripe, level, chain, cross, aux }
    }

    pub fn n(&self) -> usize {
        self.chain.len() + 1
    }

    pub fn qubit_count(&self) -> usize {
        2 * (self.chain.len() + self.cross.len() + self.aux.iter().count())
    }

    /// `H_1`, the first server's chain qubit.
    pub fn first(&self) -> QubitId {
        self.chain[0].0
    }

    /// `H_n`, the last server's chain qubit.
    pub fn last(&self) -> QubitId {
        self.chain[self.chain.len() - 1].1
    }

    /// The two-sum input qubit of interior server `s` and the pair it sits in.
    fn two_sum_pair(&self, s: usize) -> Option<((QubitId, QubitId), QubitId)> {
        if s == 0 || s + 1 >= self.n() {
            return None;
        }
        let c = (s - 1) / 2;
        if c < self.cross.len() {
            let pair = self.cross[c];
            Some((pair, if s % 2 == 1 { pair.0 } else { pair.1 }))
        } else {
            self.aux.map(|pair| (pair, pair.0))
        }
    }
}

/// Layout of every slice, ordered by piece, stripe, level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub slices: Vec<SliceTopology>,
}

/// Lays out all pairs and counts resources from the layout. Qubits are
/// allocated lazily when a server first acts on a slice, so the register
/// stays small on the exact backend.
pub fn prepare_entanglement(
    cfg: &DssConfig,
    reg: &QuantumRegister,
) -> Result<(Topology, ResourceReport), ProtocolError> {
    if reg.live_count() != 0 {
        return Err(ProtocolError::RegisterNotEmpty { live: reg.live_count() });
    }
    let n = cfg.n();
    let mut slices = Vec::with_capacity(cfg.k() * cfg.beta() * cfg.degree());
    let mut base = 0u32;
    for p in 0..cfg.k() {
        for b in 0..cfg.beta() {
            for l in 0..cfg.degree() {
                let slice = SliceTopology::new(n, p, b, l, base);
                base += slice.qubit_count() as u32;
                slices.push(slice);
            }
        }
    }
    let mut report = ResourceReport {
        q_in: 0,
        q_ent: 0,
        q_out: 0,
        info_bits: 0,
        upload_bits: (cfg.k() * cfg.m() * n * 2 * cfg.degree()) as u64,
    };
    for s in &slices {
        let entangled_aux = s.aux.is_some() && cfg.odd_mode() == OddMode::Quantum;
        report.q_in += s.qubit_count() as u64;
        report.q_ent += (s.chain.len() + s.cross.len() + entangled_aux as usize) as u64;
        // H_1, H_n and both qubits of every two-sum pair go to the user
        report.q_out += 2 + 2 * (s.cross.len() + s.aux.iter().count()) as u64;
        report.info_bits += 2;
    }
    Ok((Topology { slices }, report))
}

fn label_of(e: FieldElement, level: usize) -> WeylLabel {
    WeylLabel::from(e.component(level))
}

fn ensure_pair(reg: &mut QuantumRegister, pair: (QubitId, QubitId)) -> Result<(), ProtocolError> {
    if !reg.is_live(pair.0) && !reg.is_live(pair.1) {
        reg.new_bell_pair(pair.0, pair.1)?;
    }
    Ok(())
}

/// Server `s` (0-based) acting on one slice with answer label `h`. Returns
/// `G_s` for interior servers.
pub fn server_response<R: Rng + ?Sized>(
    cfg: &DssConfig,
    slice: &SliceTopology,
    s: usize,
    h: WeylLabel,
    reg: &mut QuantumRegister,
    rng: &mut R,
) -> Result<Option<WeylLabel>, ProtocolError> {
    let n = slice.n();
    if s < n - 1 {
        ensure_pair(reg, slice.chain[s])?;
    }
    if s == 0 {
        reg.apply_weyl(slice.first(), h)?;
        return Ok(None);
    }
    if s == n - 1 {
        reg.apply_weyl(slice.last(), h)?;
        return Ok(None);
    }
    let (left, right) = (slice.chain[s - 1].1, slice.chain[s].0);
    reg.apply_weyl(left, h)?;
    let g = reg.bell_measure(left, right, rng)?;
    let (pair, mine) = slice.two_sum_pair(s).expect("interior server has a two-sum qubit");
    if Some(pair) == slice.aux && cfg.odd_mode() == OddMode::Basis {
        reg.new_qubit(pair.0, g.a())?;
        reg.new_qubit(pair.1, g.b())?;
    } else {
        ensure_pair(reg, pair)?;
        reg.apply_weyl(mine, g)?;
    }
    Ok(Some(g))
}

/// What the user learns from one slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserOutcome {
    pub pair_sums: Vec<WeylLabel>,
    pub aux: Option<WeylLabel>,
    pub aggregate: WeylLabel,
    pub outcome: WeylLabel,
}

/// The user's measurements on one slice after all servers responded.
pub fn user_decode<R: Rng + ?Sized>(
    cfg: &DssConfig,
    slice: &SliceTopology,
    reg: &mut QuantumRegister,
    rng: &mut R,
) -> Result<UserOutcome, ProtocolError> {
    let mut aggregate = WeylLabel::IDENTITY;
    let mut pair_sums = Vec::with_capacity(slice.cross.len());
    for &(a, b) in &slice.cross {
        let g = reg.bell_measure(a, b, rng)?;
        aggregate = aggregate + g;
        pair_sums.push(g);
    }
    let aux = match slice.aux {
        Some((a, b)) => {
            let g = match cfg.odd_mode() {
                OddMode::Quantum => reg.bell_measure(a, b, rng)?,
                OddMode::Basis => {
                    let ga = reg.basis_measure(a, rng)?;
                    let gb = reg.basis_measure(b, rng)?;
                    WeylLabel::new(ga, gb)
                }
            };
            aggregate = aggregate + g;
            Some(g)
        }
        None => None,
    };
    reg.apply_weyl(slice.last(), aggregate)?;
    let outcome = reg.bell_measure(slice.first(), slice.last(), rng)?;
    Ok(UserOutcome { pair_sums, aux, aggregate, outcome })
}

/// Output of the quantum part of a retrieval: `symbols[p][b] = y_{b,p}^K`.
#[derive(Clone, Debug)]
pub struct PieceRun {
    pub queries: QuerySet,
    pub slices: Vec<SliceRecord>,
    pub symbols: Vec<Vec<FieldElement>>,
    pub resources: ResourceReport,
}

fn check_storage(cfg: &DssConfig, storage: &Storage) -> Result<(), ProtocolError> {
    if storage.field() != cfg.field()
        || storage.servers() != cfg.server_count_total()
        || storage.m() != cfg.m()
        || storage.beta() != cfg.beta()
    {
        return Err(ProtocolError::FileShape(format!(
            "storage holds {} files x {} stripes on {} servers over {}, configuration expects {} x {} on {} over {}",
            storage.m(),
            storage.beta(),
            storage.servers(),
            storage.field(),
            cfg.m(),
            cfg.beta(),
            cfg.server_count_total(),
            cfg.field()
        )));
    }
    Ok(())
}

/// Runs query generation and every slice, returning the retrieved symbols of
/// the pieces. Classical recomputations guard the quantum results.
pub fn run_pieces<R: Rng + ?Sized>(
    cfg: &DssConfig,
    storage: &Storage,
    file: usize,
    backend: BackendKind,
    rng: &mut R,
) -> Result<PieceRun, ProtocolError> {
    check_storage(cfg, storage)?;
    let queries = generate_queries(cfg, file, rng)?;
    let mut reg = QuantumRegister::new(backend);
    let (topology, resources) = prepare_entanglement(cfg, &reg)?;
    if resources != expected_resources(cfg) {
        return Err(ProtocolError::Internal(format!(
            "layout resources {resources} differ from closed form {}",
            expected_resources(cfg)
        )));
    }
    let n = cfg.n();
    let field = cfg.field();
    let mut answers: Vec<FieldElement> = Vec::new();
    let mut levels: Vec<Gf4> = Vec::new();
    let mut slices = Vec::with_capacity(topology.slices.len());
    let mut symbols = vec![Vec::with_capacity(cfg.beta()); cfg.k()];
    for slice in &topology.slices {
        let (p, b, l) = (slice.piece, slice.stripe, slice.level);
        if l == 0 {
            answers = (0..n)
                .map(|s| {
                    let column = storage.server_column(b, cfg.working()[s]);
                    queries.q[p][s].iter().zip(&column).fold(field.zero(), |acc, (&q, &y)| acc + q * y)
                })
                .collect();
            let total = answers.iter().fold(field.zero(), |acc, &h| acc + h);
            let expected = storage.symbol(file, b, cfg.working()[p]);
            if total != expected {
                return Err(ProtocolError::Internal(format!(
                    "answers of piece {p} stripe {b} sum to {total}, stored symbol is {expected}"
                )));
            }
            levels.clear();
        }
        let h: Vec<WeylLabel> = answers.iter().map(|&e| label_of(e, l)).collect();
        let mut g = Vec::with_capacity(n.saturating_sub(2));
        for (s, &hs) in h.iter().enumerate() {
            if let Some(gs) = server_response(cfg, slice, s, hs, &mut reg, rng)? {
                g.push(gs);
            }
        }
        let user = user_decode(cfg, slice, &mut reg, rng)?;
        let expected = h.iter().fold(WeylLabel::IDENTITY, |acc, &x| acc + x);
        if user.outcome != expected {
            return Err(ProtocolError::Internal(format!(
                "slice (p={p}, b={b}, l={l}) measured {} but the answers sum to {expected}",
                user.outcome
            )));
        }
        levels.push(Gf4::from(user.outcome));
        if l + 1 == cfg.degree() {
            symbols[p].push(field.phi_inv(&levels)?);
        }
        slices.push(SliceRecord {
            piece: p,
            stripe: b,
            level: l,
            h,
            g,
            pair_sums: user.pair_sums,
            aux: user.aux,
            aggregate: user.aggregate,
            outcome: user.outcome,
        });
    }
    if reg.live_count() != 0 {
        return Err(ProtocolError::Internal(format!("{} qubits left unmeasured", reg.live_count())));
    }
    Ok(PieceRun { queries, slices, symbols, resources })
}

/// Retrieves file `file` (0-based) from encoded storage with a seeded run.
pub fn run_retrieval_on_storage(
    cfg: &DssConfig,
    storage: &Storage,
    file: usize,
    backend: BackendKind,
    seed: u64,
) -> Result<(File, RetrievalTranscript), ProtocolError> {
    if !cfg.decodes_files() {
        return Err(ProtocolError::InvalidConfig(format!(
            "the {} working servers carry only {} of {} message symbols",
            cfg.n(),
            cfg.k(),
            cfg.code().k()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run = run_pieces(cfg, storage, file, backend, &mut rng)?;
    let mut decoded = Vec::with_capacity(cfg.beta());
    for b in 0..cfg.beta() {
        let y: Vec<FieldElement> = (0..cfg.k()).map(|p| run.symbols[p][b]).collect();
        decoded.push(cfg.code().decode_from(cfg.piece_positions(), &y)?);
    }
    let transcript = RetrievalTranscript::new(cfg, backend, seed, run, decoded.clone());
    Ok((decoded, transcript))
}

/// Encodes `files` with the storage code and retrieves file `file` (0-based).
pub fn run_retrieval(
    cfg: &DssConfig,
    files: &[File],
    file: usize,
    backend: BackendKind,
    seed: u64,
) -> Result<(File, RetrievalTranscript), ProtocolError> {
    let storage = Storage::encode(cfg.code(), files)?;
    run_retrieval_on_storage(cfg, &storage, file, backend, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{example_rs_4_2, parity_check_3_2, LinearCode};
    use crate::field::Field;
    use crate::protocol::random_files;

    fn check_runs(cfg: &DssConfig, seeds: std::ops::Range<u64>, backend: BackendKind) {
        for seed in seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
            let files = random_files(cfg.field(), cfg.code().k(), cfg.m(), cfg.beta(), &mut rng);
            let k = rng.gen_range(0..cfg.m());
            let (got, tr) = run_retrieval(cfg, &files, k, backend, seed).unwrap();
            assert_eq!(got, files[k], "seed {seed}");
            assert_eq!(tr.resources, expected_resources(cfg));
        }
    }

    #[test]
    fn parity_example_retrieves() {
        let cfg = DssConfig::new(parity_check_3_2(), 1, 3, 2).unwrap();
        check_runs(&cfg, 0..50, BackendKind::Exact);
        check_runs(&cfg, 0..50, BackendKind::Symbolic);
    }

    #[test]
    fn rs_example_retrieves() {
        let cfg = DssConfig::new(example_rs_4_2(), 2, 2, 1).unwrap();
        check_runs(&cfg, 0..50, BackendKind::Exact);
        check_runs(&cfg, 0..200, BackendKind::Symbolic);
    }

    #[test]
    fn backends_agree_per_seed() {
        let code = LinearCode::grs_default(Field::new(2).unwrap(), 5, 2).unwrap();
        let cfg = DssConfig::new(code, 3, 2, 2).unwrap();
        let files = random_files(cfg.field(), 2, 2, 2, &mut ChaCha8Rng::seed_from_u64(1));
        for seed in 0..10 {
            let (_, a) = run_retrieval(&cfg, &files, 1, BackendKind::Exact, seed).unwrap();
            let (_, b) = run_retrieval(&cfg, &files, 1, BackendKind::Symbolic, seed).unwrap();
            assert_eq!(a.slices, b.slices);
        }
    }

    #[test]
    fn wider_storage_on_working_subset() {
        let code = LinearCode::grs_default(Field::for_length(6).unwrap(), 6, 2).unwrap();
        let cfg = DssConfig::new(code.clone(), 2, 2, 1).unwrap();
        check_runs(&cfg, 0..20, BackendKind::Exact);
        let cfg = DssConfig::with_working(code, vec![5, 1, 3, 2], 2, 2, 1).unwrap();
        check_runs(&cfg, 0..20, BackendKind::Symbolic);
    }

    #[test]
    fn single_file_and_odd_modes() {
        let code = LinearCode::grs_default(Field::for_length(5).unwrap(), 5, 3).unwrap();
        let cfg = DssConfig::new(code, 2, 1, 1).unwrap();
        check_runs(&cfg, 0..10, BackendKind::Exact);
        let basis = cfg.clone().with_odd_mode(OddMode::Basis);
        check_runs(&basis, 0..10, BackendKind::Exact);
        check_runs(&basis, 0..10, BackendKind::Symbolic);
    }

    #[test]
    fn topology_counts() {
        for n in 2..=8 {
            let code = LinearCode::grs_default(Field::for_length(n).unwrap(), n, 1).unwrap();
            let cfg = DssConfig::new(code, n - 1, 1, 1).unwrap();
            let reg = QuantumRegister::new(BackendKind::Symbolic);
            let (topo, report) = prepare_entanglement(&cfg, &reg).unwrap();
            assert_eq!(report, expected_resources(&cfg));
            let s = &topo.slices[0];
            // every interior server owns exactly one two-sum qubit
            let mut owned: Vec<QubitId> = (1..n - 1).map(|i| s.two_sum_pair(i).unwrap().1).collect();
            owned.sort();
            owned.dedup();
            assert_eq!(owned.len(), n - 2);
        }
    }

    #[test]
    fn prepare_requires_empty_register() {
        let cfg = DssConfig::new(example_rs_4_2(), 2, 1, 1).unwrap();
        let mut reg = QuantumRegister::new(BackendKind::Exact);
        reg.new_bell_pair(QubitId(100), QubitId(101)).unwrap();
        assert_eq!(prepare_entanglement(&cfg, &reg).unwrap_err(), ProtocolError::RegisterNotEmpty { live: 2 });
    }

    #[test]
    fn storage_shape_mismatch() {
        let cfg = DssConfig::new(example_rs_4_2(), 2, 2, 1).unwrap();
        let files = random_files(cfg.field(), 2, 3, 1, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(
            run_retrieval(&cfg, &files, 0, BackendKind::Exact, 0),
            Err(ProtocolError::FileShape(_))
        ));
    }
}
