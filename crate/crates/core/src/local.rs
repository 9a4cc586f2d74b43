//! Local computation: propagating a perfect sequence into the sets of a
//! decomposable covering.
//!
//! The procedure fills an `n × m` grid of tables `R(i, j)`, row `i` for the
//! `i`-th measure and column `j` for the `j`-th covering set:
//!
//! * `R(1, j) = P1^(Lj ∩ K1)`;
//! * `R(i, b(i)) = R(i-1, b(i)) ▷ Pi` where `Ki ⊆ L_b(i)`;
//! * along a RIP ordering of the covering rooted at `b(i)`, every other
//!   column is updated from the column that witnesses its overlap:
//!   `R(i, jk) = R(i-1, jk) ◁ R(i, jl)^(L_jk ∩ L_jl)`.
//!
//! Each `R(i, j)` is a marginal of `P1 ▷ … ▷ Pi`, and the last row composes
//! back to the joint of the sequence.

use thiserror::Error;

use crate::compose::{compose_left, compose_right};
use crate::error::CompositionError;
use crate::junction::{has_rip, JunctionTree, RipOrdering, Traversal};
use crate::measure::Measure;
use crate::scope::Scope;
use crate::sequence::{is_perfect, MeasureSequence};
use crate::EQ_TOL;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalError {
    #[error("measure {measure} (scope {scope}) fits in no covering set")]
    NoBucket { measure: usize, scope: Scope },

    #[error("the covering admits no running-intersection ordering")]
    NotDecomposable,

    #[error("covering spans {covering} but the sequence spans {sequence}")]
    CoveringMismatch { covering: Scope, sequence: Scope },

    #[error("a covering needs at least one set")]
    EmptyCovering,

    #[error("the input sequence is not perfect")]
    NotPerfect,

    #[error("step {step}, column {column}: {source}")]
    Undefined {
        step: usize,
        column: usize,
        source: CompositionError,
    },

    #[error(transparent)]
    Composition(#[from] CompositionError),
}

/// The sets `L1, …, Lm` a model is localized into.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Covering {
    sets: Vec<Scope>,
}

impl Covering {
    pub fn new(sets: Vec<Scope>) -> Result<Self, LocalError> {
        if sets.is_empty() {
            return Err(LocalError::EmptyCovering);
        }
        Ok(Covering { sets })
    }

    pub fn sets(&self) -> &[Scope] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn union(&self) -> Scope {
        Scope::union_all(&self.sets)
    }

    pub fn junction_tree(&self) -> Option<JunctionTree> {
        JunctionTree::build(&self.sets)
    }

    pub fn is_decomposable(&self) -> bool {
        self.junction_tree().is_some()
    }
}

/// Which covering set receives a measure that fits in several.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    Smallest,
    Largest,
}

/// `b(i)`: the covering set each measure is absorbed into.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BucketAssignment {
    buckets: Vec<usize>,
}

impl BucketAssignment {
    pub fn bucket(&self, measure: usize) -> usize {
        self.buckets[measure]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.buckets
    }
}

pub fn assign_buckets(
    scopes: &[Scope],
    covering: &Covering,
    tie_break: TieBreak,
) -> Result<BucketAssignment, LocalError> {
    let buckets = scopes
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let mut fits = covering.sets.iter().enumerate().filter(|(_, l)| k.is_subset(l));
            let found = match tie_break {
                TieBreak::Smallest => fits.next(),
                TieBreak::Largest => fits.next_back(),
            };
            found.map(|(j, _)| j).ok_or_else(|| LocalError::NoBucket {
                measure: i,
                scope: k.clone(),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(BucketAssignment { buckets })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProcedureOptions {
    pub tie_break: TieBreak,
    pub traversal: Traversal,
    /// Check perfectness of the input before propagating.
    pub verify_perfect: bool,
    /// Retain every row; otherwise only the last two rows are kept.
    pub keep_all_rows: bool,
}

impl Default for ProcedureOptions {
    fn default() -> Self {
        ProcedureOptions {
            tie_break: TieBreak::Smallest,
            traversal: Traversal::BreadthFirst,
            verify_perfect: true,
            keep_all_rows: true,
        }
    }
}

/// Grid cell `(row, column)`, both 0-based.
pub type Cell = (usize, usize);

/// Which tables one row update read and wrote.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepTrace {
    pub row: usize,
    pub ordering: Option<RipOrdering>,
    pub reads: Vec<Cell>,
    pub writes: Vec<Cell>,
}

#[derive(Clone, Debug)]
pub struct LocalState {
    covering: Covering,
    buckets: BucketAssignment,
    rows: Vec<Option<Vec<Measure>>>,
    trace: Vec<StepTrace>,
    final_ordering: RipOrdering,
}

impl LocalState {
    pub fn covering(&self) -> &Covering {
        &self.covering
    }

    pub fn buckets(&self) -> &BucketAssignment {
        &self.buckets
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> usize {
        self.covering.len()
    }

    /// `R(i, j)`, 0-based; `None` for rows dropped in low-memory mode.
    pub fn table(&self, row: usize, column: usize) -> Option<&Measure> {
        self.rows.get(row)?.as_ref().map(|r| &r[column])
    }

    pub fn row(&self, row: usize) -> Option<&[Measure]> {
        self.rows.get(row)?.as_deref()
    }

    pub fn trace(&self) -> &[StepTrace] {
        &self.trace
    }

    /// The covering order used to read out the last row: the given order if
    /// it already meets the running intersection property, otherwise a
    /// junction-tree ordering rooted at the first set.
    pub fn final_ordering(&self) -> &RipOrdering {
        &self.final_ordering
    }

    /// Replaces one stored table; used to exercise the diagnostics.
    pub fn replace_table(&mut self, row: usize, column: usize, table: Measure) {
        if let Some(Some(r)) = self.rows.get_mut(row) {
            r[column] = table;
        }
    }
}

pub fn run_procedure(
    seq: &MeasureSequence,
    covering: &Covering,
    options: ProcedureOptions,
) -> Result<LocalState, LocalError> {
    let span = seq.covered();
    if covering.union() != span {
        return Err(LocalError::CoveringMismatch {
            covering: covering.union(),
            sequence: span,
        });
    }
    let tree = covering.junction_tree().ok_or(LocalError::NotDecomposable)?;
    let buckets = assign_buckets(&seq.scopes(), covering, options.tie_break)?;
    if options.verify_perfect && !is_perfect(seq)? {
        return Err(LocalError::NotPerfect);
    }

    let sets = covering.sets();
    let m = sets.len();
    let first = &seq.items()[0];
    let row0: Vec<Measure> = sets
        .iter()
        .map(|l| first.marginalize(&l.intersection(first.scope())))
        .collect::<Result<_, _>>()
        .map_err(CompositionError::from)?;
    let mut rows = vec![Some(row0)];
    let mut trace = vec![StepTrace {
        row: 0,
        ordering: None,
        reads: Vec::new(),
        writes: (0..m).map(|j| (0, j)).collect(),
    }];

    for (i, p) in seq.items().iter().enumerate().skip(1) {
        let prev = rows[i - 1].as_ref().expect("previous row is retained");
        let b = buckets.bucket(i);
        let ordering = tree.ordering(b, options.traversal);
        let undefined = |column: usize| move |source| LocalError::Undefined { step: i, column, source };

        let mut next: Vec<Option<Measure>> = vec![None; m];
        let mut reads = vec![(i - 1, b)];
        let mut writes = vec![(i, b)];
        next[b] = Some(compose_right(&prev[b], p).map_err(undefined(b))?);

        for k in 1..m {
            let jk = ordering.order[k];
            let jl = ordering.witness_index(k).expect("non-root has a witness");
            let source = next[jl].as_ref().expect("witness precedes in the ordering");
            let message = source
                .marginalize(&sets[jk].intersection(source.scope()))
                .map_err(CompositionError::from)
                .map_err(undefined(jk))?;
            next[jk] = Some(compose_left(&prev[jk], &message).map_err(undefined(jk))?);
            reads.extend([(i - 1, jk), (i, jl)]);
            writes.push((i, jk));
        }

        rows.push(Some(next.into_iter().map(|r| r.expect("every column visited")).collect()));
        if !options.keep_all_rows && i >= 2 {
            rows[i - 2] = None;
        }
        trace.push(StepTrace {
            row: i,
            ordering: Some(ordering),
            reads,
            writes,
        });
    }

    let final_ordering = if has_rip(sets) {
        RipOrdering {
            order: (0..m).collect(),
            witnesses: rip_witnesses(sets),
        }
    } else {
        tree.ordering(0, options.traversal)
    };

    Ok(LocalState {
        covering: covering.clone(),
        buckets,
        rows,
        trace,
        final_ordering,
    })
}

/// Witness positions for a family that is already in RIP order.
fn rip_witnesses(sets: &[Scope]) -> Vec<Option<usize>> {
    let mut seen = Scope::empty();
    sets.iter()
        .enumerate()
        .map(|(k, l)| {
            let overlap = l.intersection(&seen);
            seen = seen.union(l);
            if k == 0 {
                None
            } else {
                (0..k).find(|&j| overlap.is_subset(&sets[j]))
            }
        })
        .collect()
}

/// The last row `R(n, ·)` as a sequence, in [`LocalState::final_ordering`].
pub fn final_row(state: &LocalState) -> MeasureSequence {
    let last = state.row(state.rows() - 1).expect("last row is always kept");
    MeasureSequence::new(state.final_ordering.apply(last)).expect("nonempty covering")
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellCheck {
    pub row: usize,
    pub column: usize,
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub cells: Vec<CellCheck>,
}

impl ConsistencyReport {
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellCheck> {
        self.cells.iter().filter(|c| !c.pass)
    }

    pub fn max_deviation(&self) -> f64 {
        self.cells.iter().map(|c| c.max_deviation).fold(0.0, f64::max)
    }
}

/// Checks every retained `R(i, j)` against the marginal of the prefix
/// composition `P1 ▷ … ▷ Pi` on its scope.
pub fn verify_prefix_consistency(
    state: &LocalState,
    seq: &MeasureSequence,
) -> Result<ConsistencyReport, CompositionError> {
    let prefixes = seq.prefix_joints()?;
    let mut cells = Vec::new();
    for (row, prefix) in prefixes.iter().enumerate().take(state.rows()) {
        let Some(tables) = state.row(row) else { continue };
        for (column, r) in tables.iter().enumerate() {
            let max_deviation = prefix
                .marginalize(r.scope())
                .ok()
                .and_then(|m| m.max_abs_diff(r))
                .unwrap_or(f64::INFINITY);
            cells.push(CellCheck {
                row,
                column,
                max_deviation,
                pass: max_deviation <= EQ_TOL,
            });
        }
    }
    Ok(ConsistencyReport { cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::compose_all_right;
    use crate::scope::VariableTable;

    fn universe() -> VariableTable {
        VariableTable::from_cardinalities((1..=4).map(|v| (v, 2))).unwrap()
    }

    fn s(v: &[u32]) -> Scope {
        Scope::new(v.iter().copied())
    }

    fn joint() -> Measure {
        let raw: Vec<f64> = (0..16).map(|i| 1.0 + ((i * 37) % 11) as f64).collect();
        let t: f64 = raw.iter().sum();
        Measure::new(s(&[1, 2, 3, 4]), raw.iter().map(|v| v / t).collect(), &universe()).unwrap()
    }

    fn marg(j: &Measure, v: &[u32]) -> Measure {
        j.marginalize(&s(v)).unwrap()
    }

    #[test]
    fn buckets_examples() {
        let cov = Covering::new(vec![s(&[1, 2]), s(&[2, 3])]).unwrap();
        let b = assign_buckets(&[s(&[1, 2]), s(&[2, 3])], &cov, TieBreak::Smallest).unwrap();
        assert_eq!(b.as_slice(), &[0, 1]);
        let b = assign_buckets(&[s(&[2])], &cov, TieBreak::Smallest).unwrap();
        assert_eq!(b.as_slice(), &[0]);
        let b = assign_buckets(&[s(&[2])], &cov, TieBreak::Largest).unwrap();
        assert_eq!(b.as_slice(), &[1]);
        assert!(matches!(
            assign_buckets(&[s(&[1, 3])], &cov, TieBreak::Smallest),
            Err(LocalError::NoBucket { measure: 0, .. })
        ));
    }

    #[test]
    fn single_measure_is_marginalized_into_every_set() {
        let j = joint();
        let seq = MeasureSequence::new(vec![j.clone()]).unwrap();
        let cov = Covering::new(vec![s(&[2, 3]), s(&[1, 2, 3, 4]), s(&[1])]).unwrap();
        let state = run_procedure(&seq, &cov, ProcedureOptions::default()).unwrap();
        for (col, l) in cov.sets().iter().enumerate() {
            assert_eq!(state.table(0, col).unwrap(), &j.marginalize(l).unwrap());
        }
        let report = verify_prefix_consistency(&state, &seq).unwrap();
        assert_eq!(report.cells.len(), 3);
        assert!(report.all_pass());
    }

    #[test]
    fn chain_fixture_yields_clique_marginals() {
        let j = marg(&joint(), &[1, 2, 3]);
        let seq = MeasureSequence::new(vec![marg(&j, &[1, 2]), marg(&j, &[2, 3])]).unwrap();
        let cov = Covering::new(vec![s(&[1, 2]), s(&[2, 3])]).unwrap();
        let state = run_procedure(&seq, &cov, ProcedureOptions::default()).unwrap();
        let joint = seq.compose().unwrap();
        let row = final_row(&state);
        for (r, l) in row.iter().zip(cov.sets()) {
            assert!(r.approx_eq(&joint.marginalize(l).unwrap(), 1e-12));
        }
        assert!(row.compose().unwrap().approx_eq(&joint, 1e-12));
    }

    #[test]
    fn three_measures_two_sets() {
        let j = joint();
        let seq = MeasureSequence::new(vec![marg(&j, &[1, 2]), marg(&j, &[2, 3]), marg(&j, &[2, 4])])
            .unwrap();
        let cov = Covering::new(vec![s(&[2, 3, 4]), s(&[1, 2])]).unwrap();
        let state = run_procedure(&seq, &cov, ProcedureOptions::default()).unwrap();
        let report = verify_prefix_consistency(&state, &seq).unwrap();
        assert!(report.all_pass(), "{report:?}");
        let full = compose_all_right(seq.items()).unwrap();
        assert!(final_row(&state).compose().unwrap().approx_eq(&full, 1e-12));
    }

    #[test]
    fn perturbed_cell_is_flagged() {
        let j = joint();
        let seq = MeasureSequence::new(vec![marg(&j, &[1, 2]), marg(&j, &[2, 3])]).unwrap();
        let cov = Covering::new(vec![s(&[1, 2]), s(&[2, 3])]).unwrap();
        let mut state = run_procedure(&seq, &cov, ProcedureOptions::default()).unwrap();
        let r = state.table(1, 0).unwrap().clone();
        let mut t = r.table().to_vec();
        t[0] += 1e-3;
        t[1] -= 1e-3;
        state.replace_table(1, 0, Measure::with_cards(r.scope().clone(), r.cards().to_vec(), t).unwrap());
        let report = verify_prefix_consistency(&state, &seq).unwrap();
        let failures: Vec<_> = report.failures().map(|c| (c.row, c.column)).collect();
        assert_eq!(failures, vec![(1, 0)]);
    }

    #[test]
    fn input_errors() {
        let j = joint();
        let seq = MeasureSequence::new(vec![marg(&j, &[1, 2]), marg(&j, &[2, 3])]).unwrap();
        let cyclic = Covering::new(vec![s(&[1, 2]), s(&[2, 3]), s(&[1, 3])]).unwrap();
        assert!(matches!(
            run_procedure(&seq, &cyclic, ProcedureOptions::default()),
            Err(LocalError::NotDecomposable)
        ));
        let short = Covering::new(vec![s(&[1, 2])]).unwrap();
        assert!(matches!(
            run_procedure(&seq, &short, ProcedureOptions::default()),
            Err(LocalError::CoveringMismatch { .. })
        ));
        let a = Measure::new(s(&[1, 2]), vec![0.3, 0.3, 0.2, 0.2], &universe()).unwrap();
        let b = Measure::new(s(&[2, 3]), vec![0.3, 0.3, 0.2, 0.2], &universe()).unwrap();
        let bad = MeasureSequence::new(vec![a, b]).unwrap();
        let cov = Covering::new(vec![s(&[1, 2]), s(&[2, 3])]).unwrap();
        assert!(matches!(
            run_procedure(&bad, &cov, ProcedureOptions::default()),
            Err(LocalError::NotPerfect)
        ));
        assert!(Covering::new(vec![]).is_err());
    }

    #[test]
    fn low_memory_keeps_last_rows() {
        let j = joint();
        let seq = MeasureSequence::new(vec![marg(&j, &[1, 2]), marg(&j, &[2, 3]), marg(&j, &[3, 4])])
            .unwrap();
        let cov = Covering::new(vec![s(&[1, 2]), s(&[2, 3]), s(&[3, 4])]).unwrap();
        let opts = ProcedureOptions {
            keep_all_rows: false,
            ..Default::default()
        };
        let lean = run_procedure(&seq, &cov, opts).unwrap();
        let full = run_procedure(&seq, &cov, ProcedureOptions::default()).unwrap();
        assert!(lean.row(0).is_none());
        assert_eq!(lean.row(2), full.row(2));
        assert!(verify_prefix_consistency(&lean, &seq).unwrap().all_pass());
    }

    #[test]
    fn each_step_reads_only_previous_row_and_witnesses() {
        let j = joint();
        let seq = MeasureSequence::new(vec![marg(&j, &[1, 2]), marg(&j, &[2, 3]), marg(&j, &[3, 4])])
            .unwrap();
        let cov = Covering::new(vec![s(&[1, 2]), s(&[2, 3]), s(&[3, 4])]).unwrap();
        let state = run_procedure(&seq, &cov, ProcedureOptions::default()).unwrap();
        for step in &state.trace()[1..] {
            let ordering = step.ordering.as_ref().unwrap();
            let witnesses: Vec<usize> = (1..ordering.len()).filter_map(|k| ordering.witness_index(k)).collect();
            for &(row, col) in &step.reads {
                assert!(row == step.row - 1 || (row == step.row && witnesses.contains(&col)));
            }
            assert!(step.writes.iter().all(|&(row, _)| row == step.row));
        }
    }
}
