//! The JSON model format.
//!
//! ```json
//! {
//!   "version": 1,
//!   "variables": [{"id": 1, "cardinality": 2, "labels": ["no", "yes"]}],
//!   "measures": [{"scope": [1], "table": [0.25, 0.75]}],
//!   "covering": [[1]]
//! }
//! ```
//!
//! Tables list their entries in canonical order: scope variables ascending,
//! the first one varying slowest. `labels` and `covering` are optional.

use std::fs;
use std::io::Write;
use std::path::Path;

use perfseq::{Covering, Measure, MeasureSequence, Scope, VarId, VariableTable};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::CliError;
use crate::number::format_number;

pub const FORMAT_VERSION: u32 = 1;

/// Largest deviation of a table's sum from 1 that `--normalize` repairs.
pub const NORMALIZE_TOL: f64 = 1e-6;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelIn {
    version: u32,
    variables: Vec<VariableDoc>,
    measures: Vec<MeasureIn>,
    #[serde(default)]
    covering: Option<Vec<Vec<VarId>>>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct VariableDoc {
    id: VarId,
    cardinality: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureIn {
    scope: Vec<VarId>,
    table: Vec<f64>,
}

#[derive(Serialize)]
struct ModelOut<'a> {
    version: u32,
    variables: Vec<VariableDoc>,
    measures: Vec<MeasureOut<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covering: Option<Vec<&'a [VarId]>>,
}

#[derive(Serialize)]
struct MeasureOut<'a> {
    scope: &'a [VarId],
    table: Vec<Box<RawValue>>,
}

/// A loaded model: variables, the measure sequence and an optional covering.
#[derive(Clone, Debug)]
pub struct Model {
    pub universe: VariableTable,
    pub sequence: MeasureSequence,
    pub covering: Option<Covering>,
}

pub fn load_model(path: &Path, normalize: bool) -> Result<Model, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&text, normalize)
}

pub fn parse_model(text: &str, normalize: bool) -> Result<Model, CliError> {
    let doc: ModelIn = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.version != FORMAT_VERSION {
        return Err(CliError::validation(
            None,
            format!("unsupported version {} (expected {FORMAT_VERSION})", doc.version),
        ));
    }

    let mut universe = VariableTable::new();
    for v in doc.variables {
        universe
            .insert(v.id, v.cardinality, v.labels)
            .map_err(|e| CliError::validation(None, e))?;
    }

    if doc.measures.is_empty() {
        return Err(CliError::validation(None, "the measures list is empty"));
    }
    let mut measures = Vec::with_capacity(doc.measures.len());
    for (i, m) in doc.measures.into_iter().enumerate() {
        let scope = Scope::from_ascending(m.scope).map_err(|e| CliError::validation(Some(i), e))?;
        let cards = universe.cards_of(&scope).map_err(|e| CliError::validation(Some(i), e))?;
        let measure = if normalize {
            Measure::normalized(scope, cards, m.table, NORMALIZE_TOL)
        } else {
            Measure::with_cards(scope, cards, m.table)
        };
        measures.push(measure.map_err(|e| CliError::validation(Some(i), e))?);
    }
    let sequence = MeasureSequence::new(measures).map_err(|e| CliError::validation(None, e))?;

    let covering = match doc.covering {
        None => None,
        Some(sets) => {
            let sets = sets
                .into_iter()
                .map(|s| {
                    let scope = Scope::from_ascending(s)?;
                    universe.cards_of(&scope)?;
                    Ok(scope)
                })
                .collect::<Result<Vec<_>, perfseq::MeasureError>>()
                .map_err(|e| CliError::validation(None, format!("covering: {e}")))?;
            Some(Covering::new(sets).map_err(|e| CliError::validation(None, format!("covering: {e}")))?)
        }
    };

    Ok(Model {
        universe,
        sequence,
        covering,
    })
}

/// Renders measures (and optionally a covering) as a model document. Only
/// variables that occur in some scope are listed.
pub fn render_model(universe: &VariableTable, measures: &[Measure], covering: Option<&Covering>) -> String {
    let used = Scope::union_all(
        measures
            .iter()
            .map(Measure::scope)
            .chain(covering.into_iter().flat_map(|c| c.sets())),
    );
    let variables = used
        .iter()
        .map(|id| {
            let info = universe.info(id).expect("scopes use declared variables");
            VariableDoc {
                id,
                cardinality: info.cardinality,
                labels: info.labels.clone(),
            }
        })
        .collect();
    let doc = ModelOut {
        version: FORMAT_VERSION,
        variables,
        measures: measures
            .iter()
            .map(|m| MeasureOut {
                scope: m.scope().vars(),
                table: m
                    .table()
                    .iter()
                    .map(|&v| RawValue::from_string(format_number(v)).expect("valid JSON number"))
                    .collect(),
            })
            .collect(),
        covering: covering.map(|c| c.sets().iter().map(Scope::vars).collect()),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable document");
    text.push('\n');
    text
}

/// Writes one measure as a single-measure model document.
pub fn emit_measure<W: Write>(m: &Measure, universe: &VariableTable, out: &mut W) -> Result<(), CliError> {
    out.write_all(render_model(universe, std::slice::from_ref(m), None).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLES_1_2: &str = r#"{
        "version": 1,
        "variables": [
            {"id": 1, "cardinality": 2},
            {"id": 2, "cardinality": 2},
            {"id": 3, "cardinality": 2}
        ],
        "measures": [
            {"scope": [1, 2], "table": [0.5, 0, 0.5, 0]},
            {"scope": [2, 3], "table": [0, 0, 0.5, 0.5]}
        ]
    }"#;

    #[test]
    fn loads_a_two_measure_model() {
        let model = parse_model(TABLES_1_2, false).unwrap();
        assert_eq!(model.sequence.len(), 2);
        assert_eq!(model.sequence.scopes(), vec![Scope::new([1, 2]), Scope::new([2, 3])]);
        assert!(model.covering.is_none());
    }

    #[test]
    fn empty_measure_list_is_invalid() {
        let text = r#"{"version": 1, "variables": [], "measures": []}"#;
        assert!(matches!(parse_model(text, false), Err(CliError::Validation { measure: None, .. })));
    }

    #[test]
    fn normalize_repairs_small_drift_only() {
        let text = |sum_last: &str| {
            format!(
                r#"{{"version": 1, "variables": [{{"id": 1, "cardinality": 2}}],
                    "measures": [{{"scope": [1], "table": [0.5, {sum_last}]}}]}}"#
            )
        };
        let drift = text("0.5000005");
        let err = parse_model(&drift, false).unwrap_err();
        assert!(matches!(err, CliError::Validation { measure: Some(0), .. }));
        let m = parse_model(&drift, true).unwrap();
        assert!((m.sequence.items()[0].total() - 1.0).abs() < 1e-15);
        assert!(parse_model(&text("0.51"), true).is_err());
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_model("{\n  \"version\": 1,\n  oops\n}", false) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validation_errors_name_the_measure() {
        let text = r#"{"version": 1, "variables": [{"id": 1, "cardinality": 2}],
            "measures": [{"scope": [1], "table": [0.5, 0.5]}, {"scope": [4], "table": [1]}]}"#;
        let err = parse_model(text, false).unwrap_err();
        assert!(matches!(err, CliError::Validation { measure: Some(1), .. }));
        assert!(err.to_string().contains("measure 1"));
    }

    #[test]
    fn emit_round_trips_bit_for_bit() {
        let u = VariableTable::from_cardinalities([(2, 3), (5, 2)]).unwrap();
        let raw = [0.1, 0.2, 0.3, 1.0 / 7.0, 1e-300, 0.0];
        let t: f64 = raw.iter().sum();
        let m = Measure::new(Scope::new([2, 5]), raw.iter().map(|v| v / t).collect(), &u).unwrap();
        let mut buf = Vec::new();
        emit_measure(&m, &u, &mut buf).unwrap();
        let back = parse_model(std::str::from_utf8(&buf).unwrap(), false).unwrap();
        assert_eq!(back.sequence.items()[0], m);
    }

    #[test]
    fn scalar_measure_is_one_cell() {
        let u = VariableTable::new();
        let text = render_model(&u, &[Measure::unit()], None);
        assert!(text.contains("\"scope\": []"));
        let back = parse_model(&text, false).unwrap();
        assert_eq!(back.sequence.items()[0].table(), &[1.0]);
    }

    #[test]
    fn labels_and_covering_survive() {
        let text = r#"{"version": 1,
            "variables": [{"id": 1, "cardinality": 2, "labels": ["lo", "hi"]}, {"id": 2, "cardinality": 2}],
            "measures": [{"scope": [1, 2], "table": [0.25, 0.25, 0.25, 0.25]}],
            "covering": [[1, 2]]}"#;
        let m = parse_model(text, false).unwrap();
        let out = render_model(&m.universe, m.sequence.items(), m.covering.as_ref());
        let again = parse_model(&out, false).unwrap();
        assert_eq!(again.universe.info(1).unwrap().labels.as_deref(), Some(&["lo".to_string(), "hi".to_string()][..]));
        assert_eq!(again.covering, m.covering);
    }
}
