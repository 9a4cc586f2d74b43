//! Command-line surface of the `perfseq` binary.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use perfseq::{
    applicable_exchange_rules, compose_chain, find_rip_ordering, final_row, has_rip, is_perfect, perfectize,
    run_procedure, verify_prefix_consistency, Configuration, Covering, Direction, ProcedureOptions, Scope, TieBreak,
    Traversal, VarId, VariableTable,
};
use serde_json::json;
use serde_json::value::RawValue;

use crate::error::CliError;
use crate::model::{load_model, render_model, Model};
use crate::number::format_number;
use crate::query::{query_conditional, query_conditional_full};

#[derive(Debug, Parser)]
#[command(name = "perfseq", version, about = "Compose, check and query sequences of probability tables")]
pub struct Cli {
    /// Rescale tables whose sum is within 1e-6 of one.
    #[arg(long, global = true)]
    pub normalize: bool,

    /// Write the result here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compose the model's measures left to right.
    Compose {
        model: PathBuf,
        /// One direction per step, comma separated (default: all right).
        #[arg(long, value_delimiter = ',')]
        ops: Vec<Op>,
    },
    /// Marginal of the right-composed joint.
    Marginalize {
        model: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        onto: Vec<VarId>,
    },
    /// Rewrite the sequence into a perfect one with the same joint.
    Perfectize { model: PathBuf },
    /// Report structural properties; with no flag, all of them.
    Check {
        model: PathBuf,
        #[arg(long)]
        perfect: bool,
        #[arg(long)]
        rip: bool,
        /// Exchange rules whose hypotheses hold (three-measure models only).
        #[arg(long)]
        rules: bool,
    },
    /// Propagate a perfect sequence into a decomposable covering.
    Localize {
        model: PathBuf,
        /// A covering set such as `1,2`; repeat for each set. Defaults to
        /// the model's covering.
        #[arg(long, value_parser = parse_scope)]
        covering: Vec<Scope>,
        /// Emit the prefix-consistency report alongside the final row.
        #[arg(long)]
        report: bool,
        #[arg(long, value_enum, default_value_t = TraversalArg::Bfs)]
        traversal: TraversalArg,
        #[arg(long, value_enum, default_value_t = TieBreakArg::Smallest)]
        tie_break: TieBreakArg,
    },
    /// Conditional probability of `--target var=value` given evidence.
    Query {
        model: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        given: Vec<String>,
        /// Always compose the whole sequence.
        #[arg(long)]
        full_joint: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Op {
    #[value(alias = "r")]
    Right,
    #[value(alias = "l")]
    Left,
}

impl From<Op> for Direction {
    fn from(op: Op) -> Direction {
        match op {
            Op::Right => Direction::Right,
            Op::Left => Direction::Left,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TraversalArg {
    Bfs,
    Dfs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TieBreakArg {
    Smallest,
    Largest,
}

fn parse_scope(text: &str) -> Result<Scope, String> {
    text.split(',')
        .map(|v| v.trim().trim_start_matches('x').parse::<VarId>())
        .collect::<Result<Scope, _>>()
        .map_err(|e| format!("bad scope `{text}`: {e}"))
}

/// Parses `3=1`, `x3=1` or `x3=label`.
pub fn parse_assignment(text: &str, universe: &VariableTable) -> Result<(VarId, usize), CliError> {
    let bad = || CliError::Usage(format!("expected VAR=VALUE, got `{text}`"));
    let (var, value) = text.split_once('=').ok_or_else(bad)?;
    let var: VarId = var.trim().trim_start_matches('x').parse().map_err(|_| bad())?;
    let info = universe
        .info(var)
        .ok_or_else(|| CliError::Usage(format!("variable {var} is not declared")))?;
    let value = value.trim();
    let index = match value.parse::<usize>() {
        Ok(i) => i,
        Err(_) => info
            .labels
            .as_ref()
            .and_then(|labels| labels.iter().position(|l| l == value))
            .ok_or_else(|| CliError::Usage(format!("variable {var} has no value `{value}`")))?,
    };
    Ok((var, index))
}

fn check_lines(model: &Model, perfect: bool, rip: bool, rules: bool) -> Result<String, CliError> {
    let all = !(perfect || rip || rules);
    let seq = &model.sequence;
    let mut out = String::new();
    if all || perfect {
        out += &format!("perfect: {}\n", is_perfect(seq)?);
    }
    if all || rip {
        let scopes = seq.scopes();
        out += &format!("rip: {}\n", has_rip(&scopes));
        out += &format!("rip-reorderable: {}\n", find_rip_ordering(&scopes, 0).is_some());
    }
    if rules || (all && seq.len() == 3) {
        let [p1, p2, p3] = seq.items() else {
            return Err(CliError::Usage(format!(
                "--rules needs exactly three measures, the model has {}",
                seq.len()
            )));
        };
        let names: Vec<&str> = applicable_exchange_rules(p1, p2, p3).iter().map(|r| r.name()).collect();
        out += &format!("rules: {}\n", if names.is_empty() { "none".into() } else { names.join(", ") });
    }
    Ok(out)
}

fn localize(
    model: &Model,
    covering: Vec<Scope>,
    report: bool,
    traversal: TraversalArg,
    tie_break: TieBreakArg,
) -> Result<String, CliError> {
    let covering = if covering.is_empty() {
        model
            .covering
            .clone()
            .ok_or_else(|| CliError::Usage("no covering given and none in the model".into()))?
    } else {
        Covering::new(covering)?
    };
    let options = ProcedureOptions {
        traversal: match traversal {
            TraversalArg::Bfs => Traversal::BreadthFirst,
            TraversalArg::Dfs => Traversal::DepthFirst,
        },
        tie_break: match tie_break {
            TieBreakArg::Smallest => TieBreak::Smallest,
            TieBreakArg::Largest => TieBreak::Largest,
        },
        ..ProcedureOptions::default()
    };
    let state = run_procedure(&model.sequence, &covering, options)?;
    let row = final_row(&state);
    let order = state.final_ordering();
    let ordered = Covering::new(order.apply(covering.sets()))?;
    let document = render_model(&model.universe, row.items(), Some(&ordered));
    if !report {
        return Ok(document);
    }
    let checks = verify_prefix_consistency(&state, &model.sequence)?;
    let cells: Vec<_> = checks
        .cells
        .iter()
        .map(|c| json!({"row": c.row, "column": c.column, "max_deviation": c.max_deviation, "pass": c.pass}))
        .collect();
    let combined = json!({
        "final_row": RawValue::from_string(document).expect("rendered JSON"),
        "report": {
            "all_pass": checks.all_pass(),
            "max_deviation": checks.max_deviation(),
            "buckets": state.buckets().as_slice(),
            "final_ordering": order.order,
            "cells": cells,
        }
    });
    Ok(serde_json::to_string_pretty(&combined).expect("serializable") + "\n")
}

/// Executes one command and returns its textual output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let load = |path: &PathBuf| load_model(path, cli.normalize);
    match &cli.command {
        Command::Compose { model, ops } => {
            let model = load(model)?;
            let ops: Vec<Direction> = if ops.is_empty() {
                vec![Direction::Right; model.sequence.len() - 1]
            } else {
                ops.iter().map(|&o| o.into()).collect()
            };
            let joint = compose_chain(model.sequence.items(), &ops)?;
            Ok(render_model(&model.universe, &[joint], None))
        }
        Command::Marginalize { model, onto } => {
            let model = load(model)?;
            let joint = model.sequence.compose()?;
            let onto = Scope::new(onto.iter().copied());
            let marginal = joint.marginalize(&onto).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(render_model(&model.universe, &[marginal], None))
        }
        Command::Perfectize { model } => {
            let model = load(model)?;
            let perfect = perfectize(&model.sequence)?;
            Ok(render_model(&model.universe, perfect.items(), model.covering.as_ref()))
        }
        Command::Check {
            model,
            perfect,
            rip,
            rules,
        } => check_lines(&load(model)?, *perfect, *rip, *rules),
        Command::Localize {
            model,
            covering,
            report,
            traversal,
            tie_break,
        } => localize(&load(model)?, covering.clone(), *report, *traversal, *tie_break),
        Command::Query {
            model,
            target,
            given,
            full_joint,
        } => {
            let model = load(model)?;
            let target = parse_assignment(target, &model.universe)?;
            let evidence = given
                .iter()
                .map(|g| parse_assignment(g, &model.universe))
                .collect::<Result<Vec<_>, _>>()?;
            let evidence = Configuration::from_pairs(evidence).map_err(|e| CliError::Usage(e.to_string()))?;
            let p = if *full_joint {
                query_conditional_full(&model.sequence, target, &evidence)?
            } else {
                query_conditional(&model.sequence, target, &evidence)?.probability
            };
            Ok(format_number(p) + "\n")
        }
    }
}
