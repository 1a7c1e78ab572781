//! Text formats written by the commands: sweep and oracle CSV, the gnuplot companion
//! script, and the JSON map dump.

use std::fmt::Write as _;

use localsyn::affine::AffineMapPair;
use localsyn::model_match::{Parameterization, SweepRow};
use localsyn::oracle::OracleReport;
use localsyn::{PlantParams, Series};
use serde::Serialize;

pub const SWEEP_HEADER: &str = "E,J_sl,J_io,J_inf,gap_sl,gap_io,T_used,residual_grad,status";

/// Scientific notation with 15 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Rounds to 15 significant digits so serialized JSON carries no more than that.
pub fn round15(x: f64) -> f64 {
    num(x).parse().expect("formatted float parses back")
}

fn row_status(row: &SweepRow) -> String {
    let errors = row.errors();
    if errors.is_empty() {
        return "ok".into();
    }
    errors
        .iter()
        .map(|(q, e)| format!("{q}: {e}"))
        .collect::<Vec<_>>()
        .join("; ")
        .replace([',', '\n', '"'], " ")
}

pub fn sweep_csv(rows: &[SweepRow], horizon: usize) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.extent,
            opt_num(row.j_sl()),
            opt_num(row.j_io()),
            opt_num(row.j_inf),
            opt_num(row.gap(Parameterization::SystemLevel)),
            opt_num(row.gap(Parameterization::InputOutput)),
            horizon,
            opt_num(row.residual_grad()),
            row_status(row),
        );
    }
    out
}

pub fn oracle_csv(report: &OracleReport) -> String {
    let mut out = String::from("theta,cost_sq\n");
    for (theta, c) in &report.integrand {
        let _ = writeln!(out, "{},{}", num(*theta), num(*c));
    }
    out
}

/// Gnuplot script plotting the finite-extent costs against `E` with `J∞` as a reference line.
pub fn gnuplot_script(csv_name: &str, j_inf: f64) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'E'\n\
         set ylabel 'cost'\n\
         set grid\n\
         set terminal pngcairo size 800,500\n\
         set output 'sweep.png'\n\
         jinf = {}\n\
         plot '{csv_name}' using 1:2 with linespoints title 'J_E (SL)', \\\n     \
         '' using 1:3 with points pointtype 6 title 'J_E (IO)', \\\n     \
         jinf with lines dashtype 2 title 'J_inf'\n",
        num(j_inf)
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryDump {
    pub row: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<i64>,
    /// `[power of z, coefficient]` pairs.
    pub terms: Vec<(i32, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockDump {
    pub name: String,
    pub out_extent: usize,
    pub v: Vec<EntryDump>,
    pub h: Vec<EntryDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairDump {
    pub input_extent: usize,
    pub blocks: Vec<BlockDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamDump {
    /// Blocks acting on the decomposed map before substitution.
    pub raw: PairDump,
    /// Blocks acting on the free parameter.
    pub assembled: PairDump,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlantDump {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

/// Schema of `maps_E{E}.json`. Zero entries are omitted.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapDump {
    pub extent: usize,
    pub plant: PlantDump,
    pub sl: ParamDump,
    pub io: ParamDump,
}

impl From<&PlantParams> for PlantDump {
    fn from(p: &PlantParams) -> Self {
        Self {
            alpha: p.alpha,
            beta: p.beta,
            kappa: p.kappa,
        }
    }
}

fn terms<S: Series>(s: &S) -> Vec<(i32, f64)> {
    s.terms().into_iter().map(|(k, c)| (k, round15(c))).collect()
}

pub fn dump_pair<S: Series>(pair: &AffineMapPair<S>) -> PairDump {
    PairDump {
        input_extent: pair.input_extent,
        blocks: pair
            .blocks
            .iter()
            .map(|b| BlockDump {
                name: b.name.clone(),
                out_extent: b.out_extent(),
                v: b
                    .v
                    .iter()
                    .filter(|(_, _, s)| !s.is_zero())
                    .map(|(row, col, s)| EntryDump {
                        row,
                        col: Some(col),
                        terms: terms(s),
                    })
                    .collect(),
                h: b
                    .h
                    .iter()
                    .filter(|(_, s)| !s.is_zero())
                    .map(|(row, s)| EntryDump {
                        row,
                        col: None,
                        terms: terms(s),
                    })
                    .collect(),
            })
            .collect(),
    }
}
