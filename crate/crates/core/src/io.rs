//! CSV readers and writers for matrices, spike trains and tables.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::sim::RoutingTrace;
use crate::types::{SpikeTrainSet, SwitchMatrix};

pub const MARGIN_HEADER: &[&str] = &[
    "n_rows",
    "r_line",
    "r_on",
    "r_off",
    "r_t",
    "k",
    "k_eff",
    "margin_fraction",
];
pub const ERROR_HEADER: &[&str] = &["n_r", "f_hz", "t_pw_s", "m_tol", "p_err"];
pub const LEAK_HEADER: &[&str] = &[
    "n_r",
    "r_line",
    "r_off",
    "n_si",
    "i_leak_per_fet_a",
    "i_cc_leak_a",
    "i_off_a",
    "ratio",
    "i_cells_a",
    "i_fet_leak_a",
];
pub const TRACE_HEADER: &[&str] = &["time_s", "channel", "i_sl_a", "fired", "expected", "error_class"];
pub const TRAINS_HEADER: &[&str] = &["input_index", "start_s"];

/// Shortest round-trip text for a float; exponent form outside
/// `[1e-4, 1e15)` so tiny probabilities stay readable.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A header plus string rows, written verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Reads a 0/1 grid, one word line per record, no header.
pub fn read_matrix_csv<R: Read>(input: R) -> Result<SwitchMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut rows = Vec::new();
    for (wl, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|cell| match cell {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::Parse(format!(
                    "matrix row {wl}: expected 0 or 1, got `{other}`"
                ))),
            })
            .collect::<Result<Vec<bool>>>()?;
        rows.push(row);
    }
    SwitchMatrix::from_rows(&rows)
}

pub fn write_matrix_csv<W: Write>(matrix: &SwitchMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in matrix.rows() {
        w.write_record(row.iter().map(|&on| if on { "1" } else { "0" }))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `input_index,start_s` records into trains for `n_inputs` lines.
/// Starts are sorted per input; exact duplicates are rejected.
pub fn read_trains_csv<R: Read>(
    input: R,
    n_inputs: usize,
    t_pw: f64,
    duration: f64,
) -> Result<SpikeTrainSet> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != TRAINS_HEADER {
        return Err(Error::Parse(format!(
            "trains header must be `{}`, got `{}`",
            TRAINS_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut pulses = vec![Vec::new(); n_inputs];
    for (line, record) in reader.deserialize::<(usize, f64)>().enumerate() {
        let (input, start) = record?;
        pulses
            .get_mut(input)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "trains record {line}: input {input} out of range for {n_inputs} word lines"
                ))
            })?
            .push(start);
    }
    for starts in &mut pulses {
        starts.sort_by(f64::total_cmp);
    }
    SpikeTrainSet::new(pulses, t_pw, duration)
}

pub fn trace_table(trace: &RoutingTrace) -> CsvTable {
    let mut table = CsvTable::new(TRACE_HEADER);
    for e in &trace.events {
        table.push(vec![
            fmt_f64(e.time),
            e.channel.to_string(),
            fmt_f64(e.i_sl),
            u8::from(e.fired).to_string(),
            u8::from(e.expected).to_string(),
            e.error_class().as_str().to_string(),
        ]);
    }
    table
}
