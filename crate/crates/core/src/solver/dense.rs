//! Dense modified-nodal-analysis oracle.
//!
//! Stamps the channel element by element with every line node explicit (each
//! drive-rail or word-line tap, each FET/memristor midpoint and each
//! source-line node), an ideal source for `V_read` and a zero-volt ammeter at
//! the sense terminal, then solves the full system by LU with partial
//! pivoting and iterative refinement. It shares nothing with the ladder elimination beyond the
//! instance description and exists to cross-check it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::types::{ChannelSolution, LineModel};

use super::instance::ChannelInstance;

/// Largest channel the oracle accepts.
pub const ORACLE_MAX_ROWS: usize = 256;

const REFINE_STEPS: usize = 8;

type Node = Option<usize>;

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.carry
    }
}
const GROUND: Node = None;

#[derive(Default)]
struct Netlist {
    nodes: usize,
    resistors: Vec<(Node, Node, f64)>,
    sources: Vec<(Node, Node, f64)>,
}

impl Netlist {
    fn node(&mut self) -> Node {
        self.nodes += 1;
        Some(self.nodes - 1)
    }

    /// Zero resistances become zero-volt sources; infinite ones are omitted.
    fn resistor(&mut self, a: Node, b: Node, ohms: f64) {
        if ohms == 0.0 {
            self.source(a, b, 0.0);
        } else if ohms.is_finite() {
            self.resistors.push((a, b, ohms));
        }
    }

    /// Returns the index of the source's current unknown, which flows from
    /// `plus` through the source to `minus`.
    fn source(&mut self, plus: Node, minus: Node, volts: f64) -> usize {
        self.sources.push((plus, minus, volts));
        self.sources.len() - 1
    }

    /// `rhs - A·x` with each node's current balance summed by
    /// compensated addition.
    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.nodes;
        let volt = |node: Node| node.map_or(0.0, |i| x[i]);
        let mut acc = vec![Neumaier::default(); n];
        for &(p, q, ohms) in &self.resistors {
            let i = (volt(p) - volt(q)) / ohms;
            if let Some(p) = p {
                acc[p].add(-i);
            }
            if let Some(q) = q {
                acc[q].add(i);
            }
        }
        let mut res = DVector::<f64>::zeros(n + self.sources.len());
        for (j, &(p, q, volts)) in self.sources.iter().enumerate() {
            let i = x[n + j];
            if let Some(p) = p {
                acc[p].add(-i);
            }
            if let Some(q) = q {
                acc[q].add(i);
            }
            let mut kvl = Neumaier::default();
            kvl.add(volts);
            kvl.add(-volt(p));
            kvl.add(volt(q));
            res[n + j] = kvl.sum();
        }
        for (i, a) in acc.iter().enumerate() {
            res[i] = a.sum();
        }
        res
    }

    fn solve(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.nodes;
        let dim = n + self.sources.len();
        let mut a = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for &(p, q, ohms) in &self.resistors {
            let g = 1.0 / ohms;
            if let Some(p) = p {
                a[(p, p)] += g;
            }
            if let Some(q) = q {
                a[(q, q)] += g;
            }
            if let (Some(p), Some(q)) = (p, q) {
                a[(p, q)] -= g;
                a[(q, p)] -= g;
            }
        }
        for (j, &(p, q, volts)) in self.sources.iter().enumerate() {
            let col = n + j;
            if let Some(p) = p {
                a[(p, col)] += 1.0;
                a[(col, p)] += 1.0;
            }
            if let Some(q) = q {
                a[(q, col)] -= 1.0;
                a[(col, q)] -= 1.0;
            }
            rhs[col] = volts;
        }
        let lu = a.lu();
        let mut x = lu.solve(&rhs).ok_or(Error::Singular)?;
        // Assembly folds tiny leakage conductances into large diagonals, so
        // the first solve is refined against residuals taken element by
        // element from the netlist.
        for _ in 0..REFINE_STEPS {
            let res = self.residual(&x);
            let dx = lu.solve(&res).ok_or(Error::Singular)?;
            x += &dx;
            if dx.amax() <= f64::EPSILON * x.amax() * 1e-2 {
                break;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
        Ok((
            x.rows(0, n).iter().copied().collect(),
            x.rows(n, self.sources.len()).iter().copied().collect(),
        ))
    }
}

/// Solves the channel on the explicit full node set.
pub fn dense_oracle_solve(inst: &ChannelInstance) -> Result<ChannelSolution> {
    inst.validate()?;
    let n = inst.n_rows();
    if n > ORACLE_MAX_ROWS {
        return Err(Error::OracleTooLarge {
            n_rows: n,
            max: ORACLE_MAX_ROWS,
        });
    }
    let v = inst.cfg.v_read;
    let r = inst.cfg.r_line;

    let mut net = Netlist::default();
    let driver = net.node();
    net.source(driver, GROUND, v);

    let sl: Vec<Node> = (0..n).map(|_| net.node()).collect();
    for k in 0..n - 1 {
        net.resistor(sl[k], sl[k + 1], r);
    }
    let ammeter = net.source(sl[n - 1], GROUND, 0.0);

    let taps: Vec<Node> = match inst.cfg.line_model {
        LineModel::Distributed => {
            let rail: Vec<Node> = (0..n).map(|_| net.node()).collect();
            net.resistor(driver, rail[0], r);
            for k in 0..n - 1 {
                net.resistor(rail[k], rail[k + 1], r);
            }
            rail
        }
        LineModel::Lumped => (0..n)
            .map(|k| {
                let tap = net.node();
                net.resistor(driver, tap, (k + 1) as f64 * r);
                tap
            })
            .collect(),
    };

    let mids: Vec<Node> = (0..n)
        .map(|k| {
            let mid = net.node();
            net.resistor(taps[k], mid, inst.fet_resistance(k));
            net.resistor(mid, sl[k], inst.cell_resistance(k));
            mid
        })
        .collect();

    let (volts, currents) = net.solve()?;
    let at = |node: Node| node.map_or(0.0, |i| volts[i]);
    Ok(ChannelSolution {
        node_voltages: sl.iter().map(|&s| at(s)).collect(),
        drive_voltages: taps.iter().map(|&t| at(t)).collect(),
        branch_currents: (0..n)
            .map(|k| (at(mids[k]) - at(sl[k])) / inst.cell_resistance(k))
            .collect(),
        i_sl: currents[ammeter],
    })
}
