//! O(n) nodal solve of one channel.
//!
//! Each row is a branch (memristor in series with its access FET) from the
//! drive side to source-line node `i`. Adjacent source-line nodes are joined
//! by a segment `r`, and the last node is the sense terminal held at virtual
//! ground. Every branch is driven at `V_read`.
//!
//! The distributed model also resolves the drive rail as a ladder. Rail and
//! source-line nodes are interleaved, which gives a banded system of
//! half-width two, and eliminated by star-mesh reduction.
//!
//! The lumped model has a plain tridiagonal system. It is eliminated from
//! the far end toward the sense terminal in resistance form: the part of
//! the channel behind node `i` reduces to a Thevenin source `V_read` behind a
//! resistance that only ever adds or combines in parallel.

use crate::error::Result;
use crate::types::{ChannelSolution, LineModel};

use super::instance::ChannelInstance;

/// Solves the channel's resistive network.
pub fn solve_channel(inst: &ChannelInstance) -> Result<ChannelSolution> {
    inst.validate()?;
    let n = inst.n_rows();
    let v = inst.cfg.v_read;
    let r = inst.cfg.r_line;

    if r == 0.0 {
        // Series terms vanish; branches see V_read directly.
        let branch_currents: Vec<f64> = (0..n).map(|k| v / inst.branch_resistance(k)).collect();
        return Ok(ChannelSolution {
            node_voltages: vec![0.0; n],
            drive_voltages: vec![v; n],
            i_sl: branch_currents.iter().sum(),
            branch_currents,
        });
    }

    match inst.cfg.line_model {
        LineModel::Distributed => Ok(solve_distributed(inst)),
        LineModel::Lumped => Ok(solve_lumped(inst)),
    }
}

fn solve_distributed(inst: &ChannelInstance) -> ChannelSolution {
    let n = inst.n_rows();
    let v = inst.cfg.v_read;
    let g_seg = 1.0 / inst.cfg.r_line;
    let g: Vec<f64> = (0..n).map(|k| 1.0 / inst.branch_resistance(k)).collect();

    // Nodes a_0, s_0, a_1, s_1, ..., a_{n-1}; s_{n-1} is the sense terminal.
    // Node p couples only to p+1 (c1) and p+2 (c2) among later nodes;
    // `e` is conductance to fixed-voltage terminals, `inj` the current they
    // push in.
    let m = 2 * n - 1;
    let mut c1 = vec![0.0; m];
    let mut c2 = vec![0.0; m];
    let mut e = vec![0.0; m];
    let mut inj = vec![0.0; m];
    for k in 0..n - 1 {
        c1[2 * k] = g[k];
        c2[2 * k] = g_seg;
        if k + 2 < n {
            c2[2 * k + 1] = g_seg;
        }
    }
    e[0] += g_seg;
    inj[0] += g_seg * v;
    e[m - 1] += g[n - 1];
    if n >= 2 {
        e[m - 2] += g_seg;
    }

    // Star-mesh elimination: every pivot is a sum of positive conductances,
    // so nothing is lost to cancellation.
    let mut d = vec![0.0; m];
    for p in 0..m {
        d[p] = c1[p] + c2[p] + e[p];
        if p + 1 < m {
            let w1 = c1[p] / d[p];
            e[p + 1] += w1 * e[p];
            inj[p + 1] += w1 * inj[p];
            c1[p + 1] += w1 * c2[p];
        }
        if p + 2 < m {
            let w2 = c2[p] / d[p];
            e[p + 2] += w2 * e[p];
            inj[p + 2] += w2 * inj[p];
        }
    }
    let mut x = vec![0.0; m];
    for p in (0..m).rev() {
        let mut acc = inj[p];
        if p + 1 < m {
            acc += c1[p] * x[p + 1];
        }
        if p + 2 < m {
            acc += c2[p] * x[p + 2];
        }
        x[p] = acc / d[p];
    }

    let rail = |k: usize| x[2 * k];
    let sl = |k: usize| if k + 1 < n { x[2 * k + 1] } else { 0.0 };
    let branch_currents: Vec<f64> = (0..n).map(|k| g[k] * (rail(k) - sl(k))).collect();
    let i_sl = if n >= 2 {
        branch_currents[n - 1] + g_seg * sl(n - 2)
    } else {
        branch_currents[0]
    };
    ChannelSolution {
        node_voltages: (0..n).map(sl).collect(),
        drive_voltages: (0..n).map(rail).collect(),
        branch_currents,
        i_sl,
    }
}

fn solve_lumped(inst: &ChannelInstance) -> ChannelSolution {
    let n = inst.n_rows();
    let v = inst.cfg.v_read;
    let r = inst.cfg.r_line;
    let total: Vec<f64> = (0..n)
        .map(|k| (k + 1) as f64 * r + inst.branch_resistance(k))
        .collect();

    // Thevenin resistance of rows 0..=k seen at source-line node k.
    let mut behind: Vec<Option<f64>> = Vec::with_capacity(n);
    for (k, &t) in total.iter().enumerate() {
        let upstream = k.checked_sub(1).and_then(|j| behind[j]).map(|x| x + r);
        let own = t.is_finite().then_some(t);
        behind.push(match (upstream, own) {
            (Some(a), Some(b)) => Some(a * b / (a + b)),
            (a, b) => a.or(b),
        });
    }

    let mut s = vec![0.0; n];
    for k in (0..n - 1).rev() {
        let i_seg = behind[k].map_or(0.0, |x| (v - s[k + 1]) / (x + r));
        s[k] = s[k + 1] + i_seg * r;
    }
    let branch_currents: Vec<f64> = (0..n)
        .map(|k| if total[k].is_finite() { (v - s[k]) / total[k] } else { 0.0 })
        .collect();
    ChannelSolution {
        drive_voltages: (0..n)
            .map(|k| v - (k + 1) as f64 * r * branch_currents[k])
            .collect(),
        node_voltages: s,
        branch_currents,
        i_sl: behind[n - 1].map_or(0.0, |x| v / x),
    }
}
