use serde::Serialize;

use crate::error::Result;
use crate::types::{CellState, ChannelSolution};

use super::instance::ChannelInstance;
use super::ladder::solve_channel;

/// IR drop bookkeeping for one row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrDropRow {
    pub row: usize,
    pub active: bool,
    pub state: CellState,
    /// Voltage lost on the drive line before the branch.
    pub drive_drop: f64,
    /// Source-line node voltage, lost between the branch and the sense terminal.
    pub sl_voltage: f64,
    /// `V_read` minus the voltage left across the cell and FET.
    pub ir_drop: f64,
    pub branch_current: f64,
}

pub fn ir_drop_profile(inst: &ChannelInstance) -> Result<Vec<IrDropRow>> {
    Ok(profile_from_solution(inst, &solve_channel(inst)?))
}

pub fn profile_from_solution(inst: &ChannelInstance, sol: &ChannelSolution) -> Vec<IrDropRow> {
    let v = inst.cfg.v_read;
    (0..inst.n_rows())
        .map(|k| {
            let drive_drop = v - sol.drive_voltages[k];
            let sl_voltage = sol.node_voltages[k];
            IrDropRow {
                row: k,
                active: inst.row_active[k],
                state: inst.cell_state[k],
                drive_drop,
                sl_voltage,
                ir_drop: drive_drop + sl_voltage,
                branch_current: sol.branch_currents[k],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ChannelConfig, LineModel};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn no_line_no_drop() {
        let c = ChannelConfig::default().with_rows(32).with_r_line(0.0);
        let inst = ChannelInstance::from_rows(c, &[4, 9], &[4, 5, 9]).unwrap();
        assert!(ir_drop_profile(&inst).unwrap().iter().all(|p| p.ir_drop == 0.0));
    }

    #[test]
    fn single_row_kvl() {
        for model in [LineModel::Distributed, LineModel::Lumped] {
            let mut c = ChannelConfig::default().with_rows(1024).without_leakage();
            c.line_model = model;
            c.transistor.r_t = 0.0;
            for row in [0, 300, 1023] {
                let inst = ChannelInstance::from_rows(c, &[row], &[row]).unwrap();
                let prof = ir_drop_profile(&inst).unwrap();
                let p = prof[row];
                let cell_drop = p.branch_current * 10e3;
                assert!(rel(p.ir_drop + cell_drop, 0.2) < 1e-12);
                assert!(rel(p.ir_drop, p.branch_current * 1024.0 * 2.5) < 1e-12);
                // 2560 Ω of line against 10 kΩ.
                assert!(rel(p.ir_drop / 0.2, 2560.0 / 12560.0) < 1e-12);
                assert!((p.ir_drop / 0.2 - 0.204).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn drop_grows_toward_far_end() {
        for model in [LineModel::Distributed, LineModel::Lumped] {
            let mut c = ChannelConfig::default().with_rows(256).without_leakage();
            c.line_model = model;
            let inst = ChannelInstance::from_rows(c, &[0], &[0]).unwrap();
            let prof = ir_drop_profile(&inst).unwrap();
            assert!(prof.iter().all(|p| p.ir_drop >= 0.0));
            // Row 0 is farthest from the sense terminal.
            assert!(prof.windows(2).all(|w| w[0].ir_drop >= w[1].ir_drop));
        }
    }
}
