//! Structural and timing model of the emulator architecture.
//!
//! With windowing order `W` the `2^(N-1)` couples of a gate are processed
//! by `2^(N-W-1)` datapaths over `2^W` windows, so each gate costs its
//! base cycle count times `2^W`. Controlled gates cost the same as
//! uncontrolled ones: every window is still traversed and masked couples
//! idle.

use serde::Serialize;
use thiserror::Error;

use crate::compiler::{Opcode, Program};
use crate::config::ExecConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResourceEstimate {
    pub datapaths: u64,
    pub state_regfile_bits: u64,
    pub angle_regfile_bits: u64,
    pub instruction_width_bits: u32,
}

/// Datapath resources for a configuration. Independent of any program.
pub fn estimate_resources(config: &ExecConfig) -> ResourceEstimate {
    let n = config.n_qubits;
    let w = config.window_order.min(n.saturating_sub(1));
    let data = config.data_bits as u64;
    ResourceEstimate {
        datapaths: 1u64 << (n - w - 1),
        state_regfile_bits: (1u64 << n) * data * 2,
        angle_regfile_bits: (1u64 << config.imm_bits) * data * 2,
        instruction_width_bits: config.instruction_width(),
    }
}

/// Operation class of an opcode, which fixes its datapath cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateClass {
    /// Exchanges and sign inversions only.
    SignExchange,
    /// Products with the `1/sqrt(2)` constant.
    OneMultiplier,
    /// Sine/cosine products from the angle table.
    Rotational,
}

impl GateClass {
    pub fn of(op: Opcode) -> Self {
        match op {
            Opcode::X | Opcode::Y | Opcode::Z | Opcode::S | Opcode::Sdg => GateClass::SignExchange,
            Opcode::H | Opcode::T | Opcode::Tdg => GateClass::OneMultiplier,
            Opcode::RX | Opcode::RY | Opcode::RZ | Opcode::U1 => GateClass::Rotational,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatencyError {
    #[error("{slower} costs fewer cycles than {faster}")]
    ClassOrder { slower: Opcode, faster: Opcode },
    #[error("{0} has a zero cycle count")]
    Zero(Opcode),
}

/// Per-opcode microcode depths and transfer overheads, in clock cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatencyModel {
    base: [u64; 12],
    pub init_per_pair: u64,
    pub readout_per_amplitude: u64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel::by_class(2, 4, 8)
    }
}

impl LatencyModel {
    /// Same cost for every opcode of a class; one cycle per transferred item.
    pub fn by_class(sign_exchange: u64, one_multiplier: u64, rotational: u64) -> Self {
        let base = Opcode::ALL.map(|op| match GateClass::of(op) {
            GateClass::SignExchange => sign_exchange,
            GateClass::OneMultiplier => one_multiplier,
            GateClass::Rotational => rotational,
        });
        LatencyModel { base, init_per_pair: 1, readout_per_amplitude: 1 }
    }

    pub fn base_cycles(&self, op: Opcode) -> u64 {
        self.base[op.code() as usize]
    }

    pub fn set_base_cycles(&mut self, op: Opcode, cycles: u64) {
        self.base[op.code() as usize] = cycles;
    }

    /// Every rotational opcode costs at least every one-multiplier opcode,
    /// which costs at least every sign/exchange opcode.
    pub fn validate(&self) -> Result<(), LatencyError> {
        let rank = |op| GateClass::of(op) as u8;
        for a in Opcode::ALL {
            if self.base_cycles(a) == 0 {
                return Err(LatencyError::Zero(a));
            }
            for b in Opcode::ALL {
                if rank(a) > rank(b) && self.base_cycles(a) < self.base_cycles(b) {
                    return Err(LatencyError::ClassOrder { slower: a, faster: b });
                }
            }
        }
        Ok(())
    }

    /// Cycles for one gate at windowing order `w`.
    pub fn gate_cycles(&self, op: Opcode, w: u32) -> u64 {
        self.base_cycles(op) << w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Latency {
    pub compute: u64,
    pub init: u64,
    pub readout: u64,
    pub total: u64,
}

/// Whole-program cycle count: gate compute plus angle-table load and
/// amplitude readout for the program's qubits.
pub fn program_latency(program: &Program, config: &ExecConfig, model: &LatencyModel) -> Latency {
    let w = config.window_order;
    let compute = program.instructions.iter().map(|i| model.gate_cycles(i.opcode, w)).sum();
    let init = program.table.len() as u64 * model.init_per_pair;
    let readout = (1u64 << program.used_qubits) * model.readout_per_amplitude;
    Latency { compute, init, readout, total: compute + init + readout }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub n_qubits: u32,
    pub window_order: u32,
    pub imm_bits: u32,
    pub data_bits: u32,
    pub datapaths: u64,
    pub state_regfile_bits: u64,
    pub angle_regfile_bits: u64,
    pub instruction_width_bits: u32,
    pub compute_cycles: u64,
    pub total_cycles: u64,
}

/// One row per configuration for the same program.
pub fn compare_report(program: &Program, configs: &[ExecConfig], model: &LatencyModel) -> Vec<ReportRow> {
    configs
        .iter()
        .map(|c| {
            let r = estimate_resources(c);
            let l = program_latency(program, c, model);
            ReportRow {
                n_qubits: c.n_qubits,
                window_order: c.window_order,
                imm_bits: c.imm_bits,
                data_bits: c.data_bits,
                datapaths: r.datapaths,
                state_regfile_bits: r.state_regfile_bits,
                angle_regfile_bits: r.angle_regfile_bits,
                instruction_width_bits: r.instruction_width_bits,
                compute_cycles: l.compute,
                total_cycles: l.total,
            }
        })
        .collect()
}
