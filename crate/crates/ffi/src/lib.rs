//! C interface to the qfemu toolchain.
//!
//! Objects are opaque handles created by `qf_*` constructors and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`QfStatus`]; on failure `qf_last_error` describes the most recent error
//! on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Display;

use qfemu::engine::SimState;
use qfemu::{metrics, ExecConfig, Program, Rounding, SourceCircuit};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Compile = 4,
    Runtime = 5,
    OutOfRange = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfRounding {
    Truncation = 0,
    Nearest = 1,
    NearestEven = 2,
    /// Double-precision reference arithmetic.
    FloatReference = 3,
}

/// Architecture parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QfConfig {
    pub n_qubits: u32,
    pub window_order: u32,
    pub imm_bits: u32,
    pub data_bits: u32,
    pub rounding: QfRounding,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QfQuality {
    pub fidelity: f64,
    pub kld: f64,
    pub mcd: f64,
    pub acd: f64,
}

/// Parsed circuit.
pub struct QfCircuit(SourceCircuit);

/// Compiled program together with the architecture it targets.
pub struct QfProgram {
    program: Program,
    config: ExecConfig,
}

/// Final state of a run.
pub struct QfState(SimState);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: QfStatus, err: impl Display) -> QfStatus {
    let msg = CString::new(err.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

fn null() -> QfStatus {
    fail(QfStatus::NullPointer, "null pointer argument")
}

impl From<QfRounding> for Rounding {
    fn from(r: QfRounding) -> Self {
        match r {
            QfRounding::Truncation => Rounding::Truncation,
            QfRounding::Nearest => Rounding::Nearest,
            QfRounding::NearestEven => Rounding::NearestEven,
            QfRounding::FloatReference => Rounding::FloatReference,
        }
    }
}

impl From<QfConfig> for ExecConfig {
    fn from(c: QfConfig) -> Self {
        ExecConfig {
            n_qubits: c.n_qubits,
            window_order: c.window_order,
            imm_bits: c.imm_bits,
            data_bits: c.data_bits,
            rounding: c.rounding.into(),
            ..ExecConfig::default()
        }
    }
}

/// Default architecture: 8 qubits, full parallel, 8-bit immediates,
/// 20-bit data, round to nearest.
#[no_mangle]
pub extern "C" fn qf_config_default() -> QfConfig {
    let d = ExecConfig::default();
    QfConfig {
        n_qubits: d.n_qubits,
        window_order: d.window_order,
        imm_bits: d.imm_bits,
        data_bits: d.data_bits,
        rounding: QfRounding::Nearest,
    }
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn qf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses NUL-terminated OpenQASM 2.0 source.
///
/// # Safety
/// `source` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qf_parse(source: *const c_char, out: *mut *mut QfCircuit) -> QfStatus {
    if source.is_null() || out.is_null() {
        return null();
    }
    let text = match CStr::from_ptr(source).to_str() {
        Ok(t) => t,
        Err(e) => return fail(QfStatus::InvalidArgument, e),
    };
    match qfemu::parse(text) {
        Ok(c) => {
            *out = Box::into_raw(Box::new(QfCircuit(c)));
            QfStatus::Ok
        }
        Err(e) => fail(QfStatus::Parse, e),
    }
}

/// Number of qubits the circuit declares, or 0 for a null handle.
///
/// # Safety
/// `circuit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qf_circuit_qubits(circuit: *const QfCircuit) -> u32 {
    circuit.as_ref().map_or(0, |c| c.0.qubit_count() as u32)
}

/// Number of native gates in the flattened circuit.
///
/// # Safety
/// `circuit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qf_circuit_gates(circuit: *const QfCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.0.gates.len())
}

/// # Safety
/// `circuit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qf_circuit_free(circuit: *mut QfCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Compiles a circuit for the given architecture.
///
/// # Safety
/// All pointers must be valid; `circuit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qf_compile(
    circuit: *const QfCircuit,
    config: *const QfConfig,
    out: *mut *mut QfProgram,
) -> QfStatus {
    let (Some(circuit), Some(config)) = (circuit.as_ref(), config.as_ref()) else {
        return null();
    };
    if out.is_null() {
        return null();
    }
    let config = ExecConfig::from(*config);
    if let Err(e) = config.validate() {
        return fail(QfStatus::InvalidArgument, e);
    }
    match qfemu::compile(&circuit.0, &config) {
        Ok(program) => {
            *out = Box::into_raw(Box::new(QfProgram { program, config }));
            QfStatus::Ok
        }
        Err(e) => fail(QfStatus::Compile, e),
    }
}

/// Number of instruction words.
///
/// # Safety
/// `program` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qf_program_len(program: *const QfProgram) -> usize {
    program.as_ref().map_or(0, |p| p.program.instructions.len())
}

/// Number of distinct sine/cosine pairs in the angle table.
///
/// # Safety
/// `program` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qf_program_table_len(program: *const QfProgram) -> usize {
    program.as_ref().map_or(0, |p| p.program.table.len())
}

/// Encoded instruction word at `index`.
///
/// # Safety
/// `program` must be a live handle and `word` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qf_program_word(program: *const QfProgram, index: usize, word: *mut u64) -> QfStatus {
    let Some(p) = program.as_ref() else { return null() };
    if word.is_null() {
        return null();
    }
    let Some(instr) = p.program.instructions.get(index) else {
        return fail(QfStatus::OutOfRange, format!("instruction {index} out of range"));
    };
    match qfemu::compiler::encode(instr, &p.config) {
        Ok(w) => {
            *word = w;
            QfStatus::Ok
        }
        Err(e) => fail(QfStatus::Compile, e),
    }
}

/// # Safety
/// `program` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qf_program_free(program: *mut QfProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Executes a program from `|0...0>` in the representation its
/// configuration selects.
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qf_run(program: *const QfProgram, out: *mut *mut QfState) -> QfStatus {
    let Some(p) = program.as_ref() else { return null() };
    if out.is_null() {
        return null();
    }
    match qfemu::run(&p.program, &p.config, None) {
        Ok(s) => {
            *out = Box::into_raw(Box::new(QfState(s)));
            QfStatus::Ok
        }
        Err(e) => fail(QfStatus::Runtime, e),
    }
}

/// Number of amplitudes.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qf_state_len(state: *const QfState) -> usize {
    state.as_ref().map_or(0, |s| 1usize << s.0.n_qubits())
}

/// Amplitude at `index` as doubles.
///
/// # Safety
/// `state` must be a live handle; `re` and `im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qf_state_amplitude(state: *const QfState, index: usize, re: *mut f64, im: *mut f64) -> QfStatus {
    let Some(s) = state.as_ref() else { return null() };
    if re.is_null() || im.is_null() {
        return null();
    }
    let amps = s.0.to_complex();
    let Some(c) = amps.get(index) else {
        return fail(QfStatus::OutOfRange, format!("amplitude {index} out of range"));
    };
    *re = c.re;
    *im = c.im;
    QfStatus::Ok
}

/// Raw fixed-point integers of the amplitude at `index`. Fails with
/// `InvalidArgument` for a floating-point state.
///
/// # Safety
/// `state` must be a live handle; `re` and `im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qf_state_raw(state: *const QfState, index: usize, re: *mut i64, im: *mut i64) -> QfStatus {
    let Some(s) = state.as_ref() else { return null() };
    if re.is_null() || im.is_null() {
        return null();
    }
    let SimState::Fixed { state, .. } = &s.0 else {
        return fail(QfStatus::InvalidArgument, "state is not fixed point");
    };
    let Some(c) = state.amplitudes().get(index) else {
        return fail(QfStatus::OutOfRange, format!("amplitude {index} out of range"));
    };
    *re = c.re.raw;
    *im = c.im.raw;
    QfStatus::Ok
}

/// Nonzero when any fixed-point operation saturated during the run.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qf_state_overflowed(state: *const QfState) -> bool {
    state.as_ref().is_some_and(|s| s.0.overflowed())
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qf_state_free(state: *mut QfState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Scores `model` against `reference`.
///
/// # Safety
/// All pointers must be valid; both states must be live handles.
#[no_mangle]
pub unsafe extern "C" fn qf_compare(model: *const QfState, reference: *const QfState, out: *mut QfQuality) -> QfStatus {
    let (Some(m), Some(r)) = (model.as_ref(), reference.as_ref()) else {
        return null();
    };
    if out.is_null() {
        return null();
    }
    match metrics::report(&m.0.to_complex(), &r.0.to_complex()) {
        Ok(q) => {
            *out = QfQuality { fidelity: q.fidelity, kld: q.kld, mcd: q.mcd, acd: q.acd };
            QfStatus::Ok
        }
        Err(e) => fail(QfStatus::InvalidArgument, e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn default_config_round_trips() {
        assert_eq!(ExecConfig::from(qf_config_default()), ExecConfig::default());
    }

    #[test]
    fn null_handles_are_harmless() {
        unsafe {
            assert_eq!(qf_circuit_qubits(ptr::null()), 0);
            assert_eq!(qf_state_len(ptr::null()), 0);
            qf_circuit_free(ptr::null_mut());
            qf_program_free(ptr::null_mut());
            qf_state_free(ptr::null_mut());
            let mut out = ptr::null_mut();
            assert_eq!(qf_run(ptr::null(), &mut out), QfStatus::NullPointer);
        }
        let msg = unsafe { CStr::from_ptr(qf_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "null pointer argument");
    }
}
