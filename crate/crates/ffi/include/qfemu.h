#ifndef QFEMU_H
#define QFEMU_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QfRounding {
  QF_ROUNDING_TRUNCATION = 0,
  QF_ROUNDING_NEAREST = 1,
  QF_ROUNDING_NEAREST_EVEN = 2,
  // Double-precision reference arithmetic.
  QF_ROUNDING_FLOAT_REFERENCE = 3,
} QfRounding;

typedef enum QfStatus {
  QF_STATUS_OK = 0,
  QF_STATUS_NULL_POINTER = 1,
  QF_STATUS_INVALID_ARGUMENT = 2,
  QF_STATUS_PARSE = 3,
  QF_STATUS_COMPILE = 4,
  QF_STATUS_RUNTIME = 5,
  QF_STATUS_OUT_OF_RANGE = 6,
} QfStatus;

// Parsed circuit.
typedef struct QfCircuit QfCircuit;

// Compiled program together with the architecture it targets.
typedef struct QfProgram QfProgram;

// Final state of a run.
typedef struct QfState QfState;

// Architecture parameters.
typedef struct QfConfig {
  uint32_t n_qubits;
  uint32_t window_order;
  uint32_t imm_bits;
  uint32_t data_bits;
  enum QfRounding rounding;
} QfConfig;

typedef struct QfQuality {
  double fidelity;
  double kld;
  double mcd;
  double acd;
} QfQuality;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default architecture: 8 qubits, full parallel, 8-bit immediates,
// 20-bit data, round to nearest.
struct QfConfig qf_config_default(void);

// Message for the last failed call on this thread. Valid until the next
// failing call on the same thread.
const char *qf_last_error(void);

// Parses NUL-terminated OpenQASM 2.0 source.
//
// # Safety
// `source` must be a valid C string and `out` a valid pointer.
enum QfStatus qf_parse(const char *source, struct QfCircuit **out);

// Number of qubits the circuit declares, or 0 for a null handle.
//
// # Safety
// `circuit` must be null or a live handle.
uint32_t qf_circuit_qubits(const struct QfCircuit *circuit);

// Number of native gates in the flattened circuit.
//
// # Safety
// `circuit` must be null or a live handle.
size_t qf_circuit_gates(const struct QfCircuit *circuit);

// # Safety
// `circuit` must be null or a handle not yet freed.
void qf_circuit_free(struct QfCircuit *circuit);

// Compiles a circuit for the given architecture.
//
// # Safety
// All pointers must be valid; `circuit` must be a live handle.
enum QfStatus qf_compile(const struct QfCircuit *circuit,
                         const struct QfConfig *config,
                         struct QfProgram **out);

// Number of instruction words.
//
// # Safety
// `program` must be null or a live handle.
size_t qf_program_len(const struct QfProgram *program);

// Number of distinct sine/cosine pairs in the angle table.
//
// # Safety
// `program` must be null or a live handle.
size_t qf_program_table_len(const struct QfProgram *program);

// Encoded instruction word at `index`.
//
// # Safety
// `program` must be a live handle and `word` a valid pointer.
enum QfStatus qf_program_word(const struct QfProgram *program, size_t index, uint64_t *word);

// # Safety
// `program` must be null or a handle not yet freed.
void qf_program_free(struct QfProgram *program);

// Executes a program from `|0...0>` in the representation its
// configuration selects.
//
// # Safety
// `program` must be a live handle and `out` a valid pointer.
enum QfStatus qf_run(const struct QfProgram *program, struct QfState **out);

// Number of amplitudes.
//
// # Safety
// `state` must be null or a live handle.
size_t qf_state_len(const struct QfState *state);

// Amplitude at `index` as doubles.
//
// # Safety
// `state` must be a live handle; `re` and `im` valid pointers.
enum QfStatus qf_state_amplitude(const struct QfState *state, size_t index, double *re, double *im);

// Raw fixed-point integers of the amplitude at `index`. Fails with
// `InvalidArgument` for a floating-point state.
//
// # Safety
// `state` must be a live handle; `re` and `im` valid pointers.
enum QfStatus qf_state_raw(const struct QfState *state, size_t index, int64_t *re, int64_t *im);

// Nonzero when any fixed-point operation saturated during the run.
//
// # Safety
// `state` must be null or a live handle.
bool qf_state_overflowed(const struct QfState *state);

// # Safety
// `state` must be null or a handle not yet freed.
void qf_state_free(struct QfState *state);

// Scores `model` against `reference`.
//
// # Safety
// All pointers must be valid; both states must be live handles.
enum QfStatus qf_compare(const struct QfState *model,
                         const struct QfState *reference,
                         struct QfQuality *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QFEMU_H */
