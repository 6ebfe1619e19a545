#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "liftc/minilang.hpp"

// Reference interpreter for the mini-language. Two modes:
//
//   Plain     executes a function over a concrete MemoryImage; every pointer
//             access is bounds-checked against its region's length and a
//             violation is a RuntimeFault.
//
//   DimProbe  executes with no backing memory at all. Loads from regions
//             other than `target` produce a fixed scratch value and stores
//             to them are discarded. Accesses to `target` are checked
//             against `target_extent` only; the first violation ends the
//             run with OutOfBounds. Used to test candidate extents.
//
// Steps are counted per executed statement and capped by `step_limit`.

namespace liftc::interp {

enum class ExecStatus { Normal, OutOfBounds, StepLimit, RuntimeFault };

const char* status_name(ExecStatus s);

struct Region {
  minilang::ScalarType elem = minilang::ScalarType::F64;  // F32 or F64
  std::vector<double> data;  // F32 regions round each stored value to float
};

// Named inputs for one invocation of the root function. Region keys are the
// root function's pointer parameter names; they stay the identity of the
// underlying buffer even when callees rebind the pointer under other names.
struct MemoryImage {
  std::map<std::string, Region> regions;
  std::map<std::string, long long> int_args;
  std::map<std::string, double> float_args;
};

// Argument snapshot handed to a dispatch-builtin handler.
struct DispatchArg {
  enum class Kind { Ptr, Int, Float };
  Kind kind = Kind::Int;
  std::string region;  // Ptr: region key in the MemoryImage
  long long i = 0;
  double f = 0.0;
};

// When bound, dispatch builtins (atc_dispatch_*) invoke the handler against
// the live memory; unbound they are no-ops.
struct DispatchContext {
  std::function<void(const std::string& name, const std::vector<DispatchArg>& args,
                     MemoryImage& mem)>
      handler;
};

enum class ExecMode { Plain, DimProbe };

struct InstrumentationPolicy {
  ExecMode mode = ExecMode::Plain;
  std::string target;            // DimProbe: region key under test
  long long target_extent = 0;   // DimProbe: candidate element count
  double scratch_value = 1.0;    // DimProbe: value produced by non-target loads
  bool track_writes = false;     // Plain: record per-region written offsets
  bool record_trace = false;     // DimProbe: record target access offsets in order
  const DispatchContext* dispatch = nullptr;
};

// extent value that never trips the DimProbe bound, for max-offset surveys
inline constexpr long long kUnboundedExtent = (1LL << 62);

inline constexpr unsigned long long kDefaultStepLimit = 50'000'000ULL;

struct ExecutionOutcome {
  ExecStatus status = ExecStatus::Normal;
  MemoryImage final;  // populated only when status == Normal
  unsigned long long steps = 0;
  bool has_ret = false;
  bool ret_is_int = false;
  long long ret_int = 0;
  double ret_float = 0.0;
  std::string fault_msg;  // RuntimeFault/OutOfBounds detail
  // track_writes: per-region flags, one per element, true if stored to.
  std::map<std::string, std::vector<bool>> writes;
  // record_trace: flat element offsets touched on `target`, loads and stores,
  // in execution order, one entry per lane for vector accesses. Capped.
  std::vector<long long> trace;
  // DimProbe: largest target offset touched, -1 if the target was never
  // accessed. Valid whatever the final status.
  long long max_target_offset = -1;
};

ExecutionOutcome execute(const minilang::Program& prog, const std::string& function,
                         const MemoryImage& input, const InstrumentationPolicy& policy,
                         unsigned long long step_limit = kDefaultStepLimit);

// Names of regions whose contents differ between two images (same keys
// assumed), sorted. Scalar args are ignored.
std::vector<std::string> snapshot_diff(const MemoryImage& before, const MemoryImage& after);

}  // namespace liftc::interp
