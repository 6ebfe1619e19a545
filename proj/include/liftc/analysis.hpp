#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "liftc/api_spec.hpp"
#include "liftc/interp.hpp"
#include "liftc/minilang.hpp"
#include "liftc/rng.hpp"

// Dynamic analyses over the reference interpreter: liveness classification of
// parameters and dimension detection for pointer parameters.
//
// Liveness protocol. Run the function once on random inputs (scalar sizes in
// [2,8], buffers of 65536 elements, values uniform in [-1,1]). Regions whose
// contents changed are outputs. For each output region, rerun with only that
// region's initial contents re-randomized; if the final contents differ
// between the two runs on any offset either run wrote, the initial contents
// fed the result and the region is LiveInOut, otherwise LiveOut. The
// comparison is restricted to written offsets because probe buffers are far
// larger than what the function touches; untouched tail elements would
// otherwise flag every output as LiveInOut. Unchanged regions and all
// scalars are LiveIn. A failed probe run is retried once with fresh sizes;
// two failures raise AnalysisInconclusive.
//
// Dimension protocol. Candidate dim tuples over the integer parameters are
// enumerated in ascending order of extent product under the probe values.
// The detected tuple is the first candidate whose DimProbe execution ends
// Normal; since a probe passes exactly when its extent exceeds the maximal
// touched offset, one unbounded survey run finds that offset and the winner
// is the first candidate whose product covers it.

namespace liftc::analysis {

struct AnalysisInconclusive : std::runtime_error {
  explicit AnalysisInconclusive(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoDimsFound : std::runtime_error {
  explicit NoDimsFound(const std::string& msg) : std::runtime_error(msg) {}
};

struct LivenessReport {
  // one entry per parameter, keyed by name
  std::map<std::string, api::Liveness> classes;
};

// Draw one integer-size assignment honoring declared rules: free params from
// their range (default [2,8]), equal-group members shared, multiple-of values
// rounded up, derived params computed last. False when a value lands
// nonpositive, so the caller can redraw.
bool draw_sizes(const std::vector<std::string>& int_params, const api::SizeRules& rules, Rng& rng,
                std::map<std::string, long long>& out);

// Random argument image for probe runs: int scalars from the size map, float
// scalars uniform in [-1,1], pointer regions 65536 elements of uniform noise
// rounded per the parameter's element type.
interp::MemoryImage build_probe_image(const minilang::FunctionIR& f,
                                      const std::map<std::string, long long>& sizes, Rng& rng);

LivenessReport detect_liveness(const minilang::Program& prog, const minilang::FunctionIR& f,
                               uint64_t seed);

// Same protocol with the probe size draws constrained by declared rules;
// needed when a function only runs meaningfully under shape relations such
// as out extents tied to input extents.
LivenessReport detect_liveness(const minilang::Program& prog, const minilang::FunctionIR& f,
                               uint64_t seed, const api::SizeRules& rules);

struct DimSpec {
  std::string array;
  std::vector<std::string> dims;  // integer parameter names, outermost first
  // Name of the dim whose coordinate varied slowest across the access trace.
  // Advisory only; layout is settled downstream by behavioral comparison.
  std::string slow_dim;
};

// All dim tuples over int_params with repetition, rank 1..max_rank, ordered
// by ascending product of the probe values, ties by tuple lexicographic
// order over parameter positions.
std::vector<std::vector<std::string>> enumerate_dim_candidates(
    const std::vector<std::string>& int_params, int max_rank,
    const std::map<std::string, long long>& probe_values);

DimSpec detect_dims(const minilang::Program& prog, const minilang::FunctionIR& f,
                    const std::string& arr, const std::vector<std::string>& int_params,
                    const std::map<std::string, long long>& probe_values, int max_rank);

// Deterministic probe values for the integer parameters. Parameters carrying
// a derived size rule are computed from it; the rest draw from a fixed pool
// (variant 0 or 1 select disjoint-leading pools) by backtracking search so
// that every final value is >= 5 and all values are pairwise distinct.
// Fixtures with interacting sizes may pin explicit probe maps instead; a
// complete map for the given variant short-circuits the search after
// validation.
std::map<std::string, long long> assign_probe_values(
    const std::vector<std::string>& int_params, const api::SizeRules& rules,
    const std::vector<std::map<std::string, long long>>& explicit_probes, int variant);

// Analysis summary for one function, consumed by signature matching.
struct ArrayInfo {
  std::string name;
  minilang::ScalarType elem = minilang::ScalarType::F64;
  api::Liveness liveness = api::Liveness::LiveIn;
  bool has_dims = false;  // false: dimension detection failed for this array
  std::vector<std::string> dims;
  std::string slow_dim;
};

struct AnalyzedFunction {
  std::string name;
  std::vector<ArrayInfo> arrays;        // pointer params, signature order
  std::vector<std::string> int_params;  // signature order
  std::vector<std::string> float_params;
};

}  // namespace liftc::analysis
