#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "liftc/analysis.hpp"
#include "liftc/api_spec.hpp"
#include "liftc/matching.hpp"
#include "liftc/minilang.hpp"

// Behavioral equivalence between a user function and an API entry point
// under a candidate binding. Each test draws sizes honoring the spec's
// sampling metadata and any declared user-side rules, fills both sides with
// identical inputs, runs the interpreter against the reference semantics and
// compares every bound output array element-wise.

namespace liftc::equivalence {

enum class Verdict { Equivalent, NotEquivalent, Inconclusive };

const char* verdict_name(Verdict v);

struct Counterexample {
  std::map<std::string, long long> sizes;  // api size param -> value
  std::string array;                       // api array with the first mismatch
  long long offset = -1;
  double expected = 0.0;  // reference value
  double actual = 0.0;    // user function value
};

struct EquivalenceConfig {
  int tests = 30;
  uint64_t seed = 0;
  double rel_f32 = 1e-4;
  double abs_f32 = 1e-6;
  double rel_f64 = 1e-9;
  double abs_f64 = 1e-12;
  unsigned long long step_limit = interp::kDefaultStepLimit;
};

struct EquivalenceResult {
  Verdict verdict = Verdict::Inconclusive;
  int tests_run = 0;
  std::string detail;  // set for Inconclusive
  Counterexample cex;  // set for NotEquivalent
};

// Executes the reference semantics (gemm or conv2d, honoring layout and
// stride roles) over flat buffers keyed by api array name; output arrays are
// rewritten in place, float accumulation is double throughout.
void run_reference(const api::ApiSpec& spec, const std::map<std::string, long long>& sizes,
                   std::map<std::string, std::vector<double>>& buffers);

EquivalenceResult check_equivalence(const minilang::Program& prog,
                                    const analysis::AnalyzedFunction& fn,
                                    const matching::CandidateBinding& binding,
                                    const api::ApiSpec& spec, const api::SizeRules& user_rules,
                                    const EquivalenceConfig& cfg);

}  // namespace liftc::equivalence
