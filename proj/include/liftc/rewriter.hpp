#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "liftc/api_spec.hpp"
#include "liftc/interp.hpp"
#include "liftc/matching.hpp"
#include "liftc/minilang.hpp"
#include "liftc/profitability.hpp"

// Body replacement for a matched function: the whole body becomes one
// dispatch-builtin call whose arguments are the user's own parameters,
// ordered as the API declares its parameters. The transformation never edits
// in place; callers emit the result to a sibling file together with a
// manifest recording the binding and how it was found.

namespace liftc::rewriter {

struct BindingIncomplete : std::runtime_error {
  explicit BindingIncomplete(const std::string& msg) : std::runtime_error(msg) {}
};

struct LiftManifest {
  std::string function;
  std::string api;
  // api param -> user param, one entry per API param of that kind
  std::map<std::string, std::string> arrays, sizes, scalars;
  std::string verdict;      // equivalence verdict summary
  std::string class_label;  // classifier output for the function
  double class_score = 0.0;
  unsigned long long raw_candidates = 0;  // permutation count before filtering
  unsigned long long pruned_candidates = 0;
  int winner_rank = -1;  // position of this binding in the ranked list
  std::vector<std::string> warnings;
};

struct RewriteResult {
  minilang::Program program;
  LiftManifest manifest;
};

// Replaces `function`'s body with `atc_dispatch_<semantics>(...)`. Other
// functions stay untouched. A body that already is a single dispatch call is
// left alone and noted in manifest.warnings. Throws BindingIncomplete when
// any API param has no user-side binding.
RewriteResult rewrite(const minilang::Program& p, const std::string& function,
                      const matching::CandidateBinding& binding, const api::ApiSpec& spec);

// Dispatch handler that executes the spec's reference semantics over the
// live regions: arguments are interpreted positionally against the spec's
// params, output arrays are written back (rounded when the region is f32).
// Throws std::runtime_error on arity/kind mismatch or undersized regions.
interp::DispatchContext make_oracle_dispatch(const api::ApiSpec& spec);

// Same execution, but consults the profitability model first when one is
// given and reports each call's routing choice ("cpu" or "xpu") through
// `choices`. Both stand-in backends compute the same function inside the
// interpreter, so routing only selects the label; timing realism lives in
// the profitability module.
interp::DispatchContext make_routed_dispatch(const api::ApiSpec& spec,
                                             const profitability::SvmModel* model,
                                             std::vector<std::string>* choices);

struct VerifyResult {
  bool ok = false;
  int tests_run = 0;
  std::string detail;  // first failure description, empty when ok
};

// Runs original and lifted programs on identical fresh random inputs, the
// lifted side with the oracle dispatch bound, and compares every bound
// output array element-wise under the standard tolerances.
VerifyResult verify_rewrite(const minilang::Program& original, const minilang::Program& lifted,
                            const std::string& function,
                            const matching::CandidateBinding& binding, const api::ApiSpec& spec,
                            const api::SizeRules& rules, uint64_t seed, int tests = 10);

void save_manifest(const LiftManifest& m, const std::string& path);
void save_program(const minilang::Program& p, const std::string& path);
std::string manifest_json_text(const LiftManifest& m);  // pretty-printed JSON

}  // namespace liftc::rewriter
