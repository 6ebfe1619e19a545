#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "liftc/analysis.hpp"
#include "liftc/api_spec.hpp"
#include "liftc/classifier.hpp"
#include "liftc/matching.hpp"
#include "liftc/profitability.hpp"
#include "liftc/rewriter.hpp"

// Per-function drive of the phase sequence: classify, liveness, dimensions,
// match, rank, equivalence, profitability, rewrite. Functions are processed
// by a small worker pool; reports keep declaration order. Every wall-clock
// number sits under a key named "timings" so deterministic comparisons can
// mask them uniformly.

namespace liftc::pipeline {

// Sidecar metadata for a fixture file (<stem>.json next to <stem>.ml):
// declared size rules and probe pins feed the analyses; the remaining fields
// carry bench bookkeeping and authored ground truth for the test suite.
struct FixtureMeta {
  std::string category;
  std::string label;     // ground-truth class
  std::string function;  // function of interest; empty = first function
  bool expect_lift = false;
  std::string api;  // expected winning spec name
  api::SizeRules rules;
  std::vector<std::map<std::string, long long>> probes;
  int max_rank = 0;  // 0 = use the specs' own maximum
  std::map<std::string, std::string> liveness_truth;               // param -> class
  std::map<std::string, std::vector<std::string>> dims_truth;      // array -> dims
  std::map<std::string, std::string> binding_truth;                // api param -> user param
};

FixtureMeta parse_fixture_meta(const std::string& json_text);
// Loads <stem>.json when present, else returns a default FixtureMeta.
FixtureMeta sidecar_for(const std::string& ml_path);

enum class FunctionStatus { Lifted, NoMatch, TooManyCandidates, Misclassified, AnalysisFailed };
const char* status_name(FunctionStatus s);

struct CandidateOutcome {
  std::string api;
  int rank = 0;  // position in that spec's ranked list
  matching::CandidateBinding binding;
  std::string verdict;  // Equivalent | NotEquivalent | Inconclusive | VerificationFailed
  std::string detail;
  double equiv_ms = 0.0;
};

struct SpecCandidates {
  std::string api;
  unsigned long long raw = 0;       // permutations before any filtering
  unsigned long long filtered = 0;  // after liveness/dims/out constraints
  unsigned long long kept = 0;      // after the cap
  bool truncated = false;
  std::vector<matching::CandidateBinding> top;  // up to 10 ranked bindings
};

struct FunctionReport {
  std::string function;
  FunctionStatus status = FunctionStatus::NoMatch;
  std::string status_detail;
  std::string class_label;
  double class_score = 0.0;
  std::map<std::string, std::string> liveness;  // param -> class name
  std::vector<analysis::DimSpec> dims;
  std::vector<SpecCandidates> by_spec;
  std::vector<CandidateOutcome> evaluated;
  std::string backend_hint;  // profitability verdict at the probe sizes
  rewriter::LiftManifest manifest;  // meaningful when status == Lifted
  std::string winning_api;
  std::map<std::string, double> phase_ms;
};

struct FileReport {
  std::string file;  // basename
  std::string parse_error;
  std::vector<std::string> warnings;
  std::vector<FunctionReport> functions;
};

struct PipelineConfig {
  std::vector<api::ApiSpec> specs;  // tried in this order
  const classifier::ClassifierModel* classifier = nullptr;
  const profitability::SvmModel* svm = nullptr;  // optional
  size_t max_candidates = 100;
  double budget_sec = 600.0;
  int tests = 30;
  int verify_tests = 10;
  uint64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency
};

// One function end to end. `file_tag` seeds the per-function rng stream.
FunctionReport lift_function(const minilang::Program& prog, const std::string& function,
                             const FixtureMeta& meta, const PipelineConfig& cfg,
                             const std::string& file_tag);

// Every function of a parsed program through the worker pool; on return
// `lifted` (when non-null) holds the program with each lifted function's
// body replaced. Emits nothing to disk.
FileReport lift_program(const minilang::Program& prog, const std::string& file_tag,
                        const FixtureMeta& meta, const PipelineConfig& cfg,
                        minilang::Program* lifted);

// Reads and parses the file, then lift_program. Parse failures come back in
// FileReport::parse_error rather than as exceptions.
FileReport lift_file(const std::string& path, const PipelineConfig& cfg,
                     minilang::Program* lifted);

nlohmann::json report_to_json(const FileReport& r);

// Recursively nulls the value of every key named "timings", for byte-stable
// report comparisons.
nlohmann::json mask_timings(const nlohmann::json& j);

}  // namespace liftc::pipeline
