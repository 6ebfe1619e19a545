#include "liftc/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "liftc/equivalence.hpp"
#include "liftc/interp.hpp"
#include "liftc/rng.hpp"

namespace liftc::pipeline {

using minilang::Expr;
using minilang::FunctionIR;
using minilang::Program;
using minilang::Stmt;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

const char* status_name(FunctionStatus s) {
  switch (s) {
    case FunctionStatus::Lifted: return "Lifted";
    case FunctionStatus::NoMatch: return "NoMatch";
    case FunctionStatus::TooManyCandidates: return "TooManyCandidates";
    case FunctionStatus::Misclassified: return "Misclassified";
    case FunctionStatus::AnalysisFailed: return "AnalysisFailed";
  }
  return "?";
}

FixtureMeta parse_fixture_meta(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  FixtureMeta m;
  m.category = j.value("category", "");
  m.label = j.value("label", "");
  m.function = j.value("function", "");
  m.expect_lift = j.value("expect_lift", false);
  m.api = j.value("api", "");
  m.max_rank = j.value("max_rank", 0);
  if (j.contains("size_rules")) m.rules = api::parse_size_rules(j.at("size_rules").dump());
  if (j.contains("probes"))
    for (const auto& p : j.at("probes"))
      m.probes.push_back(p.get<std::map<std::string, long long>>());
  if (j.contains("liveness_truth"))
    m.liveness_truth = j.at("liveness_truth").get<std::map<std::string, std::string>>();
  if (j.contains("dims_truth"))
    m.dims_truth =
        j.at("dims_truth").get<std::map<std::string, std::vector<std::string>>>();
  if (j.contains("binding_truth"))
    m.binding_truth = j.at("binding_truth").get<std::map<std::string, std::string>>();
  return m;
}

FixtureMeta sidecar_for(const std::string& ml_path) {
  std::filesystem::path p(ml_path);
  p.replace_extension(".json");
  std::ifstream in(p);
  if (!in) return {};
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_fixture_meta(ss.str());
}

namespace {

// m,n,k feature vector for the profitability model: gemm sizes directly,
// conv collapsed to its im2col product shape.
std::vector<long long> profit_sizes(const api::ApiSpec& spec,
                                    const matching::CandidateBinding& binding,
                                    const std::map<std::string, long long>& user_sizes) {
  auto by_role = [&](const std::string& role) -> long long {
    for (const auto& p : spec.params) {
      if (p.kind != api::ApiParamKind::IntSize || p.role != role) continue;
      auto b = binding.sizes.find(p.name);
      if (b == binding.sizes.end()) return 1;
      auto v = user_sizes.find(b->second);
      return v == user_sizes.end() ? 1 : v->second;
    }
    return 1;
  };
  if (spec.semantics == "conv2d")
    return {by_role("k"), by_role("n") * by_role("oh") * by_role("ow"),
            by_role("c") * by_role("r") * by_role("s")};
  return {by_role("m"), by_role("n"), by_role("k")};
}

struct Walker {
  // invokes fn on every expression in the function body
  template <typename F>
  static void exprs(const FunctionIR& f, F&& fn) {
    for (const auto& s : f.body) stmt(*s, fn);
  }
  template <typename F>
  static void stmt(const Stmt& s, F&& fn) {
    for (const Expr* e : {s.let_init.get(), s.index.get(), s.value.get(), s.lo.get(),
                          s.hi.get(), s.step.get(), s.cond.get(), s.call.get()})
      if (e) expr(*e, fn);
    for (const auto& c : s.body) stmt(*c, fn);
    for (const auto& c : s.else_body) stmt(*c, fn);
  }
  template <typename F>
  static void expr(const Expr& e, F&& fn) {
    fn(e);
    for (const auto& a : e.args) expr(*a, fn);
  }
};

}  // namespace

FunctionReport lift_function(const Program& prog, const std::string& function,
                             const FixtureMeta& meta, const PipelineConfig& cfg,
                             const std::string& file_tag) {
  FunctionReport rep;
  rep.function = function;
  const FunctionIR* f = prog.find(function);
  if (!f) {
    rep.status = FunctionStatus::AnalysisFailed;
    rep.status_detail = "function not found";
    return rep;
  }
  const uint64_t fseed = Rng::mix(cfg.seed, file_tag + ":" + function);
  const auto start = std::chrono::steady_clock::now();

  // classify
  auto t = std::chrono::steady_clock::now();
  classifier::Classification cls;
  if (cfg.classifier) {
    cls = classifier::classify(*cfg.classifier, classifier::extract_features(prog, *f));
  } else {
    rep.status = FunctionStatus::AnalysisFailed;
    rep.status_detail = "no classifier model";
    return rep;
  }
  rep.class_label = cls.label;
  rep.class_score = cls.score;
  rep.phase_ms["classify_ms"] = ms_since(t);
  if (cls.label != "gemm" && cls.label != "conv2d") {
    rep.status = FunctionStatus::Misclassified;
    rep.status_detail = "classified as '" + cls.label + "', not an accelerator idiom";
    rep.phase_ms["total_ms"] = ms_since(start);
    return rep;
  }

  std::vector<const api::ApiSpec*> specs;
  for (const auto& s : cfg.specs)
    if (s.semantics == cls.label) specs.push_back(&s);
  if (specs.empty()) {
    rep.status = FunctionStatus::NoMatch;
    rep.status_detail = "no '" + cls.label + "' api spec supplied";
    rep.phase_ms["total_ms"] = ms_since(start);
    return rep;
  }

  // liveness
  t = std::chrono::steady_clock::now();
  analysis::LivenessReport live;
  try {
    live = analysis::detect_liveness(prog, *f, fseed, meta.rules);
  } catch (const std::exception& e) {
    rep.status = FunctionStatus::AnalysisFailed;
    rep.status_detail = std::string("liveness: ") + e.what();
    rep.phase_ms["total_ms"] = ms_since(start);
    return rep;
  }
  for (const auto& [name, l] : live.classes) rep.liveness[name] = api::liveness_name(l);
  rep.phase_ms["liveness_ms"] = ms_since(t);

  // dimensions
  t = std::chrono::steady_clock::now();
  analysis::AnalyzedFunction fn;
  fn.name = function;
  for (const auto& p : f->params) {
    if (p.kind == minilang::ParamKind::IntScalar) fn.int_params.push_back(p.name);
    if (p.kind == minilang::ParamKind::FloatScalar) fn.float_params.push_back(p.name);
  }
  int max_rank = meta.max_rank;
  for (const auto* s : specs)
    if (!meta.max_rank) max_rank = std::max(max_rank, s->max_rank());
  std::map<std::string, long long> probe_values;
  try {
    probe_values = analysis::assign_probe_values(fn.int_params, meta.rules, meta.probes, 0);
  } catch (const std::exception& e) {
    rep.status = FunctionStatus::AnalysisFailed;
    rep.status_detail = std::string("probe assignment: ") + e.what();
    rep.phase_ms["total_ms"] = ms_since(start);
    return rep;
  }
  for (const auto& p : f->params) {
    if (p.kind != minilang::ParamKind::Pointer) continue;
    analysis::ArrayInfo info;
    info.name = p.name;
    info.elem = p.elem;
    info.liveness = live.classes.at(p.name);
    try {
      analysis::DimSpec d =
          analysis::detect_dims(prog, *f, p.name, fn.int_params, probe_values, max_rank);
      info.has_dims = true;
      info.dims = d.dims;
      info.slow_dim = d.slow_dim;
      rep.dims.push_back(std::move(d));
    } catch (const analysis::NoDimsFound&) {
      info.has_dims = false;
    } catch (const std::exception& e) {
      rep.status = FunctionStatus::AnalysisFailed;
      rep.status_detail = std::string("dims: ") + e.what();
      rep.phase_ms["total_ms"] = ms_since(start);
      return rep;
    }
    fn.arrays.push_back(std::move(info));
  }
  rep.phase_ms["dims_ms"] = ms_since(t);

  // match, rank, equivalence per spec
  const size_t user_ptrs = fn.arrays.size();
  bool too_many = false;
  double match_ms = 0.0, equiv_ms = 0.0, rewrite_ms = 0.0;
  for (const auto* spec : specs) {
    t = std::chrono::steady_clock::now();
    SpecCandidates sc;
    sc.api = spec->name;
    sc.raw = matching::raw_candidate_count(user_ptrs, spec->arrays().size(),
                                           fn.int_params.size(), spec->size_params().size());
    std::vector<matching::CandidateBinding> found = matching::find_matchings(fn, *spec);
    sc.filtered = found.size();
    matching::RankResult ranked = matching::rank_candidates(std::move(found), cfg.max_candidates);
    sc.kept = ranked.ranked.size();
    sc.truncated = ranked.truncated;
    for (size_t i = 0; i < ranked.ranked.size() && i < 10; ++i)
      sc.top.push_back(ranked.ranked[i]);
    rep.by_spec.push_back(sc);
    match_ms += ms_since(t);

    if (ranked.truncated) {
      too_many = true;
      continue;
    }

    for (size_t i = 0; i < ranked.ranked.size(); ++i) {
      if (std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >
          cfg.budget_sec) {
        too_many = true;
        rep.status_detail = "per-function budget exhausted";
        break;
      }
      const auto& cand = ranked.ranked[i];
      t = std::chrono::steady_clock::now();
      equivalence::EquivalenceConfig ec;
      ec.tests = cfg.tests;
      ec.seed = fseed;
      equivalence::EquivalenceResult er =
          equivalence::check_equivalence(prog, fn, cand, *spec, meta.rules, ec);
      CandidateOutcome out;
      out.api = spec->name;
      out.rank = (int)i;
      out.binding = cand;
      out.verdict = equivalence::verdict_name(er.verdict);
      out.detail = er.detail;
      out.equiv_ms = ms_since(t);
      equiv_ms += out.equiv_ms;

      if (er.verdict == equivalence::Verdict::Equivalent) {
        t = std::chrono::steady_clock::now();
        try {
          rewriter::RewriteResult rr = rewriter::rewrite(prog, function, cand, *spec);
          rewriter::VerifyResult vr =
              rewriter::verify_rewrite(prog, rr.program, function, cand, *spec, meta.rules,
                                       Rng::mix(fseed, "post"), cfg.verify_tests);
          rewrite_ms += ms_since(t);
          if (!vr.ok) {
            out.verdict = "VerificationFailed";
            out.detail = vr.detail;
            rep.evaluated.push_back(std::move(out));
            continue;
          }
          rep.status = FunctionStatus::Lifted;
          rep.winning_api = spec->name;
          rep.manifest = std::move(rr.manifest);
          rep.manifest.verdict = out.verdict;
          rep.manifest.class_label = cls.label;
          rep.manifest.class_score = cls.score;
          rep.manifest.raw_candidates = sc.raw;
          rep.manifest.pruned_candidates = sc.filtered;
          rep.manifest.winner_rank = (int)i;
          if (cfg.svm)
            rep.backend_hint = profitability::predict_backend(
                                   *cfg.svm, profit_sizes(*spec, cand, probe_values)) == 1
                                   ? "xpu"
                                   : "cpu";
        } catch (const std::exception& e) {
          rewrite_ms += ms_since(t);
          out.verdict = "VerificationFailed";
          out.detail = std::string("rewrite: ") + e.what();
          rep.evaluated.push_back(std::move(out));
          continue;
        }
        rep.evaluated.push_back(std::move(out));
        break;
      }
      rep.evaluated.push_back(std::move(out));
    }
    if (rep.status == FunctionStatus::Lifted || too_many) break;
  }

  rep.phase_ms["match_ms"] = match_ms;
  rep.phase_ms["equivalence_ms"] = equiv_ms;
  rep.phase_ms["rewrite_ms"] = rewrite_ms;
  if (rep.status != FunctionStatus::Lifted) {
    if (too_many) {
      rep.status = FunctionStatus::TooManyCandidates;
      if (rep.status_detail.empty()) rep.status_detail = "candidate cap exceeded";
    } else {
      rep.status = FunctionStatus::NoMatch;
      bool any_filtered = false;
      for (const auto& sc : rep.by_spec) any_filtered |= sc.filtered > 0;
      rep.status_detail = any_filtered ? "no candidate proved equivalent"
                                       : "no candidate passed the constraints";
    }
  }
  rep.phase_ms["total_ms"] = ms_since(start);
  return rep;
}

FileReport lift_program(const Program& prog, const std::string& file_tag,
                        const FixtureMeta& meta, const PipelineConfig& cfg, Program* lifted) {
  FileReport rep;
  rep.file = file_tag;
  const size_t n = prog.functions.size();
  rep.functions.resize(n);

  unsigned hw = std::thread::hardware_concurrency();
  size_t workers = cfg.workers > 0 ? (size_t)cfg.workers : (hw == 0 ? 1 : hw);
  workers = std::min(workers, n == 0 ? (size_t)1 : n);

  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
      rep.functions[i] = lift_function(prog, prog.functions[i].name, meta, cfg, file_tag);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  if (lifted) {
    *lifted = minilang::clone(prog);
    for (const auto& fr : rep.functions) {
      if (fr.status != FunctionStatus::Lifted) continue;
      const api::ApiSpec* spec = nullptr;
      for (const auto& s : cfg.specs)
        if (s.name == fr.winning_api) spec = &s;
      matching::CandidateBinding binding;
      binding.arrays = fr.manifest.arrays;
      binding.sizes = fr.manifest.sizes;
      binding.scalars = fr.manifest.scalars;
      *lifted = rewriter::rewrite(*lifted, fr.function, binding, *spec).program;
    }
    // an unlifted caller of a lifted callee changes behavior in the output
    std::vector<std::string> lifted_names;
    for (const auto& fr : rep.functions)
      if (fr.status == FunctionStatus::Lifted) lifted_names.push_back(fr.function);
    for (const auto& fr : rep.functions) {
      if (fr.status == FunctionStatus::Lifted) continue;
      const FunctionIR* uf = prog.find(fr.function);
      if (!uf) continue;
      Walker::exprs(*uf, [&](const Expr& e) {
        if (e.kind != Expr::Kind::Call) return;
        for (const auto& ln : lifted_names)
          if (e.name == ln)
            rep.warnings.push_back("function '" + fr.function + "' calls lifted function '" +
                                   ln + "'; behavior in the emitted source depends on the "
                                        "dispatch runtime");
      });
    }
  }
  return rep;
}

FileReport lift_file(const std::string& path, const PipelineConfig& cfg, Program* lifted) {
  FileReport rep;
  rep.file = std::filesystem::path(path).filename().string();
  std::ifstream in(path);
  if (!in) {
    rep.parse_error = "cannot read " + path;
    return rep;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  Program prog;
  try {
    prog = minilang::parse_program(ss.str());
  } catch (const std::exception& e) {
    rep.parse_error = e.what();
    return rep;
  }
  FixtureMeta meta = sidecar_for(path);
  FileReport inner = lift_program(prog, rep.file, meta, cfg, lifted);
  inner.file = rep.file;
  return inner;
}

namespace {

nlohmann::json binding_to_json(const matching::CandidateBinding& b) {
  return {{"arrays", b.arrays},
          {"sizes", b.sizes},
          {"scalars", b.scalars},
          {"lex_score", b.lex_score}};
}

nlohmann::json function_to_json(const FunctionReport& fr) {
  nlohmann::json j;
  j["function"] = fr.function;
  j["status"] = status_name(fr.status);
  j["status_detail"] = fr.status_detail;
  j["classifier"] = {{"label", fr.class_label}, {"score", fr.class_score}};
  j["liveness"] = fr.liveness;
  j["dims"] = nlohmann::json::array();
  for (const auto& d : fr.dims)
    j["dims"].push_back({{"array", d.array}, {"dims", d.dims}, {"slow_dim", d.slow_dim}});
  nlohmann::json by_spec = nlohmann::json::array();
  for (const auto& sc : fr.by_spec) {
    nlohmann::json s = {{"api", sc.api},
                        {"raw", sc.raw},
                        {"filtered", sc.filtered},
                        {"kept", sc.kept},
                        {"truncated", sc.truncated}};
    s["top"] = nlohmann::json::array();
    for (const auto& b : sc.top) s["top"].push_back(binding_to_json(b));
    by_spec.push_back(s);
  }
  j["candidates"] = {{"by_spec", by_spec}};
  nlohmann::json evaluated = nlohmann::json::array();
  for (const auto& e : fr.evaluated) {
    evaluated.push_back({{"api", e.api},
                         {"rank", e.rank},
                         {"binding", binding_to_json(e.binding)},
                         {"verdict", e.verdict},
                         {"detail", e.detail},
                         {"timings", {{"equiv_ms", e.equiv_ms}}}});
  }
  j["candidates"]["evaluated"] = evaluated;
  if (fr.status == FunctionStatus::Lifted) {
    j["manifest"] = nlohmann::json::parse(rewriter::manifest_json_text(fr.manifest));
    j["winning_api"] = fr.winning_api;
    j["backend_hint"] = fr.backend_hint;
  }
  j["timings"] = fr.phase_ms;
  return j;
}

}  // namespace

nlohmann::json report_to_json(const FileReport& r) {
  nlohmann::json j;
  j["file"] = r.file;
  j["parse_error"] = r.parse_error;
  j["warnings"] = r.warnings;
  j["functions"] = nlohmann::json::array();
  for (const auto& fr : r.functions) j["functions"].push_back(function_to_json(fr));
  return j;
}

nlohmann::json mask_timings(const nlohmann::json& j) {
  if (j.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : j.items()) out[k] = k == "timings" ? nlohmann::json() : mask_timings(v);
    return out;
  }
  if (j.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : j) out.push_back(mask_timings(v));
    return out;
  }
  return j;
}

}  // namespace liftc::pipeline
