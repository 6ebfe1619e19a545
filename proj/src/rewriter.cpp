#include "liftc/rewriter.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "liftc/analysis.hpp"
#include "liftc/equivalence.hpp"
#include "liftc/rng.hpp"

namespace liftc::rewriter {

using minilang::Expr;
using minilang::ExprPtr;
using minilang::FunctionIR;
using minilang::Program;
using minilang::Stmt;
using minilang::StmtPtr;

namespace {

ExprPtr var_expr(const std::string& name) {
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::Var;
  e->name = name;
  return e;
}

bool is_single_dispatch_body(const FunctionIR& f) {
  return f.body.size() == 1 && f.body[0]->kind == Stmt::Kind::CallStmt &&
         f.body[0]->call->kind == Expr::Kind::Call &&
         minilang::is_dispatch_builtin(f.body[0]->call->name);
}

// user param bound to this API param, or throw BindingIncomplete
const std::string& bound_user(const matching::CandidateBinding& binding,
                              const api::ApiParam& p) {
  const std::map<std::string, std::string>* m = nullptr;
  switch (p.kind) {
    case api::ApiParamKind::Array: m = &binding.arrays; break;
    case api::ApiParamKind::IntSize: m = &binding.sizes; break;
    case api::ApiParamKind::FloatScalar: m = &binding.scalars; break;
  }
  auto it = m->find(p.name);
  if (it == m->end()) throw BindingIncomplete("api param '" + p.name + "' is unbound");
  return it->second;
}

}  // namespace

RewriteResult rewrite(const Program& p, const std::string& function,
                      const matching::CandidateBinding& binding, const api::ApiSpec& spec) {
  const FunctionIR* f = p.find(function);
  if (!f) throw std::invalid_argument("no function named '" + function + "'");

  RewriteResult res;
  res.manifest.function = function;
  res.manifest.api = spec.name;
  // built param-by-param so the maps cover every API param exactly once
  for (const auto& ap : spec.params) {
    const std::string& user = bound_user(binding, ap);
    switch (ap.kind) {
      case api::ApiParamKind::Array: res.manifest.arrays[ap.name] = user; break;
      case api::ApiParamKind::IntSize: res.manifest.sizes[ap.name] = user; break;
      case api::ApiParamKind::FloatScalar: res.manifest.scalars[ap.name] = user; break;
    }
  }

  res.program = minilang::clone(p);
  FunctionIR* g = nullptr;
  for (auto& fn : res.program.functions)
    if (fn.name == function) g = &fn;

  if (is_single_dispatch_body(*g)) {
    res.manifest.warnings.push_back("function '" + function +
                                    "' already is a dispatch call; rewrite skipped");
    return res;
  }

  auto call = std::make_unique<Expr>();
  call->kind = Expr::Kind::Call;
  call->name = "atc_dispatch_" + spec.semantics;
  for (const auto& ap : spec.params) call->args.push_back(var_expr(bound_user(binding, ap)));

  auto stmt = std::make_unique<Stmt>();
  stmt->kind = Stmt::Kind::CallStmt;
  stmt->call = std::move(call);

  g->body.clear();
  g->body.push_back(std::move(stmt));
  return res;
}

namespace {

// Positional interpretation of a dispatch call against the spec, shared by
// the oracle and routed handlers.
void run_dispatch(const api::ApiSpec& spec, const std::string& name,
                  const std::vector<interp::DispatchArg>& args, interp::MemoryImage& mem) {
  if (name != "atc_dispatch_" + spec.semantics)
    throw std::runtime_error("dispatch name '" + name + "' does not match api semantics '" +
                             spec.semantics + "'");
  if (args.size() != spec.params.size())
    throw std::runtime_error("dispatch arity " + std::to_string(args.size()) + ", api expects " +
                             std::to_string(spec.params.size()));

  std::map<std::string, long long> sizes;
  std::map<std::string, std::vector<double>> buffers;
  std::map<std::string, std::string> region_of;  // api array -> region key
  for (size_t i = 0; i < spec.params.size(); ++i) {
    const auto& ap = spec.params[i];
    const auto& a = args[i];
    switch (ap.kind) {
      case api::ApiParamKind::Array: {
        if (a.kind != interp::DispatchArg::Kind::Ptr)
          throw std::runtime_error("dispatch arg for array '" + ap.name + "' is not a pointer");
        auto it = mem.regions.find(a.region);
        if (it == mem.regions.end())
          throw std::runtime_error("dispatch region '" + a.region + "' missing");
        buffers[ap.name] = it->second.data;
        region_of[ap.name] = a.region;
        break;
      }
      case api::ApiParamKind::IntSize:
        if (a.kind != interp::DispatchArg::Kind::Int)
          throw std::runtime_error("dispatch arg for size '" + ap.name + "' is not an int");
        sizes[ap.name] = a.i;
        break;
      case api::ApiParamKind::FloatScalar:
        // bundled semantics take no float scalars; accept and ignore
        break;
    }
  }

  for (const auto& ap : spec.params) {
    if (ap.kind != api::ApiParamKind::Array) continue;
    long long extent = 1;
    for (const auto& d : ap.dims) {
      long long v = sizes.count(d) ? sizes.at(d) : -1;
      if (v < 1) throw std::runtime_error("dispatch size '" + d + "' is not positive");
      extent *= v;
    }
    if ((long long)buffers.at(ap.name).size() < extent)
      throw std::runtime_error("region bound to '" + ap.name + "' holds " +
                               std::to_string(buffers.at(ap.name).size()) +
                               " elements, call needs " + std::to_string(extent));
  }

  equivalence::run_reference(spec, sizes, buffers);

  for (const auto& ap : spec.params) {
    if (ap.kind != api::ApiParamKind::Array || ap.liveness == api::Liveness::LiveIn) continue;
    interp::Region& r = mem.regions.at(region_of.at(ap.name));
    const auto& buf = buffers.at(ap.name);
    if (r.elem == minilang::ScalarType::F32) {
      for (size_t i = 0; i < r.data.size(); ++i) r.data[i] = (double)(float)buf[i];
    } else {
      r.data = buf;
    }
  }
}

long long role_size(const api::ApiSpec& spec, const std::map<std::string, long long>& sizes,
                    const std::string& role) {
  for (const auto& p : spec.params)
    if (p.kind == api::ApiParamKind::IntSize && p.role == role) {
      auto it = sizes.find(p.name);
      if (it != sizes.end()) return it->second;
    }
  return 1;
}

}  // namespace

interp::DispatchContext make_oracle_dispatch(const api::ApiSpec& spec) {
  interp::DispatchContext ctx;
  ctx.handler = [spec](const std::string& name, const std::vector<interp::DispatchArg>& args,
                       interp::MemoryImage& mem) { run_dispatch(spec, name, args, mem); };
  return ctx;
}

interp::DispatchContext make_routed_dispatch(const api::ApiSpec& spec,
                                             const profitability::SvmModel* model,
                                             std::vector<std::string>* choices) {
  interp::DispatchContext ctx;
  ctx.handler = [spec, model, choices](const std::string& name,
                                       const std::vector<interp::DispatchArg>& args,
                                       interp::MemoryImage& mem) {
    if (model && choices) {
      std::map<std::string, long long> sizes;
      for (size_t i = 0; i < spec.params.size() && i < args.size(); ++i)
        if (spec.params[i].kind == api::ApiParamKind::IntSize) sizes[spec.params[i].name] = args[i].i;
      std::vector<long long> mnk;
      if (spec.semantics == "conv2d") {
        // im2col shape: filters x (batch * out positions), depth c*r*s
        mnk = {role_size(spec, sizes, "k"),
               role_size(spec, sizes, "n") * role_size(spec, sizes, "oh") *
                   role_size(spec, sizes, "ow"),
               role_size(spec, sizes, "c") * role_size(spec, sizes, "r") *
                   role_size(spec, sizes, "s")};
      } else {
        mnk = {role_size(spec, sizes, "m"), role_size(spec, sizes, "n"),
               role_size(spec, sizes, "k")};
      }
      choices->push_back(profitability::predict_backend(*model, mnk) == 1 ? "xpu" : "cpu");
    } else if (choices) {
      choices->push_back("cpu");
    }
    run_dispatch(spec, name, args, mem);
  };
  return ctx;
}

VerifyResult verify_rewrite(const Program& original, const Program& lifted,
                            const std::string& function,
                            const matching::CandidateBinding& binding, const api::ApiSpec& spec,
                            const api::SizeRules& rules, uint64_t seed, int tests) {
  VerifyResult res;
  const FunctionIR* f = original.find(function);
  if (!f || !lifted.find(function)) {
    res.detail = "function '" + function + "' missing";
    return res;
  }

  std::vector<std::string> int_params;
  for (const auto& p : f->params)
    if (p.kind == minilang::ParamKind::IntScalar) int_params.push_back(p.name);

  interp::DispatchContext oracle = make_oracle_dispatch(spec);
  interp::InstrumentationPolicy plain;
  interp::InstrumentationPolicy with_oracle;
  with_oracle.dispatch = &oracle;

  for (int t = 0; t < tests; ++t) {
    Rng rng(Rng::mix(seed, "verify:" + function + ":" + std::to_string(t)));
    std::map<std::string, long long> sizes;
    bool drawn = false;
    for (int tries = 0; tries < 20 && !drawn; ++tries)
      drawn = analysis::draw_sizes(int_params, rules, rng, sizes);
    if (!drawn) {
      res.detail = "could not draw sizes under the declared rules";
      return res;
    }
    interp::MemoryImage img = analysis::build_probe_image(*f, sizes, rng);

    interp::ExecutionOutcome ref = interp::execute(original, function, img, plain);
    if (ref.status != interp::ExecStatus::Normal) {
      res.detail = std::string("original run ended ") + interp::status_name(ref.status);
      return res;
    }
    interp::ExecutionOutcome got;
    try {
      got = interp::execute(lifted, function, img, with_oracle);
    } catch (const std::exception& e) {
      res.detail = std::string("dispatch failed: ") + e.what();
      return res;
    }
    if (got.status != interp::ExecStatus::Normal) {
      res.detail = std::string("lifted run ended ") + interp::status_name(got.status);
      return res;
    }

    for (const auto& [api_arr, user_arr] : binding.arrays) {
      const api::ApiParam* ap = spec.find(api_arr);
      if (!ap || ap->liveness == api::Liveness::LiveIn) continue;
      const auto& want = ref.final.regions.at(user_arr).data;
      const auto& have = got.final.regions.at(user_arr).data;
      const bool f32 = f->find_param(user_arr)->elem == minilang::ScalarType::F32;
      const double rel = f32 ? 1e-4 : 1e-9, abs = f32 ? 1e-6 : 1e-12;
      for (size_t i = 0; i < want.size(); ++i) {
        if (std::fabs(have[i] - want[i]) > abs + rel * std::fabs(want[i])) {
          res.tests_run = t + 1;
          res.detail = "mismatch on " + user_arr + "[" + std::to_string(i) + "]: original " +
                       std::to_string(want[i]) + ", lifted " + std::to_string(have[i]);
          return res;
        }
      }
    }
    res.tests_run = t + 1;
  }
  res.ok = true;
  return res;
}

std::string manifest_json_text(const LiftManifest& m) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["function"] = m.function;
  j["api"] = m.api;
  j["binding"] = {{"arrays", m.arrays}, {"sizes", m.sizes}, {"scalars", m.scalars}};
  j["verdict"] = m.verdict;
  j["classifier"] = {{"label", m.class_label}, {"score", m.class_score}};
  j["candidates"] = {{"raw", m.raw_candidates},
                     {"pruned", m.pruned_candidates},
                     {"winner_rank", m.winner_rank}};
  j["warnings"] = m.warnings;
  return j.dump(2) + "\n";
}

void save_manifest(const LiftManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << manifest_json_text(m);
}

void save_program(const Program& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << minilang::pretty_print(p);
}

}  // namespace liftc::rewriter
