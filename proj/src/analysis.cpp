#include "liftc/analysis.hpp"

#include <algorithm>
#include <set>

#include "liftc/rng.hpp"

namespace liftc::analysis {

using api::Liveness;
using api::SizeRules;
using interp::ExecMode;
using interp::ExecStatus;
using interp::ExecutionOutcome;
using interp::InstrumentationPolicy;
using interp::MemoryImage;
using interp::Region;
using minilang::FunctionIR;
using minilang::Param;
using minilang::ParamKind;
using minilang::Program;

constexpr size_t kProbeRegionLen = 65536;

bool draw_sizes(const std::vector<std::string>& int_params, const SizeRules& rules,
                Rng& rng, std::map<std::string, long long>& out) {
  out.clear();
  std::map<std::string, std::string> head;  // member -> equal-group head
  for (const auto& g : rules.equal_groups)
    for (const auto& m : g)
      if (!g.empty()) head[m] = g.front();
  for (const auto& name : int_params) {
    if (rules.derived.count(name)) continue;
    auto h = head.find(name);
    if (h != head.end() && out.count(h->second)) {
      out[name] = out[h->second];
      continue;
    }
    long long lo = 2, hi = 8;
    auto r = rules.ranges.find(name);
    if (r != rules.ranges.end()) {
      lo = r->second.first;
      hi = r->second.second;
    }
    long long v = rng.uniform_int(lo, hi);
    auto m = rules.multiple_of.find(name);
    if (m != rules.multiple_of.end() && m->second > 1) {
      v = ((v + m->second - 1) / m->second) * m->second;
      if (v > hi) v = ((lo + m->second - 1) / m->second) * m->second;
    }
    out[name] = v;
  }
  // derived values may reference other derived ones; iterate to a fixpoint
  size_t pending = rules.derived.size();
  while (pending > 0) {
    size_t before = pending;
    for (const auto& [name, rule] : rules.derived) {
      if (out.count(name)) continue;
      bool ready = true;
      for (const auto& t : rule.terms)
        if (!out.count(t.second)) ready = false;
      if (!ready) continue;
      out[name] = api::eval_derived(rule, out);
      --pending;
    }
    if (pending == before) return false;  // cyclic rule
  }
  for (const auto& name : int_params)
    if (out.at(name) < 1) return false;
  return true;
}

MemoryImage build_probe_image(const FunctionIR& f, const std::map<std::string, long long>& sizes,
                              Rng& rng) {
  MemoryImage img;
  for (const auto& p : f.params) {
    switch (p.kind) {
      case ParamKind::IntScalar:
        img.int_args[p.name] = sizes.at(p.name);
        break;
      case ParamKind::FloatScalar:
        img.float_args[p.name] = rng.uniform_real(-1.0, 1.0);
        break;
      case ParamKind::Pointer: {
        Region r;
        r.elem = p.elem;
        r.data.resize(kProbeRegionLen);
        for (auto& v : r.data) {
          double x = rng.uniform_real(-1.0, 1.0);
          v = p.elem == minilang::ScalarType::F32 ? (double)(float)x : x;
        }
        img.regions[p.name] = std::move(r);
        break;
      }
    }
  }
  return img;
}

namespace {

void refill_region(Region& r, Rng& rng) {
  for (auto& v : r.data) {
    double x = rng.uniform_real(-1.0, 1.0);
    v = r.elem == minilang::ScalarType::F32 ? (double)(float)x : x;
  }
}

}  // namespace

LivenessReport detect_liveness(const Program& prog, const FunctionIR& f, uint64_t seed,
                               const SizeRules& rules) {
  std::vector<std::string> int_params;
  for (const auto& p : f.params)
    if (p.kind == ParamKind::IntScalar) int_params.push_back(p.name);

  Rng rng(seed);
  std::string last_fault;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::map<std::string, long long> sizes;
    bool drawn = false;
    for (int tries = 0; tries < 20 && !drawn; ++tries) drawn = draw_sizes(int_params, rules, rng, sizes);
    if (!drawn) {
      last_fault = "size constraints unsatisfiable";
      continue;
    }
    MemoryImage img = build_probe_image(f, sizes, rng);

    InstrumentationPolicy pol;
    pol.mode = ExecMode::Plain;
    pol.track_writes = true;
    ExecutionOutcome run1 = interp::execute(prog, f.name, img, pol);
    if (run1.status != ExecStatus::Normal) {
      last_fault = std::string(interp::status_name(run1.status)) + ": " + run1.fault_msg;
      continue;
    }

    LivenessReport rep;
    for (const auto& p : f.params) rep.classes[p.name] = Liveness::LiveIn;

    bool ok = true;
    for (const auto& name : interp::snapshot_diff(img, run1.final)) {
      MemoryImage img2 = img;
      Rng fresh(Rng::mix(seed, "rerun:" + name + ":" + std::to_string(attempt)));
      refill_region(img2.regions.at(name), fresh);
      ExecutionOutcome run2 = interp::execute(prog, f.name, img2, pol);
      if (run2.status != ExecStatus::Normal) {
        last_fault = std::string(interp::status_name(run2.status)) + ": " + run2.fault_msg;
        ok = false;
        break;
      }
      // compare only offsets either run wrote; the probe buffers are much
      // larger than the touched span and untouched tails differ by design
      const auto& d1 = run1.final.regions.at(name).data;
      const auto& d2 = run2.final.regions.at(name).data;
      const auto& w1 = run1.writes.at(name);
      const auto& w2 = run2.writes.at(name);
      bool differs = false;
      for (size_t i = 0; i < d1.size() && !differs; ++i)
        if ((w1[i] || w2[i]) && d1[i] != d2[i]) differs = true;
      rep.classes[name] = differs ? Liveness::LiveInOut : Liveness::LiveOut;
    }
    if (ok) return rep;
  }
  throw AnalysisInconclusive("liveness probes failed for '" + f.name + "' (" + last_fault + ")");
}

LivenessReport detect_liveness(const Program& prog, const FunctionIR& f, uint64_t seed) {
  return detect_liveness(prog, f, seed, SizeRules{});
}

std::vector<std::vector<std::string>> enumerate_dim_candidates(
    const std::vector<std::string>& int_params, int max_rank,
    const std::map<std::string, long long>& probe_values) {
  struct Cand {
    long long product;
    std::vector<int> pos;
  };
  std::vector<Cand> cands;
  const int n = (int)int_params.size();
  for (int rank = 1; rank <= max_rank && n > 0; ++rank) {
    std::vector<int> idx(rank, 0);
    for (;;) {
      long long prod = 1;
      for (int i : idx) prod *= probe_values.at(int_params[i]);
      cands.push_back({prod, idx});
      int k = rank - 1;
      while (k >= 0 && ++idx[k] == n) idx[k--] = 0;
      if (k < 0) break;
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.product != b.product) return a.product < b.product;
    return std::lexicographical_compare(a.pos.begin(), a.pos.end(), b.pos.begin(), b.pos.end());
  });
  std::vector<std::vector<std::string>> out;
  out.reserve(cands.size());
  for (const auto& c : cands) {
    std::vector<std::string> t;
    t.reserve(c.pos.size());
    for (int i : c.pos) t.push_back(int_params[i]);
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

// Slowest-varying dim across the access trace, row-major coordinates.
std::string slow_dim_from_trace(const std::vector<long long>& trace,
                                const std::vector<std::string>& dims,
                                const std::map<std::string, long long>& pv) {
  if (dims.empty()) return "";
  if (dims.size() == 1 || trace.size() < 2) return dims[0];
  std::vector<long long> stride(dims.size(), 1);
  for (int i = (int)dims.size() - 2; i >= 0; --i) stride[i] = stride[i + 1] * pv.at(dims[i + 1]);
  std::vector<long long> changes(dims.size(), 0);
  std::vector<long long> prev(dims.size(), 0), cur(dims.size(), 0);
  for (size_t t = 0; t < trace.size(); ++t) {
    for (size_t d = 0; d < dims.size(); ++d) cur[d] = (trace[t] / stride[d]) % pv.at(dims[d]);
    if (t > 0)
      for (size_t d = 0; d < dims.size(); ++d)
        if (cur[d] != prev[d]) ++changes[d];
    prev = cur;
  }
  size_t best = 0;
  for (size_t d = 1; d < dims.size(); ++d)
    if (changes[d] < changes[best]) best = d;
  return dims[best];
}

}  // namespace

DimSpec detect_dims(const Program& prog, const FunctionIR& f, const std::string& arr,
                    const std::vector<std::string>& int_params,
                    const std::map<std::string, long long>& probe_values, int max_rank) {
  std::set<long long> seen;
  for (const auto& name : int_params) {
    auto it = probe_values.find(name);
    if (it == probe_values.end())
      throw std::invalid_argument("no probe value for int param '" + name + "'");
    if (it->second < 5) throw std::invalid_argument("probe values must be >= 5");
    if (!seen.insert(it->second).second)
      throw std::invalid_argument("probe values must be pairwise distinct");
  }

  MemoryImage img;
  for (const auto& p : f.params) {
    if (p.kind == ParamKind::IntScalar) img.int_args[p.name] = probe_values.at(p.name);
    if (p.kind == ParamKind::FloatScalar) img.float_args[p.name] = 0.5;
  }

  // One unbounded survey run records the maximal touched offset. A candidate
  // run ends Normal exactly when its extent exceeds that offset, so the
  // first passing candidate in enumeration order is the first one whose
  // product covers it; no per-candidate execution is needed.
  InstrumentationPolicy pol;
  pol.mode = ExecMode::DimProbe;
  pol.target = arr;
  pol.target_extent = interp::kUnboundedExtent;
  pol.record_trace = true;
  ExecutionOutcome survey = interp::execute(prog, f.name, img, pol);
  if (survey.status != ExecStatus::Normal)
    throw NoDimsFound("probe of '" + arr + "' in '" + f.name +
                      "' ended " + interp::status_name(survey.status) +
                      (survey.fault_msg.empty() ? "" : ": " + survey.fault_msg));
  const long long need = survey.max_target_offset + 1;

  for (const auto& cand : enumerate_dim_candidates(int_params, max_rank, probe_values)) {
    long long prod = 1;
    for (const auto& d : cand) prod *= probe_values.at(d);
    if (prod >= need) {
      DimSpec spec;
      spec.array = arr;
      spec.dims = cand;
      spec.slow_dim = slow_dim_from_trace(survey.trace, cand, probe_values);
      return spec;
    }
  }
  throw NoDimsFound("no dim tuple of rank <= " + std::to_string(max_rank) + " covers '" + arr +
                    "' in '" + f.name + "'");
}

namespace {

const std::vector<long long>& probe_pool(int variant) {
  static const std::vector<long long> pool0 = {7,  11, 13, 17, 19, 23, 29, 31, 37,
                                               41, 43, 47, 53, 59, 61, 67, 71, 73};
  static const std::vector<long long> pool1 = {5,  9,  17, 19, 23, 29, 31, 37, 41,
                                               43, 47, 53, 59, 61, 67, 71, 73, 79};
  return variant % 2 == 0 ? pool0 : pool1;
}

bool values_ok(const std::map<std::string, long long>& vals) {
  std::set<long long> seen;
  for (const auto& [name, v] : vals) {
    (void)name;
    if (v < 5) return false;
    if (!seen.insert(v).second) return false;
  }
  return true;
}

// Compute every derived rule whose terms are available. Returns false on a
// constraint violation (value < 5 or duplicate).
bool extend_derived(const SizeRules& rules, std::map<std::string, long long>& vals) {
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [name, rule] : rules.derived) {
      if (vals.count(name)) continue;
      bool ready = true;
      for (const auto& t : rule.terms)
        if (!vals.count(t.second)) ready = false;
      if (!ready) continue;
      long long v = api::eval_derived(rule, vals);
      if (v < 5) return false;
      for (const auto& [other, ov] : vals) {
        (void)other;
        if (ov == v) return false;
      }
      vals[name] = v;
      grew = true;
    }
  }
  return true;
}

bool probe_dfs(const std::vector<std::string>& free_params, size_t i, const SizeRules& rules,
               const std::vector<long long>& pool, std::map<std::string, long long>& vals) {
  if (i == free_params.size()) {
    std::map<std::string, long long> full = vals;
    if (!extend_derived(rules, full)) return false;
    if (full.size() != free_params.size() + rules.derived.size()) return false;  // cyclic
    if (!values_ok(full)) return false;
    vals = full;
    return true;
  }
  for (long long v : pool) {
    bool used = false;
    for (const auto& [n, x] : vals) {
      (void)n;
      if (x == v) used = true;
    }
    if (used) continue;
    auto saved = vals;
    vals[free_params[i]] = v;
    if (extend_derived(rules, vals) && probe_dfs(free_params, i + 1, rules, pool, vals)) return true;
    vals = saved;
  }
  return false;
}

}  // namespace

std::map<std::string, long long> assign_probe_values(
    const std::vector<std::string>& int_params, const SizeRules& rules,
    const std::vector<std::map<std::string, long long>>& explicit_probes, int variant) {
  if ((size_t)variant < explicit_probes.size()) {
    const auto& given = explicit_probes[variant];
    bool complete = true;
    for (const auto& p : int_params)
      if (!given.count(p)) complete = false;
    if (complete) {
      if (!values_ok(given))
        throw AnalysisInconclusive("declared probe values violate the distinct >=5 rule");
      for (const auto& [name, rule] : rules.derived)
        if (given.count(name) && api::eval_derived(rule, given) != given.at(name))
          throw AnalysisInconclusive("declared probe value for '" + name +
                                     "' contradicts its derived rule");
      return given;
    }
  }

  std::vector<std::string> free_params;
  for (const auto& p : int_params)
    if (!rules.derived.count(p)) free_params.push_back(p);

  std::map<std::string, long long> vals;
  if (!probe_dfs(free_params, 0, rules, probe_pool(variant), vals))
    throw AnalysisInconclusive("no probe assignment satisfies the size rules");
  std::map<std::string, long long> out;
  for (const auto& p : int_params) out[p] = vals.at(p);
  return out;
}

}  // namespace liftc::analysis
