#include "liftc/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "liftc/interp.hpp"
#include "liftc/rng.hpp"

namespace liftc::equivalence {

using api::ApiParam;
using api::ApiSpec;
using api::Layout;
using api::SizeRules;
using interp::ExecStatus;
using interp::MemoryImage;
using interp::Region;
using matching::CandidateBinding;
using minilang::ScalarType;

namespace {

constexpr size_t kScratchLen = 262144;
constexpr long long kDefaultLo = 2, kDefaultHi = 16;

const ApiParam* find_role(const ApiSpec& spec, const std::string& role) {
  for (const auto& p : spec.params)
    if (p.role == role) return &p;
  return nullptr;
}

long long role_value(const ApiSpec& spec, const std::map<std::string, long long>& sizes,
                     const std::string& role, long long fallback) {
  const ApiParam* p = find_role(spec, role);
  if (!p) return fallback;
  return sizes.at(p->name);
}

void reference_gemm(const ApiSpec& spec, const std::map<std::string, long long>& sizes,
                    std::map<std::string, std::vector<double>>& buffers) {
  const long long m = role_value(spec, sizes, "m", 0);
  const long long n = role_value(spec, sizes, "n", 0);
  const long long k = role_value(spec, sizes, "k", 0);
  const bool row = spec.layout == Layout::RowMajor;
  const long long lda = role_value(spec, sizes, "lda", row ? k : m);
  const long long ldb = role_value(spec, sizes, "ldb", row ? n : k);
  const long long ldc = role_value(spec, sizes, "ldc", row ? n : m);
  const auto& A = buffers.at(find_role(spec, "a")->name);
  const auto& B = buffers.at(find_role(spec, "b")->name);
  auto& C = buffers.at(find_role(spec, "c")->name);
  for (long long i = 0; i < m; ++i)
    for (long long j = 0; j < n; ++j) {
      double acc = 0.0;
      for (long long p = 0; p < k; ++p) {
        double av = row ? A[(size_t)(i * lda + p)] : A[(size_t)(p * lda + i)];
        double bv = row ? B[(size_t)(p * ldb + j)] : B[(size_t)(j * ldb + p)];
        acc += av * bv;
      }
      if (row)
        C[(size_t)(i * ldc + j)] = acc;
      else
        C[(size_t)(j * ldc + i)] = acc;
    }
}

void reference_conv2d(const ApiSpec& spec, const std::map<std::string, long long>& sizes,
                      std::map<std::string, std::vector<double>>& buffers) {
  const long long n = role_value(spec, sizes, "n", 0);
  const long long c = role_value(spec, sizes, "c", 0);
  const long long h = role_value(spec, sizes, "h", 0);
  const long long w = role_value(spec, sizes, "w", 0);
  const long long k = role_value(spec, sizes, "k", 0);
  const long long r = role_value(spec, sizes, "r", 0);
  const long long s = role_value(spec, sizes, "s", 0);
  const long long oh = role_value(spec, sizes, "oh", h - r + 1);
  const long long ow = role_value(spec, sizes, "ow", w - s + 1);
  const auto& in = buffers.at(find_role(spec, "in")->name);
  const auto& wt = buffers.at(find_role(spec, "weights")->name);
  auto& out = buffers.at(find_role(spec, "out")->name);
  for (long long b = 0; b < n; ++b)
    for (long long q = 0; q < k; ++q)
      for (long long y = 0; y < oh; ++y)
        for (long long x = 0; x < ow; ++x) {
          double acc = 0.0;
          for (long long z = 0; z < c; ++z)
            for (long long u = 0; u < r; ++u)
              for (long long v = 0; v < s; ++v)
                acc += in[(size_t)(((b * c + z) * h + y + u) * w + x + v)] *
                       wt[(size_t)(((q * c + z) * r + u) * s + v)];
          out[(size_t)(((b * k + q) * oh + y) * ow + x)] = acc;
        }
}

// allowed value list for one free parameter under merged constraints
std::vector<long long> allowed_values(long long lo, long long hi, long long mult, bool pow2) {
  std::vector<long long> vals;
  for (long long v = lo; v <= hi; ++v) {
    if (mult > 1 && v % mult != 0) continue;
    if (pow2 && (v < 2 || (v & (v - 1)) != 0)) continue;
    vals.push_back(v);
  }
  return vals;
}

struct Cycle {
  std::vector<long long> vals;  // shuffled allowed values
  long long at(int t) const { return vals[(size_t)t % vals.size()]; }
};

Cycle make_cycle(std::vector<long long> vals, uint64_t seed) {
  Rng rng(seed);
  for (size_t i = vals.size(); i > 1; --i) {
    size_t j = (size_t)rng.uniform_int(0, (long long)i - 1);
    std::swap(vals[i - 1], vals[j]);
  }
  return Cycle{std::move(vals)};
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Equivalent: return "Equivalent";
    case Verdict::NotEquivalent: return "NotEquivalent";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

void run_reference(const ApiSpec& spec, const std::map<std::string, long long>& sizes,
                   std::map<std::string, std::vector<double>>& buffers) {
  if (spec.semantics == "gemm")
    reference_gemm(spec, sizes, buffers);
  else if (spec.semantics == "conv2d")
    reference_conv2d(spec, sizes, buffers);
  else
    throw api::SpecError("no reference semantics for '" + spec.semantics + "'");
}

EquivalenceResult check_equivalence(const minilang::Program& prog,
                                    const analysis::AnalyzedFunction& fn,
                                    const CandidateBinding& binding, const ApiSpec& spec,
                                    const SizeRules& user_rules, const EquivalenceConfig& cfg) {
  EquivalenceResult res;

  // user param -> bound api size param
  std::map<std::string, std::string> user_to_api;
  for (const auto& [a, u] : binding.sizes) user_to_api[u] = a;

  // Per-parameter value cycles. API free params merge the spec range with
  // any rules declared for the bound user param; unbound user params use
  // their own rules directly.
  std::map<std::string, Cycle> api_cycles, user_cycles;
  for (const auto* sp : spec.size_params()) {
    if (spec.derived.count(sp->name)) continue;
    long long lo = kDefaultLo, hi = kDefaultHi, mult = 1;
    bool pow2 = false;
    auto r = spec.ranges.find(sp->name);
    if (r != spec.ranges.end()) lo = r->second.first, hi = r->second.second;
    auto bound = binding.sizes.find(sp->name);
    if (bound != binding.sizes.end()) {
      const std::string& u = bound->second;
      auto ur = user_rules.ranges.find(u);
      if (ur != user_rules.ranges.end()) {
        lo = std::max(lo, ur->second.first);
        hi = std::min(hi, ur->second.second);
      }
      auto um = user_rules.multiple_of.find(u);
      if (um != user_rules.multiple_of.end()) mult = um->second;
      pow2 = user_rules.power_of_two.count(u) > 0;
    }
    auto vals = allowed_values(lo, hi, mult, pow2);
    if (vals.empty()) {
      res.detail = "no admissible sizes for " + sp->name;
      return res;
    }
    api_cycles[sp->name] = make_cycle(std::move(vals), Rng::mix(cfg.seed, "cycle:" + sp->name));
  }
  for (const auto& u : fn.int_params) {
    if (user_to_api.count(u) || user_rules.derived.count(u)) continue;
    long long lo = kDefaultLo, hi = kDefaultHi, mult = 1;
    bool pow2 = false;
    auto ur = user_rules.ranges.find(u);
    if (ur != user_rules.ranges.end()) lo = ur->second.first, hi = ur->second.second;
    auto um = user_rules.multiple_of.find(u);
    if (um != user_rules.multiple_of.end()) mult = um->second;
    pow2 = user_rules.power_of_two.count(u) > 0;
    auto vals = allowed_values(lo, hi, mult, pow2);
    if (vals.empty()) {
      res.detail = "no admissible sizes for user param " + u;
      return res;
    }
    user_cycles[u] = make_cycle(std::move(vals), Rng::mix(cfg.seed, "ucycle:" + u));
  }

  const minilang::FunctionIR* f = prog.find(fn.name);
  if (!f) {
    res.detail = "function '" + fn.name + "' not found";
    return res;
  }

  for (int t = 0; t < cfg.tests; ++t) {
    // ---- draw sizes ----
    std::map<std::string, long long> api_sizes, user_sizes;
    for (const auto& [name, cyc] : api_cycles) api_sizes[name] = cyc.at(t);
    for (const auto& [a, u] : binding.sizes)
      if (api_sizes.count(a)) user_sizes[u] = api_sizes.at(a);
    // user equal groups: members follow the first member's value. Applied
    // before derived sizes so equalized inputs feed the derived rules.
    for (const auto& g : user_rules.equal_groups) {
      if (g.empty()) continue;
      auto head = user_sizes.find(g.front());
      long long hv;
      if (head != user_sizes.end())
        hv = head->second;
      else {
        auto hc = user_cycles.find(g.front());
        if (hc == user_cycles.end()) continue;
        hv = hc->second.at(t);
      }
      for (const auto& m : g) {
        user_sizes[m] = hv;
        auto back = user_to_api.find(m);
        if (back != user_to_api.end()) api_sizes[back->second] = hv;
      }
    }
    // spec derived params, in dependency order
    {
      size_t pending = 0;
      for (const auto& [name, d] : spec.derived)
        if (!api_sizes.count(name)) ++pending;
      while (pending > 0) {
        size_t before = pending;
        for (const auto& [name, d] : spec.derived) {
          if (api_sizes.count(name)) continue;
          bool ready = true;
          long long v = d.constant;
          for (const auto& [coef, term] : d.terms) {
            auto it = api_sizes.find(term);
            if (it == api_sizes.end()) {
              ready = false;
              break;
            }
            v += coef * it->second;
          }
          if (!ready) continue;
          if (d.slack_max > 0)
            v += Rng(Rng::mix(cfg.seed, "slack:" + name + ":" + std::to_string(t)))
                     .uniform_int(0, d.slack_max);
          api_sizes[name] = v;
          --pending;
        }
        if (pending == before) {
          res.detail = "cyclic derived sizes in spec";
          return res;
        }
      }
    }
    for (const auto& [a, u] : binding.sizes) user_sizes[u] = api_sizes.at(a);
    for (const auto& [u, cyc] : user_cycles)
      if (!user_sizes.count(u)) user_sizes[u] = cyc.at(t);
    // user derived rules for still-missing params
    {
      bool grew = true;
      while (grew) {
        grew = false;
        for (const auto& [name, rule] : user_rules.derived) {
          if (user_sizes.count(name)) continue;
          bool ready = true;
          for (const auto& term : rule.terms)
            if (!user_sizes.count(term.second)) ready = false;
          if (!ready) continue;
          user_sizes[name] = api::eval_derived(rule, user_sizes);
          grew = true;
        }
      }
    }
    bool sane = true;
    for (const auto& u : fn.int_params) {
      if (!user_sizes.count(u) || user_sizes.at(u) < 1) sane = false;
    }
    for (const auto& [name, v] : api_sizes)
      if (v < 1) sane = false;
    if (!sane) {
      res.detail = "size draw produced missing or nonpositive values";
      return res;
    }

    // ---- build buffers ----
    auto extent_of = [&](const std::vector<std::string>& dims,
                         const std::map<std::string, long long>& vals) {
      long long e = 1;
      for (const auto& d : dims) e *= vals.at(d);
      return e;
    };

    std::map<std::string, std::vector<double>> api_bufs;
    MemoryImage img;
    img.int_args = user_sizes;

    for (const auto* ap : spec.arrays()) {
      const std::string& uname = binding.arrays.at(ap->name);
      const analysis::ArrayInfo* ua = nullptr;
      for (const auto& a : fn.arrays)
        if (a.name == uname) ua = &a;
      long long ext = extent_of(ap->dims, api_sizes);
      Rng fill(Rng::mix(cfg.seed, "fill:" + ap->name + ":" + std::to_string(t)));
      std::vector<double> buf((size_t)ext);
      const bool f32 = ua && ua->elem == ScalarType::F32;
      for (auto& v : buf) {
        double x = fill.uniform_real(-1.0, 1.0);
        v = f32 ? (double)(float)x : x;
      }
      Region reg;
      reg.elem = f32 ? ScalarType::F32 : ScalarType::F64;
      reg.data = buf;
      img.regions[uname] = std::move(reg);
      api_bufs[ap->name] = std::move(buf);
    }
    for (const auto& ua : fn.arrays) {
      if (img.regions.count(ua.name)) continue;  // bound above
      Region reg;
      reg.elem = ua.elem;
      long long ext = ua.has_dims ? extent_of(ua.dims, user_sizes) : (long long)kScratchLen;
      Rng fill(Rng::mix(cfg.seed, "ufill:" + ua.name + ":" + std::to_string(t)));
      reg.data.resize((size_t)ext);
      for (auto& v : reg.data) {
        double x = fill.uniform_real(-1.0, 1.0);
        v = ua.elem == ScalarType::F32 ? (double)(float)x : x;
      }
      img.regions[ua.name] = std::move(reg);
    }
    {
      Rng frng(Rng::mix(cfg.seed, "flt:" + std::to_string(t)));
      for (const auto& u : fn.float_params) img.float_args[u] = frng.uniform_real(-1.0, 1.0);
    }

    // ---- run both sides ----
    run_reference(spec, api_sizes, api_bufs);

    interp::InstrumentationPolicy pol;  // Plain
    auto out = interp::execute(prog, fn.name, img, pol, cfg.step_limit);
    if (out.status != ExecStatus::Normal) {
      res.verdict = Verdict::Inconclusive;
      res.tests_run = t;
      res.detail = std::string(interp::status_name(out.status)) +
                   (out.fault_msg.empty() ? "" : ": " + out.fault_msg);
      return res;
    }

    // ---- compare bound outputs ----
    for (const auto* ap : spec.arrays()) {
      if (ap->liveness == api::Liveness::LiveIn) continue;
      const std::string& uname = binding.arrays.at(ap->name);
      const auto& got = out.final.regions.at(uname).data;
      const auto& want = api_bufs.at(ap->name);
      const bool f32 = out.final.regions.at(uname).elem == ScalarType::F32;
      const double rel = f32 ? cfg.rel_f32 : cfg.rel_f64;
      const double abs = f32 ? cfg.abs_f32 : cfg.abs_f64;
      for (size_t i = 0; i < want.size(); ++i) {
        double ref = f32 ? (double)(float)want[i] : want[i];
        if (std::fabs(got[i] - ref) > abs + rel * std::fabs(ref)) {
          res.verdict = Verdict::NotEquivalent;
          res.tests_run = t + 1;
          res.cex.sizes = api_sizes;
          res.cex.array = ap->name;
          res.cex.offset = (long long)i;
          res.cex.expected = ref;
          res.cex.actual = got[i];
          return res;
        }
      }
    }
    res.tests_run = t + 1;
  }
  res.verdict = Verdict::Equivalent;
  return res;
}

}  // namespace liftc::equivalence
