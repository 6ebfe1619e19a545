#include "liftc/matching.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

namespace liftc::matching {

using analysis::AnalyzedFunction;
using analysis::ArrayInfo;
using api::ApiParam;
using api::ApiSpec;

size_t levenshtein(const std::string& a, const std::string& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<size_t> row(m + 1);
  for (size_t j = 0; j <= m; ++j) row[j] = j;
  for (size_t i = 1; i <= n; ++i) {
    size_t diag = row[0];
    row[0] = i;
    for (size_t j = 1; j <= m; ++j) {
      size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      diag = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
    }
  }
  return row[m];
}

std::string normalize_name(const std::string& name, const std::string& affix) {
  std::string s = name;
  if (!affix.empty()) {
    if (s.size() >= affix.size() && s.compare(0, affix.size(), affix) == 0)
      s = s.substr(affix.size());
    else if (s.size() >= affix.size() && s.compare(s.size() - affix.size(), affix.size(), affix) == 0)
      s = s.substr(0, s.size() - affix.size());
  }
  for (auto& c : s) c = (char)std::tolower((unsigned char)c);
  return s;
}

bool dims_match(const std::vector<std::vector<std::string>>& user_dims,
                const std::vector<std::vector<std::string>>& api_dims, int n_expected,
                std::map<std::string, std::string>* size_map_out) {
  if (user_dims.size() != api_dims.size()) return false;
  std::set<std::pair<std::string, std::string>> pairs;  // (user dim, api dim)
  for (size_t i = 0; i < user_dims.size(); ++i) {
    if (user_dims[i].size() != api_dims[i].size()) return false;
    for (size_t d = 0; d < user_dims[i].size(); ++d)
      pairs.insert({user_dims[i][d], api_dims[i][d]});
  }
  if ((int)pairs.size() != n_expected) return false;
  std::map<std::string, std::string> user_to_api, api_to_user;
  for (const auto& [u, a] : pairs) {
    auto ua = user_to_api.emplace(u, a);
    if (!ua.second && ua.first->second != a) return false;
    auto au = api_to_user.emplace(a, u);
    if (!au.second && au.first->second != u) return false;
  }
  if (size_map_out) *size_map_out = std::move(api_to_user);
  return true;
}

namespace {

bool elem_compatible(const std::string& api_elem, minilang::ScalarType user_elem) {
  if (api_elem == "any") return true;
  if (api_elem == "f32") return user_elem == minilang::ScalarType::F32;
  if (api_elem == "f64") return user_elem == minilang::ScalarType::F64;
  return false;
}

// Minimal-total-distance injective assignment of api names onto user names,
// ties resolved toward earlier user parameters. Returns false when there are
// not enough user names.
bool assign_leftovers(const std::vector<std::string>& api_names,
                      const std::vector<std::string>& user_names, const std::string& affix,
                      std::map<std::string, std::string>& out, size_t& score) {
  if (api_names.empty()) return true;
  if (api_names.size() > user_names.size()) return false;

  std::vector<std::vector<size_t>> cost(api_names.size(),
                                        std::vector<size_t>(user_names.size()));
  for (size_t i = 0; i < api_names.size(); ++i)
    for (size_t j = 0; j < user_names.size(); ++j)
      cost[i][j] =
          levenshtein(normalize_name(api_names[i], affix), normalize_name(user_names[j], affix));

  std::vector<int> pick(api_names.size(), -1), best_pick;
  std::vector<bool> used(user_names.size(), false);
  size_t best = SIZE_MAX;
  // exhaustive search; leftover sets are tiny. Lexicographic enumeration over
  // user indices makes the first minimum the parameter-order tie-break.
  std::function<void(size_t, size_t)> rec = [&](size_t i, size_t acc) {
    if (acc >= best) return;  // first minimum wins, so strict prune keeps ties
    if (i == api_names.size()) {
      best = acc;
      best_pick = pick;
      return;
    }
    for (size_t j = 0; j < user_names.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      pick[i] = (int)j;
      rec(i + 1, acc + cost[i][j]);
      used[j] = false;
    }
  };
  rec(0, 0);
  if (best == SIZE_MAX) return false;
  for (size_t i = 0; i < api_names.size(); ++i) out[api_names[i]] = user_names[best_pick[i]];
  score += best;
  return true;
}

}  // namespace

std::vector<CandidateBinding> find_matchings(const AnalyzedFunction& fn, const ApiSpec& spec) {
  std::vector<const ApiParam*> api_arrays = spec.arrays();
  const int n_expected = spec.dims_referenced_count();

  // first output array on each side, for output alignment
  int api_first_out = -1;
  for (size_t i = 0; i < api_arrays.size(); ++i)
    if (api_arrays[i]->liveness != api::Liveness::LiveIn && api_first_out < 0)
      api_first_out = (int)i;
  int user_first_out = -1;
  for (size_t i = 0; i < fn.arrays.size(); ++i)
    if (fn.arrays[i].liveness != api::Liveness::LiveIn && user_first_out < 0)
      user_first_out = (int)i;

  std::vector<CandidateBinding> found;
  if (api_arrays.size() > fn.arrays.size()) return found;

  // odometer over injective assignments: sel[i] = user array index for api array i
  std::vector<int> sel(api_arrays.size(), -1);
  std::vector<bool> used(fn.arrays.size(), false);
  int provenance = 0;

  std::function<void(size_t)> rec = [&](size_t i) {
    if (i == api_arrays.size()) {
      std::vector<std::vector<std::string>> udims, adims;
      for (size_t q = 0; q < api_arrays.size(); ++q) {
        udims.push_back(fn.arrays[sel[q]].dims);
        adims.push_back(api_arrays[q]->dims);
      }
      std::map<std::string, std::string> size_map;
      if (!dims_match(udims, adims, n_expected, &size_map)) return;

      CandidateBinding cb;
      cb.provenance = provenance++;
      for (size_t q = 0; q < api_arrays.size(); ++q)
        cb.arrays[api_arrays[q]->name] = fn.arrays[sel[q]].name;
      cb.sizes = size_map;

      // leftover API size params bind to leftover user ints lexically
      std::set<std::string> bound_user;
      for (const auto& [a, u] : size_map) bound_user.insert(u);
      std::vector<std::string> api_left, user_left;
      for (const auto* sp : spec.size_params())
        if (!cb.sizes.count(sp->name)) api_left.push_back(sp->name);
      for (const auto& u : fn.int_params)
        if (!bound_user.count(u)) user_left.push_back(u);

      size_t score = 0;
      for (const auto& [a, u] : cb.arrays)
        score += levenshtein(normalize_name(a, spec.affix), normalize_name(u, spec.affix));
      for (const auto& [a, u] : cb.sizes)
        score += levenshtein(normalize_name(a, spec.affix), normalize_name(u, spec.affix));
      if (!assign_leftovers(api_left, user_left, spec.affix, cb.sizes, score)) return;

      std::vector<std::string> api_fs;
      for (const auto* p : spec.float_scalars()) api_fs.push_back(p->name);
      if (!assign_leftovers(api_fs, fn.float_params, spec.affix, cb.scalars, score)) return;

      cb.lex_score = score;
      found.push_back(std::move(cb));
      return;
    }
    for (size_t j = 0; j < fn.arrays.size(); ++j) {
      if (used[j]) continue;
      const ArrayInfo& ua = fn.arrays[j];
      if (ua.liveness != api_arrays[i]->liveness) continue;
      if (!elem_compatible(api_arrays[i]->element_type, ua.elem)) continue;
      if (!ua.has_dims) continue;
      if ((int)i == api_first_out && (int)j != user_first_out) continue;
      if ((int)i != api_first_out && user_first_out >= 0 && (int)j == user_first_out) continue;
      used[j] = true;
      sel[i] = (int)j;
      rec(i + 1);
      used[j] = false;
    }
  };
  rec(0);
  return found;
}

RankResult rank_candidates(std::vector<CandidateBinding> cands, size_t cap) {
  std::sort(cands.begin(), cands.end(), [](const CandidateBinding& a, const CandidateBinding& b) {
    if (a.lex_score != b.lex_score) return a.lex_score < b.lex_score;
    return a.provenance < b.provenance;
  });
  RankResult r;
  r.truncated = cands.size() > cap;
  if (r.truncated) cands.resize(cap);
  r.ranked = std::move(cands);
  return r;
}

unsigned long long raw_candidate_count(size_t user_ptrs, size_t api_arrays, size_t user_ints,
                                       size_t api_sizes) {
  auto perm = [](size_t n, size_t k) -> unsigned long long {
    if (k > n) return 0;
    unsigned long long p = 1;
    for (size_t i = 0; i < k; ++i) p *= (unsigned long long)(n - i);
    return p;
  };
  // Size maps are induced functionally, so the unpruned space is every map
  // from API size params into user ints, not injective assignments; this
  // keeps the count an upper bound even when user ints repeat across dims.
  unsigned long long size_maps = 1;
  for (size_t i = 0; i < api_sizes; ++i) size_maps *= (unsigned long long)user_ints;
  return perm(user_ptrs, api_arrays) * size_maps;
}

}  // namespace liftc::matching
