#pragma once

#include <map>
#include <string>
#include <vector>

#include "liftc/analysis.hpp"
#include "liftc/api_spec.hpp"

// Signature matching: pair a user function's pointer and scalar parameters
// with an accelerator entry point's parameters. Array pairings are proposed
// as injective assignments of API arrays onto user arrays, then filtered by
// exact liveness-class equality, element-type compatibility, dim-tuple
// consistency and output alignment. Size params fall out of the dim pairing;
// API params left over bind to leftover user scalars by minimal total edit
// distance over normalized names.

namespace liftc::matching {

size_t levenshtein(const std::string& a, const std::string& b);

// Lowercases and strips the spec affix (prefix or suffix).
std::string normalize_name(const std::string& name, const std::string& affix);

// One complete correspondence between a user function and an API signature.
struct CandidateBinding {
  std::map<std::string, std::string> arrays;   // api array -> user pointer
  std::map<std::string, std::string> sizes;    // api size param -> user int param
  std::map<std::string, std::string> scalars;  // api float scalar -> user float param
  size_t lex_score = 0;  // sum of edit distances over all matched pairs
  int provenance = 0;    // discovery order within find_matchings
};

// Dim-tuple consistency for a proposed array pairing. user_dims[i] are the
// detected dims of the user array paired with api_dims[i]. Accumulates the
// positional (user dim, api dim) pairs; the pairing is consistent when the
// distinct pairs number exactly n_expected and the relation is functional in
// both directions. On success *size_map_out (if given) receives the api ->
// user size correspondence.
bool dims_match(const std::vector<std::vector<std::string>>& user_dims,
                const std::vector<std::vector<std::string>>& api_dims, int n_expected,
                std::map<std::string, std::string>* size_map_out = nullptr);

std::vector<CandidateBinding> find_matchings(const analysis::AnalyzedFunction& fn,
                                             const api::ApiSpec& spec);

struct RankResult {
  std::vector<CandidateBinding> ranked;
  bool truncated = false;
};

// Sorts by ascending lex_score, ties by provenance, keeps at most cap.
RankResult rank_candidates(std::vector<CandidateBinding> cands, size_t cap);

// Unpruned search-space size: ordered injective assignments of API arrays
// onto user pointers times all functional maps of API size params onto user
// ints (sizes bind functionally, so repeats are part of the space).
unsigned long long raw_candidate_count(size_t user_ptrs, size_t api_arrays, size_t user_ints,
                                       size_t api_sizes);

}  // namespace liftc::matching
