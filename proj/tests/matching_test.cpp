#include <doctest.h>

#include "liftc/matching.hpp"

using namespace liftc;
using analysis::AnalyzedFunction;
using analysis::ArrayInfo;
using api::Liveness;
using matching::CandidateBinding;

namespace {

ArrayInfo arr(const std::string& name, Liveness lv, std::vector<std::string> dims) {
  ArrayInfo a;
  a.name = name;
  a.liveness = lv;
  a.has_dims = true;
  a.dims = std::move(dims);
  return a;
}

AnalyzedFunction gemm_like() {
  AnalyzedFunction fn;
  fn.name = "gemm";
  fn.arrays = {arr("a", Liveness::LiveIn, {"m", "k"}), arr("b", Liveness::LiveIn, {"n", "k"}),
               arr("c", Liveness::LiveOut, {"m", "n"})};
  fn.int_params = {"m", "n", "k"};
  return fn;
}

api::ApiSpec rowmajor_spec() { return api::load_api_spec(std::string(SPECS_DIR) + "/gemm_rowmajor.json"); }

}  // namespace

TEST_CASE("levenshtein distance") {
  CHECK(matching::levenshtein("kitten", "sitting") == 3);
  CHECK(matching::levenshtein("", "abc") == 3);
  CHECK(matching::levenshtein("abc", "") == 3);
  CHECK(matching::levenshtein("same", "same") == 0);
  CHECK(matching::levenshtein("flaw", "lawn") == 2);
  CHECK(matching::levenshtein("a", "b") == matching::levenshtein("b", "a"));
}

TEST_CASE("name normalization strips the affix and case") {
  CHECK(matching::normalize_name("tc_A", "tc_") == "a");
  CHECK(matching::normalize_name("B", "tc_") == "b");
  CHECK(matching::normalize_name("LDA", "") == "lda");
  CHECK(matching::normalize_name("buf_tc_", "tc_") == "buf_");
}

TEST_CASE("dims_match accepts the aligned pairing and rejects a swap") {
  std::vector<std::vector<std::string>> api = {{"tc_m", "tc_k"}, {"tc_n", "tc_k"}, {"tc_m", "tc_n"}};

  std::map<std::string, std::string> size_map;
  std::vector<std::vector<std::string>> user_ok = {{"m", "k"}, {"n", "k"}, {"m", "n"}};
  CHECK(matching::dims_match(user_ok, api, 3, &size_map));
  CHECK(size_map == std::map<std::string, std::string>{
                        {"tc_m", "m"}, {"tc_n", "n"}, {"tc_k", "k"}});

  // a and b swapped: the pair set grows past n and loses functionality
  std::vector<std::vector<std::string>> user_swap = {{"n", "k"}, {"m", "k"}, {"m", "n"}};
  CHECK_FALSE(matching::dims_match(user_swap, api, 3));

  // rank mismatch
  std::vector<std::vector<std::string>> user_rank = {{"m"}, {"n", "k"}, {"m", "n"}};
  CHECK_FALSE(matching::dims_match(user_rank, api, 3));
}

TEST_CASE("gemm signature yields exactly one binding") {
  auto spec = rowmajor_spec();
  auto cands = matching::find_matchings(gemm_like(), spec);
  REQUIRE(cands.size() == 1);
  const auto& cb = cands[0];
  CHECK(cb.arrays == std::map<std::string, std::string>{
                         {"tc_A", "a"}, {"tc_B", "b"}, {"tc_C", "c"}});
  CHECK(cb.sizes == std::map<std::string, std::string>{
                        {"tc_m", "m"}, {"tc_n", "n"}, {"tc_k", "k"}});
  CHECK(cb.lex_score == 0);
}

TEST_CASE("liveness mismatch filters the accumulate shape out") {
  auto fn = gemm_like();
  fn.arrays[2].liveness = Liveness::LiveInOut;  // c reads its own old value
  CHECK(matching::find_matchings(fn, rowmajor_spec()).empty());
}

TEST_CASE("arrays without detected dims cannot pair") {
  auto fn = gemm_like();
  fn.arrays[1].has_dims = false;
  CHECK(matching::find_matchings(fn, rowmajor_spec()).empty());
}

TEST_CASE("output alignment keeps the first outputs together") {
  // two structurally identical outputs; only the order-respecting pairing
  // survives
  api::ApiSpec spec = api::parse_api_spec(R"({
    "name": "twin", "affix": "tc_", "layout": "rowmajor", "semantics": "gemm",
    "params": [
      {"name": "tc_P", "kind": "array", "liveness": "liveout", "dims": ["tc_m"], "role": "c"},
      {"name": "tc_Q", "kind": "array", "liveness": "liveout", "dims": ["tc_m"], "role": "c2"},
      {"name": "tc_m", "kind": "int", "liveness": "livein", "role": "m"}
    ]
  })");
  AnalyzedFunction fn;
  fn.name = "twin";
  fn.arrays = {arr("u", Liveness::LiveOut, {"m"}), arr("v", Liveness::LiveOut, {"m"})};
  fn.int_params = {"m"};
  auto cands = matching::find_matchings(fn, spec);
  REQUIRE(cands.size() == 1);
  CHECK(cands[0].arrays.at("tc_P") == "u");
  CHECK(cands[0].arrays.at("tc_Q") == "v");
}

TEST_CASE("leftover size params bind lexically") {
  auto spec = api::load_api_spec(std::string(SPECS_DIR) + "/gemm_rowmajor_ld.json");
  AnalyzedFunction fn;
  fn.name = "gemm_lda";
  fn.arrays = {arr("a", Liveness::LiveIn, {"m", "lda"}), arr("b", Liveness::LiveIn, {"k", "ldb"}),
               arr("c", Liveness::LiveOut, {"m", "ldc"})};
  fn.int_params = {"m", "n", "k", "lda", "ldb", "ldc"};
  auto cands = matching::find_matchings(fn, spec);
  REQUIRE(cands.size() == 1);
  CHECK(cands[0].sizes == std::map<std::string, std::string>{{"tc_m", "m"},
                                                             {"tc_n", "n"},
                                                             {"tc_k", "k"},
                                                             {"tc_lda", "lda"},
                                                             {"tc_ldb", "ldb"},
                                                             {"tc_ldc", "ldc"}});
}

TEST_CASE("candidates without enough user ints for the api sizes are dropped") {
  auto spec = api::load_api_spec(std::string(SPECS_DIR) + "/gemm_rowmajor_ld.json");
  AnalyzedFunction fn;
  fn.name = "gemm_lda_nofree";
  fn.arrays = {arr("a", Liveness::LiveIn, {"m", "lda"}), arr("b", Liveness::LiveIn, {"k", "ldb"}),
               arr("c", Liveness::LiveOut, {"m", "ldc"})};
  // tc_n stays unbound: the dims cover five size params and no free int is left
  fn.int_params = {"m", "k", "lda", "ldb", "ldc"};
  CHECK(matching::find_matchings(fn, spec).empty());
}

TEST_CASE("ranking sorts by score then provenance and truncates") {
  std::vector<CandidateBinding> cands(4);
  cands[0].lex_score = 7;
  cands[0].provenance = 0;
  cands[1].lex_score = 0;
  cands[1].provenance = 1;
  cands[2].lex_score = 3;
  cands[2].provenance = 2;
  cands[3].lex_score = 3;
  cands[3].provenance = 3;
  auto full = matching::rank_candidates(cands, 100);
  CHECK_FALSE(full.truncated);
  REQUIRE(full.ranked.size() == 4);
  CHECK(full.ranked[0].provenance == 1);
  CHECK(full.ranked[1].provenance == 2);
  CHECK(full.ranked[2].provenance == 3);
  CHECK(full.ranked[3].provenance == 0);

  auto cut = matching::rank_candidates(cands, 2);
  CHECK(cut.truncated);
  CHECK(cut.ranked.size() == 2);
}

TEST_CASE("raw candidate count covers array permutations times size maps") {
  CHECK(matching::raw_candidate_count(3, 3, 3, 3) == 6 * 27);
  CHECK(matching::raw_candidate_count(4, 3, 2, 2) == 24 * 4);
  CHECK(matching::raw_candidate_count(2, 3, 5, 1) == 0);  // too few pointers
  CHECK(matching::raw_candidate_count(6, 3, 6, 3) == 120 * 216);
  // one shared size var still spans the functional map space
  CHECK(matching::raw_candidate_count(12, 3, 1, 3) == 1320);
}
