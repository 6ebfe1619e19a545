#include <doctest.h>

#include "liftc/analysis.hpp"

using namespace liftc;
using api::Liveness;
using api::SizeRules;
using api::UserDerived;

namespace {

const char* kGemm = R"(
fn gemm(a: *f64, b: *f64, c: *f64, m: i64, n: i64, k: i64) -> void {
  for i = 0 to m {
    for j = 0 to n {
      let acc: f64 = 0.0;
      for p = 0 to k {
        acc = acc + a[i * k + p] * b[p * n + j];
      }
      c[i * n + j] = acc;
    }
  }
}
)";

minilang::Program parse(const char* src) { return minilang::parse_program(src); }

std::map<std::string, long long> probes(long long m, long long n, long long k) {
  return {{"m", m}, {"n", n}, {"k", k}};
}

}  // namespace

TEST_CASE("candidate enumeration is ordered by product then position") {
  auto cands = analysis::enumerate_dim_candidates({"m", "n", "k"}, 2, probes(7, 11, 13));
  REQUIRE(cands.size() == 12);  // 3 singles + 9 pairs
  using V = std::vector<std::string>;
  CHECK(cands[0] == V{"m"});            // 7
  CHECK(cands[1] == V{"n"});            // 11
  CHECK(cands[2] == V{"k"});            // 13
  CHECK(cands[3] == V{"m", "m"});       // 49
  CHECK(cands[4] == V{"m", "n"});       // 77, position tie-break
  CHECK(cands[5] == V{"n", "m"});       // 77
  CHECK(cands[6] == V{"m", "k"});       // 91
  CHECK(cands[7] == V{"k", "m"});       // 91
  CHECK(cands[8] == V{"n", "n"});       // 121
  CHECK(cands[9] == V{"n", "k"});       // 143
  CHECK(cands[10] == V{"k", "n"});      // 143
  CHECK(cands[11] == V{"k", "k"});      // 169
}

TEST_CASE("gemm dims detect as the minimal covering tuples") {
  auto prog = parse(kGemm);
  const auto& f = prog.functions[0];
  std::vector<std::string> ints = {"m", "n", "k"};

  auto a = analysis::detect_dims(prog, f, "a", ints, probes(7, 11, 13), 2);
  CHECK(a.dims == std::vector<std::string>{"m", "k"});
  CHECK(a.slow_dim == "m");

  auto b = analysis::detect_dims(prog, f, "b", ints, probes(7, 11, 13), 2);
  CHECK(b.dims == std::vector<std::string>{"n", "k"});

  auto c = analysis::detect_dims(prog, f, "c", ints, probes(7, 11, 13), 2);
  CHECK(c.dims == std::vector<std::string>{"m", "n"});
  CHECK(c.slow_dim == "m");
}

TEST_CASE("dims agree across both probe sets") {
  auto prog = parse(kGemm);
  const auto& f = prog.functions[0];
  std::vector<std::string> ints = {"m", "n", "k"};
  for (const auto& arr : {"a", "b", "c"}) {
    auto d1 = analysis::detect_dims(prog, f, arr, ints, probes(7, 11, 13), 2);
    auto d2 = analysis::detect_dims(prog, f, arr, ints, probes(5, 9, 17), 2);
    CHECK(d1.dims == d2.dims);
  }
}

TEST_CASE("rank cap below the access rank raises NoDimsFound") {
  auto prog = parse(kGemm);
  CHECK_THROWS_AS(
      analysis::detect_dims(prog, prog.functions[0], "a", {"m", "n", "k"}, probes(7, 11, 13), 1),
      analysis::NoDimsFound);
}

TEST_CASE("negative offsets raise NoDimsFound") {
  auto prog = parse(R"(
fn shifted(x: *f64, n: i64) -> void {
  for i = 0 to n {
    x[i - 5] = 1.0;
  }
}
)");
  CHECK_THROWS_AS(analysis::detect_dims(prog, prog.functions[0], "x", {"n"}, {{"n", 7}}, 2),
                  analysis::NoDimsFound);
}

TEST_CASE("an untouched array gets the smallest candidate") {
  auto prog = parse(R"(
fn idle(x: *f64, y: *f64, n: i64, m: i64) -> void {
  for i = 0 to n {
    y[i] = 1.0;
  }
}
)");
  auto d = analysis::detect_dims(prog, prog.functions[0], "x", {"n", "m"}, {{"n", 7}, {"m", 5}}, 2);
  CHECK(d.dims == std::vector<std::string>{"m"});  // product 5 is minimal
}

TEST_CASE("probe value preconditions are enforced") {
  auto prog = parse(kGemm);
  const auto& f = prog.functions[0];
  CHECK_THROWS_AS(analysis::detect_dims(prog, f, "a", {"m", "n", "k"}, probes(4, 11, 13), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(analysis::detect_dims(prog, f, "a", {"m", "n", "k"}, probes(7, 7, 13), 2),
                  std::invalid_argument);
}

TEST_CASE("gemm liveness: inputs in, overwritten output out, scalars in") {
  auto prog = parse(kGemm);
  auto rep = analysis::detect_liveness(prog, prog.functions[0], 42);
  CHECK(rep.classes.at("a") == Liveness::LiveIn);
  CHECK(rep.classes.at("b") == Liveness::LiveIn);
  CHECK(rep.classes.at("c") == Liveness::LiveOut);
  CHECK(rep.classes.at("m") == Liveness::LiveIn);
  CHECK(rep.classes.at("n") == Liveness::LiveIn);
  CHECK(rep.classes.at("k") == Liveness::LiveIn);
}

TEST_CASE("accumulating output classifies as inout") {
  auto prog = parse(R"(
fn gemm_acc(a: *f64, b: *f64, c: *f64, m: i64, n: i64, k: i64) -> void {
  for i = 0 to m {
    for j = 0 to n {
      for p = 0 to k {
        c[i * n + j] = c[i * n + j] + a[i * k + p] * b[p * n + j];
      }
    }
  }
}
)");
  auto rep = analysis::detect_liveness(prog, prog.functions[0], 42);
  CHECK(rep.classes.at("c") == Liveness::LiveInOut);
}

TEST_CASE("copy and in-place scale classify as expected") {
  auto prog = parse(R"(
fn copy(dst: *f64, src: *f64, n: i64) -> void {
  for i = 0 to n {
    dst[i] = src[i];
  }
}
fn scale(x: *f32, n: i64) -> void {
  for i = 0 to n {
    x[i] = x[i] * 2.0;
  }
}
)");
  auto rep = analysis::detect_liveness(prog, *prog.find("copy"), 7);
  CHECK(rep.classes.at("dst") == Liveness::LiveOut);
  CHECK(rep.classes.at("src") == Liveness::LiveIn);
  auto rep2 = analysis::detect_liveness(prog, *prog.find("scale"), 7);
  CHECK(rep2.classes.at("x") == Liveness::LiveInOut);
}

TEST_CASE("liveness is stable across seeds") {
  auto prog = parse(kGemm);
  auto r1 = analysis::detect_liveness(prog, prog.functions[0], 1);
  auto r2 = analysis::detect_liveness(prog, prog.functions[0], 2);
  CHECK(r1.classes == r2.classes);
}

TEST_CASE("liveness honors declared size relations") {
  auto prog = parse(R"(
fn shrink(src: *f64, dst: *f64, h: i64, r: i64, oh: i64) -> void {
  for y = 0 to oh {
    let acc: f64 = 0.0;
    for u = 0 to r {
      acc = acc + src[y + u];
    }
    dst[y] = acc;
  }
}
)");
  SizeRules rules;
  rules.ranges["h"] = {5, 9};
  rules.ranges["r"] = {2, 4};
  UserDerived oh;
  oh.terms = {{1, "h"}, {-1, "r"}};
  oh.constant = 1;
  rules.derived["oh"] = oh;
  auto rep = analysis::detect_liveness(prog, prog.functions[0], 3, rules);
  CHECK(rep.classes.at("src") == Liveness::LiveIn);
  CHECK(rep.classes.at("dst") == Liveness::LiveOut);
}

TEST_CASE("a faulting function is inconclusive") {
  auto prog = parse(R"(
fn bad(x: *f64, n: i64) -> void {
  let z: i64 = 0;
  x[0] = to_f64(n / z);
}
)");
  CHECK_THROWS_AS(analysis::detect_liveness(prog, prog.functions[0], 5),
                  analysis::AnalysisInconclusive);
}

TEST_CASE("probe assignment pins the two default prefixes") {
  SizeRules none;
  auto v0 = analysis::assign_probe_values({"m", "n", "k"}, none, {}, 0);
  CHECK(v0 == std::map<std::string, long long>{{"m", 7}, {"n", 11}, {"k", 13}});
  auto v1 = analysis::assign_probe_values({"m", "n", "k"}, none, {}, 1);
  CHECK(v1 == std::map<std::string, long long>{{"m", 5}, {"n", 9}, {"k", 17}});
}

TEST_CASE("probe assignment honors derived rules") {
  SizeRules rules;
  UserDerived lda;
  lda.terms = {{1, "k"}};
  lda.constant = 2;
  rules.derived["lda"] = lda;
  auto v = analysis::assign_probe_values({"m", "n", "k", "lda"}, rules, {}, 0);
  CHECK(v.at("lda") == v.at("k") + 2);
  std::set<long long> distinct(
      {v.at("m"), v.at("n"), v.at("k"), v.at("lda")});
  CHECK(distinct.size() == 4);
  for (auto& [name, val] : v) CHECK(val >= 5);
}

TEST_CASE("probe assignment backtracks around shrinking rules") {
  // oh = h - r + 1 must stay >= 5 and distinct, forcing r well below h
  SizeRules rules;
  UserDerived oh;
  oh.terms = {{1, "h"}, {-1, "r"}};
  oh.constant = 1;
  rules.derived["oh"] = oh;
  auto v = analysis::assign_probe_values({"h", "r", "oh"}, rules, {}, 0);
  CHECK(v.at("oh") == v.at("h") - v.at("r") + 1);
  CHECK(v.at("oh") >= 5);
  CHECK(v.at("r") >= 5);
}

TEST_CASE("explicit probe maps are validated and returned") {
  SizeRules rules;
  UserDerived lda;
  lda.terms = {{1, "k"}};
  lda.constant = 2;
  rules.derived["lda"] = lda;
  std::vector<std::map<std::string, long long>> given = {
      {{"m", 7}, {"n", 11}, {"k", 13}, {"lda", 15}},
      {{"m", 5}, {"n", 9}, {"k", 17}, {"lda", 19}},
  };
  auto v0 = analysis::assign_probe_values({"m", "n", "k", "lda"}, rules, given, 0);
  CHECK(v0 == given[0]);
  auto v1 = analysis::assign_probe_values({"m", "n", "k", "lda"}, rules, given, 1);
  CHECK(v1 == given[1]);

  std::vector<std::map<std::string, long long>> bad = {
      {{"m", 7}, {"n", 11}, {"k", 13}, {"lda", 16}}};  // contradicts lda = k + 2
  CHECK_THROWS_AS(analysis::assign_probe_values({"m", "n", "k", "lda"}, rules, bad, 0),
                  analysis::AnalysisInconclusive);
}
