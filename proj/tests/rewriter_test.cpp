#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "liftc/rewriter.hpp"

using namespace liftc;

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

fn helper(x: i64) -> i64 {
  return x + 1;
}
)";

api::ApiSpec gemm_spec() { return api::load_api_spec(std::string(SPECS_DIR) + "/gemm_rowmajor.json"); }

matching::CandidateBinding gemm_binding() {
  matching::CandidateBinding b;
  b.arrays = {{"tc_A", "a"}, {"tc_B", "b"}, {"tc_C", "c"}};
  b.sizes = {{"tc_m", "m"}, {"tc_n", "n"}, {"tc_k", "k"}};
  return b;
}

}  // namespace

TEST_CASE("rewrite replaces the body with one dispatch call") {
  auto prog = minilang::parse_program(kGemm);
  auto res = rewriter::rewrite(prog, "gemm", gemm_binding(), gemm_spec());

  const auto* g = res.program.find("gemm");
  REQUIRE(g != nullptr);
  REQUIRE(g->body.size() == 1);
  CHECK(g->body[0]->kind == minilang::Stmt::Kind::CallStmt);

  std::string text = minilang::pretty_print(res.program);
  CHECK(text.find("atc_dispatch_gemm(a, b, c, m, n, k);") != std::string::npos);
  // the local accumulator and loop vars are gone
  CHECK(text.find("acc") == std::string::npos);

  // untouched sibling function, and the output reparses to an equal tree
  CHECK(minilang::equal(*res.program.find("helper"), *prog.find("helper")));
  CHECK(minilang::equal(minilang::parse_program(text), res.program));

  CHECK(res.manifest.function == "gemm");
  CHECK(res.manifest.api == "gemm_rowmajor");
  CHECK(res.manifest.arrays.size() == 3);
  CHECK(res.manifest.sizes.size() == 3);
  CHECK(res.manifest.scalars.empty());
  CHECK(res.manifest.warnings.empty());
}

TEST_CASE("incomplete bindings are rejected") {
  auto prog = minilang::parse_program(kGemm);
  auto binding = gemm_binding();
  binding.sizes.erase("tc_k");
  CHECK_THROWS_AS(rewriter::rewrite(prog, "gemm", binding, gemm_spec()),
                  rewriter::BindingIncomplete);
}

TEST_CASE("rewriting a lifted function is a warned no-op") {
  auto prog = minilang::parse_program(kGemm);
  auto first = rewriter::rewrite(prog, "gemm", gemm_binding(), gemm_spec());
  auto second = rewriter::rewrite(first.program, "gemm", gemm_binding(), gemm_spec());
  CHECK(minilang::equal(second.program, first.program));
  REQUIRE(second.manifest.warnings.size() == 1);
  CHECK(second.manifest.warnings[0].find("already") != std::string::npos);
}

TEST_CASE("faithful lifts verify against the original") {
  auto prog = minilang::parse_program(kGemm);
  auto res = rewriter::rewrite(prog, "gemm", gemm_binding(), gemm_spec());
  auto v = rewriter::verify_rewrite(prog, res.program, "gemm", gemm_binding(), gemm_spec(), {},
                                    7, 10);
  CHECK(v.ok);
  CHECK(v.tests_run == 10);
  CHECK(v.detail.empty());
}

TEST_CASE("verification catches a wrong binding") {
  auto prog = minilang::parse_program(kGemm);
  auto binding = gemm_binding();
  std::swap(binding.arrays["tc_A"], binding.arrays["tc_B"]);
  auto res = rewriter::rewrite(prog, "gemm", binding, gemm_spec());
  auto v = rewriter::verify_rewrite(prog, res.program, "gemm", binding, gemm_spec(), {}, 7, 10);
  CHECK_FALSE(v.ok);
  CHECK(!v.detail.empty());
}

TEST_CASE("routed dispatch consults the profitability model") {
  auto prog = minilang::parse_program(kGemm);
  auto res = rewriter::rewrite(prog, "gemm", gemm_binding(), gemm_spec());

  // volume-thresholded model: tiny sizes sit deep in the host region
  std::vector<profitability::TimingSample> data;
  for (long long m = 2; m <= 10; m += 2)
    for (long long n = 2; n <= 10; n += 2)
      for (long long k = 2; k <= 10; k += 2) {
        const long long v = m * n * k;
        if (v > 150 && v < 600) continue;
        data.push_back({{m, n, k}, 1.0, v >= 600 ? 0.5 : 2.0, v >= 600 ? 1 : 0});
      }
  auto model = profitability::train_svm(data);

  interp::MemoryImage img;
  img.int_args = {{"m", 2}, {"n", 2}, {"k", 2}};
  for (const char* r : {"a", "b", "c"}) {
    interp::Region reg;
    reg.elem = minilang::ScalarType::F64;
    reg.data.assign(16, 1.0);
    img.regions[r] = reg;
  }

  std::vector<std::string> choices;
  auto ctx = rewriter::make_routed_dispatch(gemm_spec(), &model, &choices);
  interp::InstrumentationPolicy policy;
  policy.dispatch = &ctx;
  auto out = interp::execute(res.program, "gemm", img, policy);
  CHECK(out.status == interp::ExecStatus::Normal);
  REQUIRE(choices.size() == 1);
  CHECK(choices[0] == "cpu");

  // the dispatch still computed the product: C = A*B with all ones, k=2
  for (int i = 0; i < 4; ++i) CHECK(out.final.regions.at("c").data[i] == doctest::Approx(2.0));

  std::vector<std::string> defaults;
  auto ctx2 = rewriter::make_routed_dispatch(gemm_spec(), nullptr, &defaults);
  interp::InstrumentationPolicy policy2;
  policy2.dispatch = &ctx2;
  interp::execute(res.program, "gemm", img, policy2);
  REQUIRE(defaults.size() == 1);
  CHECK(defaults[0] == "cpu");
}

TEST_CASE("oracle dispatch rejects malformed calls") {
  const char* bad = R"(
fn gemm(a: *f64, b: *f64, c: *f64, m: i64, n: i64, k: i64) -> void {
  atc_dispatch_gemm(a, b, c, m, n);
}
)";
  auto prog = minilang::parse_program(bad);
  auto ctx = rewriter::make_oracle_dispatch(gemm_spec());
  interp::InstrumentationPolicy policy;
  policy.dispatch = &ctx;
  interp::MemoryImage img;
  img.int_args = {{"m", 2}, {"n", 2}, {"k", 2}};
  for (const char* r : {"a", "b", "c"}) {
    interp::Region reg;
    reg.elem = minilang::ScalarType::F64;
    reg.data.assign(16, 1.0);
    img.regions[r] = reg;
  }
  CHECK_THROWS_WITH_AS(interp::execute(prog, "gemm", img, policy),
                       doctest::Contains("arity"), std::runtime_error);

  // a region too small for the requested extents is caught before computing
  img.int_args["m"] = 10;
  img.int_args["n"] = 10;
  img.int_args["k"] = 10;
  const char* ok = R"(
fn gemm(a: *f64, b: *f64, c: *f64, m: i64, n: i64, k: i64) -> void {
  atc_dispatch_gemm(a, b, c, m, n, k);
}
)";
  auto prog2 = minilang::parse_program(ok);
  CHECK_THROWS_WITH_AS(interp::execute(prog2, "gemm", img, policy),
                       doctest::Contains("elements"), std::runtime_error);
}

TEST_CASE("manifest and program files are written") {
  auto prog = minilang::parse_program(kGemm);
  auto res = rewriter::rewrite(prog, "gemm", gemm_binding(), gemm_spec());
  res.manifest.verdict = "Equivalent";
  res.manifest.class_label = "gemm";
  res.manifest.class_score = 0.9;
  res.manifest.raw_candidates = 36;
  res.manifest.pruned_candidates = 1;
  res.manifest.winner_rank = 0;

  const std::string mpath = "rw_manifest_rt.json";
  const std::string ppath = "rw_lifted_rt.ml";
  rewriter::save_manifest(res.manifest, mpath);
  rewriter::save_program(res.program, ppath);

  std::ifstream min(mpath);
  auto j = nlohmann::json::parse(min);
  CHECK(j.at("function") == "gemm");
  CHECK(j.at("api") == "gemm_rowmajor");
  CHECK(j.at("binding").at("arrays").at("tc_A") == "a");
  CHECK(j.at("binding").at("sizes").size() == 3);
  CHECK(j.at("verdict") == "Equivalent");
  CHECK(j.at("classifier").at("label") == "gemm");
  CHECK(j.at("candidates").at("raw") == 36);
  CHECK(j.at("candidates").at("winner_rank") == 0);

  std::ifstream pin(ppath);
  std::string text((std::istreambuf_iterator<char>(pin)), std::istreambuf_iterator<char>());
  CHECK(minilang::equal(minilang::parse_program(text), res.program));

  std::filesystem::remove(mpath);
  std::filesystem::remove(ppath);
}
