#include <doctest.h>

#include "liftc/interp.hpp"

using namespace liftc::minilang;
using namespace liftc::interp;

namespace {

const char* kGemm = R"(
fn gemm(a: *f64, b: *f64, c: *f64, m: i64, n: i64, k: i64) -> void {
  for i = 0 to m {
    for j = 0 to n {
      let acc: f64 = 0.0;
      for p = 0 to k {
        acc += a[i * k + p] * b[p * n + j];
      }
      c[i * n + j] = acc;
    }
  }
}
)";

MemoryImage gemm_image_2x2() {
  MemoryImage img;
  img.regions["a"] = {ScalarType::F64, {1, 2, 3, 4}};
  img.regions["b"] = {ScalarType::F64, {5, 6, 7, 8}};
  img.regions["c"] = {ScalarType::F64, {0, 0, 0, 0}};
  img.int_args = {{"m", 2}, {"n", 2}, {"k", 2}};
  return img;
}

}  // namespace

TEST_CASE("2x2 matrix product") {
  Program p = parse_program(kGemm);
  InstrumentationPolicy plain;
  ExecutionOutcome out = execute(p, "gemm", gemm_image_2x2(), plain);
  REQUIRE(out.status == ExecStatus::Normal);
  const auto& c = out.final.regions.at("c").data;
  CHECK(c == std::vector<double>{19, 22, 43, 50});
  CHECK(out.steps > 0);
}

TEST_CASE("plain mode faults on out-of-bounds access") {
  Program p = parse_program(kGemm);
  MemoryImage img = gemm_image_2x2();
  img.int_args["m"] = 3;  // reads a[4] on the third row
  InstrumentationPolicy plain;
  ExecutionOutcome out = execute(p, "gemm", img, plain);
  CHECK(out.status == ExecStatus::RuntimeFault);
  CHECK(out.final.regions.empty());
}

TEST_CASE("write tracking records stored offsets only") {
  Program p = parse_program(kGemm);
  InstrumentationPolicy plain;
  plain.track_writes = true;
  ExecutionOutcome out = execute(p, "gemm", gemm_image_2x2(), plain);
  REQUIRE(out.status == ExecStatus::Normal);
  const auto& wc = out.writes.at("c");
  CHECK(wc == std::vector<bool>{true, true, true, true});
  const auto& wa = out.writes.at("a");
  CHECK(wa == std::vector<bool>{false, false, false, false});
}

TEST_CASE("dim probe accepts the true extent and rejects short ones") {
  Program p = parse_program(kGemm);
  MemoryImage img;  // no regions at all
  img.int_args = {{"m", 3}, {"n", 5}, {"k", 7}};

  InstrumentationPolicy probe;
  probe.mode = ExecMode::DimProbe;
  probe.target = "a";
  probe.target_extent = 21;
  CHECK(execute(p, "gemm", img, probe).status == ExecStatus::Normal);

  probe.target_extent = 20;
  CHECK(execute(p, "gemm", img, probe).status == ExecStatus::OutOfBounds);

  probe.target = "c";
  probe.target_extent = 15;
  CHECK(execute(p, "gemm", img, probe).status == ExecStatus::Normal);
  probe.target_extent = 14;
  CHECK(execute(p, "gemm", img, probe).status == ExecStatus::OutOfBounds);
}

TEST_CASE("dim probe records the target access trace") {
  Program p = parse_program(
      "fn f(x: *f64, n: i64) -> void {\n"
      "  for i = 0 to n { x[i] = x[i] + 1.0; }\n"
      "}");
  MemoryImage img;
  img.int_args = {{"n", 4}};
  InstrumentationPolicy probe;
  probe.mode = ExecMode::DimProbe;
  probe.target = "x";
  probe.target_extent = 4;
  probe.record_trace = true;
  ExecutionOutcome out = execute(p, "f", img, probe);
  REQUIRE(out.status == ExecStatus::Normal);
  // load then store per iteration
  CHECK(out.trace == std::vector<long long>{0, 0, 1, 1, 2, 2, 3, 3});
}

TEST_CASE("step limit ends runaway loops") {
  Program p = parse_program(
      "fn f(n: i64) -> void {\n"
      "  let i: i64 = 0;\n"
      "  while i < n || 1 { i = i + 1; }\n"
      "}");
  MemoryImage img;
  img.int_args = {{"n", 1}};
  InstrumentationPolicy plain;
  ExecutionOutcome out = execute(p, "f", img, plain, 1000);
  CHECK(out.status == ExecStatus::StepLimit);
  CHECK(out.steps >= 1000);
}

TEST_CASE("division by zero faults") {
  Program p = parse_program("fn f(n: i64) -> i64 { return 4 / n; }");
  MemoryImage img;
  img.int_args = {{"n", 0}};
  InstrumentationPolicy plain;
  CHECK(execute(p, "f", img, plain).status == ExecStatus::RuntimeFault);
  Program q = parse_program("fn f(x: f64) -> f64 { return 4.0 / x; }");
  MemoryImage img2;
  img2.float_args = {{"x", 0.0}};
  CHECK(execute(q, "f", img2, plain).status == ExecStatus::RuntimeFault);
}

TEST_CASE("f32 regions and scalars round on store") {
  Program p = parse_program(
      "fn f(x: *f32) -> void {\n"
      "  let t: f32 = 0.1;\n"
      "  x[0] = t;\n"
      "}");
  MemoryImage img;
  img.regions["x"] = {ScalarType::F32, {0.0}};
  InstrumentationPolicy plain;
  ExecutionOutcome out = execute(p, "f", img, plain);
  REQUIRE(out.status == ExecStatus::Normal);
  CHECK(out.final.regions.at("x").data[0] == (double)(float)0.1);
  CHECK(out.final.regions.at("x").data[0] != 0.1);
}

TEST_CASE("region identity flows through calls") {
  const char* src = R"(
fn scale(p: *f64, n: i64) -> void {
  for i = 0 to n { p[i] = p[i] * 2.0; }
}
fn top(buf: *f64, n: i64) -> void {
  scale(buf, n);
  scale(buf, n);
}
)";
  Program p = parse_program(src);
  MemoryImage img;
  img.regions["buf"] = {ScalarType::F64, {1, 2}};
  img.int_args = {{"n", 2}};
  InstrumentationPolicy plain;
  plain.track_writes = true;
  ExecutionOutcome out = execute(p, "top", img, plain);
  REQUIRE(out.status == ExecStatus::Normal);
  CHECK(out.final.regions.at("buf").data == std::vector<double>{4, 8});
  CHECK(out.writes.at("buf") == std::vector<bool>{true, true});
}

TEST_CASE("recursion works up to the depth cap") {
  Program p = parse_program(
      "fn fib(n: i64) -> i64 {\n"
      "  if n < 2 { return n; }\n"
      "  return fib(n - 1) + fib(n - 2);\n"
      "}");
  MemoryImage img;
  img.int_args = {{"n", 10}};
  InstrumentationPolicy plain;
  ExecutionOutcome out = execute(p, "fib", img, plain);
  REQUIRE(out.status == ExecStatus::Normal);
  CHECK(out.has_ret);
  CHECK(out.ret_is_int);
  CHECK(out.ret_int == 55);

  Program deep = parse_program(
      "fn down(n: i64) -> i64 {\n"
      "  if n <= 0 { return 0; }\n"
      "  return down(n - 1);\n"
      "}");
  MemoryImage img2;
  img2.int_args = {{"n", 5000}};
  CHECK(execute(deep, "down", img2, plain).status == ExecStatus::RuntimeFault);
}

TEST_CASE("builtins evaluate") {
  Program p = parse_program(
      "fn f(a: i64, b: i64, x: f64) -> f64 {\n"
      "  let lo: i64 = min(a, b);\n"
      "  let hi: i64 = max(a, b);\n"
      "  let t: i64 = to_i64(x);\n"
      "  return to_f64(lo + hi + t) + fabs(0.0 - x) + sqrt(4.0);\n"
      "}");
  MemoryImage img;
  img.int_args = {{"a", 3}, {"b", 7}, {"x", 0}};
  img.float_args = {{"x", 2.5}};
  InstrumentationPolicy plain;
  ExecutionOutcome out = execute(p, "f", img, plain);
  REQUIRE(out.status == ExecStatus::Normal);
  // 3 + 7 + 2 = 12, + 2.5 + 2 = 16.5
  CHECK(out.ret_float == doctest::Approx(16.5));
}

TEST_CASE("vector statements compute lanewise") {
  const char* src = R"(
fn f(x: *f64, y: *f64, out: *f64) -> void {
  let va: vec4;
  let vb: vec4;
  let vc: vec4;
  let s: f64 = 0.0;
  vload4 va, x[0];
  vload4 vb, y[0];
  vsplat4 vc, 0.0;
  vfma4 vc, va, vb;
  vstore4 out[0], vc;
  vreduce4 s, vc;
  out[4] = s;
}
)";
  Program p = parse_program(src);
  MemoryImage img;
  img.regions["x"] = {ScalarType::F64, {1, 2, 3, 4}};
  img.regions["y"] = {ScalarType::F64, {10, 20, 30, 40}};
  img.regions["out"] = {ScalarType::F64, {0, 0, 0, 0, 0}};
  InstrumentationPolicy plain;
  ExecutionOutcome out = execute(p, "f", img, plain);
  REQUIRE(out.status == ExecStatus::Normal);
  CHECK(out.final.regions.at("out").data == std::vector<double>{10, 40, 90, 160, 300});
}

TEST_CASE("dispatch handler sees arguments and mutates memory") {
  Program p = parse_program(
      "fn f(a: *f64, c: *f64, m: i64) -> void {\n"
      "  atc_dispatch_gemm(a, c, m, 2.5);\n"
      "}");
  MemoryImage img;
  img.regions["a"] = {ScalarType::F64, {1, 2}};
  img.regions["c"] = {ScalarType::F64, {0, 0}};
  img.int_args = {{"m", 9}};

  DispatchContext ctx;
  std::string seen_name;
  std::vector<DispatchArg> seen;
  ctx.handler = [&](const std::string& name, const std::vector<DispatchArg>& args,
                    MemoryImage& mem) {
    seen_name = name;
    seen = args;
    mem.regions.at(args[1].region).data[0] = 42.0;
  };
  InstrumentationPolicy plain;
  plain.dispatch = &ctx;
  ExecutionOutcome out = execute(p, "f", img, plain);
  REQUIRE(out.status == ExecStatus::Normal);
  CHECK(seen_name == "atc_dispatch_gemm");
  REQUIRE(seen.size() == 4);
  CHECK(seen[0].kind == DispatchArg::Kind::Ptr);
  CHECK(seen[0].region == "a");
  CHECK(seen[1].region == "c");
  CHECK(seen[2].kind == DispatchArg::Kind::Int);
  CHECK(seen[2].i == 9);
  CHECK(seen[3].kind == DispatchArg::Kind::Float);
  CHECK(seen[3].f == 2.5);
  CHECK(out.final.regions.at("c").data[0] == 42.0);
  // without a handler the call is a no-op
  InstrumentationPolicy bare;
  ExecutionOutcome out2 = execute(p, "f", img, bare);
  REQUIRE(out2.status == ExecStatus::Normal);
  CHECK(out2.final.regions.at("c").data[0] == 0.0);
}

TEST_CASE("snapshot diff lists changed regions sorted") {
  MemoryImage before;
  before.regions["a"] = {ScalarType::F64, {1, 2}};
  before.regions["b"] = {ScalarType::F64, {3}};
  before.regions["c"] = {ScalarType::F64, {4}};
  MemoryImage after = before;
  after.regions["c"].data[0] = 5;
  after.regions["a"].data[1] = 9;
  CHECK(snapshot_diff(before, after) == std::vector<std::string>{"a", "c"});
  CHECK(snapshot_diff(before, before).empty());
}
