#include <doctest.h>

#include "liftc/minilang.hpp"

using namespace liftc::minilang;

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

}  // namespace

TEST_CASE("parse and list functions") {
  Program p = parse_program(kGemm);
  auto names = list_functions(p);
  REQUIRE(names.size() == 1);
  CHECK(names[0] == "gemm");
  REQUIRE(p.functions[0].params.size() == 6);
  CHECK(p.functions[0].params[0].kind == ParamKind::Pointer);
  CHECK(p.functions[0].params[3].kind == ParamKind::IntScalar);
  CHECK(p.functions[0].ret == RetType::Void);
}

TEST_CASE("round trip through the pretty printer") {
  Program p1 = parse_program(kGemm);
  std::string printed = pretty_print(p1);
  Program p2 = parse_program(printed);
  CHECK(equal(p1, p2));
  // printing is a fixed point
  CHECK(pretty_print(p2) == printed);
}

TEST_CASE("compound assignment desugars to a load-op-store") {
  Program p1 = parse_program(
      "fn f(x: *f64, n: i64) -> void {\n"
      "  let t: f64 = 0.0;\n"
      "  t += 2.0;\n"
      "  x[n] *= 3.0;\n"
      "}\n");
  Program p2 = parse_program(
      "fn f(x: *f64, n: i64) -> void {\n"
      "  let t: f64 = 0.0;\n"
      "  t = t + 2.0;\n"
      "  x[n] = x[n] * 3.0;\n"
      "}\n");
  CHECK(equal(p1, p2));
}

TEST_CASE("default step is omitted when printing") {
  Program p = parse_program("fn f(n: i64) -> void { for i = 0 to n step 1 { } }");
  std::string out = pretty_print(p);
  CHECK(out.find("step") == std::string::npos);
  Program q = parse_program("fn f(n: i64) -> void { for i = 0 to n step 2 { } }");
  CHECK(pretty_print(q).find("step 2") != std::string::npos);
}

TEST_CASE("float literals keep their value and print canonically") {
  Program p = parse_program("fn f() -> f64 { return 0.1; }");
  std::string out = pretty_print(p);
  CHECK(out.find("0.1") != std::string::npos);
  Program q = parse_program("fn f() -> f64 { return 2.0; }");
  CHECK(pretty_print(q).find("2.0") != std::string::npos);
  Program r = parse_program(pretty_print(q));
  CHECK(equal(q, r));
}

TEST_CASE("printer inserts only necessary parentheses") {
  Program p = parse_program("fn f(a: i64, b: i64, c: i64) -> i64 { return (a + b) * c; }");
  std::string out = pretty_print(p);
  CHECK(out.find("(a + b) * c") != std::string::npos);
  Program q = parse_program("fn f(a: i64, b: i64, c: i64) -> i64 { return a + (b * c); }");
  CHECK(pretty_print(q).find("a + b * c") != std::string::npos);
  // subtraction is left-associative: a - (b - c) keeps its parens
  Program r = parse_program("fn f(a: i64, b: i64, c: i64) -> i64 { return a - (b - c); }");
  std::string rout = pretty_print(r);
  CHECK(rout.find("a - (b - c)") != std::string::npos);
  CHECK(equal(r, parse_program(rout)));
}

TEST_CASE("else-if chains survive a round trip") {
  const char* src =
      "fn f(a: i64) -> i64 {\n"
      "  if a < 0 { return 0 - 1; } else if a == 0 { return 0; } else { return 1; }\n"
      "}\n";
  Program p = parse_program(src);
  Program q = parse_program(pretty_print(p));
  CHECK(equal(p, q));
}

TEST_CASE("vector statements parse and round trip") {
  const char* src = R"(
fn f(x: *f32, y: *f32, n: i64) -> void {
  let s: f32 = 0.0;
  let va: vec8;
  let vb: vec8;
  let vc: vec8;
  for i = 0 to n step 8 {
    vload8 va, x[i];
    vload8 vb, y[i];
    vsplat8 vc, 0.0;
    vfma8 vc, va, vb;
    vadd8 vc, vc, va;
    vmul8 vc, vc, vb;
    vstore8 y[i], vc;
    vreduce8 s, vc;
  }
}
)";
  Program p = parse_program(src);
  Program q = parse_program(pretty_print(p));
  CHECK(equal(p, q));
}

TEST_CASE("calls in any order resolve") {
  const char* src = R"(
fn top(x: *f64, n: i64) -> f64 {
  return helper(x, n) + 1.0;
}
fn helper(x: *f64, n: i64) -> f64 {
  return x[n - 1];
}
)";
  Program p = parse_program(src);
  CHECK(p.functions.size() == 2);
}

TEST_CASE("syntax errors carry a position") {
  try {
    parse_program("fn f() -> void { let ; }");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line == 1);
    CHECK(e.col > 1);
  }
}

TEST_CASE("resolver rejects bad programs") {
  CHECK_THROWS_AS(parse_program("fn f() -> void { x = 1; }"), ResolveError);
  CHECK_THROWS_AS(parse_program("fn f(n: i64) -> void { n[0] = 1.0; }"), ResolveError);
  CHECK_THROWS_AS(parse_program("fn f(p: *f64) -> void { p = p; }"), ResolveError);
  CHECK_THROWS_AS(parse_program("fn f(n: i64) -> void { let n: i64; }"), ResolveError);
  CHECK_THROWS_AS(parse_program("fn f() -> i64 { return 1.5; }"), ResolveError);
  CHECK_THROWS_AS(parse_program("fn f(n: i64) -> void { let x: i64 = 1.5; }"), ResolveError);
  CHECK_THROWS_AS(parse_program("fn f(n: i64) -> void { g(n); }"), ResolveError);
  CHECK_THROWS_AS(parse_program("fn f(p: *f64) -> void { let x: f64 = p + 1.0; }"),
                  ResolveError);
  // pointer arguments must be bare names
  CHECK_THROWS_AS(parse_program("fn g(p: *f64) -> void { }\n"
                                "fn f(p: *f64) -> void { g(p[0]); }"),
                  ResolveError);
  // loop variables are read-only
  CHECK_THROWS_AS(parse_program("fn f(n: i64) -> void { for i = 0 to n { i = 2; } }"),
                  ResolveError);
  // vector width mismatch
  CHECK_THROWS_AS(parse_program("fn f(x: *f32) -> void { let v: vec4; vload8 v, x[0]; }"),
                  ResolveError);
}

TEST_CASE("parfor cannot write scalars declared outside it") {
  CHECK_THROWS_AS(parse_program("fn f(n: i64) -> void {\n"
                                "  let s: f64 = 0.0;\n"
                                "  parfor i = 0 to n { s = s + 1.0; }\n"
                                "}"),
                  ResolveError);
  // writes to scalars declared inside the parfor are fine
  Program ok = parse_program(
      "fn f(x: *f64, n: i64) -> void {\n"
      "  parfor i = 0 to n { let s: f64 = x[i]; s = s * 2.0; x[i] = s; }\n"
      "}");
  CHECK(ok.functions.size() == 1);
  // nested sequential loop inside a parfor still cannot escape it
  CHECK_THROWS_AS(parse_program("fn f(n: i64) -> void {\n"
                                "  let s: f64 = 0.0;\n"
                                "  parfor i = 0 to n { for j = 0 to n { s = 1.0; } }\n"
                                "}"),
                  ResolveError);
}

TEST_CASE("recursion is accepted by the resolver") {
  Program p = parse_program(
      "fn fib(n: i64) -> i64 {\n"
      "  if n < 2 { return n; }\n"
      "  return fib(n - 1) + fib(n - 2);\n"
      "}");
  CHECK(p.functions.size() == 1);
}

TEST_CASE("dispatch builtins take arbitrary arguments") {
  Program p = parse_program(
      "fn f(a: *f64, c: *f64, m: i64, n: i64, k: i64) -> void {\n"
      "  atc_dispatch_gemm(a, a, c, m, n, k);\n"
      "}");
  CHECK(p.functions.size() == 1);
  CHECK(is_dispatch_builtin("atc_dispatch_gemm"));
  CHECK(is_dispatch_builtin("atc_dispatch_conv2d"));
  CHECK(!is_dispatch_builtin("gemm"));
  CHECK(is_builtin("min"));
  CHECK(!is_builtin("gemm"));
}

TEST_CASE("clone produces an equal but independent program") {
  Program p = parse_program(kGemm);
  Program c = clone(p);
  CHECK(equal(p, c));
  c.functions[0].name = "other";
  CHECK(!equal(p, c));
  CHECK(p.functions[0].name == "gemm");
}
