#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

// Frontend for the kernel mini-language: a C-like language with typed
// scalars (i64/f32/f64), flat float buffers accessed as ptr[expr], counted
// loops (for/parfor), while, if, calls, and fixed-width vector statements
// (widths 4 and 8). Programs are parsed into a small tree IR; the printer
// emits a canonical 2-space-indented form that reparses to an equal tree.

namespace liftc::minilang {

struct SyntaxError : std::runtime_error {
  int line, col;
  SyntaxError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
        line(line), col(col) {}
};

// Identifier/type misuse found after parsing (undeclared names, bad arity,
// writes to outer scalars inside parfor, vector width mismatches).
struct ResolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ScalarType { I64, F32, F64 };
enum class ParamKind { IntScalar, FloatScalar, Pointer };

struct Param {
  std::string name;
  ParamKind kind = ParamKind::IntScalar;
  ScalarType elem = ScalarType::I64;  // element type for Pointer, value type for scalars
};

enum class RetType { Void, I64, F32, F64 };

// Local declaration types; Vec4/Vec8 are vector registers of doubles.
enum class LocalType { I64, F32, F64, Vec4, Vec8 };

enum class BinOp { Add, Sub, Mul, Div, Mod, Lt, Le, Gt, Ge, Eq, Ne, And, Or };
enum class UnOp { Neg, Not };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { IntLit, FloatLit, Var, Index, Call, Binary, Unary };
  Kind kind = Kind::IntLit;
  long long int_val = 0;
  double float_val = 0.0;
  std::string name;  // Var name, Index base pointer, Call callee
  BinOp bop = BinOp::Add;
  UnOp uop = UnOp::Neg;
  // Call arguments; for Binary [lhs, rhs]; for Unary [operand]; for Index [index].
  std::vector<ExprPtr> args;
  int line = 0, col = 0;
};

enum class VecOp { Load, Store, Splat, Add, Mul, Fma, Reduce };

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  enum class Kind { Let, Assign, Store, For, While, If, CallStmt, Return, Vec };
  Kind kind = Kind::Let;
  int line = 0, col = 0;

  // Let
  std::string let_name;
  LocalType let_type = LocalType::I64;
  ExprPtr let_init;  // may be null (zero-initialized)

  // Assign: name = value. Store: array[index] = value.
  std::string target;
  ExprPtr index;  // Store only
  ExprPtr value;  // Assign/Store/Return (Return may be null)

  // For/parfor: induction var in [lo, hi) advanced by step (default 1).
  std::string loop_var;
  ExprPtr lo, hi, step;
  bool parallel = false;
  std::vector<StmtPtr> body;  // For/While/If-then

  // While/If share `cond`; If uses body as the then-branch.
  ExprPtr cond;
  std::vector<StmtPtr> else_body;

  // CallStmt
  ExprPtr call;  // Expr::Call

  // Vec statement operands. Meaning by op:
  //   Load:   dst_reg, array=target, index
  //   Store:  array=target, index, src_reg
  //   Splat:  dst_reg, value
  //   Add/Mul/Fma: dst_reg, src_a, src_b   (Fma: dst += a * b)
  //   Reduce: scalar dst var name in `target`, src_reg
  VecOp vec_op = VecOp::Load;
  int vec_width = 4;
  std::string vec_dst, vec_a, vec_b;
};

struct FunctionIR {
  std::string name;
  std::vector<Param> params;
  RetType ret = RetType::Void;
  std::vector<StmtPtr> body;
  int line = 0, col = 0;

  const Param* find_param(const std::string& n) const {
    for (const auto& p : params)
      if (p.name == n) return &p;
    return nullptr;
  }
};

struct Program {
  std::vector<FunctionIR> functions;

  const FunctionIR* find(const std::string& n) const {
    for (const auto& f : functions)
      if (f.name == n) return &f;
    return nullptr;
  }
};

// Names of builtin callables understood by the interpreter. Dispatch
// builtins accept any argument list; the rest are fixed-arity scalar ops.
bool is_builtin(const std::string& name);
bool is_dispatch_builtin(const std::string& name);

Program parse_program(const std::string& source);

std::string pretty_print(const Program& p);
std::string pretty_print(const FunctionIR& f);

std::vector<std::string> list_functions(const Program& p);

// Structural equality ignoring source positions.
bool equal(const Program& a, const Program& b);
bool equal(const FunctionIR& a, const FunctionIR& b);
bool equal(const Expr& a, const Expr& b);

Program clone(const Program& p);
FunctionIR clone_function(const FunctionIR& f);

}  // namespace liftc::minilang
