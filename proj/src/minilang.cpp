#include "liftc/minilang.hpp"

#include <cctype>
#include <cstdio>
#include <cstring>
#include <map>
#include <set>
#include <sstream>

namespace liftc::minilang {

namespace {

// ---------------------------------------------------------------- lexing --

enum class Tok {
  End, Ident, Int, Float,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Semi, Colon, Arrow, Star,
  Assign, PlusAssign, MinusAssign, StarAssign,
  Plus, Minus, Slash, Percent,
  Lt, Le, Gt, Ge, EqEq, Ne, AndAnd, OrOr, Not,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long long int_val = 0;
  double float_val = 0.0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return cur_; }
  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    cur_ = Token{};
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= src_.size()) {
      cur_.kind = Tok::End;
      return;
    }
    char c = src_[pos_];
    if (std::isalpha((unsigned char)c) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
        bump();
      cur_.kind = Tok::Ident;
      cur_.text = src_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit((unsigned char)c)) {
      size_t start = pos_;
      bool is_float = false;
      while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) bump();
      if (pos_ < src_.size() && src_[pos_] == '.') {
        is_float = true;
        bump();
        while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) bump();
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        is_float = true;
        bump();
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) bump();
        while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) bump();
      }
      std::string text = src_.substr(start, pos_ - start);
      if (is_float) {
        cur_.kind = Tok::Float;
        cur_.float_val = std::strtod(text.c_str(), nullptr);
      } else {
        cur_.kind = Tok::Int;
        cur_.int_val = std::strtoll(text.c_str(), nullptr, 10);
      }
      cur_.text = text;
      return;
    }
    auto two = [&](char a, char b) {
      return c == a && pos_ + 1 < src_.size() && src_[pos_ + 1] == b;
    };
    if (two('-', '>')) { bump(); bump(); cur_.kind = Tok::Arrow; return; }
    if (two('+', '=')) { bump(); bump(); cur_.kind = Tok::PlusAssign; return; }
    if (two('-', '=')) { bump(); bump(); cur_.kind = Tok::MinusAssign; return; }
    if (two('*', '=')) { bump(); bump(); cur_.kind = Tok::StarAssign; return; }
    if (two('=', '=')) { bump(); bump(); cur_.kind = Tok::EqEq; return; }
    if (two('!', '=')) { bump(); bump(); cur_.kind = Tok::Ne; return; }
    if (two('<', '=')) { bump(); bump(); cur_.kind = Tok::Le; return; }
    if (two('>', '=')) { bump(); bump(); cur_.kind = Tok::Ge; return; }
    if (two('&', '&')) { bump(); bump(); cur_.kind = Tok::AndAnd; return; }
    if (two('|', '|')) { bump(); bump(); cur_.kind = Tok::OrOr; return; }
    switch (c) {
      case '(': cur_.kind = Tok::LParen; break;
      case ')': cur_.kind = Tok::RParen; break;
      case '{': cur_.kind = Tok::LBrace; break;
      case '}': cur_.kind = Tok::RBrace; break;
      case '[': cur_.kind = Tok::LBracket; break;
      case ']': cur_.kind = Tok::RBracket; break;
      case ',': cur_.kind = Tok::Comma; break;
      case ';': cur_.kind = Tok::Semi; break;
      case ':': cur_.kind = Tok::Colon; break;
      case '*': cur_.kind = Tok::Star; break;
      case '=': cur_.kind = Tok::Assign; break;
      case '+': cur_.kind = Tok::Plus; break;
      case '-': cur_.kind = Tok::Minus; break;
      case '/': cur_.kind = Tok::Slash; break;
      case '%': cur_.kind = Tok::Percent; break;
      case '<': cur_.kind = Tok::Lt; break;
      case '>': cur_.kind = Tok::Gt; break;
      case '!': cur_.kind = Tok::Not; break;
      default:
        throw SyntaxError(std::string("unexpected character '") + c + "'", line_, col_);
    }
    bump();
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    pos_++;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token cur_;
};

const std::set<std::string> kKeywords = {
    "fn", "let", "for", "parfor", "while", "if", "else", "to", "step",
    "return", "void", "i64", "f32", "f64", "vec4", "vec8"};

struct VecKw {
  VecOp op;
  int width;
};

bool vec_keyword(const std::string& s, VecKw* out) {
  static const std::map<std::string, VecKw> table = {
      {"vload4", {VecOp::Load, 4}},   {"vload8", {VecOp::Load, 8}},
      {"vstore4", {VecOp::Store, 4}}, {"vstore8", {VecOp::Store, 8}},
      {"vsplat4", {VecOp::Splat, 4}}, {"vsplat8", {VecOp::Splat, 8}},
      {"vadd4", {VecOp::Add, 4}},     {"vadd8", {VecOp::Add, 8}},
      {"vmul4", {VecOp::Mul, 4}},     {"vmul8", {VecOp::Mul, 8}},
      {"vfma4", {VecOp::Fma, 4}},     {"vfma8", {VecOp::Fma, 8}},
      {"vreduce4", {VecOp::Reduce, 4}}, {"vreduce8", {VecOp::Reduce, 8}}};
  auto it = table.find(s);
  if (it == table.end()) return false;
  *out = it->second;
  return true;
}

// --------------------------------------------------------------- parsing --

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  Program parse() {
    Program p;
    while (lex_.peek().kind != Tok::End) {
      p.functions.push_back(parse_function());
    }
    return p;
  }

 private:
  Token expect(Tok k, const char* what) {
    if (lex_.peek().kind != k)
      throw SyntaxError(std::string("expected ") + what, lex_.peek().line, lex_.peek().col);
    return lex_.take();
  }

  bool accept(Tok k) {
    if (lex_.peek().kind == k) {
      lex_.take();
      return true;
    }
    return false;
  }

  std::string expect_ident(const char* what) {
    Token t = expect(Tok::Ident, what);
    if (kKeywords.count(t.text))
      throw SyntaxError("keyword '" + t.text + "' used as identifier", t.line, t.col);
    return t.text;
  }

  bool peek_ident(const char* kw) {
    return lex_.peek().kind == Tok::Ident && lex_.peek().text == kw;
  }

  void expect_kw(const char* kw) {
    Token t = expect(Tok::Ident, kw);
    if (t.text != kw)
      throw SyntaxError(std::string("expected '") + kw + "'", t.line, t.col);
  }

  FunctionIR parse_function() {
    Token fn_tok = lex_.take();
    if (fn_tok.kind != Tok::Ident || fn_tok.text != "fn")
      throw SyntaxError("expected 'fn'", fn_tok.line, fn_tok.col);
    FunctionIR f;
    f.line = fn_tok.line;
    f.col = fn_tok.col;
    f.name = expect_ident("function name");
    expect(Tok::LParen, "'('");
    if (!accept(Tok::RParen)) {
      for (;;) {
        f.params.push_back(parse_param());
        if (accept(Tok::RParen)) break;
        expect(Tok::Comma, "','");
      }
    }
    expect(Tok::Arrow, "'->'");
    Token rt = expect(Tok::Ident, "return type");
    if (rt.text == "void") f.ret = RetType::Void;
    else if (rt.text == "i64") f.ret = RetType::I64;
    else if (rt.text == "f32") f.ret = RetType::F32;
    else if (rt.text == "f64") f.ret = RetType::F64;
    else throw SyntaxError("bad return type '" + rt.text + "'", rt.line, rt.col);
    f.body = parse_block();
    return f;
  }

  Param parse_param() {
    Param p;
    p.name = expect_ident("parameter name");
    expect(Tok::Colon, "':'");
    if (accept(Tok::Star)) {
      p.kind = ParamKind::Pointer;
      Token t = expect(Tok::Ident, "element type");
      if (t.text == "f32") p.elem = ScalarType::F32;
      else if (t.text == "f64") p.elem = ScalarType::F64;
      else throw SyntaxError("pointer element type must be f32 or f64", t.line, t.col);
      return p;
    }
    Token t = expect(Tok::Ident, "type");
    if (t.text == "i64") { p.kind = ParamKind::IntScalar; p.elem = ScalarType::I64; }
    else if (t.text == "f32") { p.kind = ParamKind::FloatScalar; p.elem = ScalarType::F32; }
    else if (t.text == "f64") { p.kind = ParamKind::FloatScalar; p.elem = ScalarType::F64; }
    else throw SyntaxError("bad parameter type '" + t.text + "'", t.line, t.col);
    return p;
  }

  std::vector<StmtPtr> parse_block() {
    expect(Tok::LBrace, "'{'");
    std::vector<StmtPtr> body;
    while (!accept(Tok::RBrace)) {
      body.push_back(parse_stmt());
    }
    return body;
  }

  StmtPtr parse_stmt() {
    const Token& t = lex_.peek();
    if (t.kind != Tok::Ident)
      throw SyntaxError("expected statement", t.line, t.col);

    VecKw vk;
    if (vec_keyword(t.text, &vk)) return parse_vec_stmt(vk);
    if (t.text == "let") return parse_let();
    if (t.text == "for" || t.text == "parfor") return parse_for(t.text == "parfor");
    if (t.text == "while") return parse_while();
    if (t.text == "if") return parse_if();
    if (t.text == "return") return parse_return();
    return parse_assign_or_call();
  }

  StmtPtr parse_let() {
    Token kw = lex_.take();
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::Let;
    s->line = kw.line;
    s->col = kw.col;
    s->let_name = expect_ident("local name");
    expect(Tok::Colon, "':'");
    Token t = expect(Tok::Ident, "local type");
    if (t.text == "i64") s->let_type = LocalType::I64;
    else if (t.text == "f32") s->let_type = LocalType::F32;
    else if (t.text == "f64") s->let_type = LocalType::F64;
    else if (t.text == "vec4") s->let_type = LocalType::Vec4;
    else if (t.text == "vec8") s->let_type = LocalType::Vec8;
    else throw SyntaxError("bad local type '" + t.text + "'", t.line, t.col);
    if (accept(Tok::Assign)) {
      if (s->let_type == LocalType::Vec4 || s->let_type == LocalType::Vec8)
        throw SyntaxError("vector locals cannot take initializers", t.line, t.col);
      s->let_init = parse_expr();
    }
    expect(Tok::Semi, "';'");
    return s;
  }

  StmtPtr parse_for(bool parallel) {
    Token kw = lex_.take();
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::For;
    s->parallel = parallel;
    s->line = kw.line;
    s->col = kw.col;
    s->loop_var = expect_ident("loop variable");
    expect(Tok::Assign, "'='");
    s->lo = parse_expr();
    expect_kw("to");
    s->hi = parse_expr();
    if (peek_ident("step")) {
      lex_.take();
      s->step = parse_expr();
    } else {
      s->step = std::make_unique<Expr>();
      s->step->kind = Expr::Kind::IntLit;
      s->step->int_val = 1;
    }
    s->body = parse_block();
    return s;
  }

  StmtPtr parse_while() {
    Token kw = lex_.take();
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::While;
    s->line = kw.line;
    s->col = kw.col;
    s->cond = parse_expr();
    s->body = parse_block();
    return s;
  }

  StmtPtr parse_if() {
    Token kw = lex_.take();
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::If;
    s->line = kw.line;
    s->col = kw.col;
    s->cond = parse_expr();
    s->body = parse_block();
    if (peek_ident("else")) {
      lex_.take();
      if (peek_ident("if")) {
        s->else_body.push_back(parse_if());
      } else {
        s->else_body = parse_block();
      }
    }
    return s;
  }

  StmtPtr parse_return() {
    Token kw = lex_.take();
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::Return;
    s->line = kw.line;
    s->col = kw.col;
    if (!accept(Tok::Semi)) {
      s->value = parse_expr();
      expect(Tok::Semi, "';'");
    }
    return s;
  }

  StmtPtr parse_vec_stmt(VecKw vk) {
    Token kw = lex_.take();
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::Vec;
    s->vec_op = vk.op;
    s->vec_width = vk.width;
    s->line = kw.line;
    s->col = kw.col;
    switch (vk.op) {
      case VecOp::Load:  // vloadW dst, arr[idx];
        s->vec_dst = expect_ident("vector register");
        expect(Tok::Comma, "','");
        s->target = expect_ident("array");
        expect(Tok::LBracket, "'['");
        s->index = parse_expr();
        expect(Tok::RBracket, "']'");
        break;
      case VecOp::Store:  // vstoreW arr[idx], src;
        s->target = expect_ident("array");
        expect(Tok::LBracket, "'['");
        s->index = parse_expr();
        expect(Tok::RBracket, "']'");
        expect(Tok::Comma, "','");
        s->vec_a = expect_ident("vector register");
        break;
      case VecOp::Splat:  // vsplatW dst, expr;
        s->vec_dst = expect_ident("vector register");
        expect(Tok::Comma, "','");
        s->value = parse_expr();
        break;
      case VecOp::Add:
      case VecOp::Mul:
      case VecOp::Fma:  // vopW dst, a, b;
        s->vec_dst = expect_ident("vector register");
        expect(Tok::Comma, "','");
        s->vec_a = expect_ident("vector register");
        expect(Tok::Comma, "','");
        s->vec_b = expect_ident("vector register");
        break;
      case VecOp::Reduce:  // vreduceW scalar, src;
        s->target = expect_ident("scalar");
        expect(Tok::Comma, "','");
        s->vec_a = expect_ident("vector register");
        break;
    }
    expect(Tok::Semi, "';'");
    return s;
  }

  StmtPtr parse_assign_or_call() {
    Token name_tok = lex_.take();
    std::string name = name_tok.text;
    if (kKeywords.count(name))
      throw SyntaxError("keyword '" + name + "' used as identifier", name_tok.line, name_tok.col);
    auto s = std::make_unique<Stmt>();
    s->line = name_tok.line;
    s->col = name_tok.col;

    if (lex_.peek().kind == Tok::LParen) {
      // call statement
      s->kind = Stmt::Kind::CallStmt;
      s->call = parse_call_rest(name, name_tok.line, name_tok.col);
      expect(Tok::Semi, "';'");
      return s;
    }

    ExprPtr idx;
    if (accept(Tok::LBracket)) {
      idx = parse_expr();
      expect(Tok::RBracket, "']'");
    }

    Tok op = lex_.peek().kind;
    if (op != Tok::Assign && op != Tok::PlusAssign && op != Tok::MinusAssign &&
        op != Tok::StarAssign)
      throw SyntaxError("expected assignment operator", lex_.peek().line, lex_.peek().col);
    lex_.take();
    ExprPtr rhs = parse_expr();
    expect(Tok::Semi, "';'");

    // Desugar compound assignment into target = target <op> rhs so the
    // printed canonical form has one assignment shape.
    if (op != Tok::Assign) {
      BinOp b = op == Tok::PlusAssign ? BinOp::Add
                : op == Tok::MinusAssign ? BinOp::Sub : BinOp::Mul;
      auto load = std::make_unique<Expr>();
      load->line = name_tok.line;
      load->col = name_tok.col;
      if (idx) {
        load->kind = Expr::Kind::Index;
        load->name = name;
        load->args.push_back(clone_expr(*idx));
      } else {
        load->kind = Expr::Kind::Var;
        load->name = name;
      }
      auto bin = std::make_unique<Expr>();
      bin->kind = Expr::Kind::Binary;
      bin->bop = b;
      bin->line = name_tok.line;
      bin->col = name_tok.col;
      bin->args.push_back(std::move(load));
      bin->args.push_back(std::move(rhs));
      rhs = std::move(bin);
    }

    if (idx) {
      s->kind = Stmt::Kind::Store;
      s->target = name;
      s->index = std::move(idx);
      s->value = std::move(rhs);
    } else {
      s->kind = Stmt::Kind::Assign;
      s->target = name;
      s->value = std::move(rhs);
    }
    return s;
  }

  ExprPtr parse_call_rest(const std::string& callee, int line, int col) {
    expect(Tok::LParen, "'('");
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Call;
    e->name = callee;
    e->line = line;
    e->col = col;
    if (!accept(Tok::RParen)) {
      for (;;) {
        e->args.push_back(parse_expr());
        if (accept(Tok::RParen)) break;
        expect(Tok::Comma, "','");
      }
    }
    return e;
  }

  ExprPtr parse_expr() { return parse_bin(1); }

  static int bin_prec(Tok k) {
    switch (k) {
      case Tok::OrOr: return 1;
      case Tok::AndAnd: return 2;
      case Tok::Lt: case Tok::Le: case Tok::Gt: case Tok::Ge:
      case Tok::EqEq: case Tok::Ne: return 3;
      case Tok::Plus: case Tok::Minus: return 4;
      case Tok::Star: case Tok::Slash: case Tok::Percent: return 5;
      default: return 0;
    }
  }

  static BinOp bin_op(Tok k) {
    switch (k) {
      case Tok::OrOr: return BinOp::Or;
      case Tok::AndAnd: return BinOp::And;
      case Tok::Lt: return BinOp::Lt;
      case Tok::Le: return BinOp::Le;
      case Tok::Gt: return BinOp::Gt;
      case Tok::Ge: return BinOp::Ge;
      case Tok::EqEq: return BinOp::Eq;
      case Tok::Ne: return BinOp::Ne;
      case Tok::Plus: return BinOp::Add;
      case Tok::Minus: return BinOp::Sub;
      case Tok::Star: return BinOp::Mul;
      case Tok::Slash: return BinOp::Div;
      default: return BinOp::Mod;
    }
  }

  ExprPtr parse_bin(int min_prec) {
    ExprPtr lhs = parse_unary();
    for (;;) {
      int prec = bin_prec(lex_.peek().kind);
      if (prec < min_prec || prec == 0) return lhs;
      Token op = lex_.take();
      ExprPtr rhs = parse_bin(prec + 1);
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Binary;
      e->bop = bin_op(op.kind);
      e->line = op.line;
      e->col = op.col;
      e->args.push_back(std::move(lhs));
      e->args.push_back(std::move(rhs));
      lhs = std::move(e);
    }
  }

  ExprPtr parse_unary() {
    if (lex_.peek().kind == Tok::Minus || lex_.peek().kind == Tok::Not) {
      Token op = lex_.take();
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Unary;
      e->uop = op.kind == Tok::Minus ? UnOp::Neg : UnOp::Not;
      e->line = op.line;
      e->col = op.col;
      e->args.push_back(parse_unary());
      return e;
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    Token t = lex_.take();
    auto e = std::make_unique<Expr>();
    e->line = t.line;
    e->col = t.col;
    switch (t.kind) {
      case Tok::Int:
        e->kind = Expr::Kind::IntLit;
        e->int_val = t.int_val;
        return e;
      case Tok::Float:
        e->kind = Expr::Kind::FloatLit;
        e->float_val = t.float_val;
        return e;
      case Tok::LParen: {
        ExprPtr inner = parse_expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        if (kKeywords.count(t.text))
          throw SyntaxError("keyword '" + t.text + "' in expression", t.line, t.col);
        if (lex_.peek().kind == Tok::LParen)
          return parse_call_rest(t.text, t.line, t.col);
        if (accept(Tok::LBracket)) {
          e->kind = Expr::Kind::Index;
          e->name = t.text;
          e->args.push_back(parse_expr());
          expect(Tok::RBracket, "']'");
          return e;
        }
        e->kind = Expr::Kind::Var;
        e->name = t.text;
        return e;
      }
      default:
        throw SyntaxError("expected expression", t.line, t.col);
    }
  }

 public:
  static ExprPtr clone_expr(const Expr& src) {
    auto e = std::make_unique<Expr>();
    e->kind = src.kind;
    e->int_val = src.int_val;
    e->float_val = src.float_val;
    e->name = src.name;
    e->bop = src.bop;
    e->uop = src.uop;
    e->line = src.line;
    e->col = src.col;
    for (const auto& a : src.args) e->args.push_back(clone_expr(*a));
    return e;
  }

 private:
  Lexer lex_;
};

// -------------------------------------------------------------- resolving --

enum class VType { Int, Float, Vec4, Vec8, PtrF32, PtrF64, Void };

bool is_ptr(VType t) { return t == VType::PtrF32 || t == VType::PtrF64; }
bool is_num(VType t) { return t == VType::Int || t == VType::Float; }

struct Binding {
  VType type;
  int scope_depth;
  bool is_loop_var;
};

class Resolver {
 public:
  explicit Resolver(const Program& p) : prog_(p) {
    for (const auto& f : p.functions) {
      if (sigs_.count(f.name))
        throw ResolveError("duplicate function '" + f.name + "'");
      sigs_[f.name] = &f;
    }
  }

  void run() {
    for (const auto& f : prog_.functions) resolve_function(f);
  }

 private:
  void resolve_function(const FunctionIR& f) {
    scopes_.clear();
    parfor_depths_.clear();
    cur_ret_ = f.ret;
    push_scope();
    std::set<std::string> seen;
    for (const auto& p : f.params) {
      if (!seen.insert(p.name).second)
        throw ResolveError("duplicate parameter '" + p.name + "' in " + f.name);
      VType t = p.kind == ParamKind::IntScalar ? VType::Int
                : p.kind == ParamKind::FloatScalar ? VType::Float
                : p.elem == ScalarType::F32 ? VType::PtrF32 : VType::PtrF64;
      declare(p.name, t, false);
    }
    resolve_block(f.body);
    pop_scope();
  }

  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }

  void declare(const std::string& name, VType t, bool loop_var) {
    VecKw vk;
    if (kKeywords.count(name) || is_builtin(name) || vec_keyword(name, &vk))
      throw ResolveError("reserved name '" + name + "'");
    auto& top = scopes_.back();
    if (top.count(name))
      throw ResolveError("redeclaration of '" + name + "'");
    for (const auto& sc : scopes_)
      if (sc.count(name))
        throw ResolveError("'" + name + "' shadows an outer declaration");
    top[name] = Binding{t, (int)scopes_.size() - 1, loop_var};
  }

  const Binding* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  const Binding& need(const std::string& name, int line) const {
    const Binding* b = lookup(name);
    if (!b)
      throw ResolveError("undeclared identifier '" + name + "' (line " +
                         std::to_string(line) + ")");
    return *b;
  }

  // Writes to scalars declared outside the innermost parfor are rejected;
  // this is the syntactic side of parfor's sequential-semantics contract.
  void check_parfor_write(const std::string& name, int line) {
    if (parfor_depths_.empty()) return;
    const Binding& b = need(name, line);
    if (b.scope_depth < parfor_depths_.back())
      throw ResolveError("parfor body writes to outer scalar '" + name +
                         "' (line " + std::to_string(line) + ")");
  }

  void resolve_block(const std::vector<StmtPtr>& body) {
    for (const auto& s : body) resolve_stmt(*s);
  }

  void resolve_stmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Let: {
        VType t = s.let_type == LocalType::I64 ? VType::Int
                  : s.let_type == LocalType::Vec4 ? VType::Vec4
                  : s.let_type == LocalType::Vec8 ? VType::Vec8 : VType::Float;
        if (s.let_init) {
          VType it = type_of(*s.let_init);
          if (!is_num(it))
            throw ResolveError("initializer of '" + s.let_name + "' is not scalar");
          if (t == VType::Int && it == VType::Float)
            throw ResolveError("cannot initialize i64 '" + s.let_name +
                               "' with a float expression");
        }
        declare(s.let_name, t, false);
        break;
      }
      case Stmt::Kind::Assign: {
        const Binding& b = need(s.target, s.line);
        if (b.is_loop_var)
          throw ResolveError("assignment to loop variable '" + s.target + "'");
        if (is_ptr(b.type) || b.type == VType::Vec4 || b.type == VType::Vec8)
          throw ResolveError("'" + s.target + "' is not a scalar");
        check_parfor_write(s.target, s.line);
        VType vt = type_of(*s.value);
        if (!is_num(vt)) throw ResolveError("non-scalar value assigned to '" + s.target + "'");
        if (b.type == VType::Int && vt == VType::Float)
          throw ResolveError("float value assigned to i64 '" + s.target + "'");
        break;
      }
      case Stmt::Kind::Store: {
        const Binding& b = need(s.target, s.line);
        if (!is_ptr(b.type))
          throw ResolveError("indexed store into non-pointer '" + s.target + "'");
        if (type_of(*s.index) != VType::Int)
          throw ResolveError("index into '" + s.target + "' is not an integer");
        if (!is_num(type_of(*s.value)))
          throw ResolveError("stored value is not scalar");
        break;
      }
      case Stmt::Kind::For: {
        if (type_of(*s.lo) != VType::Int || type_of(*s.hi) != VType::Int ||
            type_of(*s.step) != VType::Int)
          throw ResolveError("loop bounds of '" + s.loop_var + "' must be integers");
        push_scope();
        declare(s.loop_var, VType::Int, true);
        if (s.parallel) parfor_depths_.push_back((int)scopes_.size() - 1);
        resolve_block(s.body);
        if (s.parallel) parfor_depths_.pop_back();
        pop_scope();
        break;
      }
      case Stmt::Kind::While: {
        if (!is_num(type_of(*s.cond)))
          throw ResolveError("while condition is not scalar");
        push_scope();
        resolve_block(s.body);
        pop_scope();
        break;
      }
      case Stmt::Kind::If: {
        if (!is_num(type_of(*s.cond)))
          throw ResolveError("if condition is not scalar");
        push_scope();
        resolve_block(s.body);
        pop_scope();
        push_scope();
        resolve_block(s.else_body);
        pop_scope();
        break;
      }
      case Stmt::Kind::CallStmt:
        type_of(*s.call);
        break;
      case Stmt::Kind::Return: {
        if (cur_ret_ == RetType::Void) {
          if (s.value) throw ResolveError("void function returns a value");
        } else {
          if (!s.value) throw ResolveError("missing return value");
          VType vt = type_of(*s.value);
          if (!is_num(vt)) throw ResolveError("returned value is not scalar");
          if (cur_ret_ == RetType::I64 && vt == VType::Float)
            throw ResolveError("float returned from i64 function");
        }
        break;
      }
      case Stmt::Kind::Vec:
        resolve_vec(s);
        break;
    }
  }

  void need_vec(const std::string& name, int width, int line) {
    const Binding& b = need(name, line);
    VType want = width == 4 ? VType::Vec4 : VType::Vec8;
    if (b.type != want)
      throw ResolveError("'" + name + "' is not a vec" + std::to_string(width));
  }

  void resolve_vec(const Stmt& s) {
    switch (s.vec_op) {
      case VecOp::Load:
        need_vec(s.vec_dst, s.vec_width, s.line);
        check_parfor_write(s.vec_dst, s.line);
        if (!is_ptr(need(s.target, s.line).type))
          throw ResolveError("vector load from non-pointer '" + s.target + "'");
        if (type_of(*s.index) != VType::Int)
          throw ResolveError("vector load index is not an integer");
        break;
      case VecOp::Store:
        if (!is_ptr(need(s.target, s.line).type))
          throw ResolveError("vector store into non-pointer '" + s.target + "'");
        if (type_of(*s.index) != VType::Int)
          throw ResolveError("vector store index is not an integer");
        need_vec(s.vec_a, s.vec_width, s.line);
        break;
      case VecOp::Splat:
        need_vec(s.vec_dst, s.vec_width, s.line);
        check_parfor_write(s.vec_dst, s.line);
        if (!is_num(type_of(*s.value)))
          throw ResolveError("vector splat of a non-scalar");
        break;
      case VecOp::Add:
      case VecOp::Mul:
      case VecOp::Fma:
        need_vec(s.vec_dst, s.vec_width, s.line);
        check_parfor_write(s.vec_dst, s.line);
        need_vec(s.vec_a, s.vec_width, s.line);
        need_vec(s.vec_b, s.vec_width, s.line);
        break;
      case VecOp::Reduce: {
        const Binding& b = need(s.target, s.line);
        if (b.type != VType::Float)
          throw ResolveError("vector reduce target '" + s.target + "' is not a float scalar");
        if (b.is_loop_var) throw ResolveError("reduce into loop variable");
        check_parfor_write(s.target, s.line);
        need_vec(s.vec_a, s.vec_width, s.line);
        break;
      }
    }
  }

  VType type_of(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit: return VType::Int;
      case Expr::Kind::FloatLit: return VType::Float;
      case Expr::Kind::Var: {
        const Binding& b = need(e.name, e.line);
        if (b.type == VType::Vec4 || b.type == VType::Vec8)
          throw ResolveError("vector register '" + e.name + "' used as a scalar");
        return b.type;  // pointers are valid only as call arguments; checked there
      }
      case Expr::Kind::Index: {
        const Binding& b = need(e.name, e.line);
        if (!is_ptr(b.type))
          throw ResolveError("indexing non-pointer '" + e.name + "'");
        if (type_of(*e.args[0]) != VType::Int)
          throw ResolveError("index into '" + e.name + "' is not an integer");
        return VType::Float;
      }
      case Expr::Kind::Unary: {
        VType t = type_of(*e.args[0]);
        if (!is_num(t)) throw ResolveError("unary operator on non-scalar");
        if (e.uop == UnOp::Not) {
          if (t != VType::Int) throw ResolveError("'!' needs an integer operand");
          return VType::Int;
        }
        return t;
      }
      case Expr::Kind::Binary: {
        VType a = type_of(*e.args[0]);
        VType b = type_of(*e.args[1]);
        if (is_ptr(a) || is_ptr(b)) throw ResolveError("arithmetic on a pointer");
        switch (e.bop) {
          case BinOp::And: case BinOp::Or:
            if (a != VType::Int || b != VType::Int)
              throw ResolveError("logical operator needs integer operands");
            return VType::Int;
          case BinOp::Mod:
            if (a != VType::Int || b != VType::Int)
              throw ResolveError("'%' needs integer operands");
            return VType::Int;
          case BinOp::Lt: case BinOp::Le: case BinOp::Gt:
          case BinOp::Ge: case BinOp::Eq: case BinOp::Ne:
            return VType::Int;
          default:
            return (a == VType::Float || b == VType::Float) ? VType::Float : VType::Int;
        }
      }
      case Expr::Kind::Call: return type_of_call(e);
    }
    return VType::Void;
  }

  VType type_of_call(const Expr& e) {
    const std::string& callee = e.name;
    auto num_arg = [&](size_t i) {
      VType t = type_of(*e.args[i]);
      if (!is_num(t))
        throw ResolveError("argument " + std::to_string(i + 1) + " of '" + callee +
                           "' is not scalar");
      return t;
    };
    if (callee == "min" || callee == "max") {
      if (e.args.size() != 2) throw ResolveError("'" + callee + "' takes 2 arguments");
      if (num_arg(0) != VType::Int || num_arg(1) != VType::Int)
        throw ResolveError("'" + callee + "' needs integer arguments");
      return VType::Int;
    }
    if (callee == "to_i64") {
      if (e.args.size() != 1) throw ResolveError("'to_i64' takes 1 argument");
      num_arg(0);
      return VType::Int;
    }
    if (callee == "to_f64") {
      if (e.args.size() != 1) throw ResolveError("'to_f64' takes 1 argument");
      num_arg(0);
      return VType::Float;
    }
    if (callee == "fabs" || callee == "sqrt") {
      if (e.args.size() != 1) throw ResolveError("'" + callee + "' takes 1 argument");
      num_arg(0);
      return VType::Float;
    }
    if (is_dispatch_builtin(callee)) {
      for (size_t i = 0; i < e.args.size(); i++) {
        const Expr& a = *e.args[i];
        if (a.kind == Expr::Kind::Var && is_ptr(need(a.name, a.line).type)) continue;
        num_arg(i);
      }
      return VType::Void;
    }
    auto it = sigs_.find(callee);
    if (it == sigs_.end())
      throw ResolveError("call to unknown function '" + callee + "'");
    const FunctionIR* f = it->second;
    if (e.args.size() != f->params.size())
      throw ResolveError("'" + callee + "' expects " + std::to_string(f->params.size()) +
                         " arguments, got " + std::to_string(e.args.size()));
    for (size_t i = 0; i < e.args.size(); i++) {
      const Param& p = f->params[i];
      const Expr& a = *e.args[i];
      if (p.kind == ParamKind::Pointer) {
        if (a.kind != Expr::Kind::Var)
          throw ResolveError("pointer argument of '" + callee + "' must be a bare pointer name");
        const Binding& b = need(a.name, a.line);
        VType want = p.elem == ScalarType::F32 ? VType::PtrF32 : VType::PtrF64;
        if (b.type != want)
          throw ResolveError("pointer argument '" + a.name + "' has the wrong element type");
      } else {
        VType t = num_arg(i);
        if (p.kind == ParamKind::IntScalar && t == VType::Float)
          throw ResolveError("float passed for integer parameter '" + p.name + "'");
      }
    }
    switch (f->ret) {
      case RetType::Void: return VType::Void;
      case RetType::I64: return VType::Int;
      default: return VType::Float;
    }
  }

  const Program& prog_;
  std::map<std::string, const FunctionIR*> sigs_;
  std::vector<std::map<std::string, Binding>> scopes_;
  std::vector<int> parfor_depths_;
  RetType cur_ret_ = RetType::Void;
};

// -------------------------------------------------------------- printing --

class Printer {
 public:
  std::string print(const Program& p) {
    out_.str("");
    bool first = true;
    for (const auto& f : p.functions) {
      if (!first) out_ << "\n";
      first = false;
      print_function(f);
    }
    return out_.str();
  }

  std::string print_one(const FunctionIR& f) {
    out_.str("");
    print_function(f);
    return out_.str();
  }

 private:
  void print_function(const FunctionIR& f) {
    out_ << "fn " << f.name << "(";
    for (size_t i = 0; i < f.params.size(); i++) {
      if (i) out_ << ", ";
      const Param& p = f.params[i];
      out_ << p.name << ": ";
      if (p.kind == ParamKind::Pointer)
        out_ << "*" << (p.elem == ScalarType::F32 ? "f32" : "f64");
      else if (p.kind == ParamKind::IntScalar)
        out_ << "i64";
      else
        out_ << (p.elem == ScalarType::F32 ? "f32" : "f64");
    }
    out_ << ") -> ";
    switch (f.ret) {
      case RetType::Void: out_ << "void"; break;
      case RetType::I64: out_ << "i64"; break;
      case RetType::F32: out_ << "f32"; break;
      case RetType::F64: out_ << "f64"; break;
    }
    out_ << " {\n";
    print_block(f.body, 1);
    out_ << "}\n";
  }

  void indent(int depth) {
    for (int i = 0; i < depth; i++) out_ << "  ";
  }

  void print_block(const std::vector<StmtPtr>& body, int depth) {
    for (const auto& s : body) print_stmt(*s, depth);
  }

  static const char* local_type_name(LocalType t) {
    switch (t) {
      case LocalType::I64: return "i64";
      case LocalType::F32: return "f32";
      case LocalType::F64: return "f64";
      case LocalType::Vec4: return "vec4";
      default: return "vec8";
    }
  }

  void print_stmt(const Stmt& s, int depth) {
    indent(depth);
    switch (s.kind) {
      case Stmt::Kind::Let:
        out_ << "let " << s.let_name << ": " << local_type_name(s.let_type);
        if (s.let_init) {
          out_ << " = ";
          print_expr(*s.let_init, 0);
        }
        out_ << ";\n";
        break;
      case Stmt::Kind::Assign:
        out_ << s.target << " = ";
        print_expr(*s.value, 0);
        out_ << ";\n";
        break;
      case Stmt::Kind::Store:
        out_ << s.target << "[";
        print_expr(*s.index, 0);
        out_ << "] = ";
        print_expr(*s.value, 0);
        out_ << ";\n";
        break;
      case Stmt::Kind::For:
        out_ << (s.parallel ? "parfor " : "for ") << s.loop_var << " = ";
        print_expr(*s.lo, 0);
        out_ << " to ";
        print_expr(*s.hi, 0);
        if (!(s.step->kind == Expr::Kind::IntLit && s.step->int_val == 1)) {
          out_ << " step ";
          print_expr(*s.step, 0);
        }
        out_ << " {\n";
        print_block(s.body, depth + 1);
        indent(depth);
        out_ << "}\n";
        break;
      case Stmt::Kind::While:
        out_ << "while ";
        print_expr(*s.cond, 0);
        out_ << " {\n";
        print_block(s.body, depth + 1);
        indent(depth);
        out_ << "}\n";
        break;
      case Stmt::Kind::If:
        print_if(s, depth);
        break;
      case Stmt::Kind::CallStmt:
        print_expr(*s.call, 0);
        out_ << ";\n";
        break;
      case Stmt::Kind::Return:
        out_ << "return";
        if (s.value) {
          out_ << " ";
          print_expr(*s.value, 0);
        }
        out_ << ";\n";
        break;
      case Stmt::Kind::Vec:
        print_vec(s);
        break;
    }
  }

  void print_if(const Stmt& s, int depth) {
    out_ << "if ";
    print_expr(*s.cond, 0);
    out_ << " {\n";
    print_block(s.body, depth + 1);
    indent(depth);
    out_ << "}";
    if (!s.else_body.empty()) {
      // else-if chains collapse onto the closing brace line
      if (s.else_body.size() == 1 && s.else_body[0]->kind == Stmt::Kind::If) {
        out_ << " else ";
        print_if(*s.else_body[0], depth);
        return;
      }
      out_ << " else {\n";
      print_block(s.else_body, depth + 1);
      indent(depth);
      out_ << "}";
    }
    out_ << "\n";
  }

  void print_vec(const Stmt& s) {
    int w = s.vec_width;
    switch (s.vec_op) {
      case VecOp::Load:
        out_ << "vload" << w << " " << s.vec_dst << ", " << s.target << "[";
        print_expr(*s.index, 0);
        out_ << "];\n";
        break;
      case VecOp::Store:
        out_ << "vstore" << w << " " << s.target << "[";
        print_expr(*s.index, 0);
        out_ << "], " << s.vec_a << ";\n";
        break;
      case VecOp::Splat:
        out_ << "vsplat" << w << " " << s.vec_dst << ", ";
        print_expr(*s.value, 0);
        out_ << ";\n";
        break;
      case VecOp::Add:
      case VecOp::Mul:
      case VecOp::Fma: {
        const char* op = s.vec_op == VecOp::Add ? "vadd" : s.vec_op == VecOp::Mul ? "vmul" : "vfma";
        out_ << op << w << " " << s.vec_dst << ", " << s.vec_a << ", " << s.vec_b << ";\n";
        break;
      }
      case VecOp::Reduce:
        out_ << "vreduce" << w << " " << s.target << ", " << s.vec_a << ";\n";
        break;
    }
  }

  static int prec_of(BinOp op) {
    switch (op) {
      case BinOp::Or: return 1;
      case BinOp::And: return 2;
      case BinOp::Lt: case BinOp::Le: case BinOp::Gt:
      case BinOp::Ge: case BinOp::Eq: case BinOp::Ne: return 3;
      case BinOp::Add: case BinOp::Sub: return 4;
      default: return 5;
    }
  }

  static const char* op_text(BinOp op) {
    switch (op) {
      case BinOp::Add: return "+";
      case BinOp::Sub: return "-";
      case BinOp::Mul: return "*";
      case BinOp::Div: return "/";
      case BinOp::Mod: return "%";
      case BinOp::Lt: return "<";
      case BinOp::Le: return "<=";
      case BinOp::Gt: return ">";
      case BinOp::Ge: return ">=";
      case BinOp::Eq: return "==";
      case BinOp::Ne: return "!=";
      case BinOp::And: return "&&";
      default: return "||";
    }
  }

  void print_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string s = buf;
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
      s += ".0";
    out_ << s;
  }

  void print_expr(const Expr& e, int parent_prec) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        out_ << e.int_val;
        break;
      case Expr::Kind::FloatLit:
        print_float(e.float_val);
        break;
      case Expr::Kind::Var:
        out_ << e.name;
        break;
      case Expr::Kind::Index:
        out_ << e.name << "[";
        print_expr(*e.args[0], 0);
        out_ << "]";
        break;
      case Expr::Kind::Call:
        out_ << e.name << "(";
        for (size_t i = 0; i < e.args.size(); i++) {
          if (i) out_ << ", ";
          print_expr(*e.args[i], 0);
        }
        out_ << ")";
        break;
      case Expr::Kind::Unary:
        out_ << (e.uop == UnOp::Neg ? "-" : "!");
        // parenthesize any non-primary operand
        if (e.args[0]->kind == Expr::Kind::Binary || e.args[0]->kind == Expr::Kind::Unary) {
          out_ << "(";
          print_expr(*e.args[0], 0);
          out_ << ")";
        } else {
          print_expr(*e.args[0], 0);
        }
        break;
      case Expr::Kind::Binary: {
        int prec = prec_of(e.bop);
        bool parens = prec < parent_prec;
        if (parens) out_ << "(";
        print_expr(*e.args[0], prec);
        out_ << " " << op_text(e.bop) << " ";
        print_expr(*e.args[1], prec + 1);  // left-associative
        if (parens) out_ << ")";
        break;
      }
    }
  }

  std::ostringstream out_;
};

// -------------------------------------------------------------- equality --

bool equal_stmt(const Stmt& a, const Stmt& b);

bool equal_expr_opt(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool equal_block(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); i++)
    if (!equal_stmt(*a[i], *b[i])) return false;
  return true;
}

bool equal_stmt(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Stmt::Kind::Let:
      return a.let_name == b.let_name && a.let_type == b.let_type &&
             equal_expr_opt(a.let_init, b.let_init);
    case Stmt::Kind::Assign:
      return a.target == b.target && equal(*a.value, *b.value);
    case Stmt::Kind::Store:
      return a.target == b.target && equal(*a.index, *b.index) && equal(*a.value, *b.value);
    case Stmt::Kind::For:
      return a.parallel == b.parallel && a.loop_var == b.loop_var && equal(*a.lo, *b.lo) &&
             equal(*a.hi, *b.hi) && equal(*a.step, *b.step) && equal_block(a.body, b.body);
    case Stmt::Kind::While:
      return equal(*a.cond, *b.cond) && equal_block(a.body, b.body);
    case Stmt::Kind::If:
      return equal(*a.cond, *b.cond) && equal_block(a.body, b.body) &&
             equal_block(a.else_body, b.else_body);
    case Stmt::Kind::CallStmt:
      return equal(*a.call, *b.call);
    case Stmt::Kind::Return:
      return equal_expr_opt(a.value, b.value);
    case Stmt::Kind::Vec:
      return a.vec_op == b.vec_op && a.vec_width == b.vec_width && a.vec_dst == b.vec_dst &&
             a.vec_a == b.vec_a && a.vec_b == b.vec_b && a.target == b.target &&
             equal_expr_opt(a.index, b.index) && equal_expr_opt(a.value, b.value);
  }
  return false;
}

StmtPtr clone_stmt(const Stmt& s) {
  auto c = std::make_unique<Stmt>();
  c->kind = s.kind;
  c->line = s.line;
  c->col = s.col;
  c->let_name = s.let_name;
  c->let_type = s.let_type;
  if (s.let_init) c->let_init = Parser::clone_expr(*s.let_init);
  c->target = s.target;
  if (s.index) c->index = Parser::clone_expr(*s.index);
  if (s.value) c->value = Parser::clone_expr(*s.value);
  c->loop_var = s.loop_var;
  if (s.lo) c->lo = Parser::clone_expr(*s.lo);
  if (s.hi) c->hi = Parser::clone_expr(*s.hi);
  if (s.step) c->step = Parser::clone_expr(*s.step);
  c->parallel = s.parallel;
  for (const auto& t : s.body) c->body.push_back(clone_stmt(*t));
  if (s.cond) c->cond = Parser::clone_expr(*s.cond);
  for (const auto& t : s.else_body) c->else_body.push_back(clone_stmt(*t));
  if (s.call) c->call = Parser::clone_expr(*s.call);
  c->vec_op = s.vec_op;
  c->vec_width = s.vec_width;
  c->vec_dst = s.vec_dst;
  c->vec_a = s.vec_a;
  c->vec_b = s.vec_b;
  return c;
}

}  // namespace

bool is_dispatch_builtin(const std::string& name) {
  return name.rfind("atc_dispatch_", 0) == 0;
}

bool is_builtin(const std::string& name) {
  return name == "min" || name == "max" || name == "to_i64" || name == "to_f64" ||
         name == "fabs" || name == "sqrt" || is_dispatch_builtin(name);
}

Program parse_program(const std::string& source) {
  Parser parser(source);
  Program p = parser.parse();
  Resolver(p).run();
  return p;
}

std::string pretty_print(const Program& p) { return Printer().print(p); }
std::string pretty_print(const FunctionIR& f) { return Printer().print_one(f); }

std::vector<std::string> list_functions(const Program& p) {
  std::vector<std::string> names;
  for (const auto& f : p.functions) names.push_back(f.name);
  return names;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::IntLit: return a.int_val == b.int_val;
    case Expr::Kind::FloatLit: return a.float_val == b.float_val;
    case Expr::Kind::Var: return a.name == b.name;
    default: break;
  }
  if (a.name != b.name) return false;
  if (a.kind == Expr::Kind::Binary && a.bop != b.bop) return false;
  if (a.kind == Expr::Kind::Unary && a.uop != b.uop) return false;
  if (a.args.size() != b.args.size()) return false;
  for (size_t i = 0; i < a.args.size(); i++)
    if (!equal(*a.args[i], *b.args[i])) return false;
  return true;
}

bool equal(const FunctionIR& a, const FunctionIR& b) {
  if (a.name != b.name || a.ret != b.ret || a.params.size() != b.params.size()) return false;
  for (size_t i = 0; i < a.params.size(); i++) {
    const Param &pa = a.params[i], &pb = b.params[i];
    if (pa.name != pb.name || pa.kind != pb.kind || pa.elem != pb.elem) return false;
  }
  return equal_block(a.body, b.body);
}

bool equal(const Program& a, const Program& b) {
  if (a.functions.size() != b.functions.size()) return false;
  for (size_t i = 0; i < a.functions.size(); i++)
    if (!equal(a.functions[i], b.functions[i])) return false;
  return true;
}

FunctionIR clone_function(const FunctionIR& f) {
  FunctionIR c;
  c.name = f.name;
  c.params = f.params;
  c.ret = f.ret;
  c.line = f.line;
  c.col = f.col;
  for (const auto& s : f.body) c.body.push_back(clone_stmt(*s));
  return c;
}

Program clone(const Program& p) {
  Program c;
  for (const auto& f : p.functions) c.functions.push_back(clone_function(f));
  return c;
}

}  // namespace liftc::minilang
