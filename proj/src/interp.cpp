#include "liftc/interp.hpp"

#include <cmath>
#include <cstdlib>

namespace liftc::interp {

using namespace minilang;

namespace {

constexpr int kMaxCallDepth = 1024;
constexpr size_t kTraceCap = 1u << 20;

struct Fault {
  ExecStatus status;
  std::string msg;
};

struct Value {
  bool is_int = true;
  long long i = 0;
  double f = 0.0;

  static Value make_int(long long v) { return Value{true, v, 0.0}; }
  static Value make_float(double v) { return Value{false, 0, v}; }
  double as_double() const { return is_int ? (double)i : f; }
  bool truthy() const { return is_int ? i != 0 : f != 0.0; }
};

struct Slot {
  enum class Kind { Scalar, Vec, Ptr };
  Kind kind = Kind::Scalar;
  Value v;
  bool round_f32 = false;  // f32 scalars round on every write
  std::array<double, 8> lanes{};
  int width = 0;
  std::string region;  // Ptr: root region key
};

struct ReturnSignal {
  Value v;
  bool has = false;
};

class Interp {
 public:
  Interp(const Program& prog, const MemoryImage& input, const InstrumentationPolicy& policy,
         unsigned long long step_limit)
      : prog_(prog), policy_(policy), step_limit_(step_limit), mem_(input) {
    if (policy_.track_writes)
      for (const auto& [name, r] : mem_.regions)
        writes_[name].assign(r.data.size(), false);
  }

  ExecutionOutcome run(const std::string& function) {
    ExecutionOutcome out;
    const FunctionIR* f = prog_.find(function);
    try {
      if (!f) throw Fault{ExecStatus::RuntimeFault, "no function named '" + function + "'"};
      std::vector<Slot> args;
      for (const auto& p : f->params) args.push_back(root_arg(p));
      ReturnSignal ret = call(*f, args);
      out.status = ExecStatus::Normal;
      out.has_ret = ret.has;
      if (ret.has) {
        out.ret_is_int = ret.v.is_int;
        out.ret_int = ret.v.i;
        out.ret_float = ret.v.f;
      }
      out.final = std::move(mem_);
      out.writes = std::move(writes_);
      out.trace = std::move(trace_);
    } catch (const Fault& flt) {
      out.status = flt.status;
      out.fault_msg = flt.msg;
    }
    out.steps = steps_;
    out.max_target_offset = max_target_offset_;
    return out;
  }

 private:
  Slot root_arg(const Param& p) {
    Slot s;
    switch (p.kind) {
      case ParamKind::IntScalar: {
        auto it = mem_.int_args.find(p.name);
        if (it == mem_.int_args.end())
          throw Fault{ExecStatus::RuntimeFault, "missing integer argument '" + p.name + "'"};
        s.kind = Slot::Kind::Scalar;
        s.v = Value::make_int(it->second);
        break;
      }
      case ParamKind::FloatScalar: {
        auto it = mem_.float_args.find(p.name);
        if (it == mem_.float_args.end())
          throw Fault{ExecStatus::RuntimeFault, "missing float argument '" + p.name + "'"};
        double v = it->second;
        s.kind = Slot::Kind::Scalar;
        s.round_f32 = p.elem == ScalarType::F32;
        s.v = Value::make_float(s.round_f32 ? (double)(float)v : v);
        break;
      }
      case ParamKind::Pointer: {
        if (policy_.mode == ExecMode::Plain) {
          if (!mem_.regions.count(p.name))
            throw Fault{ExecStatus::RuntimeFault, "missing region '" + p.name + "'"};
        }
        s.kind = Slot::Kind::Ptr;
        s.region = p.name;
        break;
      }
    }
    return s;
  }

  // ----------------------------------------------------------- frames --

  struct Frame {
    const FunctionIR* fn = nullptr;
    std::vector<std::map<std::string, Slot>> scopes;
  };

  Frame& frame() { return frames_.back(); }

  Slot& declare(const std::string& name, Slot s) {
    return frame().scopes.back()[name] = std::move(s);
  }

  Slot& lookup(const std::string& name) {
    auto& scopes = frame().scopes;
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    throw Fault{ExecStatus::RuntimeFault, "unbound identifier '" + name + "'"};
  }

  ReturnSignal call(const FunctionIR& f, std::vector<Slot>& args) {
    if (frames_.size() >= kMaxCallDepth)
      throw Fault{ExecStatus::RuntimeFault, "call depth limit exceeded in '" + f.name + "'"};
    frames_.emplace_back();
    frame().fn = &f;
    frame().scopes.emplace_back();
    for (size_t i = 0; i < f.params.size(); i++)
      declare(f.params[i].name, std::move(args[i]));

    ReturnSignal ret;
    try {
      exec_block(f.body);
    } catch (ReturnSignal& r) {
      ret = std::move(r);
    }
    frames_.pop_back();
    if (ret.has) {
      // round the value through the declared return precision
      if (f.ret == RetType::F32)
        ret.v = Value::make_float((double)(float)ret.v.as_double());
      else if (f.ret == RetType::F64)
        ret.v = Value::make_float(ret.v.as_double());
      else if (f.ret == RetType::I64 && !ret.v.is_int)
        throw Fault{ExecStatus::RuntimeFault, "float returned from i64 function"};
    }
    return ret;
  }

  // ----------------------------------------------------------- memory --

  Region& region_of(const std::string& key) {
    auto it = mem_.regions.find(key);
    if (it == mem_.regions.end())
      throw Fault{ExecStatus::RuntimeFault, "unbound region '" + key + "'"};
    return it->second;
  }

  void record_trace(long long off) {
    if (policy_.record_trace && trace_.size() < kTraceCap) trace_.push_back(off);
    if (off > max_target_offset_) max_target_offset_ = off;
  }

  double load(const std::string& region_key, long long off) {
    if (policy_.mode == ExecMode::DimProbe) {
      if (region_key != policy_.target) return policy_.scratch_value;
      record_trace(off);
      if (off < 0 || off >= policy_.target_extent)
        throw Fault{ExecStatus::OutOfBounds,
                    "load offset " + std::to_string(off) + " outside extent " +
                        std::to_string(policy_.target_extent)};
      return policy_.scratch_value;
    }
    Region& r = region_of(region_key);
    if (off < 0 || off >= (long long)r.data.size())
      throw Fault{ExecStatus::RuntimeFault,
                  "load offset " + std::to_string(off) + " outside region '" + region_key + "'"};
    return r.data[(size_t)off];
  }

  void store(const std::string& region_key, long long off, double v) {
    if (policy_.mode == ExecMode::DimProbe) {
      if (region_key != policy_.target) return;
      record_trace(off);
      if (off < 0 || off >= policy_.target_extent)
        throw Fault{ExecStatus::OutOfBounds,
                    "store offset " + std::to_string(off) + " outside extent " +
                        std::to_string(policy_.target_extent)};
      return;
    }
    Region& r = region_of(region_key);
    if (off < 0 || off >= (long long)r.data.size())
      throw Fault{ExecStatus::RuntimeFault,
                  "store offset " + std::to_string(off) + " outside region '" + region_key + "'"};
    r.data[(size_t)off] = r.elem == ScalarType::F32 ? (double)(float)v : v;
    if (policy_.track_writes) writes_[region_key][(size_t)off] = true;
  }

  // -------------------------------------------------------- statements --

  void count_step() {
    if (++steps_ > step_limit_)
      throw Fault{ExecStatus::StepLimit, "statement budget exhausted"};
  }

  void exec_block(const std::vector<StmtPtr>& body) {
    frame().scopes.emplace_back();
    for (const auto& s : body) exec_stmt(*s);
    frame().scopes.pop_back();
  }

  void exec_stmt(const Stmt& s) {
    count_step();
    switch (s.kind) {
      case Stmt::Kind::Let: {
        Slot slot;
        switch (s.let_type) {
          case LocalType::I64:
            slot.v = Value::make_int(0);
            break;
          case LocalType::F32:
            slot.round_f32 = true;
            slot.v = Value::make_float(0.0);
            break;
          case LocalType::F64:
            slot.v = Value::make_float(0.0);
            break;
          case LocalType::Vec4:
            slot.kind = Slot::Kind::Vec;
            slot.width = 4;
            break;
          case LocalType::Vec8:
            slot.kind = Slot::Kind::Vec;
            slot.width = 8;
            break;
        }
        if (s.let_init) {
          Value v = eval(*s.let_init);
          if (s.let_type == LocalType::I64)
            slot.v = v;  // resolver guarantees an integer expression
          else
            slot.v = Value::make_float(slot.round_f32 ? (double)(float)v.as_double()
                                                      : v.as_double());
        }
        declare(s.let_name, std::move(slot));
        break;
      }
      case Stmt::Kind::Assign: {
        Value v = eval(*s.value);
        Slot& slot = lookup(s.target);
        if (slot.v.is_int)
          slot.v = v;
        else
          slot.v = Value::make_float(slot.round_f32 ? (double)(float)v.as_double()
                                                    : v.as_double());
        break;
      }
      case Stmt::Kind::Store: {
        long long off = eval(*s.index).i;
        Value v = eval(*s.value);
        store(lookup(s.target).region, off, v.as_double());
        break;
      }
      case Stmt::Kind::For: {
        long long lo = eval(*s.lo).i;
        long long hi = eval(*s.hi).i;
        long long step = eval(*s.step).i;
        if (step <= 0)
          throw Fault{ExecStatus::RuntimeFault, "loop step must be positive"};
        for (long long iv = lo; iv < hi; iv += step) {
          frame().scopes.emplace_back();
          Slot ls;
          ls.v = Value::make_int(iv);
          declare(s.loop_var, std::move(ls));
          for (const auto& st : s.body) exec_stmt(*st);
          frame().scopes.pop_back();
        }
        break;
      }
      case Stmt::Kind::While:
        while (eval(*s.cond).truthy()) {
          count_step();  // each iteration re-tests the condition
          exec_block(s.body);
        }
        break;
      case Stmt::Kind::If:
        if (eval(*s.cond).truthy())
          exec_block(s.body);
        else
          exec_block(s.else_body);
        break;
      case Stmt::Kind::CallStmt:
        eval(*s.call);
        break;
      case Stmt::Kind::Return: {
        ReturnSignal r;
        if (s.value) {
          r.v = eval(*s.value);
          r.has = true;
        }
        throw r;
      }
      case Stmt::Kind::Vec:
        exec_vec(s);
        break;
    }
  }

  void exec_vec(const Stmt& s) {
    switch (s.vec_op) {
      case VecOp::Load: {
        long long base = eval(*s.index).i;
        Slot& dst = lookup(s.vec_dst);
        const std::string& key = lookup(s.target).region;
        for (int l = 0; l < s.vec_width; l++) dst.lanes[l] = load(key, base + l);
        break;
      }
      case VecOp::Store: {
        long long base = eval(*s.index).i;
        Slot& src = lookup(s.vec_a);
        const std::string& key = lookup(s.target).region;
        for (int l = 0; l < s.vec_width; l++) store(key, base + l, src.lanes[l]);
        break;
      }
      case VecOp::Splat: {
        double v = eval(*s.value).as_double();
        Slot& dst = lookup(s.vec_dst);
        for (int l = 0; l < s.vec_width; l++) dst.lanes[l] = v;
        break;
      }
      case VecOp::Add:
      case VecOp::Mul:
      case VecOp::Fma: {
        Slot& a = lookup(s.vec_a);
        Slot& b = lookup(s.vec_b);
        Slot& dst = lookup(s.vec_dst);
        for (int l = 0; l < s.vec_width; l++) {
          if (s.vec_op == VecOp::Add)
            dst.lanes[l] = a.lanes[l] + b.lanes[l];
          else if (s.vec_op == VecOp::Mul)
            dst.lanes[l] = a.lanes[l] * b.lanes[l];
          else
            dst.lanes[l] += a.lanes[l] * b.lanes[l];
        }
        break;
      }
      case VecOp::Reduce: {
        Slot& src = lookup(s.vec_a);
        double sum = 0.0;
        for (int l = 0; l < s.vec_width; l++) sum += src.lanes[l];
        Slot& dst = lookup(s.target);
        dst.v = Value::make_float(dst.round_f32 ? (double)(float)sum : sum);
        break;
      }
    }
  }

  // ------------------------------------------------------- expressions --

  Value eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        return Value::make_int(e.int_val);
      case Expr::Kind::FloatLit:
        return Value::make_float(e.float_val);
      case Expr::Kind::Var: {
        Slot& s = lookup(e.name);
        if (s.kind != Slot::Kind::Scalar)
          throw Fault{ExecStatus::RuntimeFault, "'" + e.name + "' is not a scalar"};
        return s.v;
      }
      case Expr::Kind::Index: {
        long long off = eval(*e.args[0]).i;
        return Value::make_float(load(lookup(e.name).region, off));
      }
      case Expr::Kind::Unary: {
        if (e.uop == UnOp::Not) return Value::make_int(eval(*e.args[0]).truthy() ? 0 : 1);
        Value v = eval(*e.args[0]);
        return v.is_int ? Value::make_int(-v.i) : Value::make_float(-v.f);
      }
      case Expr::Kind::Binary:
        return eval_binary(e);
      case Expr::Kind::Call:
        return eval_call(e);
    }
    return Value::make_int(0);
  }

  Value eval_binary(const Expr& e) {
    if (e.bop == BinOp::And) {
      if (!eval(*e.args[0]).truthy()) return Value::make_int(0);
      return Value::make_int(eval(*e.args[1]).truthy() ? 1 : 0);
    }
    if (e.bop == BinOp::Or) {
      if (eval(*e.args[0]).truthy()) return Value::make_int(1);
      return Value::make_int(eval(*e.args[1]).truthy() ? 1 : 0);
    }
    Value a = eval(*e.args[0]);
    Value b = eval(*e.args[1]);
    bool float_op = !a.is_int || !b.is_int;
    switch (e.bop) {
      case BinOp::Add:
        return float_op ? Value::make_float(a.as_double() + b.as_double())
                        : Value::make_int(a.i + b.i);
      case BinOp::Sub:
        return float_op ? Value::make_float(a.as_double() - b.as_double())
                        : Value::make_int(a.i - b.i);
      case BinOp::Mul:
        return float_op ? Value::make_float(a.as_double() * b.as_double())
                        : Value::make_int(a.i * b.i);
      case BinOp::Div:
        if (float_op) {
          if (b.as_double() == 0.0)
            throw Fault{ExecStatus::RuntimeFault, "float division by zero"};
          return Value::make_float(a.as_double() / b.as_double());
        }
        if (b.i == 0) throw Fault{ExecStatus::RuntimeFault, "integer division by zero"};
        return Value::make_int(a.i / b.i);
      case BinOp::Mod:
        if (b.i == 0) throw Fault{ExecStatus::RuntimeFault, "integer modulo by zero"};
        return Value::make_int(a.i % b.i);
      case BinOp::Lt:
        return Value::make_int(float_op ? a.as_double() < b.as_double() : a.i < b.i);
      case BinOp::Le:
        return Value::make_int(float_op ? a.as_double() <= b.as_double() : a.i <= b.i);
      case BinOp::Gt:
        return Value::make_int(float_op ? a.as_double() > b.as_double() : a.i > b.i);
      case BinOp::Ge:
        return Value::make_int(float_op ? a.as_double() >= b.as_double() : a.i >= b.i);
      case BinOp::Eq:
        return Value::make_int(float_op ? a.as_double() == b.as_double() : a.i == b.i);
      case BinOp::Ne:
        return Value::make_int(float_op ? a.as_double() != b.as_double() : a.i != b.i);
      default:
        throw Fault{ExecStatus::RuntimeFault, "bad binary operator"};
    }
  }

  Value eval_call(const Expr& e) {
    const std::string& callee = e.name;
    if (callee == "min" || callee == "max") {
      long long a = eval(*e.args[0]).i;
      long long b = eval(*e.args[1]).i;
      bool lt = a < b;
      return Value::make_int(callee == "min" ? (lt ? a : b) : (lt ? b : a));
    }
    if (callee == "to_i64") {
      Value v = eval(*e.args[0]);
      return v.is_int ? v : Value::make_int((long long)v.f);
    }
    if (callee == "to_f64") return Value::make_float(eval(*e.args[0]).as_double());
    if (callee == "fabs") return Value::make_float(std::fabs(eval(*e.args[0]).as_double()));
    if (callee == "sqrt") {
      double v = eval(*e.args[0]).as_double();
      if (v < 0.0) throw Fault{ExecStatus::RuntimeFault, "sqrt of a negative value"};
      return Value::make_float(std::sqrt(v));
    }
    if (is_dispatch_builtin(callee)) {
      dispatch(e);
      return Value::make_int(0);
    }
    const FunctionIR* f = prog_.find(callee);
    if (!f) throw Fault{ExecStatus::RuntimeFault, "call to unknown function '" + callee + "'"};
    std::vector<Slot> args;
    for (size_t i = 0; i < e.args.size(); i++) {
      const Param& p = f->params[i];
      const Expr& a = *e.args[i];
      Slot s;
      if (p.kind == ParamKind::Pointer) {
        s.kind = Slot::Kind::Ptr;
        s.region = lookup(a.name).region;  // identity flows through the call
      } else {
        Value v = eval(a);
        if (p.kind == ParamKind::FloatScalar) {
          s.round_f32 = p.elem == ScalarType::F32;
          s.v = Value::make_float(s.round_f32 ? (double)(float)v.as_double() : v.as_double());
        } else {
          s.v = v;
        }
      }
      args.push_back(std::move(s));
    }
    ReturnSignal r = call(*f, args);
    return r.has ? r.v : Value::make_int(0);
  }

  void dispatch(const Expr& e) {
    if (!policy_.dispatch || !policy_.dispatch->handler) return;
    std::vector<DispatchArg> args;
    for (const auto& a : e.args) {
      DispatchArg d;
      if (a->kind == Expr::Kind::Var) {
        Slot& s = lookup(a->name);
        if (s.kind == Slot::Kind::Ptr) {
          d.kind = DispatchArg::Kind::Ptr;
          d.region = s.region;
          args.push_back(d);
          continue;
        }
      }
      Value v = eval(*a);
      if (v.is_int) {
        d.kind = DispatchArg::Kind::Int;
        d.i = v.i;
      } else {
        d.kind = DispatchArg::Kind::Float;
        d.f = v.f;
      }
      args.push_back(d);
    }
    policy_.dispatch->handler(e.name, args, mem_);
  }

  const Program& prog_;
  const InstrumentationPolicy& policy_;
  unsigned long long step_limit_;
  unsigned long long steps_ = 0;
  MemoryImage mem_;
  std::map<std::string, std::vector<bool>> writes_;
  std::vector<long long> trace_;
  long long max_target_offset_ = -1;
  std::vector<Frame> frames_;
};

}  // namespace

const char* status_name(ExecStatus s) {
  switch (s) {
    case ExecStatus::Normal: return "Normal";
    case ExecStatus::OutOfBounds: return "OutOfBounds";
    case ExecStatus::StepLimit: return "StepLimit";
    default: return "RuntimeFault";
  }
}

ExecutionOutcome execute(const Program& prog, const std::string& function,
                         const MemoryImage& input, const InstrumentationPolicy& policy,
                         unsigned long long step_limit) {
  return Interp(prog, input, policy, step_limit).run(function);
}

std::vector<std::string> snapshot_diff(const MemoryImage& before, const MemoryImage& after) {
  std::vector<std::string> changed;
  for (const auto& [name, br] : before.regions) {
    auto it = after.regions.find(name);
    if (it == after.regions.end()) continue;
    if (br.data != it->second.data) changed.push_back(name);
  }
  return changed;
}

}  // namespace liftc::interp
