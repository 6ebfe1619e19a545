#include "liftc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

namespace liftc::classifier {

using namespace minilang;
using nlohmann::json;

namespace {

enum Feature {
  kLoopsDepth1 = 0,
  kLoopsDepth2,
  kLoopsDepth3,
  kLoopsDepth4,
  kLoopsDepth5,  // depth >= 5 clamps here
  kMulCount,
  kAddCount,
  kFmaCount,
  kLoadCount,
  kStoreCount,
  kCallCount,
  kVectorOpCount,
  kPointerParams,
  kIntScalarParams,
  kMaxIndexArity,
  kAccumCount,
};

class Extractor {
 public:
  explicit Extractor(const Program& p) : prog_(p) { fv_.fill(0.0); }

  FeatureVector run(const FunctionIR& f) {
    fv_[kPointerParams] = count_params(f, ParamKind::Pointer);
    fv_[kIntScalarParams] = count_params(f, ParamKind::IntScalar);
    walk_function(f, 0);
    return fv_;
  }

 private:
  static double count_params(const FunctionIR& f, ParamKind k) {
    double n = 0;
    for (const auto& p : f.params)
      if (p.kind == k) n++;
    return n;
  }

  void walk_function(const FunctionIR& f, int loop_depth) {
    if (std::find(stack_.begin(), stack_.end(), f.name) != stack_.end()) return;
    stack_.push_back(f.name);
    walk_block(f.body, loop_depth);
    stack_.pop_back();
  }

  void walk_block(const std::vector<StmtPtr>& body, int depth) {
    for (const auto& s : body) walk_stmt(*s, depth);
  }

  void count_loop(int depth) {
    int bucket = std::min(depth, 5);
    fv_[kLoopsDepth1 + bucket - 1] += 1;
  }

  void walk_stmt(const Stmt& s, int depth) {
    switch (s.kind) {
      case Stmt::Kind::Let:
        if (s.let_init) walk_expr(*s.let_init, depth);
        break;
      case Stmt::Kind::Assign:
        walk_expr(*s.value, depth);
        if (reads_var(*s.value, s.target)) fv_[kAccumCount] += 1;
        break;
      case Stmt::Kind::Store:
        note_index(*s.index);
        walk_expr(*s.index, depth);
        walk_expr(*s.value, depth);
        fv_[kStoreCount] += 1;
        if (reads_cell(*s.value, s.target, *s.index)) fv_[kAccumCount] += 1;
        break;
      case Stmt::Kind::For:
        count_loop(depth + 1);
        walk_expr(*s.lo, depth);
        walk_expr(*s.hi, depth);
        walk_expr(*s.step, depth);
        walk_block(s.body, depth + 1);
        break;
      case Stmt::Kind::While:
        count_loop(depth + 1);
        walk_expr(*s.cond, depth);
        walk_block(s.body, depth + 1);
        break;
      case Stmt::Kind::If:
        walk_expr(*s.cond, depth);
        walk_block(s.body, depth);
        walk_block(s.else_body, depth);
        break;
      case Stmt::Kind::CallStmt:
        walk_expr(*s.call, depth);
        break;
      case Stmt::Kind::Return:
        if (s.value) walk_expr(*s.value, depth);
        break;
      case Stmt::Kind::Vec:
        fv_[kVectorOpCount] += 1;
        if (s.index) {
          note_index(*s.index);
          walk_expr(*s.index, depth);
        }
        if (s.value) walk_expr(*s.value, depth);
        if (s.vec_op == VecOp::Load) fv_[kLoadCount] += 1;
        if (s.vec_op == VecOp::Store) fv_[kStoreCount] += 1;
        if (s.vec_op == VecOp::Fma) {
          fv_[kFmaCount] += 1;
          fv_[kAccumCount] += 1;
        }
        break;
    }
  }

  void walk_expr(const Expr& e, int depth) {
    switch (e.kind) {
      case Expr::Kind::Index:
        fv_[kLoadCount] += 1;
        note_index(*e.args[0]);
        walk_expr(*e.args[0], depth);
        break;
      case Expr::Kind::Binary:
        if (e.bop == BinOp::Mul) fv_[kMulCount] += 1;
        if (e.bop == BinOp::Add || e.bop == BinOp::Sub) fv_[kAddCount] += 1;
        if (e.bop == BinOp::Add &&
            (e.args[0]->kind == Expr::Kind::Binary && e.args[0]->bop == BinOp::Mul))
          fv_[kFmaCount] += 1;
        else if (e.bop == BinOp::Add &&
                 (e.args[1]->kind == Expr::Kind::Binary && e.args[1]->bop == BinOp::Mul))
          fv_[kFmaCount] += 1;
        walk_expr(*e.args[0], depth);
        walk_expr(*e.args[1], depth);
        break;
      case Expr::Kind::Unary:
        walk_expr(*e.args[0], depth);
        break;
      case Expr::Kind::Call: {
        fv_[kCallCount] += 1;
        for (const auto& a : e.args) walk_expr(*a, depth);
        if (!is_builtin(e.name)) {
          const FunctionIR* callee = prog_.find(e.name);
          if (callee) walk_function(*callee, depth);
        }
        break;
      }
      default:
        break;
    }
  }

  // arity of an index expression = number of distinct variables inside it
  void note_index(const Expr& idx) {
    std::set<std::string> vars;
    collect_vars(idx, vars);
    fv_[kMaxIndexArity] = std::max(fv_[kMaxIndexArity], (double)vars.size());
  }

  static void collect_vars(const Expr& e, std::set<std::string>& out) {
    if (e.kind == Expr::Kind::Var) out.insert(e.name);
    if (e.kind == Expr::Kind::Index) out.insert(e.name);
    for (const auto& a : e.args) collect_vars(*a, out);
  }

  static bool reads_var(const Expr& e, const std::string& name) {
    if (e.kind == Expr::Kind::Var && e.name == name) return true;
    for (const auto& a : e.args)
      if (reads_var(*a, name)) return true;
    return false;
  }

  static bool reads_cell(const Expr& e, const std::string& arr, const Expr& idx) {
    if (e.kind == Expr::Kind::Index && e.name == arr && equal(*e.args[0], idx)) return true;
    for (const auto& a : e.args)
      if (reads_cell(*a, arr, idx)) return true;
    return false;
  }

  const Program& prog_;
  FeatureVector fv_;
  std::vector<std::string> stack_;
};

std::vector<double> to_z(const ClassifierModel& m, const FeatureVector& fv) {
  std::vector<double> z(kNumFeatures, 0.0);
  for (int i = 0; i < kNumFeatures; i++)
    if (m.stddev[i] > 0.0) z[i] = (fv[i] - m.mean[i]) / m.stddev[i];
  return z;
}

}  // namespace

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = {
      "loops_depth1", "loops_depth2", "loops_depth3", "loops_depth4", "loops_depth5",
      "mul_count", "add_count", "fma_count", "load_count", "store_count",
      "call_count", "vector_op_count", "pointer_params", "int_scalar_params",
      "max_index_arity", "accum_count"};
  return names;
}

FeatureVector extract_features(const Program& p, const FunctionIR& f) {
  return Extractor(p).run(f);
}

ClassifierModel train_classifier(
    const std::vector<std::pair<FeatureVector, std::string>>& examples) {
  std::map<std::string, int> per_label;
  for (const auto& [fv, label] : examples) per_label[label]++;
  if (per_label.size() < 2)
    throw InsufficientData("need at least 2 distinct labels, got " +
                           std::to_string(per_label.size()));
  for (const auto& [label, n] : per_label)
    if (n < 3)
      throw InsufficientData("label '" + label + "' has " + std::to_string(n) +
                             " examples, need at least 3");

  ClassifierModel m;
  for (const auto& [label, cnt] : per_label) m.labels.push_back(label);  // map keys: sorted

  // Features are integer counts, so plain and squared sums are exact in
  // doubles. Population statistics derived from those sums make training
  // invariant under corpus duplication, bit for bit.
  std::vector<double> sum(kNumFeatures, 0.0), sum_sq(kNumFeatures, 0.0);
  std::vector<std::vector<double>> label_sum(m.labels.size(),
                                             std::vector<double>(kNumFeatures, 0.0));
  std::vector<double> label_n(m.labels.size(), 0.0);
  for (const auto& [fv, label] : examples) {
    size_t li = std::lower_bound(m.labels.begin(), m.labels.end(), label) - m.labels.begin();
    label_n[li] += 1.0;
    for (int i = 0; i < kNumFeatures; i++) {
      sum[i] += fv[i];
      sum_sq[i] += fv[i] * fv[i];
      label_sum[li][i] += fv[i];
    }
  }
  double n = (double)examples.size();
  m.mean.assign(kNumFeatures, 0.0);
  m.stddev.assign(kNumFeatures, 0.0);
  for (int i = 0; i < kNumFeatures; i++) {
    m.mean[i] = sum[i] / n;
    double var = sum_sq[i] / n - m.mean[i] * m.mean[i];
    m.stddev[i] = var > 0.0 ? std::sqrt(var) : 0.0;
    if (m.stddev[i] == 0.0) m.dropped.push_back(i);
  }

  m.centroids.assign(m.labels.size(), std::vector<double>(kNumFeatures, 0.0));
  for (size_t li = 0; li < m.labels.size(); li++)
    for (int i = 0; i < kNumFeatures; i++)
      if (m.stddev[i] > 0.0)
        m.centroids[li][i] = (label_sum[li][i] / label_n[li] - m.mean[i]) / m.stddev[i];
  return m;
}

Classification classify(const ClassifierModel& m, const FeatureVector& fv) {
  std::vector<double> z = to_z(m, fv);
  std::vector<double> dist(m.labels.size(), 0.0);
  for (size_t li = 0; li < m.labels.size(); li++) {
    double d2 = 0.0;
    for (int i = 0; i < kNumFeatures; i++) {
      if (m.stddev[i] == 0.0) continue;
      double d = z[i] - m.centroids[li][i];
      d2 += d * d;
    }
    dist[li] = std::sqrt(d2);
  }
  // softmax over negative distances
  double mn = *std::min_element(dist.begin(), dist.end());
  double denom = 0.0;
  std::vector<double> w(dist.size());
  for (size_t i = 0; i < dist.size(); i++) {
    w[i] = std::exp(mn - dist[i]);
    denom += w[i];
  }
  Classification out;
  size_t best = 0;
  for (size_t i = 0; i < dist.size(); i++) {
    out.all_scores.emplace_back(m.labels[i], w[i] / denom);
    if (w[i] > w[best]) best = i;  // exact ties keep the lexicographically first label
  }
  out.label = m.labels[best];
  out.score = w[best] / denom;
  return out;
}

void save_model(const ClassifierModel& m, const std::string& path) {
  json j;
  j["schema"] = "classifier-model";
  j["feature_version"] = m.feature_version;
  j["feature_names"] = feature_names();
  j["labels"] = m.labels;
  j["centroids"] = m.centroids;
  j["mean"] = m.mean;
  j["stddev"] = m.stddev;
  j["dropped_features"] = m.dropped;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

ClassifierModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j = json::parse(in);
  ClassifierModel m;
  m.feature_version = j.at("feature_version").get<int>();
  if (m.feature_version != kFeatureSchemaVersion)
    throw std::runtime_error("classifier model feature version " +
                             std::to_string(m.feature_version) + " does not match " +
                             std::to_string(kFeatureSchemaVersion));
  m.labels = j.at("labels").get<std::vector<std::string>>();
  m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
  m.mean = j.at("mean").get<std::vector<double>>();
  m.stddev = j.at("stddev").get<std::vector<double>>();
  m.dropped = j.at("dropped_features").get<std::vector<int>>();
  return m;
}

}  // namespace liftc::classifier
