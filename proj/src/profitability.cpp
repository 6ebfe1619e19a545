#include "liftc/profitability.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace liftc::profitability {

void cpu_gemm(const float* a, const float* b, float* c, long long m, long long n, long long k) {
  for (long long i = 0; i < m; ++i)
    for (long long j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (long long p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

namespace {

constexpr long long kTile = 64;

void xpu_stripe(const float* a, const float* b, float* c, long long m, long long n, long long k,
                long long i_begin, long long i_end) {
  for (long long i = i_begin; i < i_end; ++i)
    for (long long j = 0; j < n; ++j) c[i * n + j] = 0.0f;
  for (long long i0 = i_begin; i0 < i_end; i0 += kTile)
    for (long long p0 = 0; p0 < k; p0 += kTile)
      for (long long j0 = 0; j0 < n; j0 += kTile) {
        const long long im = std::min(i0 + kTile, i_end);
        const long long pm = std::min(p0 + kTile, k);
        const long long jm = std::min(j0 + kTile, n);
        for (long long i = i0; i < im; ++i)
          for (long long p = p0; p < pm; ++p) {
            const float av = a[i * k + p];
            for (long long j = j0; j < jm; ++j) c[i * n + j] += av * b[p * n + j];
          }
      }
}

}  // namespace

void xpu_gemm(const float* a, const float* b, float* c, long long m, long long n, long long k) {
  unsigned hw = std::thread::hardware_concurrency();
  long long nthreads = hw == 0 ? 1 : (long long)hw;
  nthreads = std::min<long long>(nthreads, (m + kTile - 1) / kTile);
  if (nthreads <= 1) {
    xpu_stripe(a, b, c, m, n, k, 0, m);
    return;
  }
  std::vector<std::thread> pool;
  const long long chunk = (m + nthreads - 1) / nthreads;
  for (long long t = 0; t < nthreads; ++t) {
    long long lo = t * chunk, hi = std::min(m, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(xpu_stripe, a, b, c, m, n, k, lo, hi);
  }
  for (auto& th : pool) th.join();
}

TimingSample sample_one(const std::vector<long long>& sizes, int reps, double xpu_overhead_sec) {
  if (sizes.size() != 3) throw std::invalid_argument("expected sizes m, n, k");
  if (reps < 3) throw std::invalid_argument("need at least 3 repetitions");
  const long long m = sizes[0], n = sizes[1], k = sizes[2];
  if (m < 1 || n < 1 || k < 1) throw std::invalid_argument("sizes must be positive");

  std::vector<float> a((size_t)(m * k)), b((size_t)(k * n));
  std::vector<float> c_cpu((size_t)(m * n)), c_xpu((size_t)(m * n));
  for (size_t i = 0; i < a.size(); ++i) a[i] = 0.25f + (float)(i % 17) * 0.0625f;
  for (size_t i = 0; i < b.size(); ++i) b[i] = -0.5f + (float)(i % 23) * 0.0625f;

  // verification pass: both paths must agree and stay finite
  cpu_gemm(a.data(), b.data(), c_cpu.data(), m, n, k);
  xpu_gemm(a.data(), b.data(), c_xpu.data(), m, n, k);
  for (size_t i = 0; i < c_cpu.size(); ++i) {
    if (!std::isfinite(c_cpu[i]) || !std::isfinite(c_xpu[i]))
      throw BackendFailure("non-finite backend output");
    const double diff = std::fabs((double)c_cpu[i] - (double)c_xpu[i]);
    if (diff > 1e-3 * (1.0 + std::fabs((double)c_cpu[i])))
      throw BackendFailure("backend results disagree");
  }

  auto median_sec = [&](auto&& fn, float* out) {
    std::vector<double> times;
    times.reserve((size_t)reps);
    for (int r = 0; r < reps; ++r) {
      auto t0 = std::chrono::steady_clock::now();
      fn(out);
      auto t1 = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
  };

  TimingSample s;
  s.sizes = sizes;
  s.t_cpu = median_sec([&](float* out) { cpu_gemm(a.data(), b.data(), out, m, n, k); },
                       c_cpu.data());
  s.t_xpu = median_sec([&](float* out) { xpu_gemm(a.data(), b.data(), out, m, n, k); },
                       c_xpu.data()) +
            xpu_overhead_sec;
  s.label = s.t_xpu < s.t_cpu ? 1 : 0;
  return s;
}

std::vector<TimingSample> sample_timings(const std::vector<std::vector<long long>>& grid, int reps,
                                         double xpu_overhead_sec) {
  if (grid.empty()) throw std::invalid_argument("empty size grid");
  std::vector<TimingSample> out;
  out.reserve(grid.size());
  for (const auto& sizes : grid) out.push_back(sample_one(sizes, reps, xpu_overhead_sec));
  return out;
}

std::vector<std::vector<long long>> training_grid() {
  static const long long ratios[4][3] = {{1, 1, 1}, {1, 2, 3}, {3, 1, 2}, {1, 3, 6}};
  static const long long mags[] = {8, 12, 16, 24, 32, 48, 64, 96, 128, 192};
  std::vector<std::vector<long long>> grid;
  for (const auto& r : ratios)
    for (long long g : mags) grid.push_back({r[0] * g, r[1] * g, r[2] * g});
  return grid;
}

std::vector<std::vector<long long>> holdout_grid() {
  static const long long ratios[4][3] = {{1, 1, 1}, {1, 2, 3}, {3, 1, 2}, {1, 3, 6}};
  static const long long mags[] = {10, 20, 40, 80, 160};
  std::vector<std::vector<long long>> grid;
  for (const auto& r : ratios)
    for (long long g : mags) grid.push_back({r[0] * g, r[1] * g, r[2] * g});
  return grid;
}

double poly_kernel(const std::vector<double>& x, const std::vector<double>& y, double gamma,
                   double coef0, int degree) {
  double dot = 0.0;
  for (size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  return std::pow(gamma * dot + coef0, degree);
}

namespace {

std::vector<double> normalize(const SvmModel& m, const std::vector<long long>& sizes) {
  std::vector<double> x(m.feat_min.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double span = m.feat_max[i] - m.feat_min[i];
    x[i] = span > 0 ? ((double)sizes[i] - m.feat_min[i]) / span : 0.5;
  }
  return x;
}

double expand(const SvmModel& m, const std::vector<double>& x) {
  double v = m.b;
  for (size_t s = 0; s < m.support.size(); ++s)
    v += m.alpha_y[s] * poly_kernel(m.support[s], x, m.gamma, m.coef0, m.degree);
  return v;
}

}  // namespace

SvmModel train_svm(const std::vector<TimingSample>& data) {
  if (data.size() < 10) throw DegenerateData("need at least 10 samples");
  const size_t dim = data[0].sizes.size();
  bool has_pos = false, has_neg = false;
  for (const auto& s : data) {
    if (s.sizes.size() != dim) throw DegenerateData("inconsistent feature dimensions");
    (s.label == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw DegenerateData("single-class training data");

  SvmModel model;
  model.feature_dim = (int)dim;
  model.feat_min.assign(dim, 1e300);
  model.feat_max.assign(dim, -1e300);
  for (const auto& s : data)
    for (size_t i = 0; i < dim; ++i) {
      model.feat_min[i] = std::min(model.feat_min[i], (double)s.sizes[i]);
      model.feat_max[i] = std::max(model.feat_max[i], (double)s.sizes[i]);
    }

  const size_t n = data.size();
  std::vector<std::vector<double>> x(n);
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    x[i] = normalize(model, data[i].sizes);
    y[i] = data[i].label == 1 ? 1.0 : -1.0;
  }

  std::vector<std::vector<double>> K(n, std::vector<double>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j <= i; ++j)
      K[i][j] = K[j][i] = poly_kernel(x[i], x[j], model.gamma, model.coef0, model.degree);

  std::vector<double> alpha(n, 0.0);
  double b = 0.0;
  const double C = model.C, tol = 1e-3, eps = 1e-8;

  auto f_of = [&](size_t i) {
    double v = b;
    for (size_t s = 0; s < n; ++s)
      if (alpha[s] > 0) v += alpha[s] * y[s] * K[s][i];
    return v;
  };

  const int max_passes = 100;
  for (int pass = 0; pass < max_passes; ++pass) {
    int changed = 0;
    for (size_t i = 0; i < n; ++i) {
      const double Ei = f_of(i) - y[i];
      const bool violates =
          (y[i] * Ei < -tol && alpha[i] < C) || (y[i] * Ei > tol && alpha[i] > 0);
      if (!violates) continue;

      // deterministic partner: maximal |Ei - Ej|, lowest index on ties
      size_t j = n;
      double best = -1.0;
      for (size_t cand = 0; cand < n; ++cand) {
        if (cand == i) continue;
        double gap = std::fabs(Ei - (f_of(cand) - y[cand]));
        if (gap > best + 1e-15) {
          best = gap;
          j = cand;
        }
      }
      if (j == n) continue;
      const double Ej = f_of(j) - y[j];

      double L, H;
      if (y[i] != y[j]) {
        L = std::max(0.0, alpha[j] - alpha[i]);
        H = std::min(C, C + alpha[j] - alpha[i]);
      } else {
        L = std::max(0.0, alpha[i] + alpha[j] - C);
        H = std::min(C, alpha[i] + alpha[j]);
      }
      if (H - L < eps) continue;
      const double eta = 2.0 * K[i][j] - K[i][i] - K[j][j];
      if (eta >= -eps) continue;

      const double aj_old = alpha[j], ai_old = alpha[i];
      double aj = aj_old - y[j] * (Ei - Ej) / eta;
      aj = std::min(H, std::max(L, aj));
      if (std::fabs(aj - aj_old) < eps) continue;
      const double ai = ai_old + y[i] * y[j] * (aj_old - aj);
      alpha[i] = ai;
      alpha[j] = aj;

      const double b1 = b - Ei - y[i] * (ai - ai_old) * K[i][i] - y[j] * (aj - aj_old) * K[i][j];
      const double b2 = b - Ej - y[i] * (ai - ai_old) * K[i][j] - y[j] * (aj - aj_old) * K[j][j];
      if (ai > eps && ai < C - eps)
        b = b1;
      else if (aj > eps && aj < C - eps)
        b = b2;
      else
        b = 0.5 * (b1 + b2);
      ++changed;
    }
    if (changed == 0) break;
  }

  model.b = b;
  for (size_t i = 0; i < n; ++i) {
    if (alpha[i] > 1e-12) {
      model.support.push_back(x[i]);
      model.alpha_y.push_back(alpha[i] * y[i]);
    }
  }
  if (model.support.empty()) throw DegenerateData("optimization kept no support vectors");

  size_t correct = 0;
  for (size_t i = 0; i < n; ++i)
    if ((expand(model, x[i]) >= 0.0 ? 1.0 : -1.0) == y[i]) ++correct;
  model.train_accuracy = (double)correct / (double)n;
  return model;
}

double decision_value(const SvmModel& m, const std::vector<long long>& sizes) {
  return expand(m, normalize(m, sizes));
}

int predict_backend(const SvmModel& m, const std::vector<long long>& sizes) {
  return decision_value(m, sizes) >= 0.0 ? 1 : 0;
}

Prediction predict_backend_timed(const SvmModel& m, const std::vector<long long>& sizes) {
  auto t0 = std::chrono::steady_clock::now();
  int backend = predict_backend(m, sizes);
  auto t1 = std::chrono::steady_clock::now();
  return {backend, std::chrono::duration<double, std::milli>(t1 - t0).count()};
}

void save_svm(const SvmModel& m, const std::string& path) {
  nlohmann::json j;
  j["kernel"] = {{"type", "poly"}, {"gamma", m.gamma}, {"coef0", m.coef0}, {"degree", m.degree}};
  j["C"] = m.C;
  j["feature_dim"] = m.feature_dim;
  j["feat_min"] = m.feat_min;
  j["feat_max"] = m.feat_max;
  j["support"] = m.support;
  j["alpha_y"] = m.alpha_y;
  j["b"] = m.b;
  j["train_accuracy"] = m.train_accuracy;
  j["schema_version"] = 1;
  std::ofstream out(path);
  if (!out) throw BackendFailure("cannot write " + path);
  out << j.dump(2) << "\n";
}

SvmModel load_svm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BackendFailure("cannot read " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  SvmModel m;
  m.gamma = j.at("kernel").at("gamma").get<double>();
  m.coef0 = j.at("kernel").at("coef0").get<double>();
  m.degree = j.at("kernel").at("degree").get<int>();
  m.C = j.at("C").get<double>();
  m.feature_dim = j.at("feature_dim").get<int>();
  m.feat_min = j.at("feat_min").get<std::vector<double>>();
  m.feat_max = j.at("feat_max").get<std::vector<double>>();
  m.support = j.at("support").get<std::vector<std::vector<double>>>();
  m.alpha_y = j.at("alpha_y").get<std::vector<double>>();
  m.b = j.at("b").get<double>();
  m.train_accuracy = j.value("train_accuracy", 0.0);
  return m;
}

void save_dataset_csv(const std::vector<TimingSample>& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw BackendFailure("cannot write " + path);
  out << "m,n,k,t_cpu,t_xpu,label\n";
  char buf[64];
  for (const auto& s : data) {
    out << s.sizes[0] << "," << s.sizes[1] << "," << s.sizes[2] << ",";
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", s.t_cpu, s.t_xpu);
    out << buf << "," << s.label << "\n";
  }
}

std::vector<TimingSample> load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BackendFailure("cannot read " + path);
  std::vector<TimingSample> data;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    TimingSample s;
    s.sizes.resize(3);
    for (int i = 0; i < 3; ++i) {
      std::getline(ss, cell, ',');
      s.sizes[i] = std::stoll(cell);
    }
    std::getline(ss, cell, ',');
    s.t_cpu = std::stod(cell);
    std::getline(ss, cell, ',');
    s.t_xpu = std::stod(cell);
    std::getline(ss, cell, ',');
    s.label = std::stoi(cell);
    data.push_back(std::move(s));
  }
  return data;
}

}  // namespace liftc::profitability
