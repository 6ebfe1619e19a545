#pragma once

#include <stdexcept>
#include <string>
#include <vector>

// Backend choice model. Two native f32 gemm implementations stand in for the
// host and accelerator paths: a naive triple loop and a cache-blocked,
// threaded variant burdened with a fixed per-launch overhead. Timings over a
// size grid label which side wins; a small polynomial-kernel SVM trained on
// those labels predicts the dispatch target at lift time.

namespace liftc::profitability {

struct DegenerateData : std::runtime_error {
  explicit DegenerateData(const std::string& msg) : std::runtime_error(msg) {}
};

struct BackendFailure : std::runtime_error {
  explicit BackendFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// launch overhead charged to every accelerator call: two milliseconds,
// expressed in seconds to match the timing fields
inline constexpr double kXpuLaunchOverheadSec = 2e-3;

void cpu_gemm(const float* a, const float* b, float* c, long long m, long long n, long long k);
void xpu_gemm(const float* a, const float* b, float* c, long long m, long long n, long long k);

struct TimingSample {
  std::vector<long long> sizes;  // m, n, k
  double t_cpu = 0.0;            // seconds
  double t_xpu = 0.0;            // seconds, includes the launch overhead
  int label = 0;                 // 1 iff the accelerator path was faster
};

// Times both backends at one size, median over `reps` runs each (reps >= 3).
// The label compares the medians. Before timing, both backends run once and
// their results are cross-checked; disagreement or non-finite output throws
// BackendFailure.
TimingSample sample_one(const std::vector<long long>& sizes, int reps = 5,
                        double xpu_overhead_sec = kXpuLaunchOverheadSec);

// sample_one over every grid point, in grid order
std::vector<TimingSample> sample_timings(const std::vector<std::vector<long long>>& grid,
                                         int reps = 5,
                                         double xpu_overhead_sec = kXpuLaunchOverheadSec);

// deterministic size grids: ratio shapes crossed with magnitudes; the holdout
// magnitudes interleave between the training ones so no point repeats
std::vector<std::vector<long long>> training_grid();
std::vector<std::vector<long long>> holdout_grid();

struct SvmModel {
  double gamma = 1.0;
  double coef0 = 0.0;
  int degree = 3;
  double C = 100.0;
  int feature_dim = 0;
  std::vector<double> feat_min, feat_max;    // min-max normalization stats
  std::vector<std::vector<double>> support;  // normalized support vectors
  std::vector<double> alpha_y;               // alpha_i * y_i per support vector
  double b = 0.0;
  double train_accuracy = 0.0;               // fraction of training points recovered
};

double poly_kernel(const std::vector<double>& x, const std::vector<double>& y, double gamma,
                   double coef0, int degree);

// Simplified deterministic SMO on the soft-margin dual, KKT tolerance 1e-3:
// scans points in index order, partners each violator with the max |E_i - E_j|
// (lowest index on ties), stops when a full pass changes nothing or the pass
// limit hits. Needs at least 10 samples and both labels, else DegenerateData.
SvmModel train_svm(const std::vector<TimingSample>& data);

double decision_value(const SvmModel& m, const std::vector<long long>& sizes);
int predict_backend(const SvmModel& m, const std::vector<long long>& sizes);  // 0 cpu, 1 xpu

// predict_backend plus the wall-clock cost of that single prediction
struct Prediction {
  int backend = 0;
  double latency_ms = 0.0;
};
Prediction predict_backend_timed(const SvmModel& m, const std::vector<long long>& sizes);

void save_svm(const SvmModel& m, const std::string& path);
SvmModel load_svm(const std::string& path);

void save_dataset_csv(const std::vector<TimingSample>& data, const std::string& path);
std::vector<TimingSample> load_dataset_csv(const std::string& path);

}  // namespace liftc::profitability
