#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "liftc/minilang.hpp"

// Feature-based function classifier gating the matching pipeline. Features
// are structural counts (loop depths, operation mix, parameter shape), so
// classification is invariant under renaming. The model is a nearest-centroid
// classifier in z-scored feature space with a softmax confidence score.

namespace liftc::classifier {

inline constexpr int kNumFeatures = 16;
inline constexpr int kFeatureSchemaVersion = 1;

using FeatureVector = std::array<double, kNumFeatures>;

const std::vector<std::string>& feature_names();

// Counts are taken over the function body plus the bodies of user functions
// it calls (each call site descends once, recursion does not), so helpers
// split across functions profile like their inlined form.
FeatureVector extract_features(const minilang::Program& p, const minilang::FunctionIR& f);

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ClassifierModel {
  int feature_version = kFeatureSchemaVersion;
  std::vector<std::string> labels;  // sorted
  std::vector<std::vector<double>> centroids;  // per label, z-scored space
  std::vector<double> mean, stddev;  // per feature (population stddev)
  std::vector<int> dropped;  // zero-variance feature indices, excluded from distances
};

// Requires >= 2 distinct labels and >= 3 examples per label.
ClassifierModel train_classifier(
    const std::vector<std::pair<FeatureVector, std::string>>& examples);

struct Classification {
  std::string label;
  double score = 0.0;  // softmax over negative centroid distances, in [0,1]
  std::vector<std::pair<std::string, double>> all_scores;
};

Classification classify(const ClassifierModel& model, const FeatureVector& fv);

void save_model(const ClassifierModel& model, const std::string& path);
ClassifierModel load_model(const std::string& path);

}  // namespace liftc::classifier
