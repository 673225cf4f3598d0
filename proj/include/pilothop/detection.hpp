#pragma once

// Relaxed activity estimates to decisions and scores: thresholding,
// miss / false-alarm rates, ROC sweeps, K-means event localisation and the
// optimal true-to-estimated event pairing.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pilothop/rng.hpp"

namespace pilothop {

struct DetectionResult {
  std::vector<std::uint8_t> detected;
  double threshold = 0.0;
};

/// detected_k = alpha_hat_k > threshold (strict).
DetectionResult threshold_detect(const Eigen::VectorXd& alpha_hat, double threshold);

struct ConfusionMetrics {
  std::optional<double> p_m;   // empty when there are no active users
  std::optional<double> p_fa;  // empty when there are no inactive users
  int num_active = 0;
  int num_inactive = 0;
  int num_missed = 0;
  int num_false = 0;
};

ConfusionMetrics confusion_metrics(const std::vector<std::uint8_t>& detected,
                                   const std::vector<std::uint8_t>& truth);

struct RocPoint {
  double threshold = 0.0;
  ConfusionMetrics metrics;
};

/// One ConfusionMetrics per threshold (thresholds must be ascending).
std::vector<RocPoint> roc_sweep(const Eigen::VectorXd& alpha_hat, const std::vector<std::uint8_t>& truth,
                                const std::vector<double>& thresholds);

/// Mean of the defined entries; empty when none is defined.
std::optional<double> mean_defined(const std::vector<std::optional<double>>& values);

struct KMeansOptions {
  int restarts = 10;
  int max_iters = 300;
  double tol = 1e-9;  // stop when no centroid moves farther than this
};

struct KMeansResult {
  std::vector<Eigen::Vector2d> centroids;
  double inertia = 0.0;                    // within-cluster sum of squares
  std::vector<double> inertia_trace;       // per Lloyd iteration of the kept run
};

/// k-means++ seeding, Lloyd iterations, best of `restarts` runs. With fewer
/// points than clusters the points themselves are centroids and the surplus
/// sits at the plane centre (0.5, 0.5).
KMeansResult kmeans_cluster(const std::vector<Eigen::Vector2d>& points, int num_clusters, Rng& rng,
                            const KMeansOptions& options = {});

struct EventEstimate {
  std::vector<Eigen::Vector2d> centroids;
  std::vector<int> pairing;  // pairing[i] = centroid matched to true event i
  double rmsd = 0.0;
};

inline constexpr int kMaxExhaustiveEvents = 8;

/// Bijection minimising the mean squared distance, by exhaustive search.
EventEstimate match_events(const std::vector<Eigen::Vector2d>& true_events,
                           const std::vector<Eigen::Vector2d>& centroids);

}  // namespace pilothop
