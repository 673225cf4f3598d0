#include "pilothop/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pilothop/errors.hpp"

namespace pilothop {

DetectionResult threshold_detect(const Eigen::VectorXd& alpha_hat, double threshold) {
  if (!std::isfinite(threshold)) throw ConfigError("threshold must be finite");
  DetectionResult d;
  d.threshold = threshold;
  d.detected.resize(alpha_hat.size());
  for (Eigen::Index k = 0; k < alpha_hat.size(); ++k) d.detected[k] = alpha_hat(k) > threshold ? 1 : 0;
  return d;
}

ConfusionMetrics confusion_metrics(const std::vector<std::uint8_t>& detected,
                                   const std::vector<std::uint8_t>& truth) {
  if (detected.size() != truth.size()) throw DimensionError("detected and truth lengths differ");
  ConfusionMetrics m;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k]) {
      ++m.num_active;
      if (!detected[k]) ++m.num_missed;
    } else {
      ++m.num_inactive;
      if (detected[k]) ++m.num_false;
    }
  }
  if (m.num_active > 0) m.p_m = static_cast<double>(m.num_missed) / m.num_active;
  if (m.num_inactive > 0) m.p_fa = static_cast<double>(m.num_false) / m.num_inactive;
  return m;
}

std::vector<RocPoint> roc_sweep(const Eigen::VectorXd& alpha_hat, const std::vector<std::uint8_t>& truth,
                                const std::vector<double>& thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw ConfigError("ROC thresholds must be sorted ascending");
  }
  std::vector<RocPoint> out;
  out.reserve(thresholds.size());
  for (double thr : thresholds) {
    out.push_back({thr, confusion_metrics(threshold_detect(alpha_hat, thr).detected, truth)});
  }
  return out;
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

namespace {

using Points = std::vector<Eigen::Vector2d>;

double nearest_sq(const Eigen::Vector2d& x, const Points& centroids, int* which = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = (x - centroids[c]).squaredNorm();
    if (d < best) {
      best = d;
      if (which) *which = static_cast<int>(c);
    }
  }
  return best;
}

Points kmeanspp_seed(const Points& points, int k, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  Points centroids{points[first(rng)]};
  std::vector<double> d2(points.size());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = nearest_sq(points[i], centroids);
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      pick = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        acc += d2[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);  // every point already coincides with a centroid
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

KMeansResult lloyd(const Points& points, Points centroids, const KMeansOptions& options) {
  const int k = static_cast<int>(centroids.size());
  std::vector<int> label(points.size(), 0);
  KMeansResult res;
  for (int it = 0; it < options.max_iters; ++it) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) inertia += nearest_sq(points[i], centroids, &label[i]);
    res.inertia_trace.push_back(inertia);

    Points sums(k, Eigen::Vector2d::Zero());
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[label[i]] += points[i];
      ++counts[label[i]];
    }
    double moved = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      const Eigen::Vector2d next = sums[c] / counts[c];
      moved = std::max(moved, (next - centroids[c]).norm());
      centroids[c] = next;
    }
    if (moved <= options.tol) break;
  }
  double inertia = 0.0;
  for (const auto& x : points) inertia += nearest_sq(x, centroids);
  res.inertia_trace.push_back(inertia);
  res.inertia = inertia;
  res.centroids = std::move(centroids);
  return res;
}

}  // namespace

KMeansResult kmeans_cluster(const std::vector<Eigen::Vector2d>& points, int num_clusters, Rng& rng,
                            const KMeansOptions& options) {
  if (num_clusters < 1) throw ConfigError("number of clusters must be >= 1");
  const Eigen::Vector2d centre(0.5, 0.5);
  if (static_cast<int>(points.size()) <= num_clusters) {
    KMeansResult res;
    res.centroids = points;
    res.centroids.resize(num_clusters, centre);
    return res;
  }
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int run = 0; run < std::max(1, options.restarts); ++run) {
    KMeansResult r = lloyd(points, kmeanspp_seed(points, num_clusters, rng), options);
    if (r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

EventEstimate match_events(const std::vector<Eigen::Vector2d>& true_events,
                           const std::vector<Eigen::Vector2d>& centroids) {
  const int e = static_cast<int>(true_events.size());
  if (static_cast<int>(centroids.size()) != e) throw DimensionError("event and centroid counts differ");
  if (e > kMaxExhaustiveEvents) throw ConfigError("exhaustive pairing supports at most 8 events");
  EventEstimate est;
  est.centroids = centroids;
  if (e == 0) return est;

  std::vector<int> perm(e);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int i = 0; i < e; ++i) cost += (true_events[i] - centroids[perm[i]]).squaredNorm();
    if (cost < best) {
      best = cost;
      est.pairing = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  est.rmsd = std::sqrt(best / e);
  return est;
}

}  // namespace pilothop
