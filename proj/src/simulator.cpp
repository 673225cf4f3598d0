#include "pilothop/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pilothop/errors.hpp"

namespace pilothop {

int ActivityVector::count() const {
  return static_cast<int>(std::count(active.begin(), active.end(), std::uint8_t{1}));
}

std::vector<int> ActivityVector::support() const {
  std::vector<int> s;
  for (int k = 0; k < num_users(); ++k) {
    if (active[k]) s.push_back(k);
  }
  return s;
}

Eigen::VectorXd ActivityVector::as_vector() const {
  Eigen::VectorXd v(num_users());
  for (int k = 0; k < num_users(); ++k) v(k) = active[k] ? 1.0 : 0.0;
  return v;
}

int ChannelRealization::column_of(int k) const {
  const auto it = std::lower_bound(users.begin(), users.end(), k);
  if (it == users.end() || *it != k) return -1;
  return static_cast<int>(it - users.begin());
}

EventSet sample_events(const SystemConfig& config, Rng& rng) {
  if (config.E < 0) throw ConfigError("E must be >= 0");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  EventSet events;
  events.positions.reserve(config.E);
  for (int i = 0; i < config.E; ++i) {
    const double x = unit(rng);
    const double y = unit(rng);
    events.positions.emplace_back(x, y);
  }
  return events;
}

double activation_probability(const Eigen::Vector2d& user, const Eigen::Vector2d& event,
                              double sigma_e2) {
  if (!(sigma_e2 > 0.0)) throw ConfigError("sigma_e2 must be > 0");
  return std::exp(-(user - event).squaredNorm() / (2.0 * sigma_e2));
}

double activity_marginal(const Eigen::Vector2d& user, const EventSet& events, double sigma_e2) {
  double none = 1.0;
  for (const auto& e : events.positions) none *= 1.0 - activation_probability(user, e, sigma_e2);
  return 1.0 - none;
}

ActivityVector sample_activity(const Topology& topology, const EventSet& events,
                               const SystemConfig& config, Rng& rng) {
  const int K = topology.num_users();
  ActivityVector alpha;
  alpha.active.assign(K, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Draw every (k, i) pair even after k is activated so that the stream
  // consumption does not depend on earlier outcomes.
  for (int k = 0; k < K; ++k) {
    const Eigen::Vector2d x = topology.users.row(k).transpose();
    for (const auto& e : events.positions) {
      if (unit(rng) < activation_probability(x, e, config.sigma_e2)) alpha.active[k] = 1;
    }
  }
  return alpha;
}

namespace {

// CN(0, variance): real and imaginary parts i.i.d. N(0, variance / 2).
std::complex<double> complex_gaussian(Rng& rng, std::normal_distribution<double>& std_normal,
                                      double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = std_normal(rng);
  const double im = std_normal(rng);
  return {s * re, s * im};
}

}  // namespace

ChannelRealization sample_channels(const FadingProfile& fading, const SystemConfig& config, Rng& rng) {
  std::vector<int> all(fading.beta.size());
  std::iota(all.begin(), all.end(), 0);
  return sample_channels(fading, config, rng, all);
}

ChannelRealization sample_channels(const FadingProfile& fading, const SystemConfig& config, Rng& rng,
                                   std::span<const int> users) {
  ChannelRealization ch;
  ch.users.assign(users.begin(), users.end());
  if (!std::is_sorted(ch.users.begin(), ch.users.end())) {
    throw DimensionError("channel user list must be sorted");
  }
  const int M = config.M;
  const int L = config.L;
  if (fading.beta_per_bs.cols() != L) throw DimensionError("fading profile has wrong L");
  std::normal_distribution<double> std_normal(0.0, 1.0);
  ch.g.assign(config.T, Eigen::MatrixXcd(M * L, static_cast<Eigen::Index>(ch.users.size())));
  for (int t = 0; t < config.T; ++t) {
    for (std::size_t j = 0; j < ch.users.size(); ++j) {
      const int k = ch.users[j];
      for (int l = 0; l < L; ++l) {
        const double var = fading.beta_per_bs(k, l);
        for (int m = 0; m < M; ++m) ch.g[t](l * M + m, static_cast<Eigen::Index>(j)) =
            complex_gaussian(rng, std_normal, var);
      }
    }
  }
  return ch;
}

Eigen::MatrixXcd received_pilot_signal(const PilotHopCode& code, const ActivityVector& activity,
                                       const ChannelRealization& channels,
                                       const FadingProfile& fading, const SystemConfig& config,
                                       Rng& rng, int t,
                                       const std::optional<Eigen::MatrixXcd>& pilots) {
  if (t < 0 || t >= config.T) throw DimensionError("interval index out of range");
  if (activity.num_users() != code.num_users()) throw DimensionError("activity/code K mismatch");
  const int ML = config.antennas();
  const int tau = config.tau_p;
  if (pilots && (pilots->rows() != tau || pilots->cols() != tau)) {
    throw DimensionError("pilot matrix must be tau_p x tau_p");
  }

  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(ML, tau);
  for (int k = 0; k < activity.num_users(); ++k) {
    if (!activity.active[k]) continue;
    const int col = channels.column_of(k);
    if (col < 0) throw DimensionError("no channel sampled for an active user");
    const double amp = std::sqrt(tau * fading.powers(k));
    const int j = code.pilot(k, t);
    if (pilots) {
      y.noalias() += amp * channels.g[t].col(col) * pilots->col(j).adjoint();
    } else {
      y.col(j) += amp * channels.g[t].col(col);
    }
  }
  std::normal_distribution<double> std_normal(0.0, 1.0);
  for (int j = 0; j < tau; ++j) {
    for (int m = 0; m < ML; ++m) y(m, j) += complex_gaussian(rng, std_normal, config.sigma2);
  }
  return y;
}

Eigen::VectorXd energy_measurement(const Eigen::MatrixXcd& received, const SystemConfig& config,
                                   const std::optional<Eigen::MatrixXcd>& pilots) {
  const int ML = config.antennas();
  if (received.rows() != ML || received.cols() != config.tau_p) {
    throw DimensionError("received signal must be ML x tau_p");
  }
  Eigen::VectorXd e(config.tau_p);
  for (int i = 0; i < config.tau_p; ++i) {
    const double energy = pilots ? (received * pilots->col(i)).squaredNorm()
                                 : received.col(i).squaredNorm();
    e(i) = energy / ML - config.sigma2;
  }
  return e;
}

EnergyVector measure_energies(const PilotHopCode& code, const ActivityVector& activity,
                              const FadingProfile& fading, const SystemConfig& config,
                              Rng& channel_rng, Rng& noise_rng) {
  const std::vector<int> active = activity.support();
  const ChannelRealization channels = sample_channels(fading, config, channel_rng, active);
  EnergyVector out;
  out.source = EnergySource::kMonteCarlo;
  out.y.resize(config.measurements());
  for (int t = 0; t < config.T; ++t) {
    const Eigen::MatrixXcd y = received_pilot_signal(code, activity, channels, fading, config,
                                                     noise_rng, t);
    out.y.segment(t * config.tau_p, config.tau_p) = energy_measurement(y, config);
  }
  return out;
}

EnergyVector asymptotic_energy(const MeasurementMatrix& a, const ActivityVector& activity) {
  if (a.a.cols() != activity.num_users()) throw DimensionError("A and activity disagree on K");
  EnergyVector out;
  out.source = EnergySource::kAsymptotic;
  out.y = a.a * activity.as_vector();
  return out;
}

}  // namespace pilothop
