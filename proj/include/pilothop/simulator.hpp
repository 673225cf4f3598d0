#pragma once

// Stochastic generation of one random-access round: planted events, the
// correlated activity they trigger, Rayleigh block-fading channels, received
// pilot signals and the per-pilot energy statistics.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pilothop/rng.hpp"
#include "pilothop/sysmodel.hpp"

namespace pilothop {

struct EventSet {
  std::vector<Eigen::Vector2d> positions;

  int size() const { return static_cast<int>(positions.size()); }
};

struct ActivityVector {
  std::vector<std::uint8_t> active;  // 0/1 per user

  int num_users() const { return static_cast<int>(active.size()); }
  int count() const;
  std::vector<int> support() const;
  Eigen::VectorXd as_vector() const;
};

/// Channel vectors g_k^t for a subset of users. g[t] is ML x |users|, column j
/// belongs to users[j]; rows stack the M antennas of each base station.
struct ChannelRealization {
  std::vector<int> users;
  std::vector<Eigen::MatrixXcd> g;

  /// Column of user k in g[t], or -1 when k was not sampled.
  int column_of(int k) const;
};

enum class EnergySource { kMonteCarlo, kAsymptotic };

struct EnergyVector {
  Eigen::VectorXd y;  // tau_p*T, same row order as MeasurementMatrix
  EnergySource source = EnergySource::kMonteCarlo;
};

EventSet sample_events(const SystemConfig& config, Rng& rng);

/// exp(-|x - e|^2 / (2 sigma_e2)).
double activation_probability(const Eigen::Vector2d& user, const Eigen::Vector2d& event,
                              double sigma_e2);

/// Independent Bernoulli per (user, event); a user is active when at least
/// one event activates it.
ActivityVector sample_activity(const Topology& topology, const EventSet& events,
                               const SystemConfig& config, Rng& rng);

/// 1 - prod_i (1 - p_{k,i}).
double activity_marginal(const Eigen::Vector2d& user, const EventSet& events, double sigma_e2);

/// CN(0, beta_k^l I_M) per base-station block, independent per interval.
ChannelRealization sample_channels(const FadingProfile& fading, const SystemConfig& config, Rng& rng);

/// As above, restricted to the listed users.
ChannelRealization sample_channels(const FadingProfile& fading, const SystemConfig& config, Rng& rng,
                                   std::span<const int> users);

/// Received ML x tau_p pilot signal of interval t (0-based). Pilots are the
/// columns of `pilots` (tau_p x tau_p unitary); identity when omitted.
/// Noise entries are CN(0, sigma2) drawn from rng.
Eigen::MatrixXcd received_pilot_signal(const PilotHopCode& code, const ActivityVector& activity,
                                       const ChannelRealization& channels,
                                       const FadingProfile& fading, const SystemConfig& config,
                                       Rng& rng, int t,
                                       const std::optional<Eigen::MatrixXcd>& pilots = std::nullopt);

/// E_i = |Y phi_i|^2 / (ML) - sigma2 for every pilot i.
Eigen::VectorXd energy_measurement(const Eigen::MatrixXcd& received, const SystemConfig& config,
                                   const std::optional<Eigen::MatrixXcd>& pilots = std::nullopt);

/// Full finite-antenna path over all T intervals. Channels are drawn only for
/// active users from channel_rng; noise from noise_rng.
EnergyVector measure_energies(const PilotHopCode& code, const ActivityVector& activity,
                              const FadingProfile& fading, const SystemConfig& config,
                              Rng& channel_rng, Rng& noise_rng);

/// Noiseless limit y = A alpha.
EnergyVector asymptotic_energy(const MeasurementMatrix& a, const ActivityVector& activity);

}  // namespace pilothop
