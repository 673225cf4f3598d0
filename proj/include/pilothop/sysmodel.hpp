#pragma once

// Deterministic system construction: user grid, base stations, large-scale
// fading with statistical channel inversion, pilot-hopping codes and the
// energy measurement matrix A.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pilothop/rng.hpp"

namespace pilothop {

struct SystemConfig {
  int K = 1296;          // users
  int L = 4;             // base stations
  int M = 32;            // antennas per base station
  int tau_p = 10;        // orthogonal pilots per coherence interval
  int T = 10;            // hopping sequence length (coherence intervals)
  double snr_db = 10.0;  // p * beta_min / sigma2, in dB
  double sigma2 = 1.0;   // noise power
  double p = 1.0;        // maximum per-user power scale
  double eta = 3.76;     // path-loss exponent
  double sigma_e2 = 0.001;
  int E = 3;             // events per trial
  double r = 0.05;       // neighbour radius
  int grid_side = 36;

  int antennas() const { return M * L; }
  int measurements() const { return tau_p * T; }

  /// Throws ConfigError on violated invariants. Returns non-fatal warnings
  /// (currently only "A is not wide").
  std::vector<std::string> validate() const;

  bool operator==(const SystemConfig&) const = default;
};

/// Reduced scenario for CI: 18x18 grid, tau_p = T = 6. The neighbour radius
/// and event spread are rescaled with the grid spacing so that interior
/// neighbour sets keep 9 members and an event still activates ~8 users.
SystemConfig quick_system_config();

struct Topology {
  Eigen::MatrixX2d users;          // K x 2, row-major grid order
  Eigen::MatrixX2d base_stations;  // L x 2
  Eigen::MatrixXd distances;       // K x L

  int num_users() const { return static_cast<int>(users.rows()); }
  int num_base_stations() const { return static_cast<int>(base_stations.rows()); }
};

/// Base stations at the midpoints of the unit-square edges.
Eigen::MatrixX2d edge_midpoint_base_stations();

/// Users at cell centres of a grid_side x grid_side grid, four base stations
/// at the edge midpoints. Requires grid_side^2 == K and L == 4.
Topology build_topology(const SystemConfig& config);

/// Same grid, caller-supplied base stations (L rows).
Topology build_topology(const SystemConfig& config, const Eigen::MatrixX2d& base_stations);

/// N(k) = { i : |x_k - x_i| < r }, each set sorted and containing k itself.
std::vector<std::vector<int>> neighbor_sets(const Topology& topology, double r);

struct FadingProfile {
  Eigen::MatrixXd beta_per_bs;  // K x L
  Eigen::VectorXd beta;         // mean over base stations
  double beta_min = 0.0;
  double gamma = 0.0;
  Eigen::VectorXd powers;  // channel-inversion powers p_k = p * beta_min / beta_k
};

/// gamma such that p * beta_min / sigma2 equals the configured SNR.
double calibrate_gamma(const SystemConfig& config, const Topology& topology);

FadingProfile build_fading(const SystemConfig& config, const Topology& topology, double gamma);

/// Received SNR in dB implied by a fading profile: min_k p_k beta_k / sigma2.
double received_snr_db(const SystemConfig& config, const FadingProfile& fading);

struct PilotHopCode {
  Eigen::MatrixXi hops;  // K x T, entries in 1..tau_p
  int tau_p = 0;

  int num_users() const { return static_cast<int>(hops.rows()); }
  int length() const { return static_cast<int>(hops.cols()); }
  /// Zero-based pilot index of user k in interval t.
  int pilot(int k, int t) const { return hops(k, t) - 1; }
};

/// Distinct uniformly drawn sequences (rejection sampling without replacement).
PilotHopCode generate_code(const SystemConfig& config, Rng& rng);

struct MeasurementMatrix {
  Eigen::MatrixXd a;  // (tau_p*T) x K
  int tau_p = 0;
  int T = 0;

  /// Row of A holding the energy of pilot i (0-based) in interval t (0-based).
  int row(int t, int i) const { return t * tau_p + i; }
};

MeasurementMatrix build_measurement_matrix(const PilotHopCode& code, const FadingProfile& fading,
                                           const SystemConfig& config);

/// K <= tau_p^T, evaluated without overflow.
bool unique_codes_available(int K, int tau_p, int T);

}  // namespace pilothop
