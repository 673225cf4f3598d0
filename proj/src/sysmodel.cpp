#include "pilothop/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "pilothop/errors.hpp"

namespace pilothop {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

bool unique_codes_available(int K, int tau_p, int T) {
  if (K < 1 || tau_p < 1 || T < 1) return false;
  if (tau_p == 1) return K == 1;
  long double count = 1.0L;
  for (int t = 0; t < T; ++t) {
    count *= tau_p;
    if (count >= K) return true;
  }
  return count >= K;
}

std::vector<std::string> SystemConfig::validate() const {
  require(K >= 1, "K must be >= 1");
  require(L >= 1, "L must be >= 1");
  require(M >= 1, "M must be >= 1");
  require(tau_p >= 1, "tau_p must be >= 1");
  require(T >= 1, "T must be >= 1");
  require(E >= 0, "E must be >= 0");
  require(grid_side >= 1, "grid_side must be >= 1");
  require(grid_side * grid_side == K, "grid_side^2 must equal K");
  require(std::isfinite(snr_db), "snr_db must be finite");
  require(sigma2 > 0.0 && std::isfinite(sigma2), "sigma2 must be > 0");
  require(p > 0.0 && std::isfinite(p), "p must be > 0");
  require(eta > 0.0 && std::isfinite(eta), "eta must be > 0");
  require(sigma_e2 > 0.0 && std::isfinite(sigma_e2), "sigma_e2 must be > 0");
  require(r > 0.0 && std::isfinite(r), "r must be > 0");
  require(unique_codes_available(K, tau_p, T), "K must not exceed tau_p^T (unique hopping sequences)");

  std::vector<std::string> warnings;
  if (tau_p * T > K) {
    std::ostringstream os;
    os << "tau_p*T = " << tau_p * T << " exceeds K = " << K << "; A is not wide";
    warnings.push_back(os.str());
  }
  return warnings;
}

SystemConfig quick_system_config() {
  SystemConfig c;
  c.grid_side = 18;
  c.K = 18 * 18;
  c.tau_p = 6;
  c.T = 6;
  c.r = 0.1;
  c.sigma_e2 = 0.004;
  return c;
}

Eigen::MatrixX2d edge_midpoint_base_stations() {
  Eigen::MatrixX2d bs(4, 2);
  bs << 0.0, 0.5,
        1.0, 0.5,
        0.5, 0.0,
        0.5, 1.0;
  return bs;
}

Topology build_topology(const SystemConfig& config) {
  if (config.L != 4) {
    throw ConfigError("default topology places 4 base stations; supply positions for L != 4");
  }
  return build_topology(config, edge_midpoint_base_stations());
}

Topology build_topology(const SystemConfig& config, const Eigen::MatrixX2d& base_stations) {
  const int side = config.grid_side;
  if (side < 1 || static_cast<long long>(side) * side != config.K) {
    throw ConfigError("grid_side^2 must equal K");
  }
  if (base_stations.rows() != config.L) {
    throw ConfigError("number of base-station positions must equal L");
  }

  Topology topo;
  topo.users.resize(config.K, 2);
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const int k = row * side + col;
      topo.users(k, 0) = (col + 0.5) / side;
      topo.users(k, 1) = (row + 0.5) / side;
    }
  }
  topo.base_stations = base_stations;
  topo.distances.resize(config.K, config.L);
  for (int k = 0; k < config.K; ++k) {
    for (int l = 0; l < config.L; ++l) {
      topo.distances(k, l) = (topo.users.row(k) - base_stations.row(l)).norm();
    }
  }
  return topo;
}

std::vector<std::vector<int>> neighbor_sets(const Topology& topology, double r) {
  const int K = topology.num_users();
  std::vector<std::vector<int>> sets(K);
  const double r2 = r * r;
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < K; ++i) {
      if ((topology.users.row(k) - topology.users.row(i)).squaredNorm() < r2) sets[k].push_back(i);
    }
  }
  return sets;
}

namespace {

// min_k (1/L) sum_l d^-eta, i.e. beta_min / gamma.
double min_mean_path_gain(const SystemConfig& config, const Topology& topology) {
  if ((topology.distances.array() <= 0.0).any()) {
    throw NumericalError("zero user/base-station distance: path loss undefined");
  }
  const Eigen::VectorXd mean_gain =
      topology.distances.array().pow(-config.eta).rowwise().mean();
  return mean_gain.minCoeff();
}

}  // namespace

double calibrate_gamma(const SystemConfig& config, const Topology& topology) {
  const double snr = std::pow(10.0, config.snr_db / 10.0);
  return snr * config.sigma2 / (config.p * min_mean_path_gain(config, topology));
}

FadingProfile build_fading(const SystemConfig& config, const Topology& topology, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if ((topology.distances.array() <= 0.0).any()) {
    throw NumericalError("zero user/base-station distance: path loss undefined");
  }
  FadingProfile f;
  f.gamma = gamma;
  f.beta_per_bs = gamma * topology.distances.array().pow(-config.eta);
  f.beta = f.beta_per_bs.rowwise().mean();
  f.beta_min = f.beta.minCoeff();
  f.powers = (config.p * f.beta_min) / f.beta.array();
  return f;
}

double received_snr_db(const SystemConfig& config, const FadingProfile& fading) {
  const double snr = (fading.powers.array() * fading.beta.array()).minCoeff() / config.sigma2;
  return 10.0 * std::log10(snr);
}

PilotHopCode generate_code(const SystemConfig& config, Rng& rng) {
  if (!unique_codes_available(config.K, config.tau_p, config.T)) {
    throw ConfigError("cannot draw K distinct sequences: K > tau_p^T");
  }
  PilotHopCode code;
  code.tau_p = config.tau_p;
  code.hops.resize(config.K, config.T);
  std::uniform_int_distribution<int> pick(1, config.tau_p);
  std::set<std::vector<int>> seen;
  std::vector<int> seq(config.T);
  for (int k = 0; k < config.K;) {
    for (int t = 0; t < config.T; ++t) seq[t] = pick(rng);
    if (!seen.insert(seq).second) continue;
    for (int t = 0; t < config.T; ++t) code.hops(k, t) = seq[t];
    ++k;
  }
  return code;
}

MeasurementMatrix build_measurement_matrix(const PilotHopCode& code, const FadingProfile& fading,
                                           const SystemConfig& config) {
  const int K = code.num_users();
  if (K != fading.beta.size() || K != fading.powers.size()) {
    throw DimensionError("code and fading profile disagree on K");
  }
  if (code.tau_p != config.tau_p || code.length() != config.T) {
    throw DimensionError("code shape does not match tau_p x T");
  }
  MeasurementMatrix m;
  m.tau_p = config.tau_p;
  m.T = config.T;
  m.a = Eigen::MatrixXd::Zero(config.tau_p * config.T, K);
  for (int k = 0; k < K; ++k) {
    const double gain = config.tau_p * fading.powers(k) * fading.beta(k);
    for (int t = 0; t < config.T; ++t) m.a(m.row(t, code.pilot(k, t)), k) = gain;
  }
  return m;
}

}  // namespace pilothop
