#include "pilothop/serialize.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pilothop/errors.hpp"

namespace pilothop {

namespace {

// Minimal streaming writer: the JSON library prints shortest round-trip
// doubles, these dumps use fixed 17-significant-digit output.
class Writer {
 public:
  Writer() { os_.precision(17); }

  Writer& begin_object() { prefix(); os_ << '{'; first_ = true; return *this; }
  Writer& end_object() { os_ << '}'; first_ = false; return *this; }
  Writer& begin_array() { prefix(); os_ << '['; first_ = true; return *this; }
  Writer& end_array() { os_ << ']'; first_ = false; return *this; }

  Writer& key(const std::string& k) {
    prefix();
    os_ << '"' << k << "\":";
    pending_key_ = true;
    return *this;
  }

  Writer& value(double v) {
    prefix();
    if (std::isfinite(v)) os_ << v;
    else os_ << "null";
    return *this;
  }
  Writer& value(long long v) { prefix(); os_ << v; return *this; }
  Writer& value(int v) { return value(static_cast<long long>(v)); }
  Writer& value(std::uint64_t v) { prefix(); os_ << v; return *this; }
  Writer& value(bool v) { prefix(); os_ << (v ? "true" : "false"); return *this; }
  Writer& value(const std::string& v) { prefix(); os_ << nlohmann::json(v).dump(); return *this; }
  Writer& raw(const std::string& text) { prefix(); os_ << text; return *this; }

  template <class Derived>
  Writer& matrix(const Eigen::DenseBase<Derived>& m) {
    begin_array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      begin_array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) value(m(r, c));
      end_array();
    }
    return end_array();
  }

  template <class Derived>
  Writer& vector(const Eigen::DenseBase<Derived>& v) {
    begin_array();
    for (Eigen::Index i = 0; i < v.size(); ++i) value(v(i));
    return end_array();
  }

  Writer& points(const std::vector<Eigen::Vector2d>& pts) {
    begin_array();
    for (const auto& p : pts) begin_array().value(p.x()).value(p.y()).end_array();
    return end_array();
  }

  std::string str() const { return os_.str(); }

 private:
  void prefix() {
    if (pending_key_) {
      pending_key_ = false;
      first_ = false;
      return;
    }
    if (!first_) os_ << ',';
    first_ = false;
  }

  std::ostringstream os_;
  bool first_ = true;
  bool pending_key_ = false;
};

void write_int_matrix(Writer& w, const Eigen::MatrixXi& m) {
  w.begin_array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    w.begin_array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.value(m(r, c));
    w.end_array();
  }
  w.end_array();
}

Eigen::MatrixXd read_matrix(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("expected a nested array");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) throw ConfigError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

std::string to_json(const Topology& topology) {
  Writer w;
  w.begin_object();
  w.key("user_positions").matrix(topology.users);
  w.key("bs_positions").matrix(topology.base_stations);
  w.key("distances").matrix(topology.distances);
  w.end_object();
  return w.str();
}

std::string to_json(const FadingProfile& fading) {
  Writer w;
  w.begin_object();
  w.key("gamma").value(fading.gamma);
  w.key("beta_min").value(fading.beta_min);
  w.key("beta_per_bs").matrix(fading.beta_per_bs);
  w.key("beta").vector(fading.beta);
  w.key("powers").vector(fading.powers);
  w.end_object();
  return w.str();
}

std::string to_json(const PilotHopCode& code) {
  Writer w;
  w.begin_object();
  w.key("tau_p").value(code.tau_p);
  w.key("hops");
  write_int_matrix(w, code.hops);
  w.end_object();
  return w.str();
}

std::string to_json(const MeasurementMatrix& a) {
  Writer w;
  w.begin_object();
  w.key("tau_p").value(a.tau_p);
  w.key("T").value(a.T);
  w.key("row_order").value(std::string("t_outer_i_inner"));
  w.key("a").matrix(a.a);
  w.end_object();
  return w.str();
}

std::string scenario_json(const Scenario& s) {
  Writer w;
  w.begin_object();
  w.key("topology").raw(to_json(s.topology));
  w.key("fading").raw(to_json(s.fading));
  w.key("code").raw(to_json(s.code));
  w.key("measurement_matrix").raw(to_json(s.a));
  w.key("unit_energy").value(s.unit_energy);
  w.end_object();
  return w.str() + "\n";
}

std::string trial_json(const TrialRealization& trial) {
  Writer w;
  w.begin_object();
  w.key("seed").value(trial.master_seed);
  w.key("trial_index").value(trial.trial_index);
  w.key("events").points(trial.events.positions);
  w.key("alpha").begin_array();
  for (auto a : trial.alpha.active) w.value(static_cast<int>(a));
  w.end_array();
  w.key("y").vector(trial.energy.y);
  w.key("source").value(std::string(trial.energy.source == EnergySource::kAsymptotic ? "asymptotic"
                                                                                      : "monte_carlo"));
  w.end_object();
  return w.str() + "\n";
}

TrialRealization trial_from_json(const std::string& text) {
  TrialRealization t;
  try {
    const auto j = nlohmann::json::parse(text);
    t.master_seed = j.at("seed").get<std::uint64_t>();
    t.trial_index = j.value("trial_index", std::uint64_t{0});
    for (const auto& e : j.at("events")) t.events.positions.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    for (const auto& a : j.at("alpha")) t.alpha.active.push_back(static_cast<std::uint8_t>(a.get<int>() != 0));
    const auto& y = j.at("y");
    t.energy.y.resize(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) t.energy.y(static_cast<Eigen::Index>(i)) = y[i].get<double>();
    const std::string source = j.at("source").get<std::string>();
    if (source == "asymptotic") t.energy.source = EnergySource::kAsymptotic;
    else if (source == "monte_carlo") t.energy.source = EnergySource::kMonteCarlo;
    else throw ConfigError("trial dump: unknown source '" + source + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("trial dump: ") + e.what());
  }
  return t;
}

MeasurementMatrix measurement_matrix_from_json(const std::string& text) {
  MeasurementMatrix m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.tau_p = j.at("tau_p").get<int>();
    m.T = j.at("T").get<int>();
    m.a = read_matrix(j.at("a"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("measurement matrix: ") + e.what());
  }
  return m;
}

PilotHopCode code_from_json(const std::string& text) {
  PilotHopCode c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.tau_p = j.at("tau_p").get<int>();
    const Eigen::MatrixXd hops = read_matrix(j.at("hops"));
    c.hops = hops.cast<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pilot code: ") + e.what());
  }
  return c;
}

std::string trial_result_json(const TrialResult& result, const std::vector<double>& thresholds) {
  Writer w;
  w.begin_object();
  w.key("trial_index").value(result.trial_index);
  w.key("num_active").value(result.alpha_true.count());
  w.key("methods").begin_array();
  for (const auto& m : result.methods) {
    w.begin_object();
    w.key("method").value(m.method);
    w.key("lambda").value(m.lambda);
    w.key("converged").value(m.converged);
    w.key("iterations").value(m.iterations);
    w.key("alpha_hat").vector(m.alpha_hat);
    w.key("thresholds").begin_array();
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      const auto& met = m.roc[i].metrics;
      w.begin_object();
      w.key("threshold").value(thresholds[i]);
      w.key("p_m").value(met.p_m ? *met.p_m : std::nan(""));
      w.key("p_fa").value(met.p_fa ? *met.p_fa : std::nan(""));
      w.key("rmsd").value(m.estimates[i].rmsd);
      w.key("centroids").points(m.estimates[i].centroids);
      w.end_object();
    }
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

}  // namespace pilothop
