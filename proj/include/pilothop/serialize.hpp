#pragma once

// JSON dumps of the system artifacts and trial realizations. Matrices are
// nested arrays in row-major order; doubles use 17 significant digits so the
// files round-trip bit-exactly.

#include <string>

#include "pilothop/harness.hpp"

namespace pilothop {

std::string to_json(const Topology& topology);
std::string to_json(const FadingProfile& fading);
std::string to_json(const PilotHopCode& code);
std::string to_json(const MeasurementMatrix& a);

/// {"topology":…, "fading":…, "code":…, "measurement_matrix":…}
std::string scenario_json(const Scenario& scenario);

/// {"seed", "trial_index", "events", "alpha", "y", "source"}
std::string trial_json(const TrialRealization& trial);
TrialRealization trial_from_json(const std::string& text);

MeasurementMatrix measurement_matrix_from_json(const std::string& text);
PilotHopCode code_from_json(const std::string& text);

/// Detections of one replayed trial: per method alpha_hat plus per-threshold
/// metrics and RMSD.
std::string trial_result_json(const TrialResult& result, const std::vector<double>& thresholds);

}  // namespace pilothop
