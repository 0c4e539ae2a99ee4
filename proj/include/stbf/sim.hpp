#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stbf/beamform.hpp"
#include "stbf/channel.hpp"
#include "stbf/ofdm.hpp"
#include "stbf/sttc.hpp"

namespace stbf {

enum class Canceller { none, adaptive, null_steering };
enum class LmsReference { path, antenna };
enum class InterfererSignal { sttc, qpsk };

const char* to_string(Canceller c);

struct SimConfig {
  Canceller variant = Canceller::adaptive;
  std::vector<double> snr_db{8, 10, 12, 14, 16};
  double sir_db = 10.0;
  double doppler_hz = 50.0;
  double delay_us = 15.0;
  double sample_period_us = 1.0;
  DoaScenario doa;
  std::size_t frames = 2000;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency

  LmsConfig lms;
  LmsReference lms_reference = LmsReference::path;
  std::size_t warmup_frames = 0;

  std::size_t subcarriers = 288;
  std::size_t cp_len = 40;
  std::size_t pilot_spacing = 9;
  std::vector<std::size_t> pilot_indices;  // overrides spacing when nonempty
  std::uint64_t pilot_seed = 2024;

  double null_width_deg = 5.0;
  std::size_t deepen_passes = 50;  // 0 disables deepening
  std::size_t grid_points = 181;

  InterfererSignal cci_signal = InterfererSignal::sttc;
  /// Leading array elements used by the conventional receiver; 0 = all.
  std::size_t conventional_antennas = 0;

  /// 16-state default unless replaced by a loaded table.
  TrellisCode code = default_sttc();

  std::size_t delay_samples() const;
  double frame_duration_s() const;
  PilotPlan pilot_plan() const;
  void validate() const;
};

struct FerPoint {
  double snr_db = 0.0;
  std::size_t frames = 0;
  std::size_t errors = 0;
  double fer = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Two-sided Clopper-Pearson interval at the given confidence.
std::pair<double, double> clopper_pearson(std::size_t errors, std::size_t trials,
                                          double confidence = 0.95);
FerPoint make_fer_point(double snr_db, std::size_t errors, std::size_t trials);

struct TrialOutcome {
  bool frame_error = false;
  std::size_t bit_errors = 0;
};

/// Beamformer state of one trial, exposed for pattern and convergence output.
struct TrialBeams {
  std::array<LmsResult, 2> lms;
  std::array<BeamWeights, 2> adaptive_pre;
  std::array<BeamWeights, 2> adaptive_post;
  std::array<BeamWeights, 2> null_steering;
  bool has_null_steering = false;
};

/// Monte-Carlo engine bound to one configuration. Every trial is a pure
/// function of (config, snr, trial index).
class Simulator {
 public:
  explicit Simulator(SimConfig config);

  const SimConfig& config() const noexcept { return cfg_; }
  const PilotPlan& plan() const noexcept { return plan_; }
  const AngleGrid& grid() const noexcept { return grid_; }

  TrialOutcome run_trial(double snr_db, std::uint64_t trial) const;
  TrialBeams inspect_trial(double snr_db, std::uint64_t trial) const;

  FerPoint run_point(double snr_db) const;

 private:
  struct Realization;
  Realization realize(double snr_db, std::uint64_t trial) const;
  TrialBeams train(const Realization& real, bool need_adaptive) const;
  std::array<BeamWeights, 2> null_steering() const;

  SimConfig cfg_;
  PilotPlan plan_;
  AngleGrid grid_;
};

/// One-frame flag: true when any information bit is wrong.
bool run_trial(const SimConfig& config, double snr_db, std::uint64_t trial);

using ProgressFn = std::function<void(const FerPoint&)>;
std::vector<FerPoint> run_curve(const SimConfig& config, const ProgressFn& progress = {});

/// Named set of curves sharing a base configuration.
struct Experiment {
  struct Curve {
    std::string label;
    std::vector<std::pair<std::string, std::string>> settings;
  };
  std::string name;
  std::string description;
  SimConfig base;
  std::string sweep_key;  // CSV column holding the curve label; empty for one curve
  std::vector<Curve> curves;

  /// Base config with each curve's settings applied.
  std::vector<std::pair<std::string, SimConfig>> expand() const;
};

std::vector<Experiment> scenario_presets();
/// Throws ConfigError for an unknown name.
Experiment find_preset(const std::string& name);

/// Two-proportion z statistic (p1 - p2) / pooled standard error; 0 when
/// both rates are identical.
double two_proportion_z(std::size_t e1, std::size_t n1, std::size_t e2, std::size_t n2);
/// p-value of the chi-square homogeneity test across groups.
double homogeneity_p_value(const std::vector<std::pair<std::size_t, std::size_t>>& groups);

}  // namespace stbf
