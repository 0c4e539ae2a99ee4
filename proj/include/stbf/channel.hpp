#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "stbf/numerics.hpp"

namespace stbf {

using Rng = std::mt19937_64;

/// Uniform linear array response with half-wavelength spacing:
/// element m is exp(-j pi m sin(theta)).
ComplexVector steering_vector(double theta_deg, std::size_t n_r);

/// Arrival angles of the two paths of one mobile.
struct MobileDoa {
  double path1_deg = 0.0;
  double path2_deg = 0.0;
};

struct DoaScenario {
  MobileDoa desired{10.0, -20.0};
  std::vector<MobileDoa> interferers{{-60.0, 40.0}};
  std::array<std::size_t, 2> delays{0, 15};  // samples, path 1 and 2
  std::array<double, 2> path_powers{0.5, 0.5};
  std::size_t n_r = 4;
  std::size_t n_t = 2;

  /// All DOAs in the order desired path 1, desired path 2, interferer
  /// paths (path 1 then path 2 per interferer).
  std::vector<double> all_doas() const;
  void validate(std::size_t cp_len) const;
};

/// Rayleigh gain process with Jakes Doppler spectrum, built as a sum of
/// equal-power complex sinusoids with one random arrival angle in each of
/// N equal strata of (0, pi). Unit average power.
class JakesProcess {
 public:
  JakesProcess(double doppler_hz, double frame_duration_s, Rng& rng,
               std::size_t oscillators = 64);

  /// Gain at frame index n (time n * frame_duration).
  cd at(double n) const;

 private:
  double frame_duration_;
  std::vector<double> omega_;  // rad/s per oscillator
  std::vector<double> phase_;
  double amplitude_;
};

inline constexpr std::size_t kJakesOscillators = 64;

/// n_frames consecutive frame-rate samples of one Jakes process.
std::vector<cd> jakes_process(double doppler_hz, std::size_t n_frames,
                              double frame_duration_s, std::uint64_t seed);

/// h(p, i): gain of path p from transmit antenna i, constant over a frame.
using PathGains = Eigen::Matrix2cd;

/// n_R x (K + cp) time-domain snapshot of one frame.
using ArraySnapshot = ComplexMatrix;

/// Transmit antenna frames of one mobile (n_T rows of K + cp samples).
using MobileFrames = ComplexMatrix;

/// Sum over paths and mobiles of a(theta_p) (h_p Y) delayed by tau_p plus
/// white complex Gaussian noise of variance noise_var per element. The
/// delay is a circular shift of the CP-extended frame. Interferer frames
/// must already carry their amplitude scaling.
ArraySnapshot synthesize_received(const MobileFrames& desired,
                                  std::span<const MobileFrames> interferers,
                                  const DoaScenario& scenario,
                                  std::span<const PathGains> gains,
                                  double noise_var, Rng& noise_rng);
ArraySnapshot synthesize_received(const MobileFrames& desired,
                                  std::span<const MobileFrames> interferers,
                                  const DoaScenario& scenario,
                                  std::span<const PathGains> gains,
                                  double noise_var, std::uint64_t seed);

/// Adds a(theta) * (h . Y delayed by `delay`) into `out` (used by the
/// synthesizer and exposed for superposition tests).
void add_path(ArraySnapshot& out, const MobileFrames& frames, double theta_deg,
              std::span<const cd> gains, std::size_t delay);

/// Frequency-domain noise variance for a per-symbol SNR: Es / 10^(SNR/10).
double snr_to_noise_var(double snr_db, double symbol_energy);
/// Interferer amplitude scale so desired/CCI energy ratio is 10^(SIR/10).
double sir_to_cci_scale(double sir_db);

/// Time-domain noise variance whose DFT (unnormalized) gives `freq_var`
/// per subcarrier.
double time_domain_noise_var(double freq_var, std::size_t K);

/// Deterministic stream seed from a master seed and stream coordinates.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace stbf
