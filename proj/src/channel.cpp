#include "stbf/channel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "stbf/errors.hpp"

namespace stbf {

ComplexVector steering_vector(double theta_deg, std::size_t n_r) {
  const double s = std::sin(theta_deg * std::numbers::pi / 180.0);
  ComplexVector a(static_cast<Eigen::Index>(n_r));
  for (std::size_t m = 0; m < n_r; ++m) {
    const double phase = -std::numbers::pi * static_cast<double>(m) * s;
    a(static_cast<Eigen::Index>(m)) = {std::cos(phase), std::sin(phase)};
  }
  return a;
}

std::vector<double> DoaScenario::all_doas() const {
  std::vector<double> out{desired.path1_deg, desired.path2_deg};
  for (const auto& m : interferers) {
    out.push_back(m.path1_deg);
    out.push_back(m.path2_deg);
  }
  return out;
}

void DoaScenario::validate(std::size_t cp_len) const {
  for (double th : all_doas())
    if (!(std::abs(th) < 90.0))
      throw ConfigError("DoaScenario: every DOA must satisfy |theta| < 90 degrees");
  if (delays[0] != 0) throw ConfigError("DoaScenario: path 1 delay must be 0");
  if (delays[1] > cp_len)
    throw ConfigError("DoaScenario: path delay exceeds the cyclic prefix");
  if (n_t != 2) throw ConfigError("DoaScenario: two transmit antennas per mobile");
  if (n_r < 1) throw ConfigError("DoaScenario: n_r must be >= 1");
  for (double p : path_powers)
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("DoaScenario: path powers must be >= 0");
}

JakesProcess::JakesProcess(double doppler_hz, double frame_duration_s, Rng& rng,
                           std::size_t oscillators)
    : frame_duration_(frame_duration_s),
      omega_(oscillators),
      phase_(oscillators),
      amplitude_(1.0 / std::sqrt(static_cast<double>(oscillators))) {
  if (!(doppler_hz >= 0.0)) throw ConfigError("JakesProcess: Doppler must be >= 0");
  if (oscillators == 0) throw ConfigError("JakesProcess: need at least one oscillator");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // One random angle per stratum; a shared offset would let two processes
  // end up with nearly identical frequency sets.
  for (std::size_t n = 0; n < oscillators; ++n) {
    const double alpha = std::numbers::pi * (static_cast<double>(n) + unit(rng)) /
                         static_cast<double>(oscillators);
    omega_[n] = 2.0 * std::numbers::pi * doppler_hz * std::cos(alpha);
    phase_[n] = 2.0 * std::numbers::pi * unit(rng);
  }
}

cd JakesProcess::at(double n) const {
  const double t = n * frame_duration_;
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < omega_.size(); ++k) {
    const double ph = omega_[k] * t + phase_[k];
    re += std::cos(ph);
    im += std::sin(ph);
  }
  return {re * amplitude_, im * amplitude_};
}

std::vector<cd> jakes_process(double doppler_hz, std::size_t n_frames,
                              double frame_duration_s, std::uint64_t seed) {
  Rng rng(seed);
  JakesProcess proc(doppler_hz, frame_duration_s, rng, kJakesOscillators);
  std::vector<cd> out(n_frames);
  for (std::size_t n = 0; n < n_frames; ++n) out[n] = proc.at(static_cast<double>(n));
  return out;
}

void add_path(ArraySnapshot& out, const MobileFrames& frames, double theta_deg,
              std::span<const cd> gains, std::size_t delay) {
  const auto n_r = static_cast<std::size_t>(out.rows());
  const auto len = static_cast<std::size_t>(out.cols());
  if (static_cast<std::size_t>(frames.cols()) != len)
    throw FrameSizeError("synthesize_received: frame lengths differ");
  if (gains.size() != static_cast<std::size_t>(frames.rows()))
    throw InvalidDimension("synthesize_received: one gain per transmit antenna");
  ComplexRow mixed = ComplexRow::Zero(static_cast<Eigen::Index>(len));
  for (std::size_t i = 0; i < gains.size(); ++i)
    if (gains[i] != cd{0.0, 0.0}) mixed += gains[i] * frames.row(static_cast<Eigen::Index>(i));
  const ComplexVector a = steering_vector(theta_deg, n_r);
  const std::size_t d = delay % len;
  for (std::size_t n = 0; n < len; ++n) {
    const cd v = mixed(static_cast<Eigen::Index>((n + len - d) % len));
    for (std::size_t m = 0; m < n_r; ++m)
      out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) += a(static_cast<Eigen::Index>(m)) * v;
  }
}

ArraySnapshot synthesize_received(const MobileFrames& desired,
                                  std::span<const MobileFrames> interferers,
                                  const DoaScenario& scenario,
                                  std::span<const PathGains> gains,
                                  double noise_var, Rng& noise_rng) {
  if (gains.size() != 1 + interferers.size())
    throw InvalidDimension("synthesize_received: one PathGains per mobile");
  if (scenario.interferers.size() != interferers.size())
    throw InvalidDimension("synthesize_received: interferer frames do not match the scenario");
  if (scenario.delays[1] >= static_cast<std::size_t>(desired.cols()))
    throw ConfigError("synthesize_received: delay exceeds the frame");
  if (!(noise_var >= 0.0)) throw ConfigError("synthesize_received: noise variance must be >= 0");

  ArraySnapshot V = ArraySnapshot::Zero(static_cast<Eigen::Index>(scenario.n_r), desired.cols());
  auto mobile = [&](const MobileFrames& frames, const MobileDoa& doa, const PathGains& h) {
    const std::array<double, 2> th{doa.path1_deg, doa.path2_deg};
    for (std::size_t p = 0; p < 2; ++p) {
      const std::array<cd, 2> g{h(static_cast<Eigen::Index>(p), 0), h(static_cast<Eigen::Index>(p), 1)};
      add_path(V, frames, th[p], g, scenario.delays[p]);
    }
  };
  mobile(desired, scenario.desired, gains[0]);
  for (std::size_t j = 0; j < interferers.size(); ++j)
    mobile(interferers[j], scenario.interferers[j], gains[j + 1]);

  // Always draw so the stream position does not depend on the noise level.
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s = std::sqrt(noise_var / 2.0);
  for (Eigen::Index n = 0; n < V.cols(); ++n)
    for (Eigen::Index m = 0; m < V.rows(); ++m) {
      const double re = normal(noise_rng);
      const double im = normal(noise_rng);
      V(m, n) += cd{re * s, im * s};
    }
  return V;
}

ArraySnapshot synthesize_received(const MobileFrames& desired,
                                  std::span<const MobileFrames> interferers,
                                  const DoaScenario& scenario,
                                  std::span<const PathGains> gains,
                                  double noise_var, std::uint64_t seed) {
  Rng rng(seed);
  return synthesize_received(desired, interferers, scenario, gains, noise_var, rng);
}

double snr_to_noise_var(double snr_db, double symbol_energy) {
  if (!(symbol_energy > 0.0)) throw ConfigError("snr_to_noise_var: symbol energy must be > 0");
  if (std::isinf(snr_db)) return snr_db > 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return symbol_energy / std::pow(10.0, snr_db / 10.0);
}

double sir_to_cci_scale(double sir_db) {
  if (std::isinf(sir_db)) return sir_db > 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::pow(10.0, -sir_db / 20.0);
}

double time_domain_noise_var(double freq_var, std::size_t K) {
  return freq_var / static_cast<double>(K);
}

namespace {
std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t h = splitmix(master);
  h = splitmix(h ^ a);
  h = splitmix(h ^ (b + 0x51ed270b7b0a4c4dULL));
  h = splitmix(h ^ (c + 0x2545f4914f6cdd1dULL));
  return h;
}

}  // namespace stbf
