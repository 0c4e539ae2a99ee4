#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stbf/numerics.hpp"

namespace stbf {

/// Placement of pilot and data subcarriers plus the per-antenna pilot
/// symbols. Pilot index q of antenna i carries pilots[i][q].
struct PilotPlan {
  std::size_t K = 0;
  std::vector<std::size_t> pilot_indices;
  std::vector<std::size_t> data_indices;
  std::vector<std::vector<cd>> pilots;  // per transmit antenna, length Q
  std::uint64_t seed = 0;

  std::size_t pilot_count() const noexcept { return pilot_indices.size(); }
  std::size_t data_count() const noexcept { return data_indices.size(); }

  /// Checks disjoint cover of [0, K) and pilot sequence shapes.
  void validate() const;
};

/// Largest |normalized cross-correlation| accepted between two antennas'
/// pilot sequences.
inline constexpr double kMaxPilotCrossCorrelation = 0.2;

/// Builds a plan from explicit pilot indices; data indices are the rest in
/// ascending order. Pilot symbols are unit-energy QPSK drawn from `seed`
/// (advanced deterministically until the cross-correlation bound holds).
PilotPlan make_pilot_plan(std::size_t K, std::vector<std::size_t> pilot_indices,
                          std::size_t n_tx, std::uint64_t seed);

/// Pilots on every `spacing`-th subcarrier starting at 0.
PilotPlan evenly_spaced_pilot_plan(std::size_t K, std::size_t spacing,
                                   std::size_t n_tx, std::uint64_t seed);

/// Default plan: 288 subcarriers, pilots at 0, 9, ..., 279.
PilotPlan default_pilot_plan(std::uint64_t seed = 2024);

/// max over antenna pairs of |sum_q p_a[q] conj(p_b[q])| / Q.
double max_pilot_cross_correlation(const PilotPlan& plan);

ComplexVector multiplex(std::span<const cd> data, const PilotPlan& plan,
                        std::size_t antenna);
ComplexVector multiplex(std::span<const cd> data, std::span<const cd> pilots,
                        const PilotPlan& plan);

struct Demultiplexed {
  ComplexVector pilots;
  ComplexVector data;
};
Demultiplexed demultiplex(const ComplexVector& spectrum, const PilotPlan& plan);

/// One time-domain OFDM frame: cp_len prefix samples then K body samples.
struct OfdmFrame {
  std::size_t K = 0;
  std::size_t cp_len = 0;
  ComplexVector samples;

  auto body() const { return samples.segment(static_cast<Eigen::Index>(cp_len), static_cast<Eigen::Index>(K)); }
};

/// Inverse DFT with 1/K normalization, then cyclic prefix.
OfdmFrame modulate(const ComplexVector& x, std::size_t cp_len);

/// Drops the prefix and applies the forward DFT to the next K samples.
ComplexVector demodulate(std::span<const cd> r, std::size_t K, std::size_t cp_len);

}  // namespace stbf
