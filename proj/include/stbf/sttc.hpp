#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stbf/numerics.hpp"

namespace stbf {

using Bits = std::vector<std::uint8_t>;

/// Unit-energy M-PSK point exp(j 2 pi index / M).
cd psk_point(int index, int order);

/// Table-driven space-time trellis code over M-PSK.
///
/// Inputs are symbols u in [0, M); with M = 4 each input carries two bits,
/// first bit most significant. Termination is part of the code: every
/// frame ends with `tail_length()` encoder-chosen inputs that return the
/// state to 0, and the decoder restricts the last steps to those branches.
class TrellisCode {
 public:
  TrellisCode(int states, int order, int n_tx, std::vector<int> next_state,
              std::vector<int> outputs);

  /// Feedforward Z_M code in generator notation: for each input bit b the
  /// output on antenna i is sum_k b_{t-k} * g[b][k][i] mod M.
  static TrellisCode from_generators(
      int order, const std::vector<std::vector<std::array<int, 2>>>& generators);

  int states() const noexcept { return states_; }
  int order() const noexcept { return order_; }
  int n_tx() const noexcept { return n_tx_; }
  int bits_per_symbol() const noexcept { return bits_per_symbol_; }

  int next(int state, int input) const { return next_[idx(state, input)]; }
  int output(int state, int input, int antenna) const {
    return out_[idx(state, input) * n_tx_ + antenna];
  }

  std::size_t tail_length() const noexcept { return tail_len_; }
  /// Input applied in state `state` when `remaining` tail steps are left.
  int tail_input(int state, std::size_t remaining) const;

  /// Information bits carried by a frame of `frame_symbols` trellis steps.
  std::size_t info_bits(std::size_t frame_symbols) const;

  const std::vector<int>& next_table() const noexcept { return next_; }
  const std::vector<int>& output_table() const noexcept { return out_; }

 private:
  std::size_t idx(int s, int u) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(order_) +
           static_cast<std::size_t>(u);
  }

  int states_;
  int order_;
  int n_tx_;
  int bits_per_symbol_;
  std::vector<int> next_;
  std::vector<int> out_;
  std::vector<int> dist_to_zero_;
  std::size_t tail_len_ = 0;
};

/// 16-state QPSK code shipped as default; passes the rank-2 gate.
TrellisCode default_sttc();
/// Two-antenna QPSK delay diversity (4 states, antenna 2 repeats the
/// previous symbol).
TrellisCode delay_diversity_qpsk();
/// Degenerate single-state code sending the same symbol on both antennas.
TrellisCode repetition_qpsk();

/// n_T x L symbol matrix of one frame.
struct SpaceTimeCodeword {
  ComplexMatrix symbols;
  std::vector<int> indices;  // row-major n_T x L constellation indices
  int final_state = 0;
};

/// Encodes information bits and appends the terminating tail. The bit count
/// must be a multiple of log2(M).
SpaceTimeCodeword encode(std::span<const std::uint8_t> info_bits,
                         const TrellisCode& code);

/// Observations for one frame, one trellis step per data subcarrier. Each
/// step has `rows` equations R = sum_i H_i x_i + noise, and row r is
/// weighted by row_scale[r] in the branch metric.
struct DecoderInput {
  std::size_t steps = 0;
  std::size_t rows = 0;
  std::size_t n_tx = 2;
  std::vector<cd> received;      // steps * rows
  std::vector<cd> channel;       // steps * rows * n_tx
  std::vector<double> row_scale; // rows

  cd r(std::size_t t, std::size_t row) const { return received[t * rows + row]; }
  cd h(std::size_t t, std::size_t row, std::size_t i) const {
    return channel[(t * rows + row) * n_tx + i];
  }
};

/// Squared-error metric of one candidate symbol vector at step t.
double branch_metric(const DecoderInput& in, std::size_t t,
                     std::span<const cd> symbols);

/// Viterbi search over the terminated trellis; returns information bits.
/// Ties go to the lower-numbered predecessor state.
Bits viterbi_decode(const DecoderInput& in, const TrellisCode& code);

/// Exhaustive minimum-metric codeword search; refuses frames longer than
/// kMaxBruteforceSteps.
inline constexpr std::size_t kMaxBruteforceSteps = 8;
Bits ml_decode_bruteforce(const DecoderInput& in, const TrellisCode& code);

/// Total metric of the codeword produced by `info_bits`.
double codeword_metric(const DecoderInput& in, const TrellisCode& code,
                       std::span<const std::uint8_t> info_bits);

struct RankReport {
  int min_rank = 0;
  std::size_t depth = 0;
  /// Length of the shortest rank-deficient error event, 0 if none.
  std::size_t witness_length = 0;
};

/// Minimum rank of the codeword difference matrix over all error events
/// that diverge and remerge within `depth` steps (depth <= 10).
RankReport verify_rank_criterion(const TrellisCode& code, std::size_t depth);

}  // namespace stbf
