#include "stbf/sttc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <set>
#include <tuple>

#include "stbf/errors.hpp"

namespace stbf {

cd psk_point(int index, int order) {
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(index) /
                       static_cast<double>(order);
  return {std::cos(phase), std::sin(phase)};
}

TrellisCode::TrellisCode(int states, int order, int n_tx,
                         std::vector<int> next_state, std::vector<int> outputs)
    : states_(states),
      order_(order),
      n_tx_(n_tx),
      bits_per_symbol_(0),
      next_(std::move(next_state)),
      out_(std::move(outputs)) {
  if (states < 1 || n_tx < 1 || order < 2 || (order & (order - 1)) != 0)
    throw ConfigError("TrellisCode: need states >= 1, n_tx >= 1, order a power of two");
  while ((1 << bits_per_symbol_) < order) ++bits_per_symbol_;
  const auto branches = static_cast<std::size_t>(states) * static_cast<std::size_t>(order);
  if (next_.size() != branches)
    throw ConfigError("TrellisCode: next-state table must have states*order entries");
  if (out_.size() != branches * static_cast<std::size_t>(n_tx))
    throw ConfigError("TrellisCode: output table must have states*order*n_tx entries");
  for (int s : next_)
    if (s < 0 || s >= states) throw ConfigError("TrellisCode: next state out of range");
  for (int x : out_)
    if (x < 0 || x >= order) throw ConfigError("TrellisCode: output symbol out of range");

  // Reverse BFS for the distance of each state to state 0.
  constexpr int kInf = std::numeric_limits<int>::max();
  dist_to_zero_.assign(static_cast<std::size_t>(states), kInf);
  dist_to_zero_[0] = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (int s = 0; s < states; ++s)
      for (int u = 0; u < order; ++u) {
        const int d = dist_to_zero_[static_cast<std::size_t>(next(s, u))];
        if (d != kInf && d + 1 < dist_to_zero_[static_cast<std::size_t>(s)]) {
          dist_to_zero_[static_cast<std::size_t>(s)] = d + 1;
          changed = true;
        }
      }
  }
  int worst = 0;
  for (int d : dist_to_zero_) {
    if (d == kInf) throw ConfigError("TrellisCode: some state cannot return to state 0");
    worst = std::max(worst, d);
  }
  tail_len_ = static_cast<std::size_t>(worst);
  if (tail_len_ > 0) {
    bool self_loop = false;
    for (int u = 0; u < order; ++u) self_loop |= next(0, u) == 0;
    if (!self_loop) throw ConfigError("TrellisCode: state 0 needs a self-loop for termination");
  }

  std::vector<bool> reach(static_cast<std::size_t>(states), false);
  std::deque<int> queue{0};
  reach[0] = true;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int u = 0; u < order; ++u) {
      const int n = next(s, u);
      if (!reach[static_cast<std::size_t>(n)]) {
        reach[static_cast<std::size_t>(n)] = true;
        queue.push_back(n);
      }
    }
  }
  if (std::find(reach.begin(), reach.end(), false) != reach.end())
    throw ConfigError("TrellisCode: some state is unreachable from state 0");
}

TrellisCode TrellisCode::from_generators(
    int order, const std::vector<std::vector<std::array<int, 2>>>& generators) {
  const int nb = static_cast<int>(generators.size());
  if (nb < 1 || (1 << nb) != order)
    throw ConfigError("from_generators: need log2(order) generator sequences");
  std::vector<int> memory(static_cast<std::size_t>(nb));
  int total_memory = 0;
  for (int b = 0; b < nb; ++b) {
    if (generators[static_cast<std::size_t>(b)].empty())
      throw ConfigError("from_generators: empty generator");
    memory[static_cast<std::size_t>(b)] =
        static_cast<int>(generators[static_cast<std::size_t>(b)].size()) - 1;
    total_memory += memory[static_cast<std::size_t>(b)];
  }
  const int states = 1 << total_memory;
  std::vector<int> next(static_cast<std::size_t>(states * order));
  std::vector<int> out(static_cast<std::size_t>(states * order * 2));
  for (int s = 0; s < states; ++s) {
    for (int u = 0; u < order; ++u) {
      int offset = 0;
      int ns = 0;
      std::array<int, 2> acc{0, 0};
      for (int b = 0; b < nb; ++b) {
        const auto& g = generators[static_cast<std::size_t>(b)];
        const int v = memory[static_cast<std::size_t>(b)];
        const int bit = (u >> (nb - 1 - b)) & 1;
        // register[0] is the current bit, register[k] the bit k steps back.
        std::vector<int> reg(static_cast<std::size_t>(v + 1));
        reg[0] = bit;
        for (int k = 0; k < v; ++k) reg[static_cast<std::size_t>(k + 1)] = (s >> (offset + k)) & 1;
        for (int k = 0; k <= v; ++k)
          for (int i = 0; i < 2; ++i)
            acc[static_cast<std::size_t>(i)] +=
                reg[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        for (int k = 0; k < v; ++k) ns |= reg[static_cast<std::size_t>(k)] << (offset + k);
        offset += v;
      }
      const auto id = static_cast<std::size_t>(s * order + u);
      next[id] = ns;
      for (int i = 0; i < 2; ++i)
        out[id * 2 + static_cast<std::size_t>(i)] = ((acc[static_cast<std::size_t>(i)] % order) + order) % order;
    }
  }
  return TrellisCode(states, order, 2, std::move(next), std::move(out));
}

int TrellisCode::tail_input(int state, std::size_t remaining) const {
  for (int u = 0; u < order_; ++u) {
    const int d = dist_to_zero_[static_cast<std::size_t>(next(state, u))];
    if (remaining >= 1 && static_cast<std::size_t>(d) <= remaining - 1) return u;
  }
  throw ConfigError("TrellisCode: state cannot terminate in the remaining tail steps");
}

std::size_t TrellisCode::info_bits(std::size_t frame_symbols) const {
  if (frame_symbols < tail_len_)
    throw FrameSizeError("TrellisCode: frame shorter than the termination tail");
  return (frame_symbols - tail_len_) * static_cast<std::size_t>(bits_per_symbol_);
}

TrellisCode default_sttc() {
  return TrellisCode::from_generators(
      4, {{{0, 2}, {1, 2}, {2, 3}}, {{2, 0}, {2, 2}, {0, 2}}});
}

TrellisCode delay_diversity_qpsk() {
  std::vector<int> next(16), out(32);
  for (int s = 0; s < 4; ++s)
    for (int u = 0; u < 4; ++u) {
      next[static_cast<std::size_t>(s * 4 + u)] = u;
      out[static_cast<std::size_t>((s * 4 + u) * 2)] = u;
      out[static_cast<std::size_t>((s * 4 + u) * 2 + 1)] = s;
    }
  return TrellisCode(4, 4, 2, std::move(next), std::move(out));
}

TrellisCode repetition_qpsk() {
  std::vector<int> next(4, 0), out(8);
  for (int u = 0; u < 4; ++u) {
    out[static_cast<std::size_t>(u * 2)] = u;
    out[static_cast<std::size_t>(u * 2 + 1)] = u;
  }
  return TrellisCode(1, 4, 2, std::move(next), std::move(out));
}

namespace {

std::vector<int> bits_to_inputs(std::span<const std::uint8_t> bits, int bps) {
  if (bits.size() % static_cast<std::size_t>(bps) != 0)
    throw FrameSizeError("encode: bit count is not a multiple of log2(M)");
  std::vector<int> inputs(bits.size() / static_cast<std::size_t>(bps));
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    int u = 0;
    for (int b = 0; b < bps; ++b) u = (u << 1) | (bits[t * static_cast<std::size_t>(bps) + static_cast<std::size_t>(b)] & 1);
    inputs[t] = u;
  }
  return inputs;
}

void append_input_bits(Bits& bits, int u, int bps) {
  for (int b = bps - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((u >> b) & 1));
}

}  // namespace

SpaceTimeCodeword encode(std::span<const std::uint8_t> info_bits,
                         const TrellisCode& code) {
  const std::vector<int> inputs = bits_to_inputs(info_bits, code.bits_per_symbol());
  const std::size_t L = inputs.size() + code.tail_length();
  const auto nt = static_cast<std::size_t>(code.n_tx());
  SpaceTimeCodeword cw;
  cw.symbols.resize(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(L));
  cw.indices.resize(nt * L);
  int state = 0;
  for (std::size_t t = 0; t < L; ++t) {
    const int u = t < inputs.size() ? inputs[t] : code.tail_input(state, L - t);
    for (std::size_t i = 0; i < nt; ++i) {
      const int x = code.output(state, u, static_cast<int>(i));
      cw.indices[i * L + t] = x;
      cw.symbols(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = psk_point(x, code.order());
    }
    state = code.next(state, u);
  }
  cw.final_state = state;
  return cw;
}

double branch_metric(const DecoderInput& in, std::size_t t,
                     std::span<const cd> symbols) {
  double m = 0.0;
  for (std::size_t r = 0; r < in.rows; ++r) {
    cd e = in.r(t, r);
    for (std::size_t i = 0; i < in.n_tx; ++i) e -= in.h(t, r, i) * symbols[i];
    m += in.row_scale[r] * std::norm(e);
  }
  return m;
}

namespace {

void check_input(const DecoderInput& in, const TrellisCode& code) {
  if (in.n_tx != static_cast<std::size_t>(code.n_tx()))
    throw InvalidDimension("decoder: channel n_tx does not match the code");
  if (in.received.size() != in.steps * in.rows)
    throw IncompleteCsi("decoder: received sample count does not match steps*rows");
  if (in.channel.size() != in.steps * in.rows * in.n_tx)
    throw IncompleteCsi("decoder: missing channel entries for some data subcarrier");
  if (in.row_scale.size() != in.rows)
    throw InvalidDimension("decoder: one row scale per observation row required");
  if (in.steps < code.tail_length())
    throw FrameSizeError("decoder: frame shorter than the termination tail");
}

// Metric of every symbol combination at step t; combination index
// c = sum_i x_i * M^i.
void combo_metrics(const DecoderInput& in, std::size_t t, int order,
                   std::vector<double>& out) {
  const std::size_t nt = in.n_tx;
  std::size_t combos = 1;
  for (std::size_t i = 0; i < nt; ++i) combos *= static_cast<std::size_t>(order);
  out.resize(combos);
  std::vector<cd> sym(nt);
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t rest = c;
    for (std::size_t i = 0; i < nt; ++i) {
      sym[i] = psk_point(static_cast<int>(rest % static_cast<std::size_t>(order)), order);
      rest /= static_cast<std::size_t>(order);
    }
    out[c] = branch_metric(in, t, sym);
  }
}

std::size_t combo_of(const TrellisCode& code, int s, int u) {
  std::size_t c = 0, mul = 1;
  for (int i = 0; i < code.n_tx(); ++i) {
    c += static_cast<std::size_t>(code.output(s, u, i)) * mul;
    mul *= static_cast<std::size_t>(code.order());
  }
  return c;
}

}  // namespace

Bits viterbi_decode(const DecoderInput& in, const TrellisCode& code) {
  check_input(in, code);
  const auto S = static_cast<std::size_t>(code.states());
  const int M = code.order();
  const std::size_t L = in.steps;
  const std::size_t info_steps = L - code.tail_length();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> combo(S * static_cast<std::size_t>(M));
  for (std::size_t s = 0; s < S; ++s)
    for (int u = 0; u < M; ++u)
      combo[s * static_cast<std::size_t>(M) + static_cast<std::size_t>(u)] =
          combo_of(code, static_cast<int>(s), u);

  std::vector<double> pm(S, kInf), next_pm(S);
  pm[0] = 0.0;
  std::vector<std::int32_t> prev_state(L * S, -1);
  std::vector<std::int32_t> prev_input(L * S, -1);
  std::vector<double> bm;

  for (std::size_t t = 0; t < L; ++t) {
    combo_metrics(in, t, M, bm);
    std::fill(next_pm.begin(), next_pm.end(), kInf);
    const bool tail = t >= info_steps;
    for (std::size_t s = 0; s < S; ++s) {
      if (pm[s] == kInf) continue;
      const int u_lo = tail ? code.tail_input(static_cast<int>(s), L - t) : 0;
      const int u_hi = tail ? u_lo + 1 : M;
      for (int u = u_lo; u < u_hi; ++u) {
        const auto ns = static_cast<std::size_t>(code.next(static_cast<int>(s), u));
        const double m = pm[s] + bm[combo[s * static_cast<std::size_t>(M) + static_cast<std::size_t>(u)]];
        if (m < next_pm[ns]) {
          next_pm[ns] = m;
          prev_state[t * S + ns] = static_cast<std::int32_t>(s);
          prev_input[t * S + ns] = u;
        }
      }
    }
    pm.swap(next_pm);
  }

  std::vector<int> inputs(L);
  std::size_t state = 0;
  for (std::size_t t = L; t-- > 0;) {
    inputs[t] = prev_input[t * S + state];
    state = static_cast<std::size_t>(prev_state[t * S + state]);
  }
  Bits bits;
  bits.reserve(info_steps * static_cast<std::size_t>(code.bits_per_symbol()));
  for (std::size_t t = 0; t < info_steps; ++t)
    append_input_bits(bits, inputs[t], code.bits_per_symbol());
  return bits;
}

double codeword_metric(const DecoderInput& in, const TrellisCode& code,
                       std::span<const std::uint8_t> info_bits) {
  const SpaceTimeCodeword cw = encode(info_bits, code);
  if (static_cast<std::size_t>(cw.symbols.cols()) != in.steps)
    throw FrameSizeError("codeword_metric: codeword length does not match the frame");
  double total = 0.0;
  std::vector<cd> sym(static_cast<std::size_t>(code.n_tx()));
  for (std::size_t t = 0; t < in.steps; ++t) {
    for (std::size_t i = 0; i < sym.size(); ++i)
      sym[i] = cw.symbols(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
    total += branch_metric(in, t, sym);
  }
  return total;
}

Bits ml_decode_bruteforce(const DecoderInput& in, const TrellisCode& code) {
  if (in.steps > kMaxBruteforceSteps)
    throw EnumerationRefused("ml_decode_bruteforce: frame too long to enumerate");
  check_input(in, code);
  const std::size_t info_steps = in.steps - code.tail_length();
  const auto M = static_cast<std::size_t>(code.order());
  std::size_t candidates = 1;
  for (std::size_t t = 0; t < info_steps; ++t) candidates *= M;

  Bits best;
  double best_metric = std::numeric_limits<double>::infinity();
  Bits bits;
  for (std::size_t c = 0; c < candidates; ++c) {
    bits.clear();
    std::size_t rest = c;
    std::vector<int> inputs(info_steps);
    for (std::size_t t = info_steps; t-- > 0;) {
      inputs[t] = static_cast<int>(rest % M);
      rest /= M;
    }
    for (int u : inputs) append_input_bits(bits, u, code.bits_per_symbol());
    const double m = codeword_metric(in, code, bits);
    if (m < best_metric) {
      best_metric = m;
      best = bits;
    }
  }
  return best;
}

RankReport verify_rank_criterion(const TrellisCode& code, std::size_t depth) {
  if (depth < 1 || depth > 10)
    throw InvalidDimension("verify_rank_criterion: depth must be in [1, 10]");
  if (code.n_tx() != 2)
    throw InvalidDimension("verify_rank_criterion: implemented for two antennas");
  constexpr double kEps = 1e-9;
  const int M = code.order();

  // Search node: the two path states plus the (canonical) direction of the
  // first nonzero difference column; only rank <= 1 prefixes are kept.
  struct Node {
    int a, b;
    bool has_dir;
    cd ratio;   // column direction (1, ratio) or (0, 1) when vertical
    bool vertical;
  };
  auto key = [](const Node& n) {
    auto q = [](double v) { return static_cast<long long>(std::llround(v * 1e6)); };
    return std::make_tuple(n.a, n.b, n.has_dir, n.vertical, q(n.ratio.real()), q(n.ratio.imag()));
  };

  RankReport rep;
  rep.depth = depth;
  rep.min_rank = 2;

  // Returns false if the column breaks rank <= 1.
  auto absorb = [&](Node& n, cd d0, cd d1) {
    const bool zero = std::abs(d0) < kEps && std::abs(d1) < kEps;
    if (zero) return true;
    if (!n.has_dir) {
      n.has_dir = true;
      if (std::abs(d0) > kEps) {
        n.vertical = false;
        n.ratio = d1 / d0;
      } else {
        n.vertical = true;
        n.ratio = 0.0;
      }
      return true;
    }
    if (n.vertical) return std::abs(d0) < kEps;
    return std::abs(d1 - n.ratio * d0) < kEps;
  };

  std::vector<Node> frontier;
  for (int s0 = 0; s0 < code.states(); ++s0)
    for (int u = 0; u < M; ++u)
      for (int v = u + 1; v < M; ++v) {
        Node n{code.next(s0, u), code.next(s0, v), false, 0.0, false};
        const cd d0 = psk_point(code.output(s0, u, 0), M) - psk_point(code.output(s0, v, 0), M);
        const cd d1 = psk_point(code.output(s0, u, 1), M) - psk_point(code.output(s0, v, 1), M);
        if (absorb(n, d0, d1)) frontier.push_back(n);
      }

  for (std::size_t step = 1; step <= depth && !frontier.empty(); ++step) {
    std::vector<Node> expanded;
    std::set<decltype(key(frontier[0]))> seen;
    for (const Node& n : frontier) {
      if (n.a == n.b) {
        const int rank = n.has_dir ? 1 : 0;
        if (rank < rep.min_rank || (rank == rep.min_rank && rep.witness_length == 0)) {
          rep.min_rank = std::min(rep.min_rank, rank);
          if (rep.witness_length == 0) rep.witness_length = step;
        }
        continue;
      }
      if (step == depth) continue;
      for (int u = 0; u < M; ++u)
        for (int v = 0; v < M; ++v) {
          Node m = n;
          m.a = code.next(n.a, u);
          m.b = code.next(n.b, v);
          const cd d0 = psk_point(code.output(n.a, u, 0), M) - psk_point(code.output(n.b, v, 0), M);
          const cd d1 = psk_point(code.output(n.a, u, 1), M) - psk_point(code.output(n.b, v, 1), M);
          if (!absorb(m, d0, d1)) continue;
          if (seen.insert(key(m)).second) expanded.push_back(m);
        }
    }
    frontier = std::move(expanded);
  }
  return rep;
}

}  // namespace stbf
