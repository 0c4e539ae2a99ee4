#include "stbf/ofdm.hpp"

#include <algorithm>
#include <random>

#include "stbf/errors.hpp"
#include "stbf/sttc.hpp"

namespace stbf {

void PilotPlan::validate() const {
  if (K == 0) throw InvalidDimension("PilotPlan: K must be >= 1");
  if (pilot_indices.size() + data_indices.size() != K)
    throw InvalidIndex("PilotPlan: pilot and data indices must cover all subcarriers");
  std::vector<bool> used(K, false);
  auto mark = [&](std::size_t idx) {
    if (idx >= K) throw InvalidIndex("PilotPlan: index out of range");
    if (used[idx]) throw InvalidIndex("PilotPlan: pilot and data indices overlap");
    used[idx] = true;
  };
  for (std::size_t i : pilot_indices) mark(i);
  for (std::size_t i : data_indices) mark(i);
  for (const auto& p : pilots)
    if (p.size() != pilot_indices.size())
      throw InvalidDimension("PilotPlan: pilot sequence length differs from Q");
}

double max_pilot_cross_correlation(const PilotPlan& plan) {
  const std::size_t Q = plan.pilot_count();
  if (Q == 0) return 0.0;
  double worst = 0.0;
  for (std::size_t a = 0; a < plan.pilots.size(); ++a)
    for (std::size_t b = a + 1; b < plan.pilots.size(); ++b) {
      cd acc{0.0, 0.0};
      for (std::size_t q = 0; q < Q; ++q) acc += plan.pilots[a][q] * std::conj(plan.pilots[b][q]);
      worst = std::max(worst, std::abs(acc) / static_cast<double>(Q));
    }
  return worst;
}

PilotPlan make_pilot_plan(std::size_t K, std::vector<std::size_t> pilot_indices,
                          std::size_t n_tx, std::uint64_t seed) {
  PilotPlan plan;
  plan.K = K;
  plan.seed = seed;
  plan.pilot_indices = std::move(pilot_indices);
  std::vector<bool> is_pilot(K, false);
  for (std::size_t idx : plan.pilot_indices) {
    if (idx >= K) throw InvalidIndex("make_pilot_plan: pilot index out of range");
    if (is_pilot[idx]) throw InvalidIndex("make_pilot_plan: duplicate pilot index");
    is_pilot[idx] = true;
  }
  for (std::size_t k = 0; k < K; ++k)
    if (!is_pilot[k]) plan.data_indices.push_back(k);

  const std::size_t Q = plan.pilot_indices.size();
  // Short sequences cannot meet the correlation bound; they only need to
  // differ between antennas.
  const bool bounded = Q >= 8;
  for (std::uint64_t attempt = 0;; ++attempt) {
    std::mt19937_64 rng(seed + attempt);
    std::uniform_int_distribution<int> pick(0, 3);
    plan.pilots.assign(n_tx, std::vector<cd>(Q));
    for (auto& seq : plan.pilots)
      for (auto& p : seq) p = psk_point(pick(rng), 4) * cd{std::sqrt(0.5), std::sqrt(0.5)};
    bool ok = true;
    if (bounded) {
      ok = max_pilot_cross_correlation(plan) < kMaxPilotCrossCorrelation;
    } else if (Q > 0) {
      for (std::size_t a = 0; a < n_tx && ok; ++a)
        for (std::size_t b = a + 1; b < n_tx && ok; ++b) ok = plan.pilots[a] != plan.pilots[b];
    }
    if (ok || attempt > 10000) break;
  }
  plan.validate();
  return plan;
}

PilotPlan evenly_spaced_pilot_plan(std::size_t K, std::size_t spacing,
                                   std::size_t n_tx, std::uint64_t seed) {
  std::vector<std::size_t> idx;
  if (spacing > 0)
    for (std::size_t k = 0; k < K; k += spacing) idx.push_back(k);
  return make_pilot_plan(K, std::move(idx), n_tx, seed);
}

PilotPlan default_pilot_plan(std::uint64_t seed) {
  return evenly_spaced_pilot_plan(288, 9, 2, seed);
}

ComplexVector multiplex(std::span<const cd> data, std::span<const cd> pilots,
                        const PilotPlan& plan) {
  if (data.size() != plan.data_count())
    throw FrameSizeError("multiplex: data length must equal K - Q");
  if (pilots.size() != plan.pilot_count())
    throw FrameSizeError("multiplex: pilot length must equal Q");
  ComplexVector x(static_cast<Eigen::Index>(plan.K));
  for (std::size_t q = 0; q < pilots.size(); ++q)
    x(static_cast<Eigen::Index>(plan.pilot_indices[q])) = pilots[q];
  for (std::size_t d = 0; d < data.size(); ++d)
    x(static_cast<Eigen::Index>(plan.data_indices[d])) = data[d];
  return x;
}

ComplexVector multiplex(std::span<const cd> data, const PilotPlan& plan,
                        std::size_t antenna) {
  if (antenna >= plan.pilots.size())
    throw InvalidIndex("multiplex: antenna has no pilot sequence");
  return multiplex(data, plan.pilots[antenna], plan);
}

Demultiplexed demultiplex(const ComplexVector& spectrum, const PilotPlan& plan) {
  if (static_cast<std::size_t>(spectrum.size()) != plan.K)
    throw InvalidIndex("demultiplex: spectrum length does not match the plan");
  Demultiplexed out;
  out.pilots.resize(static_cast<Eigen::Index>(plan.pilot_count()));
  out.data.resize(static_cast<Eigen::Index>(plan.data_count()));
  for (std::size_t q = 0; q < plan.pilot_count(); ++q) {
    if (plan.pilot_indices[q] >= plan.K) throw InvalidIndex("demultiplex: bad pilot index");
    out.pilots(static_cast<Eigen::Index>(q)) = spectrum(static_cast<Eigen::Index>(plan.pilot_indices[q]));
  }
  for (std::size_t d = 0; d < plan.data_count(); ++d) {
    if (plan.data_indices[d] >= plan.K) throw InvalidIndex("demultiplex: bad data index");
    out.data(static_cast<Eigen::Index>(d)) = spectrum(static_cast<Eigen::Index>(plan.data_indices[d]));
  }
  return out;
}

OfdmFrame modulate(const ComplexVector& x, std::size_t cp_len) {
  const auto K = static_cast<std::size_t>(x.size());
  if (K == 0) throw FrameSizeError("modulate: empty subcarrier vector");
  if (cp_len > K) throw FrameSizeError("modulate: cyclic prefix longer than the body");
  OfdmFrame f;
  f.K = K;
  f.cp_len = cp_len;
  f.samples.resize(static_cast<Eigen::Index>(K + cp_len));
  std::span<cd> body(f.samples.data() + cp_len, K);
  dft_plan(K).inverse(std::span<const cd>(x.data(), K), body);
  for (std::size_t n = 0; n < cp_len; ++n) f.samples(static_cast<Eigen::Index>(n)) = body[K - cp_len + n];
  return f;
}

ComplexVector demodulate(std::span<const cd> r, std::size_t K, std::size_t cp_len) {
  if (K == 0 || r.size() < K + cp_len)
    throw FrameSizeError("demodulate: input shorter than K + cp_len");
  ComplexVector out(static_cast<Eigen::Index>(K));
  dft_plan(K).forward(r.subspan(cp_len, K), std::span<cd>(out.data(), K));
  return out;
}

}  // namespace stbf
