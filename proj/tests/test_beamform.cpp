#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "stbf/beamform.hpp"
#include "stbf/errors.hpp"
#include "stbf/ofdm.hpp"
#include "stbf/sttc.hpp"

using namespace stbf;

namespace {

const std::vector<double> kFig4Doas{10, -20, -60, 40};

ComplexVector random_vec(std::size_t n, std::mt19937_64& rng) {
  ComplexVector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = oracle::random_normal_c(rng);
  return v;
}

double db(double x) { return 20.0 * std::log10(x); }

}  // namespace

TEST_CASE("beamformer output") {
  std::mt19937_64 rng(1);
  const ComplexMatrix V = oracle::random_matrix(4, 328, rng);
  BeamWeights e1{ComplexVector::Unit(4, 0), 1};
  CHECK((beamformer_output(e1, V) - V.row(0)).norm() == 0.0);
  const BeamWeights w{random_vec(4, rng), 1};
  const cd c{0.5, -2.0};
  const BeamWeights wc{c * w.w, 1};
  CHECK((beamformer_output(wc, V) - std::conj(c) * beamformer_output(w, V)).norm() < 1e-10);
}

TEST_CASE("null-steering output keeps only the look path") {
  std::mt19937_64 rng(2);
  DoaScenario s;
  s.delays = {0, 15};
  MobileFrames Y = oracle::random_matrix(2, 328, rng), Z = oracle::random_matrix(2, 328, rng);
  std::vector<PathGains> gains(2);
  for (auto& g : gains) g = oracle::random_matrix(2, 2, rng);
  const std::vector<MobileFrames> zs{Z};
  const auto V = synthesize_received(Y, zs, s, gains, 0.0, 1u);
  const auto w1 = null_steering_weights(kFig4Doas, 1, 4);
  const ComplexRow r = beamformer_output(w1, V);
  const ComplexRow expect = gains[0](0, 0) * Y.row(0) + gains[0](0, 1) * Y.row(1);
  CHECK((r - expect).squaredNorm() < 1e-8 * expect.squaredNorm());
}

TEST_CASE("lms_step fixed points and scalar hand check") {
  std::mt19937_64 rng(3);
  const auto plan = default_pilot_plan();
  const ComplexMatrix block = oracle::random_matrix(4, 288, rng);
  const BeamWeights w{random_vec(4, rng), 1};
  // Reference equal to the current output: no change.
  ComplexVector ytilde(32);
  const ComplexRow r = beamformer_output(w, block);
  std::vector<cd> rv(r.data(), r.data() + r.size()), spectrum = oracle::dft(rv);
  for (std::size_t q = 0; q < 32; ++q) ytilde(static_cast<Eigen::Index>(q)) = spectrum[plan.pilot_indices[q]];
  const std::vector<cd> refs(ytilde.data(), ytilde.data() + 32);
  CHECK((lms_step(w, block, refs, plan, 0.1).w - w.w).norm() < 1e-10);
  const std::vector<cd> other(32, cd{1.0, 1.0});
  CHECK((lms_step(w, block, other, plan, 0.0).w - w.w).norm() == 0.0);

  // n_R = 1, K = 1, one pilot at bin 0: w' = w + 2 mu v (y - w* v)*.
  PilotPlan tiny = make_pilot_plan(1, {0}, 1, 1);
  const cd v{0.8, -0.3}, y{1.0, 0.5}, w0{0.2, 0.1};
  const double mu = 0.05;
  ComplexMatrix b1(1, 1);
  b1(0, 0) = v;
  const BeamWeights ws{ComplexVector::Constant(1, w0), 1};
  const std::vector<cd> yref{y};
  const cd expect = w0 + 2.0 * mu * v * std::conj(y - std::conj(w0) * v);
  CHECK(std::abs(lms_step(ws, b1, yref, tiny, mu).w(0) - expect) < 1e-14);
}

TEST_CASE("lms_step is linear in the pilot error") {
  std::mt19937_64 rng(4);
  const auto plan = default_pilot_plan();
  const ComplexMatrix block = oracle::random_matrix(4, 288, rng);
  const BeamWeights w{random_vec(4, rng), 1};
  const ComplexVector y1 = random_vec(32, rng), y2 = random_vec(32, rng);
  auto delta = [&](const ComplexVector& y) {
    const std::vector<cd> refs(y.data(), y.data() + 32);
    return ComplexVector(lms_step(w, block, refs, plan, 0.01).w - w.w);
  };
  const ComplexVector d0 = delta(ComplexVector::Zero(32));
  const ComplexVector d1 = delta(y1) - d0, d2 = delta(y2) - d0, d12 = delta(y1 + 2.0 * y2) - d0;
  CHECK((d12 - (d1 + 2.0 * d2)).norm() < 1e-10 * d12.norm());
}

TEST_CASE("time-domain and spectral LMS routes agree") {
  std::mt19937_64 rng(5);
  const auto plan = default_pilot_plan();
  const ComplexMatrix block = oracle::random_matrix(4, 288, rng);
  const ComplexVector y = random_vec(32, rng);
  const BeamWeights w{random_vec(4, rng), 2};
  const std::vector<cd> refs(y.data(), y.data() + 32);
  const auto obs = observe_pilots(block, plan, y);
  CHECK((lms_step(w, block, refs, plan, 0.003).w - lms_step(w, obs, 0.003).w).norm() < 1e-10);
}

TEST_CASE("train_lms: converges, tiny mu stalls, zero mu is flat, large mu diverges") {
  std::mt19937_64 rng(6);
  const auto plan = default_pilot_plan();
  // Single source at 10 degrees, noise free.
  const auto a = oracle::ula(10.0, 4);
  const ComplexVector s = random_vec(288, rng);
  ComplexMatrix block = a * s.transpose();
  std::vector<cd> sv(s.data(), s.data() + 288), S = oracle::dft(sv);
  ComplexVector ref(32);
  // Reference carries a gain the initial e1 weights do not match.
  const cd g{0.3, 0.8};
  for (std::size_t q = 0; q < 32; ++q) ref(static_cast<Eigen::Index>(q)) = g * S[plan.pilot_indices[q]];
  const std::vector<PilotObservation> frames{observe_pilots(block, plan, ref)};

  LmsConfig cfg;
  const auto res = train_lms(cfg, frames, 1);
  REQUIRE(res.mse.size() == cfg.max_frames + 1);
  CHECK(res.mse.back() < 1e-2 * res.mse.front());

  cfg.mu = 1e-9 / frames[0].spectra.squaredNorm();
  const auto slow = train_lms(cfg, frames, 1);
  CHECK((slow.weights.w - ComplexVector::Unit(4, 0)).norm() < 1e-6);

  cfg.mu = 0.0;
  const auto flat = train_lms(cfg, frames, 1);
  for (double m : flat.mse) CHECK(m == flat.mse.front());

  cfg.mu = 10.0;
  CHECK_THROWS_AS(train_lms(cfg, frames, 1), DivergenceError);
  cfg.mu = -1.0;
  CHECK_THROWS_AS(train_lms(cfg, frames, 1), ConfigError);
}

TEST_CASE("train_lms tolerance stops early") {
  std::mt19937_64 rng(7);
  const auto plan = default_pilot_plan();
  const ComplexMatrix block = oracle::ula(-30.0, 4) * random_vec(288, rng).transpose();
  const auto obs = observe_pilots(block, plan, random_vec(32, rng));
  LmsConfig cfg;
  cfg.tolerance = 1e-3;
  const std::vector<PilotObservation> frames{obs};
  CHECK(train_lms(cfg, frames, 1).mse.size() < 201);
}

TEST_CASE("beam response") {
  const BeamWeights e1{ComplexVector::Unit(4, 0), 1};
  const std::vector<double> angles{-80, -10, 0, 33, 89};
  for (cd b : beam_response(e1, angles).response) CHECK(std::abs(b - 1.0) < 1e-15);
  const BeamWeights matched{oracle::ula(25.0, 4) / 4.0, 1};
  const std::vector<double> look{25.0};
  CHECK(std::abs(beam_response(matched, look).response[0] - 1.0) < 1e-12);
  // Equals D conj(w).
  const AngleGrid grid = AngleGrid::uniform(181, 4);
  std::mt19937_64 rng(8);
  const BeamWeights w{random_vec(4, rng), 1};
  const ComplexVector b = grid.steering() * w.w.conjugate();
  const auto p = beam_response(w, grid.angles());
  for (std::size_t i = 0; i < 181; ++i) CHECK(std::abs(p.response[i] - b(static_cast<Eigen::Index>(i))) < 1e-12);
}

TEST_CASE("null steering constraints") {
  for (int l = 1; l <= 2; ++l) {
    const auto w = null_steering_weights(kFig4Doas, l, 4);
    const auto p = beam_response(w, kFig4Doas);
    for (int i = 0; i < 4; ++i) {
      const double target = i == l - 1 ? 1.0 : 0.0;
      CHECK(std::abs(p.response[static_cast<std::size_t>(i)] - target) < 1e-10);
    }
  }
  const std::vector<double> one{30.0};
  const auto w = null_steering_weights(one, 1, 1);
  CHECK(std::abs(w.w(0) - 1.0 / std::conj(oracle::ula(30.0, 1)(0))) < 1e-12);
  const std::vector<double> three{10, -20, 40};
  CHECK_THROWS_AS(null_steering_weights(three, 1, 4), InvalidDimension);
  const std::vector<double> same{10, 10, -60, 40};
  CHECK_THROWS_AS(null_steering_weights(same, 1, 4), SingularMatrix);
}

TEST_CASE("near-coincident DOAs inflate the weight norm") {
  const double base = null_steering_weights(kFig4Doas, 1, 4).w.norm();
  const std::vector<double> close{10, 10.5, -60, 40};
  const double tight = null_steering_weights(close, 1, 4).w.norm();
  CHECK(tight > 20.0 * base);
  // Condition growth of A backs it up.
  Eigen::Matrix4cd A;
  for (int p = 0; p < 4; ++p) A.col(p) = oracle::ula(close[static_cast<std::size_t>(p)], 4);
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(A);
  CHECK(svd.singularValues()(0) / svd.singularValues()(3) > 100.0);
}

TEST_CASE("deepen_nulls on a square grid reproduces imposed zeros") {
  std::mt19937_64 rng(9);
  const AngleGrid grid(kFig4Doas, 4);
  const BeamWeights w{random_vec(4, rng), 1};
  NullSpec spec{{-20, -60, 40}, 1.0, 1};
  const auto out = deepen_nulls(w, spec, grid);
  const auto before = beam_response(w, kFig4Doas), after = beam_response(out, kFig4Doas);
  CHECK(std::abs(after.response[0] - before.response[0]) < 1e-10);
  for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(after.response[i]) < 1e-10);

  // No nulls: identity on the square grid, projection on the dense grid.
  NullSpec none{{}, 5.0, 1};
  CHECK((deepen_nulls(w, none, grid).w - w.w).norm() < 1e-10);
  const AngleGrid dense = AngleGrid::uniform(181, 4);
  CHECK((deepen_nulls(w, none, dense).w - w.w).norm() < 1e-10);

  const std::vector<double> dup{0, 0, 10, 20};
  CHECK_THROWS_AS(AngleGrid(dup, 4), SingularMatrix);
  NullSpec outside{{95.0}, 5.0, 1};
  CHECK_THROWS_AS(deepen_nulls(w, outside, dense), InvalidIndex);
}

TEST_CASE("null window mask covers the width") {
  const AngleGrid dense = AngleGrid::uniform(181, 4);
  NullSpec spec{{40.0}, 5.0, 1};
  const auto mask = null_window_mask(spec, dense);
  std::size_t count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) {
      ++count;
      CHECK(std::abs(dense.angles()[i] - 40.0) <= 2.5 + 1e-9);
    }
  CHECK(count == 5);
}

TEST_CASE("dense-grid deepening lowers the response in every window") {
  std::mt19937_64 rng(10);
  const AngleGrid dense = AngleGrid::uniform(181, 4);
  const auto w = normalize_to_peak(BeamWeights{random_vec(4, rng), 1}, dense);
  NullSpec spec{{-60, 40}, 5.0, 50};
  const auto post = deepen_nulls(w, spec, dense);
  const std::vector<double> centers{-60, 40};
  const auto pb = beam_response(w, centers), pa = beam_response(post, centers);
  for (std::size_t i = 0; i < 2; ++i) CHECK(db(std::abs(pa.response[i])) < db(std::abs(pb.response[i])));
}

TEST_CASE("peak normalization") {
  std::mt19937_64 rng(11);
  const AngleGrid dense = AngleGrid::uniform(181, 4);
  const auto w = normalize_to_peak(BeamWeights{random_vec(4, rng), 2}, dense);
  const auto p = beam_response(w, dense.angles());
  double best = 0;
  cd at{};
  for (cd b : p.response)
    if (std::abs(b) > best) best = std::abs(b), at = b;
  CHECK(std::abs(at - 1.0) < 1e-12);
  CHECK(w.index == 2);
}

TEST_CASE("effective channel structure") {
  std::mt19937_64 rng(12);
  const PathGains h = oracle::random_matrix(2, 2, rng);
  const auto w1 = null_steering_weights(kFig4Doas, 1, 4), w2 = null_steering_weights(kFig4Doas, 2, 4);
  std::vector<std::size_t> ks(288);
  for (std::size_t k = 0; k < 288; ++k) ks[k] = k;
  const auto ns = effective_channel(BeamformerVariant::null_steering, w1, w2, h, 10, -20, 15, 288, ks);
  // Ideal beams: adaptive form collapses to the null-steering form.
  const auto ad = effective_channel(BeamformerVariant::adaptive, w1, w2, h, 10, -20, 15, 288, ks);
  CHECK(std::abs(ad.rho) < 1e-10);
  CHECK(std::abs(ad.beta) < 1e-10);
  for (std::size_t k = 0; k < 288; ++k) {
    CHECK((ad.per_subcarrier[k] - ns.per_subcarrier[k]).norm() < 1e-10);
    const cd om = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * 15) / 288.0);
    CHECK((ns.per_subcarrier[k].row(0) - h.row(0)).norm() < 1e-14);
    CHECK((ns.per_subcarrier[k].row(1) - om * h.row(1)).norm() < 1e-12);
  }
  // tau = 0: omega = 1.
  const auto flat = effective_channel(BeamformerVariant::null_steering, w1, w2, h, 10, -20, 0, 288, ks);
  for (std::size_t k = 0; k < 288; ++k) CHECK((flat.per_subcarrier[k].row(1) - h.row(1)).norm() < 1e-14);
  CHECK(std::abs(delay_phase(144, 15, 288) - cd{-1.0, 0.0}) < 1e-12);
}

TEST_CASE("effective channel matches the demodulated beamformer output") {
  // Noise-free, CCI-free: R^l(k) == sum_i H(l, i) x_i(k) on every subcarrier.
  std::mt19937_64 rng(13);
  const auto plan = default_pilot_plan();
  DoaScenario s;
  s.interferers.clear();
  s.delays = {0, 15};
  std::vector<ComplexVector> X(2);
  MobileFrames Y(2, 328);
  for (int i = 0; i < 2; ++i) {
    X[static_cast<std::size_t>(i)] = random_vec(288, rng);
    Y.row(i) = modulate(X[static_cast<std::size_t>(i)], 40).samples.transpose();
  }
  const PathGains h = oracle::random_matrix(2, 2, rng);
  const std::vector<PathGains> gains{h};
  const auto V = synthesize_received(Y, {}, s, gains, 0.0, 1u);
  const AngleGrid dense = AngleGrid::uniform(181, 4);
  const BeamWeights w1 = normalize_to_peak({random_vec(4, rng), 1}, dense);
  const BeamWeights w2 = normalize_to_peak({random_vec(4, rng), 2}, dense);
  std::vector<std::size_t> ks(288);
  for (std::size_t k = 0; k < 288; ++k) ks[k] = k;
  const auto ch = effective_channel(BeamformerVariant::adaptive, w1, w2, h, 10, -20, 15, 288, ks);
  const std::array<BeamWeights, 2> ws{w1, w2};
  for (int l = 0; l < 2; ++l) {
    const ComplexRow r = beamformer_output(ws[static_cast<std::size_t>(l)], V);
    const ComplexVector R = demodulate(std::span<const cd>(r.data(), 328), 288, 40);
    double err = 0;
    for (std::size_t k = 0; k < 288; ++k) {
      const cd pred = ch.per_subcarrier[k](l, 0) * X[0](static_cast<Eigen::Index>(k)) +
                      ch.per_subcarrier[k](l, 1) * X[1](static_cast<Eigen::Index>(k));
      err = std::max(err, std::abs(R(static_cast<Eigen::Index>(k)) - pred));
    }
    CHECK(err < 1e-10);
  }
}

TEST_CASE("path pilot reference") {
  const auto plan = default_pilot_plan();
  std::mt19937_64 rng(14);
  const PathGains h = oracle::random_matrix(2, 2, rng);
  const auto ref = path_pilot_reference(plan, h, 1, 15);
  for (std::size_t q = 0; q < 32; ++q) {
    const cd om = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(plan.pilot_indices[q] * 15) / 288.0);
    const cd expect = om * (h(1, 0) * plan.pilots[0][q] + h(1, 1) * plan.pilots[1][q]);
    CHECK(std::abs(ref(static_cast<Eigen::Index>(q)) - expect) < 1e-12);
  }
}
