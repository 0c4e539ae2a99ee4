#include "stbf/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stbf/errors.hpp"

namespace stbf {

void LmsConfig::validate() const {
  if (mu && !(*mu >= 0.0)) throw ConfigError("LmsConfig: mu must be >= 0");
  if (!(step_scale > 0.0)) throw ConfigError("LmsConfig: step_scale must be > 0");
  if (max_frames < 1) throw ConfigError("LmsConfig: max_frames must be >= 1");
  if (!(tolerance >= 0.0)) throw ConfigError("LmsConfig: tolerance must be >= 0");
}

ComplexMatrix strip_prefix(const ArraySnapshot& V, std::size_t K, std::size_t cp_len) {
  if (static_cast<std::size_t>(V.cols()) < K + cp_len)
    throw FrameSizeError("strip_prefix: snapshot shorter than K + cp_len");
  return V.middleCols(static_cast<Eigen::Index>(cp_len), static_cast<Eigen::Index>(K));
}

PilotObservation observe_pilots(const ComplexMatrix& block, const PilotPlan& plan,
                                ComplexVector reference) {
  if (static_cast<std::size_t>(block.cols()) != plan.K)
    throw FrameSizeError("observe_pilots: block must hold K samples");
  if (static_cast<std::size_t>(reference.size()) != plan.pilot_count())
    throw InvalidDimension("observe_pilots: reference length must equal Q");
  const DftPlan& dft = dft_plan(plan.K);
  PilotObservation obs;
  obs.spectra.resize(block.rows(), static_cast<Eigen::Index>(plan.pilot_count()));
  std::vector<cd> row(plan.K), bins(plan.pilot_count());
  for (Eigen::Index m = 0; m < block.rows(); ++m) {
    for (std::size_t n = 0; n < plan.K; ++n) row[n] = block(m, static_cast<Eigen::Index>(n));
    dft.forward_bins(row, plan.pilot_indices, bins);
    for (std::size_t q = 0; q < bins.size(); ++q) obs.spectra(m, static_cast<Eigen::Index>(q)) = bins[q];
  }
  obs.reference = std::move(reference);
  return obs;
}

cd delay_phase(std::size_t k, std::size_t tau, std::size_t K) {
  const double ph = -2.0 * std::numbers::pi * static_cast<double>((k * tau) % K) /
                    static_cast<double>(K);
  return {std::cos(ph), std::sin(ph)};
}

ComplexVector path_pilot_reference(const PilotPlan& plan, const PathGains& h,
                                   std::size_t path, std::size_t delay) {
  if (path > 1) throw InvalidIndex("path_pilot_reference: path must be 0 or 1");
  if (plan.pilots.size() < 2) throw InvalidDimension("path_pilot_reference: need two pilot sequences");
  ComplexVector ref(static_cast<Eigen::Index>(plan.pilot_count()));
  const auto p = static_cast<Eigen::Index>(path);
  for (std::size_t q = 0; q < plan.pilot_count(); ++q) {
    const cd mix = h(p, 0) * plan.pilots[0][q] + h(p, 1) * plan.pilots[1][q];
    ref(static_cast<Eigen::Index>(q)) = delay_phase(plan.pilot_indices[q], delay, plan.K) * mix;
  }
  return ref;
}

ComplexRow beamformer_output(const BeamWeights& w, const ComplexMatrix& V) {
  if (w.w.size() != V.rows())
    throw InvalidDimension("beamformer_output: weight length does not match the array");
  return w.w.adjoint() * V;
}

BeamWeights lms_step(const BeamWeights& w, const ComplexMatrix& block,
                     std::span<const cd> pilot_refs, const PilotPlan& plan, double mu) {
  if (pilot_refs.size() != plan.pilot_count())
    throw InvalidDimension("lms_step: reference length must equal Q");
  const ComplexMatrix FQ =
      pilot_dft_matrix(plan.K, std::span<const std::size_t>(plan.pilot_indices));
  const ComplexRow r = beamformer_output(w, block);
  const ComplexVector received = FQ * r.transpose();
  ComplexVector e(static_cast<Eigen::Index>(pilot_refs.size()));
  for (std::size_t q = 0; q < pilot_refs.size(); ++q)
    e(static_cast<Eigen::Index>(q)) = pilot_refs[q] - received(static_cast<Eigen::Index>(q));
  BeamWeights out = w;
  out.w += 2.0 * mu * (block * FQ.transpose()) * e.conjugate();
  return out;
}

BeamWeights lms_step(const BeamWeights& w, const PilotObservation& obs, double mu) {
  if (w.w.size() != obs.spectra.rows())
    throw InvalidDimension("lms_step: weight length does not match the array");
  const ComplexVector received = obs.spectra.transpose() * w.w.conjugate();
  const ComplexVector e = obs.reference - received;
  BeamWeights out = w;
  out.w += 2.0 * mu * obs.spectra * e.conjugate();
  return out;
}

double pilot_mse(const BeamWeights& w, const PilotObservation& obs) {
  const ComplexVector received = obs.spectra.transpose() * w.w.conjugate();
  return (obs.reference - received).squaredNorm();
}

BeamWeights initial_weights(const LmsConfig& config, std::size_t n_r, int index) {
  BeamWeights w;
  w.index = index;
  if (config.init == WeightInit::steered) {
    w.w = steering_vector(config.init_doa_deg, n_r) / static_cast<double>(n_r);
  } else {
    w.w = ComplexVector::Zero(static_cast<Eigen::Index>(n_r));
    if (n_r > 0) w.w(0) = 1.0;
  }
  return w;
}

LmsResult train_lms(const LmsConfig& config, std::span<const PilotObservation> frames,
                    int index) {
  config.validate();
  if (frames.empty()) throw InvalidDimension("train_lms: no training frames");
  const auto n_r = static_cast<std::size_t>(frames[0].spectra.rows());
  LmsResult res;
  res.weights = initial_weights(config, n_r, index);
  if (config.mu) {
    res.mu = *config.mu;
  } else {
    const double energy = frames[0].spectra.squaredNorm();
    res.mu = energy > 0.0 ? config.step_scale / energy : 0.0;
  }
  res.mse.reserve(config.max_frames + 1);
  double mse0 = 0.0;
  auto check = [&](double mse) {
    if (!std::isfinite(mse) || (mse0 > 0.0 && mse > kDivergenceFactor * mse0))
      throw DivergenceError("train_lms: MSE diverged; use a smaller lms.mu");
  };
  std::size_t last = 0;
  for (std::size_t n = 0; n < config.max_frames; ++n) {
    last = n % frames.size();
    const PilotObservation& obs = frames[last];
    const double mse = pilot_mse(res.weights, obs);
    if (n == 0) mse0 = mse;
    check(mse);
    res.mse.push_back(mse);
    if (config.tolerance > 0.0 && n > 0 &&
        std::abs(res.mse[n] - res.mse[n - 1]) <= config.tolerance * mse0)
      break;
    res.weights = lms_step(res.weights, obs, res.mu);
  }
  const double final_mse = pilot_mse(res.weights, frames[last]);
  check(final_mse);
  res.mse.push_back(final_mse);
  return res;
}

BeamPattern beam_response(const BeamWeights& w, std::span<const double> angles_deg) {
  BeamPattern p;
  p.angles_deg.assign(angles_deg.begin(), angles_deg.end());
  p.response.reserve(angles_deg.size());
  const auto n_r = static_cast<std::size_t>(w.w.size());
  for (double th : angles_deg) p.response.push_back(w.w.dot(steering_vector(th, n_r)));
  return p;
}

AngleGrid::AngleGrid(std::vector<double> angles_deg, std::size_t n_r)
    : angles_(std::move(angles_deg)), n_r_(n_r) {
  if (n_r == 0) throw InvalidDimension("AngleGrid: n_r must be >= 1");
  if (angles_.size() < n_r)
    throw InvalidDimension("AngleGrid: need at least n_r grid points");
  D_.resize(static_cast<Eigen::Index>(angles_.size()), static_cast<Eigen::Index>(n_r));
  for (std::size_t i = 0; i < angles_.size(); ++i)
    D_.row(static_cast<Eigen::Index>(i)) = steering_vector(angles_[i], n_r).transpose();
  const auto N = static_cast<Eigen::Index>(angles_.size());
  solver_ = solve_or_pinv(D_, ComplexMatrix(ComplexMatrix::Identity(N, N)));
}

AngleGrid AngleGrid::uniform(std::size_t points, std::size_t n_r, double lo_deg,
                             double hi_deg) {
  if (points < 2 || !(hi_deg > lo_deg))
    throw InvalidDimension("AngleGrid::uniform: need >= 2 points over a nonempty range");
  std::vector<double> a(points);
  for (std::size_t i = 0; i < points; ++i)
    a[i] = lo_deg + (hi_deg - lo_deg) * static_cast<double>(i) / static_cast<double>(points - 1);
  return AngleGrid(std::move(a), n_r);
}

void NullSpec::validate(const AngleGrid& grid) const {
  if (!(width_deg > 0.0)) throw ConfigError("NullSpec: width must be > 0");
  if (passes < 1) throw ConfigError("NullSpec: passes must be >= 1");
  const auto [lo, hi] = std::minmax_element(grid.angles().begin(), grid.angles().end());
  for (double c : centers_deg)
    if (c < *lo || c > *hi) throw InvalidIndex("NullSpec: null center outside the grid");
}

std::vector<bool> null_window_mask(const NullSpec& spec, const AngleGrid& grid) {
  constexpr double kSlack = 1e-9;
  std::vector<bool> mask(grid.size(), false);
  for (std::size_t n = 0; n < grid.size(); ++n)
    for (double c : spec.centers_deg)
      if (std::abs(grid.angles()[n] - c) <= spec.width_deg / 2.0 + kSlack) mask[n] = true;
  return mask;
}

BeamWeights deepen_nulls(const BeamWeights& w, const NullSpec& spec, const AngleGrid& grid) {
  if (static_cast<std::size_t>(w.w.size()) != grid.n_r())
    throw InvalidDimension("deepen_nulls: weight length does not match the grid");
  spec.validate(grid);
  const std::vector<bool> mask = null_window_mask(spec, grid);
  ComplexVector conj_w = w.w.conjugate();
  for (std::size_t pass = 0; pass < spec.passes; ++pass) {
    ComplexVector b = grid.steering() * conj_w;
    for (std::size_t n = 0; n < mask.size(); ++n)
      if (mask[n]) b(static_cast<Eigen::Index>(n)) = 0.0;
    conj_w = grid.solver() * b;
  }
  BeamWeights out = w;
  out.w = conj_w.conjugate();
  return out;
}

BeamWeights normalize_to_peak(const BeamWeights& w, const AngleGrid& grid) {
  const ComplexVector b = grid.steering() * w.w.conjugate();
  Eigen::Index peak = 0;
  b.cwiseAbs().maxCoeff(&peak);
  const cd bp = b(peak);
  if (std::abs(bp) == 0.0) throw Error("normalize_to_peak: zero beam pattern");
  BeamWeights out = w;
  // (c w)^H a = conj(c) b, so c = 1 / conj(b_peak).
  out.w = w.w / std::conj(bp);
  return out;
}

BeamWeights null_steering_weights(std::span<const double> doas_deg, int index,
                                  std::size_t n_r) {
  if (doas_deg.size() != n_r)
    throw InvalidDimension("null_steering_weights: number of DOAs must equal n_r");
  if (index < 1 || static_cast<std::size_t>(index) > n_r)
    throw InvalidIndex("null_steering_weights: constraint index out of range");
  ComplexMatrix A(static_cast<Eigen::Index>(n_r), static_cast<Eigen::Index>(n_r));
  for (std::size_t k = 0; k < n_r; ++k) A.col(static_cast<Eigen::Index>(k)) = steering_vector(doas_deg[k], n_r);
  ComplexVector c = ComplexVector::Zero(static_cast<Eigen::Index>(n_r));
  c(index - 1) = 1.0;
  BeamWeights w;
  w.index = index;
  w.w = solve_or_pinv(A.adjoint(), c);
  return w;
}

EffectiveChannel effective_channel(BeamformerVariant variant, const BeamWeights& w1,
                                   const BeamWeights& w2, const PathGains& h,
                                   double theta1_deg, double theta2_deg, std::size_t tau,
                                   std::size_t K, std::span<const std::size_t> subcarriers) {
  EffectiveChannel ch;
  ch.subcarriers.assign(subcarriers.begin(), subcarriers.end());
  if (variant == BeamformerVariant::null_steering) {
    ch.beam_gains = Eigen::Matrix2cd::Identity();
  } else {
    const auto n_r = static_cast<std::size_t>(w1.w.size());
    if (static_cast<std::size_t>(w2.w.size()) != n_r)
      throw InvalidDimension("effective_channel: weight lengths differ");
    const ComplexVector a1 = steering_vector(theta1_deg, n_r);
    const ComplexVector a2 = steering_vector(theta2_deg, n_r);
    ch.beam_gains << w1.w.dot(a1), w1.w.dot(a2), w2.w.dot(a1), w2.w.dot(a2);
  }
  ch.rho = ch.beam_gains(0, 1);
  ch.beta = ch.beam_gains(1, 0);
  ch.per_subcarrier.reserve(subcarriers.size());
  for (std::size_t k : subcarriers) {
    if (k >= K) throw InvalidIndex("effective_channel: subcarrier out of range");
    const cd omega = delay_phase(k, tau, K);
    Eigen::Matrix2cd H;
    for (int l = 0; l < 2; ++l)
      for (int i = 0; i < 2; ++i)
        H(l, i) = ch.beam_gains(l, 0) * h(0, i) + ch.beam_gains(l, 1) * h(1, i) * omega;
    ch.per_subcarrier.push_back(H);
  }
  return ch;
}

}  // namespace stbf
