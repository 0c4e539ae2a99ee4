#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stbf/channel.hpp"
#include "stbf/numerics.hpp"
#include "stbf/ofdm.hpp"

namespace stbf {

/// Weight vector of beamformer `index` (1 or 2).
struct BeamWeights {
  ComplexVector w;
  int index = 1;
};

enum class WeightInit { first_element, steered };

struct LmsConfig {
  /// Fixed step size; when unset, mu = step_scale / ||U||_F^2 of the first
  /// training frame.
  std::optional<double> mu;
  double step_scale = 0.5;
  std::size_t max_frames = 200;
  /// Stop early once |MSE_n - MSE_{n-1}| <= tolerance * MSE_0. 0 disables.
  double tolerance = 0.0;
  WeightInit init = WeightInit::first_element;
  double init_doa_deg = 0.0;

  void validate() const;
};

/// Divergence guard: MSE above this multiple of the initial MSE aborts.
inline constexpr double kDivergenceFactor = 1e6;

/// Pilot-bin spectra of one CP-stripped array block plus the reference.
struct PilotObservation {
  ComplexMatrix spectra;    // n_R x Q, row m = DFT of element m at pilot bins
  ComplexVector reference;  // Q reference pilot values
};

PilotObservation observe_pilots(const ComplexMatrix& block, const PilotPlan& plan,
                                ComplexVector reference);

/// CP-stripped K-sample block of a snapshot.
ComplexMatrix strip_prefix(const ArraySnapshot& V, std::size_t K, std::size_t cp_len);

/// Pilot contribution of path p (0-based) of the desired mobile:
/// omega_p(k_q) * sum_i h(p, i) pilots[i][q].
ComplexVector path_pilot_reference(const PilotPlan& plan, const PathGains& h,
                                   std::size_t path, std::size_t delay);

/// r = w^H V.
ComplexRow beamformer_output(const BeamWeights& w, const ComplexMatrix& V);

/// One LMS update from a K-sample block, computed through F_Q:
/// y~ = F_Q (w^H V)^T, w' = w + 2 mu (V F_Q^T) conj(y - y~).
BeamWeights lms_step(const BeamWeights& w, const ComplexMatrix& block,
                     std::span<const cd> pilot_refs, const PilotPlan& plan, double mu);
/// Same update on precomputed pilot spectra.
BeamWeights lms_step(const BeamWeights& w, const PilotObservation& obs, double mu);

/// sum_q |y_q - y~_q|^2 for the given weights.
double pilot_mse(const BeamWeights& w, const PilotObservation& obs);

struct LmsResult {
  BeamWeights weights;
  std::vector<double> mse;  // one entry per iteration plus the final value
  double mu = 0.0;
};

/// Iterates lms_step over `frames` (cycled) for up to max_frames updates.
/// Throws DivergenceError when the MSE blows up.
LmsResult train_lms(const LmsConfig& config, std::span<const PilotObservation> frames,
                    int index);

BeamWeights initial_weights(const LmsConfig& config, std::size_t n_r, int index);

struct BeamPattern {
  std::vector<double> angles_deg;
  std::vector<cd> response;
};

/// b(theta) = w^H a(theta) at each angle.
BeamPattern beam_response(const BeamWeights& w, std::span<const double> angles_deg);

/// Steering matrix D over an angle grid with its solver precomputed.
class AngleGrid {
 public:
  AngleGrid(std::vector<double> angles_deg, std::size_t n_r);
  /// N points evenly spaced over [lo, hi].
  static AngleGrid uniform(std::size_t points, std::size_t n_r, double lo_deg = -90.0,
                           double hi_deg = 90.0);

  const std::vector<double>& angles() const noexcept { return angles_; }
  std::size_t size() const noexcept { return angles_.size(); }
  std::size_t n_r() const noexcept { return n_r_; }
  const ComplexMatrix& steering() const noexcept { return D_; }
  /// D^{-1} when square, minimum-norm least-squares operator otherwise.
  const ComplexMatrix& solver() const noexcept { return solver_; }

 private:
  std::vector<double> angles_;
  std::size_t n_r_;
  ComplexMatrix D_;
  ComplexMatrix solver_;
};

struct NullSpec {
  std::vector<double> centers_deg;
  double width_deg = 5.0;
  /// Impose/re-synthesize cycles; 1 is a single pass.
  std::size_t passes = 50;

  void validate(const AngleGrid& grid) const;
};

/// Grid samples zeroed by `spec`.
std::vector<bool> null_window_mask(const NullSpec& spec, const AngleGrid& grid);

/// Evaluates b on the grid, zeros every sample within width/2 of a null
/// center, and re-solves D conj(w) = b_null; repeated `passes` times.
BeamWeights deepen_nulls(const BeamWeights& w, const NullSpec& spec, const AngleGrid& grid);

/// Scales w by a complex factor so the strongest grid sample of b is 1.
BeamWeights normalize_to_peak(const BeamWeights& w, const AngleGrid& grid);

/// (w^l)^H A = e_l^T with A = [a(theta_1) ... a(theta_nR)].
BeamWeights null_steering_weights(std::span<const double> doas_deg, int index,
                                  std::size_t n_r);

enum class BeamformerVariant { adaptive, null_steering };

/// Per-subcarrier 2 x 2 response seen after the two beamformers.
struct EffectiveChannel {
  std::vector<std::size_t> subcarriers;
  std::vector<Eigen::Matrix2cd> per_subcarrier;
  /// beam_gains(l, p) = (w^l)^H a(theta_p); rho = (0,1), beta = (1,0).
  Eigen::Matrix2cd beam_gains;
  cd rho{0.0, 0.0};
  cd beta{0.0, 0.0};
};

/// Adaptive: H(l, i) = g_l1 h(0, i) + g_l2 h(1, i) omega_k, which is the
/// rho/beta form when the look gains are unity. Null steering: the ideal
/// form with g = I. omega_k = exp(-j 2 pi k tau / K).
EffectiveChannel effective_channel(BeamformerVariant variant, const BeamWeights& w1,
                                   const BeamWeights& w2, const PathGains& h,
                                   double theta1_deg, double theta2_deg, std::size_t tau,
                                   std::size_t K, std::span<const std::size_t> subcarriers);

/// exp(-j 2 pi k tau / K).
cd delay_phase(std::size_t k, std::size_t tau, std::size_t K);

}  // namespace stbf
