#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace stbf {

using cd = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using ComplexRow = Eigen::RowVectorXcd;

/// Reciprocal condition below which a square matrix counts as singular.
inline constexpr double kSingularRcond = 1e-12;

/// K x K forward DFT matrix, entry (m, n) = exp(-j 2 pi m n / K).
ComplexMatrix dft_matrix(std::size_t K);

/// Rows of dft_matrix(K) selected by `pilot_indices`, in the given order.
ComplexMatrix pilot_dft_matrix(std::size_t K,
                               std::span<const std::size_t> pilot_indices);

/// Exact solve for square well-conditioned M, minimum-norm least squares
/// for any other shape. Throws SingularMatrix for a square M whose
/// reciprocal condition estimate is below kSingularRcond.
ComplexVector solve_or_pinv(const ComplexMatrix& M, const ComplexVector& b);
ComplexMatrix solve_or_pinv(const ComplexMatrix& M, const ComplexMatrix& B);

/// Moore-Penrose pseudo-inverse via SVD.
ComplexMatrix pinv(const ComplexMatrix& M);

/// Direct-evaluation DFT with a cached root table. Forward is unnormalized
/// (matches dft_matrix); inverse carries the 1/K factor so that
/// inverse(forward(x)) == x.
class DftPlan {
 public:
  explicit DftPlan(std::size_t K);

  std::size_t size() const noexcept { return K_; }

  void forward(std::span<const cd> in, std::span<cd> out) const;
  void inverse(std::span<const cd> in, std::span<cd> out) const;
  /// Forward DFT evaluated only at `bins`.
  void forward_bins(std::span<const cd> in, std::span<const std::size_t> bins,
                    std::span<cd> out) const;

  /// exp(-j 2 pi n / K) for n in [0, K).
  cd root(std::size_t n) const { return roots_[n % K_]; }

 private:
  std::size_t K_;
  std::vector<cd> roots_;
};

/// Shared plan for size K; safe to call from concurrent trials.
const DftPlan& dft_plan(std::size_t K);

}  // namespace stbf
