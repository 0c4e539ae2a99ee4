#include "stbf/numerics.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "stbf/errors.hpp"

namespace stbf {

ComplexMatrix dft_matrix(std::size_t K) {
  if (K == 0) throw InvalidDimension("dft_matrix: K must be >= 1");
  const DftPlan& plan = dft_plan(K);
  ComplexMatrix F(K, K);
  for (std::size_t m = 0; m < K; ++m)
    for (std::size_t n = 0; n < K; ++n) F(m, n) = plan.root((m * n) % K);
  return F;
}

ComplexMatrix pilot_dft_matrix(std::size_t K,
                               std::span<const std::size_t> pilot_indices) {
  if (K == 0) throw InvalidDimension("pilot_dft_matrix: K must be >= 1");
  if (pilot_indices.size() > K)
    throw InvalidIndex("pilot_dft_matrix: more pilot indices than subcarriers");
  std::unordered_set<std::size_t> seen;
  for (std::size_t idx : pilot_indices) {
    if (idx >= K) throw InvalidIndex("pilot_dft_matrix: index out of range");
    if (!seen.insert(idx).second)
      throw InvalidIndex("pilot_dft_matrix: duplicate index");
  }
  const DftPlan& plan = dft_plan(K);
  ComplexMatrix FQ(pilot_indices.size(), K);
  for (std::size_t q = 0; q < pilot_indices.size(); ++q)
    for (std::size_t n = 0; n < K; ++n)
      FQ(q, n) = plan.root((pilot_indices[q] * n) % K);
  return FQ;
}

namespace {

template <typename Rhs>
Rhs solve_impl(const ComplexMatrix& M, const Rhs& b) {
  if (M.rows() != b.rows())
    throw InvalidDimension("solve_or_pinv: row count of M and b differ");
  if (M.rows() == M.cols()) {
    Eigen::PartialPivLU<ComplexMatrix> lu(M);
    double rc = M.size() == 0 ? 1.0 : lu.rcond();
    if (std::isnan(rc)) rc = 0.0;  // exactly singular pivots
    if (!(rc >= kSingularRcond)) {
      std::ostringstream os;
      os << "solve_or_pinv: singular matrix (rcond estimate " << rc << ")";
      throw SingularMatrix(os.str(), rc);
    }
    return lu.solve(b);
  }
  Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> cod(M);
  return cod.solve(b);
}

}  // namespace

ComplexVector solve_or_pinv(const ComplexMatrix& M, const ComplexVector& b) {
  return solve_impl(M, b);
}

ComplexMatrix solve_or_pinv(const ComplexMatrix& M, const ComplexMatrix& B) {
  return solve_impl(M, B);
}

ComplexMatrix pinv(const ComplexMatrix& M) {
  Eigen::JacobiSVD<ComplexMatrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double tol = std::numeric_limits<double>::epsilon() *
                     static_cast<double>(std::max(M.rows(), M.cols())) *
                     (s.size() ? s(0) : 0.0);
  Eigen::VectorXd inv = s;
  for (Eigen::Index i = 0; i < inv.size(); ++i)
    inv(i) = s(i) > tol ? 1.0 / s(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

DftPlan::DftPlan(std::size_t K) : K_(K), roots_(K) {
  if (K == 0) throw InvalidDimension("DftPlan: K must be >= 1");
  for (std::size_t n = 0; n < K; ++n) {
    const double phase = -2.0 * std::numbers::pi * static_cast<double>(n) /
                         static_cast<double>(K);
    roots_[n] = {std::cos(phase), std::sin(phase)};
  }
}

void DftPlan::forward(std::span<const cd> in, std::span<cd> out) const {
  if (in.size() != K_ || out.size() != K_)
    throw InvalidDimension("DftPlan::forward: length mismatch");
  for (std::size_t m = 0; m < K_; ++m) {
    cd acc{0.0, 0.0};
    std::size_t idx = 0;
    for (std::size_t n = 0; n < K_; ++n) {
      acc += in[n] * roots_[idx];
      idx += m;
      if (idx >= K_) idx -= K_;
    }
    out[m] = acc;
  }
}

void DftPlan::inverse(std::span<const cd> in, std::span<cd> out) const {
  if (in.size() != K_ || out.size() != K_)
    throw InvalidDimension("DftPlan::inverse: length mismatch");
  const double scale = 1.0 / static_cast<double>(K_);
  for (std::size_t n = 0; n < K_; ++n) {
    cd acc{0.0, 0.0};
    std::size_t idx = 0;
    for (std::size_t k = 0; k < K_; ++k) {
      acc += in[k] * std::conj(roots_[idx]);
      idx += n;
      if (idx >= K_) idx -= K_;
    }
    out[n] = acc * scale;
  }
}

void DftPlan::forward_bins(std::span<const cd> in,
                           std::span<const std::size_t> bins,
                           std::span<cd> out) const {
  if (in.size() != K_ || out.size() != bins.size())
    throw InvalidDimension("DftPlan::forward_bins: length mismatch");
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const std::size_t m = bins[b] % K_;
    cd acc{0.0, 0.0};
    std::size_t idx = 0;
    for (std::size_t n = 0; n < K_; ++n) {
      acc += in[n] * roots_[idx];
      idx += m;
      if (idx >= K_) idx -= K_;
    }
    out[b] = acc;
  }
}

const DftPlan& dft_plan(std::size_t K) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<DftPlan>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[K];
  if (!slot) slot = std::make_unique<DftPlan>(K);
  return *slot;
}

}  // namespace stbf
