#pragma once

// K(z), B(z) = K V K and the two resolvent evaluations.

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "riesz/operator_lab/truncated_operator.hpp"

namespace riesz::lab {

/// w^{-1/2} with the principal argument in (-pi, pi].
inline Complex inv_sqrt_principal(Complex w) {
  if (w == Complex(0.0, 0.0)) throw Error(ErrorKind::OnSpectrum, "z coincides with an eigenvalue of A");
  double arg = std::arg(w);
  if (arg == -std::numbers::pi) arg = std::numbers::pi;  // -0.0 imaginary part
  return std::polar(1.0 / std::sqrt(std::abs(w)), -0.5 * arg);
}

/// Diagonal of K(z) = (z - A)^{-1/2}.
inline VectorXcd k_factor(Complex z, const TruncatedOperator& op) {
  VectorXcd k(op.dim());
  for (Index i = 0; i < op.dim(); ++i) {
    if (z == Complex(op.diagA(i), 0.0))
      throw Error(ErrorKind::OnSpectrum, "z equals mu = " + std::to_string(op.diagA(i)));
    k(i) = inv_sqrt_principal(z - op.diagA(i));
  }
  return k;
}

inline MatrixXcd b_matrix(Complex z, const TruncatedOperator& op) {
  const VectorXcd k = k_factor(z, op);
  return k.asDiagonal() * op.V * k.asDiagonal();
}

/// B(z) restricted to the sector blocks.
inline BlockMatrix b_blocks(Complex z, const TruncatedOperator& op) {
  const VectorXcd k = k_factor(z, op);
  BlockMatrix b(op.dim(), op.sectors);
  for (std::size_t s = 0; s < op.sectors.size(); ++s) {
    const auto& idx = op.sectors[s];
    auto& m = b.block(s);
    for (std::size_t j = 0; j < idx.size(); ++j)
      for (std::size_t i = 0; i < idx.size(); ++i)
        m(Index(i), Index(j)) = k(idx[i]) * op.V(idx[i], idx[j]) * k(idx[j]);
  }
  return b;
}

enum class ResolventMethod { Direct, Factorized };

namespace detail {

constexpr double kSingularRcond = 1e-13;

/// (z - diag(a) - V)^{-1} on one index set.
inline MatrixXcd direct_inverse(Complex z, const Eigen::VectorXd& a, const MatrixXcd& V) {
  const Index n = V.rows();
  MatrixXcd M = -V;
  for (Index i = 0; i < n; ++i) M(i, i) += z - a(i);
  Eigen::PartialPivLU<MatrixXcd> lu(M);
  if (!(lu.rcond() > kSingularRcond))
    throw Error(ErrorKind::SingularShift, "z is numerically an eigenvalue of T");
  return lu.inverse();
}

/// K (I - B)^{-1} K on one index set.
inline MatrixXcd factorized_inverse(Complex z, const Eigen::VectorXd& a, const MatrixXcd& V) {
  const Index n = V.rows();
  VectorXcd k(n);
  for (Index i = 0; i < n; ++i) {
    if (z == Complex(a(i), 0.0)) throw Error(ErrorKind::OnSpectrum, "z equals an eigenvalue of A");
    k(i) = inv_sqrt_principal(z - a(i));
  }
  MatrixXcd IB = -(k.asDiagonal() * V * k.asDiagonal());
  IB.diagonal().array() += 1.0;
  Eigen::PartialPivLU<MatrixXcd> lu(IB);
  if (!(lu.rcond() > kSingularRcond)) throw Error(ErrorKind::FactorizationInvalid, "I - B(z) is singular");
  return k.asDiagonal() * lu.inverse() * k.asDiagonal();
}

inline Eigen::VectorXd gather_diag(const Eigen::VectorXd& d, const std::vector<Index>& idx) {
  Eigen::VectorXd out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(Index(i)) = d(idx[i]);
  return out;
}

}  // namespace detail

/// Full resolvent (z - T)^{-1}, T = diag(A) + V.
inline MatrixXcd resolvent(Complex z, const TruncatedOperator& op, ResolventMethod method = ResolventMethod::Direct) {
  return method == ResolventMethod::Direct ? detail::direct_inverse(z, op.diagA, op.V)
                                           : detail::factorized_inverse(z, op.diagA, op.V);
}

/// Resolvent assembled sector by sector (V must be block diagonal over op.sectors).
inline BlockMatrix resolvent_blocks(Complex z, const TruncatedOperator& op,
                                    ResolventMethod method = ResolventMethod::Direct) {
  BlockMatrix out(op.dim(), op.sectors);
  for (std::size_t s = 0; s < op.sectors.size(); ++s) {
    const auto& idx = op.sectors[s];
    const auto a = detail::gather_diag(op.diagA, idx);
    const MatrixXcd v = gather(op.V, idx);
    out.block(s) = method == ResolventMethod::Direct ? detail::direct_inverse(z, a, v)
                                                     : detail::factorized_inverse(z, a, v);
  }
  return out;
}

/// ||B(z)||_2 over the sector blocks.
inline double b_norm(Complex z, const TruncatedOperator& op) { return b_blocks(z, op).op_norm(); }

}  // namespace riesz::lab
