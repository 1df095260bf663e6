#pragma once

// Matrices that are block diagonal with respect to a partition of the index
// set into sectors (the blocks need not be contiguous).

#include <algorithm>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "riesz/error.hpp"

namespace riesz {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;

using Partition = std::vector<std::vector<Index>>;

/// Partition consisting of one sector holding every index.
inline Partition trivial_partition(Index dim) {
  Partition p(1);
  p[0].resize(static_cast<std::size_t>(dim));
  for (Index i = 0; i < dim; ++i) p[0][static_cast<std::size_t>(i)] = i;
  return p;
}

inline MatrixXcd gather(const MatrixXcd& m, const std::vector<Index>& idx) {
  const Index n = static_cast<Index>(idx.size());
  MatrixXcd out(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) out(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(Index dim, const Partition& sectors) : dim_(dim), sectors_(sectors) {
    blocks_.reserve(sectors.size());
    for (const auto& s : sectors) {
      const Index n = static_cast<Index>(s.size());
      blocks_.push_back(MatrixXcd::Zero(n, n));
    }
  }

  /// Diagonal matrix with the given entries.
  static BlockMatrix diagonal(const VectorXcd& d, const Partition& sectors) {
    BlockMatrix b(d.size(), sectors);
    for (std::size_t s = 0; s < sectors.size(); ++s)
      for (std::size_t i = 0; i < sectors[s].size(); ++i) b.blocks_[s](static_cast<Index>(i), static_cast<Index>(i)) = d(sectors[s][i]);
    return b;
  }

  /// Restriction of a dense matrix to the sector blocks.
  static BlockMatrix from_dense(const MatrixXcd& m, const Partition& sectors) {
    BlockMatrix b(m.rows(), sectors);
    for (std::size_t s = 0; s < sectors.size(); ++s) b.blocks_[s] = gather(m, sectors[s]);
    return b;
  }

  Index dim() const { return dim_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  const std::vector<Index>& sector(std::size_t s) const { return sectors_[s]; }
  const Partition& partition() const { return sectors_; }
  MatrixXcd& block(std::size_t s) { return blocks_[s]; }
  const MatrixXcd& block(std::size_t s) const { return blocks_[s]; }

  MatrixXcd dense() const {
    MatrixXcd out = MatrixXcd::Zero(dim_, dim_);
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
      const auto& idx = sectors_[s];
      for (std::size_t j = 0; j < idx.size(); ++j)
        for (std::size_t i = 0; i < idx.size(); ++i)
          out(idx[i], idx[j]) = blocks_[s](static_cast<Index>(i), static_cast<Index>(j));
    }
    return out;
  }

  VectorXcd apply(const VectorXcd& v) const {
    VectorXcd out = VectorXcd::Zero(dim_);
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
      const auto& idx = sectors_[s];
      VectorXcd local(static_cast<Index>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i) local(static_cast<Index>(i)) = v(idx[i]);
      const VectorXcd r = blocks_[s] * local;
      for (std::size_t i = 0; i < idx.size(); ++i) out(idx[i]) = r(static_cast<Index>(i));
    }
    return out;
  }

  double frobenius() const {
    double s = 0.0;
    for (const auto& b : blocks_) s += b.squaredNorm();
    return std::sqrt(s);
  }

  /// Spectral norm: the largest singular value over all blocks.
  double op_norm() const {
    double m = 0.0;
    for (const auto& b : blocks_)
      if (b.size() > 0) m = std::max(m, spectral_norm(b));
    return m;
  }

  /// sqrt of the top eigenvalue of the Gram matrix; cheaper than a full SVD.
  static double spectral_norm(const MatrixXcd& b) {
    if (b.size() == 0) return 0.0;
    const MatrixXcd g = b.rows() >= b.cols() ? MatrixXcd(b.adjoint() * b) : MatrixXcd(b * b.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }

  std::vector<double> singular_values() const {
    std::vector<double> out;
    for (const auto& b : blocks_) {
      if (b.size() == 0) continue;
      const auto sv = Eigen::JacobiSVD<MatrixXcd>(b).singularValues();
      for (Index i = 0; i < sv.size(); ++i) out.push_back(sv(i));
    }
    std::sort(out.rbegin(), out.rend());
    return out;
  }

  Complex trace() const {
    Complex t = 0.0;
    for (const auto& b : blocks_) t += b.trace();
    return t;
  }

  BlockMatrix& operator+=(const BlockMatrix& o) {
    check_same(o);
    for (std::size_t s = 0; s < blocks_.size(); ++s) blocks_[s] += o.blocks_[s];
    return *this;
  }
  BlockMatrix& operator-=(const BlockMatrix& o) {
    check_same(o);
    for (std::size_t s = 0; s < blocks_.size(); ++s) blocks_[s] -= o.blocks_[s];
    return *this;
  }
  BlockMatrix& operator*=(Complex a) {
    for (auto& b : blocks_) b *= a;
    return *this;
  }
  friend BlockMatrix operator+(BlockMatrix a, const BlockMatrix& b) { return a += b; }
  friend BlockMatrix operator-(BlockMatrix a, const BlockMatrix& b) { return a -= b; }
  friend BlockMatrix operator*(Complex a, BlockMatrix b) { return b *= a; }
  friend BlockMatrix operator*(const BlockMatrix& a, const BlockMatrix& b) {
    a.check_same(b);
    BlockMatrix out = a;
    for (std::size_t s = 0; s < a.blocks_.size(); ++s) out.blocks_[s] = a.blocks_[s] * b.blocks_[s];
    return out;
  }

 private:
  void check_same(const BlockMatrix& o) const {
    if (o.dim_ != dim_ || o.blocks_.size() != blocks_.size())
      throw Error(ErrorKind::OutOfDomain, "block structures differ");
  }

  Index dim_ = 0;
  Partition sectors_;
  std::vector<MatrixXcd> blocks_;
};

}  // namespace riesz
