#pragma once

// Truncated matrices of A and V in the eigenbasis of A for the model operators.

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "riesz/block_matrix.hpp"
#include "riesz/model_catalog.hpp"
#include "riesz/operator_lab/potential.hpp"
#include "riesz/quadrature.hpp"
#include "riesz/special_functions.hpp"

namespace riesz::lab {

struct LevelInfo {
  long long k = 0;
  double mu = 0.0;      // unshifted eigenvalue of A
  long long mult = 0;   // retained multiplicity
};

struct BasisLabel {
  long long level = 0;
  long long within = 0;
  int sector = 0;       // angular momentum m when sectors are in use
};

struct QuadMeta {
  std::string family;
  int nodes = 0;
  int nodes_aux = 0;
};

struct Truncation {
  int levels = 20;
  int landau_mult_cap = 12;
  int deg_margin = 16;
};

class TruncatedOperator {
 public:
  catalog::ModelId model;
  std::string potential;
  std::vector<LevelInfo> levels;
  std::vector<BasisLabel> basis;
  Eigen::VectorXd diagA;
  MatrixXcd V;
  Partition sectors;
  std::vector<int> sector_labels;
  QuadMeta quad;

  Index dim() const { return diagA.size(); }
  long long num_levels() const { return static_cast<long long>(levels.size()); }
  double mu(long long k) const { return levels.at(static_cast<std::size_t>(k - 1)).mu; }
  double mu_max() const { return levels.back().mu; }

  /// Flat index range [begin, end) of level k.
  std::pair<Index, Index> level_range(long long k) const { return ranges_.at(static_cast<std::size_t>(k - 1)); }

  /// Diagonal 0/1 indicator of the levels in [k_lo, k_hi].
  VectorXcd level_indicator(long long k_lo, long long k_hi) const {
    VectorXcd d = VectorXcd::Zero(dim());
    for (long long k = std::max(1LL, k_lo); k <= std::min(k_hi, num_levels()); ++k) {
      const auto [b, e] = level_range(k);
      d.segment(b, e - b).setOnes();
    }
    return d;
  }

  /// Generic operator from level data and a dense perturbation (random tests, plumbing).
  static TruncatedOperator from_matrices(std::vector<LevelInfo> lv, MatrixXcd V,
                                         std::optional<Partition> parts = std::nullopt) {
    TruncatedOperator op;
    op.model = catalog::ModelId{catalog::ModelKind::HarmonicOscillator, 0};
    op.potential = "matrix";
    op.levels = std::move(lv);
    for (const auto& l : op.levels)
      for (long long w = 0; w < l.mult; ++w) op.basis.push_back({l.k, w, 0});
    op.V = std::move(V);
    op.quad.family = "none";
    if (parts) op.sectors = *parts;
    op.finalize();
    return op;
  }

  /// Builds diagA, level ranges and a default partition; checks invariants.
  void finalize() {
    const Index n = static_cast<Index>(basis.size());
    if (V.rows() != n || V.cols() != n) throw Error(ErrorKind::OutOfDomain, "perturbation size does not match basis");
    diagA.resize(n);
    ranges_.assign(levels.size(), {0, 0});
    Index pos = 0;
    for (std::size_t li = 0; li < levels.size(); ++li) {
      if (li > 0 && !(levels[li].mu > levels[li - 1].mu))
        throw Error(ErrorKind::NonMonotoneSpectrum, "levels must be strictly increasing");
      ranges_[li] = {pos, pos + static_cast<Index>(levels[li].mult)};
      for (long long w = 0; w < levels[li].mult; ++w) {
        if (basis[static_cast<std::size_t>(pos)].level != levels[li].k)
          throw Error(ErrorKind::OutOfDomain, "basis is not ordered by level");
        diagA(pos++) = levels[li].mu;
      }
    }
    if (pos != n) throw Error(ErrorKind::OutOfDomain, "multiplicities do not add up to the dimension");
    if (sectors.empty()) {
      sectors = trivial_partition(n);
      sector_labels = {0};
    }
    if (sector_labels.size() != sectors.size()) sector_labels.assign(sectors.size(), 0);
  }

 private:
  std::vector<std::pair<Index, Index>> ranges_;
};

namespace detail {

/// Hermite function table H(a, i) = h_a(x_i).
inline Eigen::MatrixXd hermite_table(int nmax, const std::vector<double>& x) {
  Eigen::MatrixXd H(nmax + 1, static_cast<Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto h = special::hermite_functions(nmax, x[i]);
    for (int a = 0; a <= nmax; ++a) H(a, static_cast<Index>(i)) = h[static_cast<std::size_t>(a)];
  }
  return H;
}

struct CartState {
  int a = 0;
  int b = 0;
};

/// <f phi_t, phi_s> for tensor Hermite states phi = h_a(x) h_b(y), by Gauss-Hermite tensor quadrature.
inline MatrixXcd hermite_tensor_matrix(const std::vector<CartState>& states, int nmax,
                                       const std::function<Complex(double, double)>& f, int q) {
  const auto rule = quad::gauss_hermite_scaled(q);
  const Eigen::MatrixXd H = hermite_table(nmax, rule.nodes);
  const Eigen::Map<const Eigen::VectorXd> W(rule.weights.data(), q);
  MatrixXcd F(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) F(i, j) = f(rule.nodes[static_cast<std::size_t>(i)], rule.nodes[static_cast<std::size_t>(j)]);
  const int na = nmax + 1;
  // G((a, c), j) = sum_i W_i h_a(x_i) h_c(x_i) F(i, j)
  Eigen::MatrixXd Pac(q, na * na);
  for (int a = 0; a < na; ++a)
    for (int c = 0; c < na; ++c) Pac.col(a * na + c) = (W.array() * H.row(a).transpose().array() * H.row(c).transpose().array()).matrix();
  const MatrixXcd GT = F.transpose() * Pac.cast<Complex>();  // q x (na*na)
  Eigen::MatrixXd Rbd(q, na * na);
  for (int b = 0; b < na; ++b)
    for (int d = 0; d < na; ++d) Rbd.col(b * na + d) = (W.array() * H.row(b).transpose().array() * H.row(d).transpose().array()).matrix();
  const MatrixXcd RbdC = Rbd.cast<Complex>();
  const Index n = static_cast<Index>(states.size());
  MatrixXcd M(n, n);
  for (Index s = 0; s < n; ++s) {
    const auto& ss = states[static_cast<std::size_t>(s)];
    for (Index t = s; t < n; ++t) {
      const auto& st = states[static_cast<std::size_t>(t)];
      const Complex v = GT.col(ss.a * na + st.a).cwiseProduct(RbdC.col(ss.b * na + st.b)).sum();
      M(s, t) = v;
      M(t, s) = v;  // real basis: <f phi_t, phi_s> is symmetric in (s, t)
    }
  }
  return M;
}

/// Single entry by direct tensor quadrature with q nodes (sentinel check).
inline Complex hermite_tensor_entry(const CartState& s, const CartState& t,
                                    const std::function<Complex(double, double)>& f, int q) {
  const auto rule = quad::gauss_hermite_scaled(q);
  const int nmax = std::max({s.a, s.b, t.a, t.b});
  const Eigen::MatrixXd H = hermite_table(nmax, rule.nodes);
  Complex acc = 0.0;
  for (int i = 0; i < q; ++i) {
    const double xi = H(s.a, i) * H(t.a, i) * rule.weights[static_cast<std::size_t>(i)];
    if (xi == 0.0) continue;
    for (int j = 0; j < q; ++j)
      acc += xi * H(s.b, j) * H(t.b, j) * rule.weights[static_cast<std::size_t>(j)] *
             f(rule.nodes[static_cast<std::size_t>(i)], rule.nodes[static_cast<std::size_t>(j)]);
  }
  return acc;
}

/// Quadrature with extra = 0, 16, 32, ... nodes on top of the base count until the
/// sentinel entries agree with a rule 16 nodes finer to 1e-12 relative.
struct Settled {
  MatrixXcd M;
  int extra = 0;
};

inline constexpr int kNodeStep = 16;
inline constexpr int kMaxExtraNodes = 128;

using PickList = std::vector<std::pair<Index, Index>>;

inline Settled settle_nodes(const std::function<MatrixXcd(int)>& full,
                            const std::function<std::vector<Complex>(const PickList&, int)>& picked,
                            const PickList& picks, bool check) {
  for (int extra = 0;; extra += kNodeStep) {
    MatrixXcd M = full(extra);
    const double scale = M.cwiseAbs().maxCoeff();
    if (!check || scale == 0.0) return {std::move(M), extra};
    const auto fine = picked(picks, extra + kNodeStep);
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < picks.size(); ++i) {
      const double d = std::abs(fine[i] - M(picks[i].first, picks[i].second));
      if (d > worst) worst = d, at = i;
    }
    if (worst <= 1e-12 * scale) return {std::move(M), extra};
    if (extra + kNodeStep > kMaxExtraNodes) {
      const auto [s, t] = picks[at];
      throw Error(ErrorKind::QuadratureUnderflow,
                  "entry (" + std::to_string(s) + ", " + std::to_string(t) + ") changes from " +
                      std::to_string(std::abs(M(s, t))) + " to " + std::to_string(std::abs(fine[at])) + " with " +
                      std::to_string(extra + kNodeStep) + " extra nodes; the potential is not resolved by the node range");
    }
  }
}

/// Eigenvectors of L_z on the degree-n tensor states (a, b = n - a), index b; sorted by m ascending.
inline std::pair<std::vector<int>, MatrixXcd> lz_eigenbasis(int n) {
  MatrixXcd L = MatrixXcd::Zero(n + 1, n + 1);
  const Complex I(0.0, 1.0);
  for (int b = 0; b <= n; ++b) {
    const int a = n - b;
    if (b >= 1) L(b - 1, b) += -I * std::sqrt(double(a + 1)) * std::sqrt(double(b));  // -> (a+1, b-1)
    if (a >= 1) L(b + 1, b) += I * std::sqrt(double(a)) * std::sqrt(double(b + 1));   // -> (a-1, b+1)
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(L);
  std::vector<int> m(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) m[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(es.eigenvalues()(i)));
  return {m, es.eigenvectors()};
}

struct RotatedState {
  int degree = 0;
  int m = 0;
  VectorXcd u;  // coefficients over the degree's tensor states
};

/// U^H M U for states given by L_z eigenvectors within degrees, M over all tensor states of degree <= nmax.
inline MatrixXcd rotate_states(const MatrixXcd& M, const std::vector<RotatedState>& cols) {
  auto offset = [](int n) { return static_cast<Index>(n) * (n + 1) / 2; };
  const Index n = static_cast<Index>(cols.size());
  MatrixXcd MU(M.rows(), n);
  for (Index t = 0; t < n; ++t) {
    const auto& c = cols[static_cast<std::size_t>(t)];
    MU.col(t) = M.middleCols(offset(c.degree), c.degree + 1) * c.u;
  }
  MatrixXcd out(n, n);
  for (Index s = 0; s < n; ++s) {
    const auto& c = cols[static_cast<std::size_t>(s)];
    out.row(s) = c.u.adjoint() * MU.middleRows(offset(c.degree), c.degree + 1);
  }
  return out;
}

/// Zeroes coupling between different sector labels after checking it is negligible.
inline void enforce_sectors(MatrixXcd& M, const std::vector<int>& label) {
  const double scale = M.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Index s = 0; s < M.rows(); ++s)
    for (Index t = 0; t < M.cols(); ++t)
      if (label[static_cast<std::size_t>(s)] != label[static_cast<std::size_t>(t)]) {
        worst = std::max(worst, std::abs(M(s, t)));
        M(s, t) = 0.0;
      }
  if (scale > 0.0 && worst > 1e-10 * scale)
    throw Error(ErrorKind::UnsupportedPotential,
                "potential couples angular momentum sectors (relative size " + std::to_string(worst / scale) +
                    "); it is not rotationally symmetric");
}

inline Partition partition_by_label(const std::vector<int>& label, std::vector<int>& labels_out) {
  std::map<int, std::vector<Index>> groups;
  for (std::size_t i = 0; i < label.size(); ++i) groups[label[i]].push_back(static_cast<Index>(i));
  Partition p;
  labels_out.clear();
  for (auto& [m, idx] : groups) {
    p.push_back(std::move(idx));
    labels_out.push_back(m);
  }
  return p;
}

inline std::vector<CartState> cartesian_states(int nmax) {
  std::vector<CartState> st;
  for (int n = 0; n <= nmax; ++n)
    for (int b = 0; b <= n; ++b) st.push_back({n - b, b});
  return st;
}

inline void add_sentinels(std::vector<std::pair<Index, Index>>& picks, Index n) {
  picks = {{0, 0}, {n - 1, n - 1}, {0, n - 1}, {n / 2, n / 2}, {n / 3, (2 * n) / 3}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Assembly per model

inline TruncatedOperator assemble_oscillator_1d(const Potential& pot, const Truncation& tr) {
  if (!pot.on_plane()) throw Error(ErrorKind::UnsupportedPotential, pot.describe() + " on the oscillator");
  const int N = tr.levels;
  const int q = 2 * N + tr.deg_margin;
  TruncatedOperator op;
  op.model = catalog::ModelId::make(catalog::ModelKind::HarmonicOscillator, 1, true);
  op.potential = pot.describe();
  for (int k = 1; k <= N; ++k) {
    op.levels.push_back({k, catalog::catalog_spectrum(op.model, k).mu, 1});
    op.basis.push_back({k, 0, 0});
  }
  auto entries = [&](int qq) {
    const auto rule = quad::gauss_hermite_scaled(qq);
    const Eigen::MatrixXd H = detail::hermite_table(N - 1, rule.nodes);
    Eigen::VectorXcd w(qq);
    for (int i = 0; i < qq; ++i) w(i) = rule.weights[static_cast<std::size_t>(i)] * pot.plane(rule.nodes[static_cast<std::size_t>(i)], 0.0);
    return MatrixXcd(H.cast<Complex>() * w.asDiagonal() * H.transpose().cast<Complex>());
  };
  detail::PickList picks;
  detail::add_sentinels(picks, N);
  auto st = detail::settle_nodes(
      [&](int e) { return entries(q + e); },
      [&](const detail::PickList& pl, int e) {
        const MatrixXcd m = entries(q + e);
        std::vector<Complex> out;
        for (const auto& [a, b] : pl) out.push_back(m(a, b));
        return out;
      },
      picks, pot.type != Potential::Type::Zero && pot.type != Potential::Type::Constant);
  op.V = std::move(st.M);
  op.quad = {"gauss-hermite", q + st.extra, 0};
  op.finalize();
  return op;
}

inline TruncatedOperator assemble_oscillator_2d(const Potential& pot, const Truncation& tr) {
  if (!pot.on_plane()) throw Error(ErrorKind::UnsupportedPotential, pot.describe() + " on the oscillator");
  const int N = tr.levels;
  const int q = 2 * N + tr.deg_margin;
  const int nmax = N - 1;
  const auto states = detail::cartesian_states(nmax);
  auto f = [&](double x, double y) { return pot.plane(x, y); };
  detail::PickList picks;
  detail::add_sentinels(picks, static_cast<Index>(states.size()));
  auto settled = detail::settle_nodes(
      [&](int e) { return detail::hermite_tensor_matrix(states, nmax, f, q + e); },
      [&](const detail::PickList& pl, int e) {
        std::vector<Complex> out;
        for (const auto& [a, b] : pl)
          out.push_back(detail::hermite_tensor_entry(states[static_cast<std::size_t>(a)], states[static_cast<std::size_t>(b)], f, q + e));
        return out;
      },
      picks, pot.type != Potential::Type::Zero && pot.type != Potential::Type::Constant);
  MatrixXcd M = std::move(settled.M);
  const int q_used = q + settled.extra;
  TruncatedOperator op;
  op.model = catalog::ModelId::make(catalog::ModelKind::HarmonicOscillator, 2);
  op.potential = pot.describe();
  for (int k = 1; k <= N; ++k) op.levels.push_back({k, catalog::catalog_spectrum(op.model, k).mu, k});
  op.quad = {"gauss-hermite-tensor", q_used, q_used};
  if (pot.rotationally_symmetric()) {
    std::vector<detail::RotatedState> cols;
    std::vector<int> label;
    for (int n = 0; n <= nmax; ++n) {
      const auto [ms, U] = detail::lz_eigenbasis(n);
      for (int i = 0; i <= n; ++i) {
        cols.push_back({n, ms[static_cast<std::size_t>(i)], U.col(i)});
        op.basis.push_back({n + 1, i, ms[static_cast<std::size_t>(i)]});
        label.push_back(ms[static_cast<std::size_t>(i)]);
      }
    }
    op.V = detail::rotate_states(M, cols);
    detail::enforce_sectors(op.V, label);
    op.sectors = detail::partition_by_label(label, op.sector_labels);
  } else {
    for (int n = 0; n <= nmax; ++n)
      for (int b = 0; b <= n; ++b) op.basis.push_back({n + 1, b, 0});
    op.V = std::move(M);
  }
  op.finalize();
  return op;
}

/// Landau Hamiltonian in d = 2 with radial potentials. Level k keeps the M states of
/// angular momentum m = 0, -1, ..., -(M-1); these are the oscillator states of degree
/// 2(k-1) + |m| for -Delta + |x|^2/4.
inline TruncatedOperator assemble_landau(const Potential& pot, const Truncation& tr) {
  if (!pot.on_plane()) throw Error(ErrorKind::UnsupportedPotential, pot.describe() + " on the Landau model");
  if (!pot.rotationally_symmetric())
    throw Error(ErrorKind::UnsupportedPotential, "Landau matrices support radial potentials only");
  const int N = tr.levels;
  const int M = tr.landau_mult_cap;
  if (M < 1) throw Error(ErrorKind::OutOfDomain, "landau_mult_cap must be >= 1");
  const int nmax = 2 * (N - 1) + (M - 1);
  const int q = 2 * (nmax + 1) + tr.deg_margin;
  const auto states = detail::cartesian_states(nmax);
  // oscillator functions of -Delta + |x|^2/4 are h_a(x/sqrt2) h_b(y/sqrt2) / sqrt2
  auto f = [&](double u, double v) { return pot.plane(std::numbers::sqrt2 * u, std::numbers::sqrt2 * v); };
  detail::PickList picks;
  detail::add_sentinels(picks, static_cast<Index>(states.size()));
  auto settled = detail::settle_nodes(
      [&](int e) { return detail::hermite_tensor_matrix(states, nmax, f, q + e); },
      [&](const detail::PickList& pl, int e) {
        std::vector<Complex> out;
        for (const auto& [a, b] : pl)
          out.push_back(detail::hermite_tensor_entry(states[static_cast<std::size_t>(a)], states[static_cast<std::size_t>(b)], f, q + e));
        return out;
      },
      picks, pot.type != Potential::Type::Zero && pot.type != Potential::Type::Constant);
  MatrixXcd Mc = std::move(settled.M);
  const int q_used = q + settled.extra;
  std::vector<std::pair<std::vector<int>, MatrixXcd>> lz(static_cast<std::size_t>(nmax + 1));
  for (int n = 0; n <= nmax; ++n) lz[static_cast<std::size_t>(n)] = detail::lz_eigenbasis(n);
  TruncatedOperator op;
  op.model = catalog::ModelId::make(catalog::ModelKind::Landau, 2);
  op.potential = pot.describe();
  std::vector<detail::RotatedState> cols;
  std::vector<int> label;
  for (int k = 1; k <= N; ++k) {
    op.levels.push_back({k, catalog::catalog_spectrum(op.model, k).mu, M});
    for (int j = 0; j < M; ++j) {
      const int m = -j;
      const int n = 2 * (k - 1) + j;
      const auto& [ms, U] = lz[static_cast<std::size_t>(n)];
      int col = -1;
      for (int i = 0; i <= n; ++i)
        if (ms[static_cast<std::size_t>(i)] == m) col = i;
      if (col < 0) throw Error(ErrorKind::QuadratureFailure, "missing angular momentum state");
      cols.push_back({n, m, U.col(col)});
      op.basis.push_back({k, j, m});
      label.push_back(m);
    }
  }
  op.V = detail::rotate_states(Mc, cols);
  detail::enforce_sectors(op.V, label);
  op.sectors = detail::partition_by_label(label, op.sector_labels);
  op.quad = {"gauss-hermite-tensor", q_used, q_used};
  op.finalize();
  return op;
}

/// Laplace-Beltrami on S^2 with a function potential or a delta weight on the equator.
inline TruncatedOperator assemble_sphere(const catalog::ModelId& model, const Potential& pot, const Truncation& tr) {
  const bool delta = model.kind == catalog::ModelKind::SphereDeltaCircle;
  if (delta ? !pot.on_equator() : !pot.on_sphere())
    throw Error(ErrorKind::UnsupportedPotential, pot.describe() + " for " + catalog::to_string(model.kind));
  const int N = tr.levels;
  const int L = N - 1;
  const int q_theta = N + 8;
  const int q_phi = 2 * N + 9;
  TruncatedOperator op;
  op.model = model;
  op.potential = pot.describe();
  std::vector<int> label;
  for (int k = 1; k <= N; ++k) {
    op.levels.push_back({k, catalog::catalog_spectrum(model, k).mu, 2 * k - 1});
    for (int m = -(k - 1); m <= k - 1; ++m) {
      op.basis.push_back({k, m + k - 1, m});
      label.push_back(m);
    }
  }
  const Index n = static_cast<Index>(op.basis.size());
  auto lm = [&](Index s) { return std::pair<int, int>{int(op.basis[s].level - 1), op.basis[s].sector}; };
  // Fourier coefficients (1/2pi) int g(phi) e^{i dm phi} dphi by the trapezoid rule
  auto fourier = [&](const std::function<Complex(double)>& g, int nphi) {
    std::vector<Complex> c(static_cast<std::size_t>(4 * L + 1));
    std::vector<Complex> vals(static_cast<std::size_t>(nphi));
    for (int j = 0; j < nphi; ++j) vals[static_cast<std::size_t>(j)] = g(2.0 * std::numbers::pi * j / nphi);
    for (int dm = -2 * L; dm <= 2 * L; ++dm) {
      Complex acc = 0.0;
      for (int j = 0; j < nphi; ++j) acc += vals[static_cast<std::size_t>(j)] * std::exp(Complex(0.0, dm * 2.0 * std::numbers::pi * j / nphi));
      c[static_cast<std::size_t>(dm + 2 * L)] = acc / double(nphi);
    }
    return c;
  };
  op.V = MatrixXcd::Zero(n, n);
  if (delta) {
    std::vector<double> lam0(static_cast<std::size_t>(n));
    for (Index s = 0; s < n; ++s) {
      const auto [l, m] = lm(s);
      lam0[static_cast<std::size_t>(s)] = special::legendre_normalized(l, m, 0.0);
    }
    const auto W = fourier([&](double phi) { return pot.equator(phi); }, q_phi);
    for (Index s = 0; s < n; ++s)
      for (Index t = 0; t < n; ++t) {
        const int dm = lm(t).second - lm(s).second;
        op.V(s, t) = lam0[static_cast<std::size_t>(s)] * lam0[static_cast<std::size_t>(t)] * W[static_cast<std::size_t>(dm + 2 * L)];
      }
    op.quad = {"equator-trapezoid", 0, q_phi};
  } else {
    auto entries = [&](int qt, int qp) {
      const auto rule = quad::gauss_legendre(qt);
      MatrixXcd V = MatrixXcd::Zero(n, n);
      for (int i = 0; i < qt; ++i) {
        const double x = rule.nodes[static_cast<std::size_t>(i)];
        const double theta = std::acos(x);
        std::vector<double> lam(static_cast<std::size_t>(n));
        for (Index s = 0; s < n; ++s) {
          const auto [l, m] = lm(s);
          lam[static_cast<std::size_t>(s)] = special::legendre_normalized(l, m, x);
        }
        std::vector<Complex> F;
        if (pot.rotationally_symmetric()) {
          F.assign(static_cast<std::size_t>(4 * L + 1), 0.0);
          F[static_cast<std::size_t>(2 * L)] = pot.sphere(theta, 0.0);
        } else {
          F = fourier([&](double phi) { return pot.sphere(theta, phi); }, qp);
        }
        const double w = rule.weights[static_cast<std::size_t>(i)];
        for (Index s = 0; s < n; ++s)
          for (Index t = 0; t < n; ++t) {
            const int dm = lm(t).second - lm(s).second;
            const Complex fv = F[static_cast<std::size_t>(dm + 2 * L)];
            if (fv != 0.0) V(s, t) += w * lam[static_cast<std::size_t>(s)] * lam[static_cast<std::size_t>(t)] * fv;
          }
      }
      return V;
    };
    detail::PickList picks;
    detail::add_sentinels(picks, n);
    auto settled = detail::settle_nodes(
        [&](int e) { return entries(q_theta + e, q_phi + e); },
        [&](const detail::PickList& pl, int e) {
          const MatrixXcd m = entries(q_theta + e, q_phi + e);
          std::vector<Complex> out;
          for (const auto& [a, b] : pl) out.push_back(m(a, b));
          return out;
        },
        picks, pot.type != Potential::Type::Zero && pot.type != Potential::Type::Constant);
    op.V = std::move(settled.M);
    op.quad = {"gauss-legendre x trapezoid", q_theta + settled.extra, q_phi + settled.extra};
  }
  const bool symmetric = delta ? pot.type != Potential::Type::CustomEquator : pot.rotationally_symmetric();
  if (symmetric) {
    detail::enforce_sectors(op.V, label);
    op.sectors = detail::partition_by_label(label, op.sector_labels);
  }
  op.finalize();
  return op;
}

/// Truncated perturbation matrix for a model and potential.
inline TruncatedOperator perturbation_matrix(const catalog::ModelId& model, const Potential& pot, const Truncation& tr) {
  if (tr.levels < 2) throw Error(ErrorKind::OutOfDomain, "truncation needs at least 2 levels");
  if (tr.deg_margin < 0) throw Error(ErrorKind::OutOfDomain, "deg_margin must be >= 0");
  using catalog::ModelKind;
  switch (model.kind) {
    case ModelKind::HarmonicOscillator:
      if (model.d == 1) return assemble_oscillator_1d(pot, tr);
      if (model.d == 2) return assemble_oscillator_2d(pot, tr);
      break;
    case ModelKind::Landau:
      if (model.d == 2) return assemble_landau(pot, tr);
      break;
    case ModelKind::SphereLB:
    case ModelKind::SphereDeltaCircle:
      if (model.d == 2) return assemble_sphere(model, pot, tr);
      break;
  }
  throw Error(ErrorKind::BadModel, std::string("matrix mode supports the oscillator in d <= 2 and the Landau and sphere models in d = 2, not ") +
                                       catalog::to_string(model.kind) + " with d = " + std::to_string(model.d));
}

}  // namespace riesz::lab
