#pragma once

// Spectral data of the truncated T, enclosures built from the matrix, and the
// Riesz projections of the enclosure regions (contour quadrature or eigenvectors).

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "riesz/model_catalog.hpp"
#include "riesz/operator_lab/resolvent.hpp"
#include "riesz/quadrature.hpp"
#include "riesz/riesz_core.hpp"

namespace riesz::lab {

// ---------------------------------------------------------------------------
// Eigendecomposition per sector

struct SectorEigen {
  VectorXcd values;
  MatrixXcd R;  // right eigenvectors (columns)
  MatrixXcd L;  // R^{-1}; rows are the biorthogonal left eigenvectors
};

struct SpectrumData {
  std::vector<SectorEigen> sectors;

  std::vector<Complex> all() const {
    std::vector<Complex> out;
    for (const auto& s : sectors)
      for (Index i = 0; i < s.values.size(); ++i) out.push_back(s.values(i));
    return out;
  }
  /// Largest condition number of the eigenvector matrices (diagnostic).
  double max_condition = 1.0;
};

inline SpectrumData eigen_decompose(const TruncatedOperator& op) {
  SpectrumData sd;
  for (std::size_t s = 0; s < op.sectors.size(); ++s) {
    const auto& idx = op.sectors[s];
    MatrixXcd T = gather(op.V, idx);
    for (std::size_t i = 0; i < idx.size(); ++i) T(Index(i), Index(i)) += op.diagA(idx[i]);
    Eigen::ComplexEigenSolver<MatrixXcd> es(T);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::FactorizationInvalid, "eigensolver failed");
    SectorEigen se;
    se.values = es.eigenvalues();
    se.R = es.eigenvectors();
    Eigen::PartialPivLU<MatrixXcd> lu(se.R);
    if (!(lu.rcond() > 1e-14)) throw Error(ErrorKind::FactorizationInvalid, "eigenvector matrix is singular");
    se.L = lu.inverse();
    sd.max_condition = std::max(sd.max_condition, 1.0 / lu.rcond());
    sd.sectors.push_back(std::move(se));
  }
  return sd;
}

// ---------------------------------------------------------------------------
// Trust horizon

/// Largest k with mu_k <= fraction * mu_max (raw eigenvalues of A).
inline long long trust_horizon(const TruncatedOperator& op, double fraction = 0.5) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorKind::OutOfDomain, "trust fraction must lie in (0, 1]");
  long long K = 0;
  for (long long k = 1; k <= op.num_levels(); ++k)
    if (op.mu(k) <= fraction * op.mu_max()) K = k;
  return K;
}

// ---------------------------------------------------------------------------
// Enclosures for a truncated operator

/// Spectral ladder of A as seen by riesz_core: the catalog formula when the
/// operator comes from a model, otherwise the tabulated levels extended linearly.
inline core::SpectralModel operator_spectral_model(const TruncatedOperator& op, double shift) {
  if (op.model.d > 0) {
    auto m = catalog::spectral_model(op.model, shift);
    for (long long k = 1; k <= op.num_levels(); ++k)
      if (std::abs(m.raw_mu(k) - op.mu(k)) > 1e-9 * (1.0 + std::abs(op.mu(k))))
        throw Error(ErrorKind::BadModel, "operator levels do not match the catalog ladder at k = " + std::to_string(k));
    return m;
  }
  const long long n = op.num_levels();
  std::vector<double> tab;
  for (long long k = 1; k <= n; ++k) tab.push_back(op.mu(k));
  double cmin = tab[1] - tab[0];
  for (std::size_t i = 1; i + 1 < tab.size(); ++i) cmin = std::min(cmin, tab[i + 1] - tab[i]);
  const double last_gap = tab[tab.size() - 1] - tab[tab.size() - 2];
  auto table = std::make_shared<const std::vector<double>>(std::move(tab));
  return core::SpectralModel::closed_form(
      [table, last_gap](double k) {
        const auto& t = *table;
        const double nn = static_cast<double>(t.size());
        if (k >= nn) return t.back() + (k - nn) * last_gap;
        const double fl = std::floor(k);
        const auto i = static_cast<std::size_t>(fl);
        if (k == fl) return t[i - 1];
        return t[i - 1] + (k - fl) * (t[i] - t[i - 1]);
      },
      cmin * (1.0 - 1e-12), 1.0, shift);
}

/// omega_j = sqrt(max_k max(||V_jk||, ||V_kj||)), so that ||V_jk|| <= omega_j omega_k.
inline std::vector<double> surrogate_omega(const TruncatedOperator& op) {
  const long long n = op.num_levels();
  std::vector<double> best(static_cast<std::size_t>(n), 0.0);
  for (long long j = 1; j <= n; ++j) {
    const auto [bj, ej] = op.level_range(j);
    for (long long k = j; k <= n; ++k) {
      const auto [bk, ek] = op.level_range(k);
      const MatrixXcd a = op.V.block(bj, bk, ej - bj, ek - bk);
      double v = BlockMatrix::spectral_norm(a);
      if (k != j) v = std::max(v, BlockMatrix::spectral_norm(op.V.block(bk, bj, ek - bk, ej - bj)));
      best[static_cast<std::size_t>(j - 1)] = std::max(best[static_cast<std::size_t>(j - 1)], v);
      best[static_cast<std::size_t>(k - 1)] = std::max(best[static_cast<std::size_t>(k - 1)], v);
    }
  }
  for (auto& b : best) b = std::sqrt(b);
  return best;
}

enum class N0Source { Sigma, Matrix, Auto };

inline const char* to_string(N0Source s) {
  switch (s) {
    case N0Source::Sigma: return "sigma";
    case N0Source::Matrix: return "matrix";
    case N0Source::Auto: return "auto";
  }
  return "?";
}

inline N0Source n0_source_from_string(const std::string& s) {
  if (s == "sigma") return N0Source::Sigma;
  if (s == "matrix") return N0Source::Matrix;
  if (s == "auto") return N0Source::Auto;
  throw Error(ErrorKind::ConfigError, "n0_source must be sigma, matrix or auto, got '" + s + "'");
}

struct OperatorEnclosureOptions {
  core::EnclosureOptions enclosure{};
  N0Source source = N0Source::Auto;
  double shift = 0.0;
  double trust_fraction = 0.5;
  int boundary_samples = 64;  // per circle, and twice that on the right box edge
};

struct OperatorEnclosure {
  core::EnclosureReport report;
  std::vector<double> omega;
  std::string n0_source;                       // "sigma" or "matrix"
  std::optional<core::CutoffResult> sigma_cut;  // when sigma_N reached the threshold
  std::string sigma_status;
  long long K_trust = 0;
  std::vector<double> circle_bnorm;  // sampled max ||B|| on the circle of level k (index k-1), raw T
  double edge_bnorm = 0.0;           // sampled max ||B|| on the right box edge
};

namespace detail {

inline double circle_max_bnorm(const TruncatedOperator& op, double center, double radius, int samples) {
  double m = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double th = 2.0 * std::numbers::pi * (j + 0.5) / samples;
    m = std::max(m, b_norm(center + std::polar(radius, th), op));
  }
  return m;
}

inline double edge_max_bnorm(const TruncatedOperator& op, double x, double h2, int samples) {
  double m = 0.0;
  const int n = std::max(3, samples);
  for (int j = 0; j < n; ++j) {
    const double y = -h2 + 2.0 * h2 * j / (n - 1);
    if (y == 0.0 && (op.diagA.array() == x).any()) continue;
    m = std::max(m, b_norm({x, y}, op));
  }
  return m;
}

}  // namespace detail

/// Box and disks for the truncated operator. The cutoff comes from sigma_N when it
/// reaches the threshold below the trust horizon; otherwise (or when forced) it is the
/// smallest N for which sampled ||B(z)|| < 1 on every trusted circle beyond N and on
/// the right edge of the box.
inline OperatorEnclosure build_operator_enclosure(const TruncatedOperator& op, const OperatorEnclosureOptions& o = {}) {
  OperatorEnclosure out;
  out.omega = surrogate_omega(op);
  out.K_trust = trust_horizon(op, o.trust_fraction);
  const auto mu = operator_spectral_model(op, o.shift);
  mu.validate(op.num_levels());
  const auto r = core::gap_radii(mu, op.num_levels());
  const auto omega = core::OmegaModel::finite(out.omega);

  try {
    out.sigma_cut = core::find_cutoff_N0(mu, r, omega, {o.enclosure.threshold, o.enclosure.n_cap, o.enclosure.sums});
    out.sigma_status = "reached";
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotReached) throw;
    out.sigma_status = e.what();
  }

  bool use_sigma = false;
  if (o.source == N0Source::Sigma) {
    if (!out.sigma_cut) throw Error(ErrorKind::NotReached, out.sigma_status);
    use_sigma = true;
  } else if (o.source == N0Source::Auto) {
    use_sigma = out.sigma_cut && out.sigma_cut->N0 < out.K_trust;
  }

  const int ns = std::max(8, o.boundary_samples);
  out.circle_bnorm.assign(static_cast<std::size_t>(op.num_levels()), 0.0);
  for (long long k = 1; k <= out.K_trust; ++k)
    out.circle_bnorm[static_cast<std::size_t>(k - 1)] = detail::circle_max_bnorm(op, op.mu(k), r(k), ns);

  if (use_sigma) {
    out.report = core::enclosure_for_cutoff(mu, r, omega, out.sigma_cut->N0, o.enclosure);
    out.report.sigma_at_N0 = out.sigma_cut->sigma;
    out.n0_source = "sigma";
  } else {
    if (out.K_trust < 2) throw Error(ErrorKind::TrustExhausted, "trust horizon below level 2");
    long long N = out.K_trust;
    while (N > 1 && out.circle_bnorm[static_cast<std::size_t>(N - 1)] < 1.0) --N;
    bool done = false;
    for (; N < out.K_trust; ++N) {
      out.report = core::enclosure_for_cutoff(mu, r, omega, N, o.enclosure);
      out.edge_bnorm = detail::edge_max_bnorm(op, out.report.box.right - o.shift, out.report.h2, 2 * ns + 1);
      if (out.edge_bnorm < 1.0) {
        done = true;
        break;
      }
    }
    if (!done) throw Error(ErrorKind::NotReached, "no matrix-certified cutoff below the trust horizon");
    out.n0_source = "matrix";
    out.report.notes.push_back("N0 certified by sampled ||B(z)|| < 1 on the trusted circles and the right box edge");
  }
  if (!use_sigma && out.edge_bnorm == 0.0)
    out.edge_bnorm = detail::edge_max_bnorm(op, out.report.box.right - o.shift, out.report.h2, 2 * ns + 1);
  return out;
}

// ---------------------------------------------------------------------------
// Projections

enum class ProjectionMethod { Contour, Eigen };

inline const char* to_string(ProjectionMethod m) { return m == ProjectionMethod::Contour ? "contour" : "eigen"; }

struct ContourOptions {
  int circle_nodes = 64;     // starting count; doubled until settled
  int circle_max_nodes = 4096;
  double circle_tol = 1e-12;
  int side_order = 16;
  int side_panels = 2;     // 2 x 16 = 32 nodes per side before refinement
  int max_refine = 64;     // cap on the per-panel subdivision factor
  double side_tol = 1e-12;  // relative Frobenius change that stops box refinement
};

/// Region geometry in raw coordinates (eigenvalues of T without the shift).
struct RawGeometry {
  core::Box box;
  std::vector<core::Disk> disks;  // N0 < k <= K_trust
  long long N0 = 1;
  long long K_trust = 0;
  double trust_re = 0.0;  // eigenvalues with Re < trust_re are trusted

  const core::Disk& disk(long long k) const { return disks.at(static_cast<std::size_t>(k - N0 - 1)); }
};

inline RawGeometry raw_geometry(const TruncatedOperator& op, const core::EnclosureReport& rep, double trust_fraction = 0.5) {
  RawGeometry g;
  g.N0 = rep.N0;
  g.K_trust = trust_horizon(op, trust_fraction);
  if (g.K_trust <= g.N0)
    throw Error(ErrorKind::TrustExhausted, "K_trust = " + std::to_string(g.K_trust) + " <= N0 = " + std::to_string(g.N0));
  g.box = rep.box;
  g.box.left -= rep.shift;
  g.box.right -= rep.shift;
  for (const auto& d : rep.disks) {
    if (d.k > g.K_trust) break;
    core::Disk c = d;
    c.center -= rep.shift;
    if (std::abs(c.center - op.mu(d.k)) > 1e-9 * (1.0 + std::abs(c.center)))
      throw Error(ErrorKind::OutOfDomain, "enclosure was built for a different spectrum (level " + std::to_string(d.k) + ")");
    g.disks.push_back(c);
  }
  if (static_cast<long long>(g.disks.size()) != g.K_trust - g.N0)
    throw Error(ErrorKind::OutOfDomain, "enclosure has fewer disks than trusted levels");
  const auto& last = g.disks.back();
  g.trust_re = last.center + last.radius_halfgap;
  return g;
}

struct ProjectionSet {
  BlockMatrix S0;
  std::map<long long, BlockMatrix> P;  // N0 < k <= K_trust
  long long N0 = 1;
  long long K_trust = 0;
  ProjectionMethod method = ProjectionMethod::Eigen;
  int circle_nodes = 0;
  int box_nodes = 0;  // total nodes on the rectangle after refinement
  double box_refine_change = 0.0;
  RawGeometry geometry;

  const BlockMatrix& at(long long k) const {
    auto it = P.find(k);
    if (it == P.end()) throw Error(ErrorKind::TrustExhausted, "no projection for level " + std::to_string(k));
    return it->second;
  }
};

namespace detail {

/// Distance from z to the boundary of the box.
inline double box_boundary_distance(const core::Box& b, Complex z) {
  const double x = z.real(), y = z.imag();
  auto seg = [](double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax, dy = by - ay;
    double t = ((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy);
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - ax - t * dx, py - ay - t * dy);
  };
  const double h = b.half_height;
  return std::min({seg(x, y, b.left, -h, b.right, -h), seg(x, y, b.right, -h, b.right, h),
                   seg(x, y, b.right, h, b.left, h), seg(x, y, b.left, h, b.left, -h)});
}

inline void check_contours(const RawGeometry& g, const std::vector<Complex>& ev) {
  const double rN = g.disks.front().radius_halfgap;
  for (const auto& lam : ev) {
    if (box_boundary_distance(g.box, lam) < 1e-8 * rN)
      throw Error(ErrorKind::ContourHitsEigenvalue, "eigenvalue near the box boundary");
    for (const auto& d : g.disks)
      if (std::abs(std::abs(lam - d.center) - d.radius_halfgap) < 1e-8 * d.radius_halfgap)
        throw Error(ErrorKind::ContourHitsEigenvalue, "eigenvalue near the circle of level " + std::to_string(d.k));
  }
}

inline BlockMatrix eigen_projection(const TruncatedOperator& op, const SpectrumData& sd,
                                    const std::function<bool(Complex)>& inside) {
  BlockMatrix P(op.dim(), op.sectors);
  for (std::size_t s = 0; s < sd.sectors.size(); ++s) {
    const auto& se = sd.sectors[s];
    for (Index i = 0; i < se.values.size(); ++i)
      if (inside(se.values(i))) P.block(s) += se.R.col(i) * se.L.row(i);
  }
  return P;
}

/// Trapezoid rule on the circle |z - c| = rho: (1/n) sum (z_j - c) R(z_j), nodes at angles 2 pi (j + offset) / n.
inline BlockMatrix circle_projection(const TruncatedOperator& op, double c, double rho, int n, double offset = 0.0) {
  BlockMatrix P(op.dim(), op.sectors);
  for (int j = 0; j < n; ++j) {
    const Complex w = std::polar(rho, 2.0 * std::numbers::pi * (j + offset) / n);
    auto R = resolvent_blocks(c + w, op);
    R *= w / static_cast<double>(n);
    P += R;
  }
  return P;
}

/// Nested doubling from n nodes until the Frobenius change is <= tol * max(1, ||P||_F).
inline BlockMatrix circle_projection_adaptive(const TruncatedOperator& op, double c, double rho, int n, int n_max,
                                              double tol, int& used) {
  BlockMatrix P = circle_projection(op, c, rho, n);
  for (;;) {
    if (2 * n > n_max)
      throw Error(ErrorKind::QuadratureFailure, "circle contour around " + std::to_string(c) + " did not settle at " +
                                                    std::to_string(n) + " nodes");
    BlockMatrix next = circle_projection(op, c, rho, n, 0.5);
    next += P;
    next *= 0.5;
    n *= 2;
    const double change = (next - P).frobenius();
    P = std::move(next);
    if (change <= tol * std::max(1.0, P.frobenius())) break;
  }
  used = n;
  return P;
}

/// Breakpoints along [0, len] with panels no longer than `scale`, graded
/// geometrically toward the parameter t0 where the side is closest to the spectrum.
inline std::vector<double> side_breaks(double len, double t0, double scale) {
  std::vector<double> b{0.0, len};
  auto grade = [&](double from, double to) {
    const double dir = to > from ? 1.0 : -1.0;
    double step = scale;
    double t = from;
    while (std::abs(to - t) > step) {
      t += dir * step;
      b.push_back(t);
      step *= 2.0;
    }
  };
  if (t0 > 0.0 && t0 < len) {
    b.push_back(t0);
    grade(t0, 0.0);
    grade(t0, len);
  } else {
    grade(0.0, len);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

struct Side {
  Complex a, b;  // oriented segment
  std::vector<double> breaks;
};

inline BlockMatrix box_projection(const TruncatedOperator& op, const std::vector<Side>& sides, int order, int sub) {
  const auto gl = quad::gauss_legendre(order);
  BlockMatrix S(op.dim(), op.sectors);
  for (const auto& s : sides) {
    const double len = std::abs(s.b - s.a);
    const Complex u = (s.b - s.a) / len;
    for (std::size_t p = 0; p + 1 < s.breaks.size(); ++p) {
      const double h = (s.breaks[p + 1] - s.breaks[p]) / sub;
      for (int q = 0; q < sub; ++q) {
        const double lo = s.breaks[p] + q * h;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
          const double t = lo + 0.5 * h * (gl.nodes[i] + 1.0);
          auto R = resolvent_blocks(s.a + t * u, op);
          R *= u * (0.5 * h * gl.weights[i]);
          S += R;
        }
      }
    }
  }
  S *= 1.0 / Complex(0.0, 2.0 * std::numbers::pi);
  return S;
}

}  // namespace detail

/// Riesz projections of the box and of the trusted disks.
inline ProjectionSet compute_projections(const TruncatedOperator& op, const core::EnclosureReport& rep,
                                         ProjectionMethod method, const ContourOptions& co = {},
                                         const SpectrumData* spectrum = nullptr, double trust_fraction = 0.5) {
  ProjectionSet ps;
  ps.geometry = raw_geometry(op, rep, trust_fraction);
  const auto& g = ps.geometry;
  ps.N0 = g.N0;
  ps.K_trust = g.K_trust;
  ps.method = method;

  std::optional<SpectrumData> own;
  if (!spectrum) {
    own = eigen_decompose(op);
    spectrum = &*own;
  }
  detail::check_contours(g, spectrum->all());

  if (method == ProjectionMethod::Eigen) {
    ps.S0 = detail::eigen_projection(op, *spectrum, [&](Complex z) { return g.box.contains(z); });
    for (const auto& d : g.disks)
      ps.P.emplace(d.k, detail::eigen_projection(op, *spectrum, [&](Complex z) { return d.contains(z); }));
    return ps;
  }

  if (co.circle_nodes < 4) throw Error(ErrorKind::OutOfDomain, "circle_nodes must be >= 4");
  if (co.side_order < 2 || co.side_panels < 1) throw Error(ErrorKind::OutOfDomain, "bad rectangle rule");
  ps.circle_nodes = co.circle_nodes;
  for (const auto& d : g.disks) {
    int used = co.circle_nodes;
    ps.P.emplace(d.k, detail::circle_projection_adaptive(op, d.center, d.radius_halfgap, co.circle_nodes,
                                                         co.circle_max_nodes, co.circle_tol, used));
    ps.circle_nodes = std::max(ps.circle_nodes, used);
  }

  // Rectangle, counterclockwise. The right edge passes between levels N0 and N0+1
  // near the real axis, so its panels are graded toward y = 0.
  const auto& b = g.box;
  const double h = b.half_height, w = b.right - b.left;
  const double near = std::min(h, g.disks.front().radius_halfgap) / co.side_panels;
  const double far = std::min(w, h) / co.side_panels;
  std::vector<detail::Side> sides = {
      {{b.left, -h}, {b.right, -h}, detail::side_breaks(w, -1.0, far)},
      {{b.right, -h}, {b.right, h}, detail::side_breaks(2 * h, h, near)},
      {{b.right, h}, {b.left, h}, detail::side_breaks(w, -1.0, far)},
      {{b.left, h}, {b.left, -h}, detail::side_breaks(2 * h, h, std::min(2 * h, b.right - b.left) / co.side_panels)},
  };
  int sub = 1;
  BlockMatrix prev = detail::box_projection(op, sides, co.side_order, sub);
  for (;;) {
    if (sub * 2 > co.max_refine)
      throw Error(ErrorKind::QuadratureFailure, "rectangle contour did not settle");
    sub *= 2;
    BlockMatrix cur = detail::box_projection(op, sides, co.side_order, sub);
    const double change = (cur - prev).frobenius();
    ps.box_refine_change = change;
    prev = std::move(cur);
    if (change <= co.side_tol * std::max(1.0, prev.frobenius())) break;
  }
  ps.S0 = std::move(prev);
  int panels = 0;
  for (const auto& s : sides) panels += static_cast<int>(s.breaks.size()) - 1;
  ps.box_nodes = panels * sub * co.side_order;
  return ps;
}

/// Largest change of a trusted P_k when the circle nodes are doubled from n to 2n.
inline double node_doubling_change(const TruncatedOperator& op, const RawGeometry& g, int n) {
  double worst = 0.0;
  for (const auto& d : g.disks) {
    const auto a = detail::circle_projection(op, d.center, d.radius_halfgap, n);
    const auto b = detail::circle_projection(op, d.center, d.radius_halfgap, 2 * n);
    worst = std::max(worst, (a - b).op_norm());
  }
  return worst;
}

}  // namespace riesz::lab
