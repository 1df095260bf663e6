#pragma once

// Spectral data and subordination exponents of the model operators:
// harmonic oscillator, Landau Hamiltonian, Laplace-Beltrami on S^d and its
// delta perturbation on a hypersurface.
//
// Exponent routines are templated on the scalar so that tables can be
// evaluated exactly with riesz::Rational or approximately with double.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>

#include "riesz/error.hpp"
#include "riesz/rational.hpp"
#include "riesz/riesz_core.hpp"

namespace riesz::catalog {

enum class ModelKind { HarmonicOscillator, Landau, SphereLB, SphereDeltaCircle };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::HarmonicOscillator: return "HarmonicOscillator";
    case ModelKind::Landau: return "Landau";
    case ModelKind::SphereLB: return "SphereLB";
    case ModelKind::SphereDeltaCircle: return "SphereDeltaCircle";
  }
  return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  for (auto k : {ModelKind::HarmonicOscillator, ModelKind::Landau, ModelKind::SphereLB,
                 ModelKind::SphereDeltaCircle})
    if (s == to_string(k)) return k;
  throw Error(ErrorKind::BadModel, "unknown model kind '" + s + "'");
}

struct ModelId {
  ModelKind kind = ModelKind::HarmonicOscillator;
  int d = 2;

  /// Validates the dimension. test_mode admits the one-dimensional oscillator.
  static ModelId make(ModelKind kind, int d, bool test_mode = false) {
    const std::string name = to_string(kind);
    switch (kind) {
      case ModelKind::HarmonicOscillator:
        if (d < 2 && !(test_mode && d == 1))
          throw Error(ErrorKind::BadModel, name + " needs d >= 2, got " + std::to_string(d));
        break;
      case ModelKind::Landau:
        if (d < 2 || d % 2 != 0)
          throw Error(ErrorKind::BadModel, name + " needs even d >= 2, got " + std::to_string(d));
        break;
      case ModelKind::SphereLB:
      case ModelKind::SphereDeltaCircle:
        if (d < 2) throw Error(ErrorKind::BadModel, name + " needs d >= 2, got " + std::to_string(d));
        break;
    }
    return ModelId{kind, d};
  }

  bool is_sphere() const { return kind == ModelKind::SphereLB || kind == ModelKind::SphereDeltaCircle; }
};

/// Level multiplicity; Landau levels are infinite.
struct Multiplicity {
  bool infinite = false;
  std::uint64_t value = 0;

  static Multiplicity inf() { return {true, 0}; }
  friend bool operator==(const Multiplicity&, const Multiplicity&) = default;
  std::string str() const { return infinite ? "inf" : std::to_string(value); }
};

struct LevelData {
  double mu = 0.0;
  double r = 0.0;
  Multiplicity mult;
};

namespace detail {

inline std::uint64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max())
      throw Error(ErrorKind::Overflow, "binomial coefficient exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace detail

inline LevelData catalog_spectrum(const ModelId& m, long long k) {
  if (k < 1) throw Error(ErrorKind::OutOfDomain, "level index must be >= 1");
  const double kd = static_cast<double>(k);
  const double d = m.d;
  LevelData out;
  switch (m.kind) {
    case ModelKind::HarmonicOscillator:
      out.mu = 2.0 * kd - 2.0 + d;
      out.r = 1.0;
      out.mult.value = detail::binomial(k - 2 + m.d, k - 1);
      break;
    case ModelKind::Landau:
      out.mu = 2.0 * kd - 2.0 + d / 2.0;
      out.r = 1.0;
      out.mult = Multiplicity::inf();
      break;
    case ModelKind::SphereLB:
    case ModelKind::SphereDeltaCircle: {
      out.mu = (kd - 1.0) * (kd - 2.0 + d);
      out.r = k == 1 ? d / 2.0 : kd - 2.0 + d / 2.0;
      const unsigned __int128 num =
          static_cast<unsigned __int128>(2 * k - 3 + m.d) * detail::binomial(k - 3 + m.d, k - 1);
      const unsigned __int128 val = num / static_cast<unsigned __int128>(m.d - 1);
      if (val > std::numeric_limits<std::uint64_t>::max())
        throw Error(ErrorKind::Overflow, "multiplicity exceeds 64 bits");
      out.mult.value = static_cast<std::uint64_t>(val);
      break;
    }
  }
  return out;
}

/// Default shift that makes mu_1 + shift > 0.
inline double default_shift(const ModelId& m) { return m.is_sphere() ? 1.0 : 0.0; }

/// Eigenvalue ladder of the model as a core::SpectralModel.
inline core::SpectralModel spectral_model(const ModelId& m, std::optional<double> shift = std::nullopt) {
  const double d = m.d;
  const double s = shift.value_or(default_shift(m));
  switch (m.kind) {
    case ModelKind::HarmonicOscillator:
      return core::SpectralModel::closed_form([d](double k) { return 2.0 * k - 2.0 + d; }, 2.0, 1.0, s);
    case ModelKind::Landau:
      return core::SpectralModel::closed_form([d](double k) { return 2.0 * k - 2.0 + d / 2.0; }, 2.0, 1.0, s);
    case ModelKind::SphereLB:
    case ModelKind::SphereDeltaCircle:
      return core::SpectralModel::closed_form([d](double k) { return (k - 1.0) * (k - 2.0 + d); }, 2.0, 2.0, s);
  }
  throw Error(ErrorKind::BadModel, "unknown model");
}

/// Gap exponent gamma of mu_{k+1} - mu_k >= C k^(gamma - 1).
inline int gap_exponent(const ModelId& m) { return m.is_sphere() ? 2 : 1; }

// ---------------------------------------------------------------------------
// Exponent tables

namespace detail {

template <class S>
S make(std::int64_t n, std::int64_t d) {
  if constexpr (std::is_same_v<S, Rational>)
    return Rational(n, d);
  else
    return static_cast<S>(n) / static_cast<S>(d);
}

template <class S>
bool same(const S& a, const S& b) {
  if constexpr (std::is_same_v<S, Rational>)
    return a == b;
  else
    return std::abs(a - b) <= 1e-13;
}

inline void require_exponent_model(const ModelId& m) {
  if (m.kind == ModelKind::HarmonicOscillator && m.d < 2)
    throw Error(ErrorKind::BadModel, "no exponent table for the one-dimensional oscillator");
}

}  // namespace detail

template <class S>
struct RhoResult {
  S value{};
  S log_power{};       // nonzero only at the log-corrected boundary point
  std::string branch;  // active piece of the table
  bool boundary = false;
};

/// Projection-norm growth exponent rho(p) as a function of 1/p in [0, 1/2].
template <class S>
RhoResult<S> rho_exponent(const ModelId& m, const S& inv_p) {
  using detail::make;
  detail::require_exponent_model(m);
  const S zero = make<S>(0, 1);
  const S half = make<S>(1, 2);
  if (inv_p < zero || inv_p > half) throw Error(ErrorKind::OutOfDomain, "1/p must lie in [0, 1/2]");
  const std::int64_t d = m.d;
  const S dd = make<S>(d, 1);
  const S t = half - inv_p;  // 1/2 - 1/p
  RhoResult<S> out;
  out.log_power = zero;
  switch (m.kind) {
    case ModelKind::HarmonicOscillator: {
      const S b1 = half - make<S>(1, d);
      const S pstar = half - make<S>(1, d + 3);
      if (inv_p <= b1) {
        out.value = -(make<S>(1, 1) - dd * t);
        out.branch = "low";
      } else if (detail::same(inv_p, pstar)) {
        out.value = -t;
        out.log_power = pstar;
        out.branch = "critical";
        out.boundary = true;
      } else if (inv_p < pstar) {
        out.value = -(make<S>(1, 1) - dd * t) * make<S>(1, 3);
        out.branch = "middle";
      } else {
        out.value = -t;
        out.branch = "high";
      }
      break;
    }
    case ModelKind::Landau: {
      const S b1 = half - make<S>(1, d + 1);
      if (inv_p <= b1) {
        out.value = make<S>(-1, 1) + dd * t;
        out.branch = "low";
      } else {
        out.value = -t;
        out.branch = "high";
      }
      break;
    }
    case ModelKind::SphereLB: {
      const S b1 = half - make<S>(1, d + 1);
      if (inv_p <= b1) {
        out.value = -half + dd * t;
        out.branch = "low";
      } else {
        out.value = make<S>(d - 1, 2) * t;
        out.branch = "high";
      }
      break;
    }
    case ModelKind::SphereDeltaCircle: {
      const S pstar = half - make<S>(1, 2 * d);
      if (detail::same(inv_p, pstar)) {
        out.value = make<S>(d - 1, 2) * (make<S>(1, 1) - make<S>(2, 1) * inv_p);
        out.log_power = half;
        out.branch = "critical";
        out.boundary = true;
      } else if (inv_p < pstar) {
        out.value = make<S>(d - 1, 2) * (make<S>(1, 1) - make<S>(2, 1) * inv_p);
        out.branch = "low";
      } else {
        out.value = make<S>(d - 1, 4) - make<S>(d - 2, 2) * inv_p;
        out.branch = "high";
      }
      break;
    }
  }
  return out;
}

/// Lebesgue index r of the potential, stored as 1/r so that r = infinity is exact.
template <class S>
class LebesgueIndex {
 public:
  static LebesgueIndex infinity() { return LebesgueIndex(detail::make<S>(0, 1)); }
  static LebesgueIndex from_r(const S& r) {
    if (!(r > detail::make<S>(0, 1))) throw Error(ErrorKind::OutOfDomain, "r must be positive");
    return LebesgueIndex(detail::make<S>(1, 1) / r);
  }
  static LebesgueIndex from_inverse(const S& inv_r) {
    if (inv_r < detail::make<S>(0, 1)) throw Error(ErrorKind::OutOfDomain, "1/r must be >= 0");
    return LebesgueIndex(inv_r);
  }

  const S& inverse() const { return inv_r_; }
  bool is_infinite() const { return inv_r_ == detail::make<S>(0, 1); }
  /// Hoelder partner: 1/p = (1 - 1/r)/2.
  S inv_p() const { return (detail::make<S>(1, 1) - inv_r_) * detail::make<S>(1, 2); }

 private:
  explicit LebesgueIndex(S inv) : inv_r_(std::move(inv)) {}
  S inv_r_;
};

template <class S>
struct ExponentResult {
  std::string regime;
  S alpha{};     // omega_j = O(j^-alpha (log j)^log_beta)
  S log_beta{};
  bool admissible = false;
};

/// Decay exponent of omega_j for V in L^r (or W in L^r(Sigma)).
template <class S>
ExponentResult<S> omega_model(const ModelId& m, const LebesgueIndex<S>& r) {
  using detail::make;
  if (r.inverse() > make<S>(1, 1)) throw Error(ErrorKind::OutOfDomain, "1/r must lie in [0, 1]");
  const auto rho = rho_exponent<S>(m, r.inv_p());
  ExponentResult<S> out;
  out.regime = rho.branch;
  out.log_beta = rho.log_power;
  const bool halved = m.kind == ModelKind::HarmonicOscillator || m.kind == ModelKind::Landau;
  out.alpha = halved ? -rho.value * make<S>(1, 2) : -rho.value;
  // log factors absorbed into j^0.01 for the decision
  const S a_eff = out.log_beta > make<S>(0, 1) ? out.alpha - make<S>(1, 100) : out.alpha;
  out.admissible = make<S>(2, 1) * a_eff + make<S>(gap_exponent(m), 1) > make<S>(1, 1);
  return out;
}

/// Interval of admissible r: (lower, infinity) or (lower, infinity].
struct RangeInterval {
  Rational lower;
  bool lower_open = true;
  bool infinity_included = false;

  template <class S>
  bool contains(const LebesgueIndex<S>& r) const {
    if (r.is_infinite()) return infinity_included;
    // r > lower  <=>  1/r < 1/lower
    const S bound = detail::make<S>(lower.den(), lower.num());
    return lower_open ? r.inverse() < bound : r.inverse() <= bound;
  }

  std::string str() const {
    return std::string(lower_open ? "(" : "[") + lower.str() + ", inf" + (infinity_included ? "]" : ")");
  }
};

inline RangeInterval admissible_range(const ModelId& m) {
  switch (m.kind) {
    case ModelKind::HarmonicOscillator:
    case ModelKind::Landau: return {Rational(m.d, 2), true, false};
    case ModelKind::SphereLB: return {Rational(m.d, 2), true, true};
    case ModelKind::SphereDeltaCircle: return {Rational(m.d - 1), true, true};
  }
  return {};
}

/// Convenience: core::OmegaModel with the catalog's power-log tail and constant c.
inline core::OmegaModel omega_power_model(const ModelId& m, const LebesgueIndex<double>& r, double c) {
  const auto e = omega_model<double>(m, r);
  return core::OmegaModel::power(c, e.alpha, e.log_beta);
}

}  // namespace riesz::catalog
