#pragma once

// Sequence-level engine: gap radii, the tail quantity sigma_N, the majorant
// of ||B(z)||, the cutoff N0 and the spectral enclosure built from them.
//
// All sums over levels are split into a direct part (j <= J) and a remainder
// bounded from above with the power-log tail of the omega model, so every
// reported "value + remainder" is a one-sided upper estimate.

#include <algorithm>
#include <cmath>
#include <memory>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "riesz/error.hpp"

namespace riesz::core {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Spectral data of the unperturbed operator

class SpectralModel {
 public:
  using Evaluator = std::function<double(double)>;

  /// mu(k) given by a formula valid for every real k >= 1 (integer k are the
  /// eigenvalues; non-integer arguments are only used to bound tails).
  static SpectralModel closed_form(Evaluator raw_mu, double gap_constant, double gap_exponent,
                                   double shift = 0.0) {
    SpectralModel m;
    m.raw_ = std::move(raw_mu);
    m.gap_constant_ = gap_constant;
    m.gap_exponent_ = gap_exponent;
    m.shift_ = shift;
    m.check_params();
    return m;
  }

  /// Tabulated head mu_1..mu_J followed by the growth tail a * k^gamma, gamma = gap exponent.
  static SpectralModel tabulated(std::vector<double> head, double growth_coeff, double gap_constant,
                                 double gap_exponent, double shift = 0.0) {
    if (head.empty()) throw Error(ErrorKind::BadModel, "tabulated spectrum needs a non-empty head");
    auto table = std::make_shared<const std::vector<double>>(std::move(head));
    const double a = growth_coeff;
    const double g = gap_exponent;
    return closed_form(
        [table, a, g](double k) {
          const auto idx = static_cast<std::size_t>(k);
          if (k == std::floor(k) && idx >= 1 && idx <= table->size()) return (*table)[idx - 1];
          return a * std::pow(k, g);
        },
        gap_constant, gap_exponent, shift);
  }

  double mu(long long k) const { return raw_(static_cast<double>(k)) + shift_; }
  double mu_at(double k) const { return raw_(k) + shift_; }
  double raw_mu(long long k) const { return raw_(static_cast<double>(k)); }

  double gap_constant() const { return gap_constant_; }
  double gap_exponent() const { return gap_exponent_; }
  double shift() const { return shift_; }

  SpectralModel shifted(double extra) const {
    SpectralModel m = *this;
    m.shift_ += extra;
    return m;
  }

  /// Checks the model invariants on levels 1..kmax+1.
  void validate(long long kmax) const {
    if (mu(1) <= 0.0)
      throw Error(ErrorKind::BadModel, "mu_1 + shift must be positive, got " + std::to_string(mu(1)));
    double prev = mu(1);
    for (long long k = 1; k <= kmax; ++k) {
      const double next = mu(k + 1);
      check_step(k, prev, next);
      prev = next;
    }
  }

  /// Gap test for a single step; used by the summation kernels on precomputed tables.
  void check_step(long long k, double mu_k, double mu_next) const {
    if (!(mu_next > mu_k))
      throw Error(ErrorKind::NonMonotoneSpectrum,
                  "mu_" + std::to_string(k + 1) + " <= mu_" + std::to_string(k));
    const double bound = gap_constant_ * std::pow(static_cast<double>(k), gap_exponent_ - 1.0);
    if (mu_next - mu_k < bound * (1.0 - 1e-12))
      throw Error(ErrorKind::GapBoundViolated,
                  "gap at k=" + std::to_string(k) + " is " + std::to_string(mu_next - mu_k) +
                      " < C k^(gamma-1) = " + std::to_string(bound));
  }

 private:
  void check_params() const {
    if (!(gap_constant_ > 0.0)) throw Error(ErrorKind::BadModel, "gap constant must be positive");
    if (!(gap_exponent_ >= 1.0)) throw Error(ErrorKind::BadModel, "gap exponent must be >= 1");
  }

  Evaluator raw_;
  double gap_constant_ = 1.0;
  double gap_exponent_ = 1.0;
  double shift_ = 0.0;
};

/// Half-gap radii r_1..r_kmax.
class GapRadii {
 public:
  GapRadii() = default;
  explicit GapRadii(std::vector<double> r) : r_(std::move(r)) {}

  double operator()(long long k) const { return r_.at(static_cast<std::size_t>(k - 1)); }
  long long kmax() const { return static_cast<long long>(r_.size()); }
  const std::vector<double>& values() const { return r_; }

 private:
  std::vector<double> r_;
};

inline double half_gap(const SpectralModel& mu, long long k) {
  const double up = mu.mu(k + 1) - mu.mu(k);
  if (k == 1) return 0.5 * up;
  return 0.5 * std::min(mu.mu(k) - mu.mu(k - 1), up);
}

inline GapRadii gap_radii(const SpectralModel& mu, long long kmax) {
  if (kmax < 2) throw Error(ErrorKind::OutOfDomain, "gap_radii needs kmax >= 2");
  std::vector<double> values(static_cast<std::size_t>(kmax + 1));
  for (long long k = 1; k <= kmax + 1; ++k) values[static_cast<std::size_t>(k - 1)] = mu.mu(k);
  for (long long k = 1; k <= kmax; ++k) {
    if (!(values[static_cast<std::size_t>(k)] > values[static_cast<std::size_t>(k - 1)]))
      throw Error(ErrorKind::NonMonotoneSpectrum,
                  "mu_" + std::to_string(k + 1) + " <= mu_" + std::to_string(k));
  }
  std::vector<double> r(static_cast<std::size_t>(kmax));
  r[0] = 0.5 * (values[1] - values[0]);
  for (std::size_t i = 1; i < r.size(); ++i)
    r[i] = 0.5 * std::min(values[i] - values[i - 1], values[i + 1] - values[i]);
  return GapRadii(std::move(r));
}

// ---------------------------------------------------------------------------
// Subordination sequence

/// omega_k = c * k^(-alpha) * (log k)^beta beyond the head.
struct PowerLogTail {
  double c = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  double squared_at(double k) const {
    if (c == 0.0) return 0.0;
    double v = c * c * std::pow(k, -2.0 * alpha);
    if (beta != 0.0) v *= std::pow(std::log(k), 2.0 * beta);
    return v;
  }

  /// Upper bound of omega^2 over the real interval [lo, hi], lo >= 1.
  double max_squared_on(double lo, double hi) const {
    if (c == 0.0) return 0.0;
    if (alpha <= 0.0) return squared_at(hi);
    if (beta == 0.0) return squared_at(lo);
    const double peak = std::exp(beta / alpha);
    return squared_at(std::clamp(peak, lo, hi));
  }

  /// Summability of sum_j omega_j^2 / mu_j for mu_j ~ j^gamma.
  bool summable_against(double gamma) const { return c == 0.0 || 2.0 * alpha + gamma > 1.0; }
};

class OmegaModel {
 public:
  OmegaModel() = default;

  /// Head values followed by a power-log tail.
  static OmegaModel power(double c, double alpha, double beta = 0.0, std::vector<double> head = {}) {
    if (c < 0.0 || beta < 0.0) throw Error(ErrorKind::OutOfDomain, "tail needs c >= 0 and beta >= 0");
    OmegaModel m(std::move(head));
    m.tail_ = PowerLogTail{c, alpha, beta};
    return m;
  }

  /// Finitely supported sequence: zero beyond the head.
  static OmegaModel finite(std::vector<double> head) {
    OmegaModel m(std::move(head));
    m.tail_ = PowerLogTail{};
    return m;
  }

  /// Head without any statement about k > J.
  static OmegaModel head_only(std::vector<double> head) { return OmegaModel(std::move(head)); }

  static OmegaModel zero() { return finite({}); }

  const std::vector<double>& head() const { return head_; }
  const std::optional<PowerLogTail>& tail() const { return tail_; }
  long long head_length() const { return static_cast<long long>(head_.size()); }
  bool has_tail() const { return tail_.has_value(); }
  bool finitely_supported() const { return tail_ && tail_->c == 0.0; }

  double operator()(long long k) const { return std::sqrt(squared(k)); }

  double squared(long long k) const {
    if (k >= 1 && k <= head_length()) {
      const double w = head_[static_cast<std::size_t>(k - 1)];
      return w * w;
    }
    if (!tail_)
      throw Error(ErrorKind::TailModelMissing, "omega_" + std::to_string(k) + " lies beyond the head");
    return tail_->squared_at(static_cast<double>(k));
  }

  OmegaModel scaled(double factor) const {
    OmegaModel m = *this;
    for (double& w : m.head_) w *= factor;
    if (m.tail_) m.tail_->c *= factor;
    return m;
  }

  /// Relative mismatch between head and tail formula at k = J, if it exceeds the tolerance.
  std::optional<std::string> continuity_warning(double tolerance = 0.5) const {
    if (head_.empty() || !tail_ || tail_->c == 0.0) return std::nullopt;
    const double j = static_cast<double>(head_.size());
    const double from_tail = std::sqrt(tail_->squared_at(j));
    const double from_head = head_.back();
    const double scale = std::max(std::abs(from_head), std::abs(from_tail));
    if (scale == 0.0 || std::abs(from_head - from_tail) <= tolerance * scale) return std::nullopt;
    return "omega head ends at " + std::to_string(from_head) + " but the tail formula gives " +
           std::to_string(from_tail) + " at k = " + std::to_string(head_.size());
  }

 private:
  explicit OmegaModel(std::vector<double> head) : head_(std::move(head)) {
    for (double w : head_)
      if (!(w >= 0.0)) throw Error(ErrorKind::OutOfDomain, "omega values must be nonnegative");
  }

  std::vector<double> head_;
  std::optional<PowerLogTail> tail_;
};

// ---------------------------------------------------------------------------
// Summation kernels

struct SumOptions {
  long long j_max = 1'000'000;          // direct-summation cut for tailed models
  double divergence_threshold = 1e6;
  double divergence_growth = 0.01;      // last-decade relative growth
  long long scan_cap = 100'000;         // max width of the sup scan over n
  double block_ratio = 1.0218971486541166;  // 2^(1/32)
  double block_limit = 1e18;
};

struct SigmaEstimate {
  long long N = 1;
  double value = 0.0;      // sup over scanned n of the truncated sum
  double remainder = 0.0;  // upper bound of the omitted tails
  bool diverged = false;
  long long n_sup = 1;     // last scanned n
  long long argmax = 1;

  double upper() const { return value + remainder; }
};

struct BNormBound {
  double partial = 0.0;
  double remainder = 0.0;
  bool diverged = false;

  double upper() const { return diverged ? std::numeric_limits<double>::infinity() : partial + remainder; }
};

namespace detail {

struct TailBound {
  double value = 0.0;
  bool infinite = false;
};

/// sum_{j > J} omega_j^2 / |z - mu_j|, bounded blockwise. Needs mu_{J+1} > Re z.
inline TailBound tail_bound(const SpectralModel& mu, const PowerLogTail& tail, long long J, Complex z,
                            const SumOptions& opts) {
  TailBound out;
  if (tail.c == 0.0) return out;
  if (!tail.summable_against(mu.gap_exponent())) {
    out.infinite = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  const double x = z.real();
  const double y2 = z.imag() * z.imag();
  auto dist = [&](double k) {
    const double dx = mu.mu_at(k) - x;
    return std::sqrt(dx * dx + y2);
  };
  const double ratio = opts.block_ratio;
  double lo = static_cast<double>(J + 1);
  double last = 0.0;
  double sum = 0.0;
  while (lo <= opts.block_limit) {
    const double hi = std::max(lo + 1.0, std::floor(lo * ratio));
    const double count = hi - lo;
    const double block = count * tail.max_squared_on(lo, hi - 1.0) / dist(lo);
    sum += block;
    last = block;
    lo = hi;
  }
  // Geometric extrapolation: successive block bounds shrink at least by q.
  const double next = std::floor(lo * ratio);
  const double count_ratio = (std::floor(next * ratio) - next) / (next - lo);
  const double w_ratio = tail.max_squared_on(next, std::floor(next * ratio)) /
                         tail.max_squared_on(lo, next - 1.0);
  const double d_ratio = dist(next) / dist(lo);
  const double q = count_ratio * w_ratio / d_ratio * (1.0 + 1e-9);
  if (!(q < 1.0)) {
    out.infinite = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  sum += last * q / (1.0 - q);
  out.value = sum;
  return out;
}

/// Tables mu_1..mu_{J+1}, omega_1^2..omega_J^2 with validation.
struct Tables {
  std::vector<double> mu;  // index k-1, size J+1
  std::vector<double> w;   // index k-1, size J
  long long J = 0;
};

inline Tables make_tables(const SpectralModel& mu, const OmegaModel& omega, long long J) {
  Tables t;
  t.J = J;
  t.mu.resize(static_cast<std::size_t>(J + 1));
  t.w.resize(static_cast<std::size_t>(J));
  for (long long k = 1; k <= J + 1; ++k) t.mu[static_cast<std::size_t>(k - 1)] = mu.mu(k);
  if (t.mu[0] <= 0.0)
    throw Error(ErrorKind::BadModel, "mu_1 + shift must be positive, got " + std::to_string(t.mu[0]));
  for (long long k = 1; k <= J; ++k) {
    mu.check_step(k, t.mu[static_cast<std::size_t>(k - 1)], t.mu[static_cast<std::size_t>(k)]);
    t.w[static_cast<std::size_t>(k - 1)] = omega.squared(k);
  }
  return t;
}

}  // namespace detail

/// Decay descriptor n^exponent * (log n)^log_power.
struct DecayRate {
  double exponent = 0.0;
  double log_power = 0.0;

  double operator()(double n) const {
    double v = std::pow(n, exponent);
    if (log_power != 0.0) v *= std::pow(std::log(n), log_power);
    return v;
  }
};

struct PowerLawVerdict {
  bool admissible = false;
  DecayRate rate;           // combined rate of the sigma_N summand
  DecayRate off_diagonal;
  DecayRate diagonal;
};

/// Admissibility of omega_k = O(k^-alpha (log k)^beta) against gaps C k^(gamma-1).
/// Log factors are absorbed into k^delta for the decision only.
inline PowerLawVerdict power_law_admissible(double alpha, double gamma, double log_beta = 0.0,
                                            double delta = 0.01) {
  if (!(gamma > 0.0)) throw Error(ErrorKind::OutOfDomain, "gamma must be positive");
  PowerLawVerdict v;
  const double a_eff = log_beta > 0.0 ? alpha - delta : alpha;
  v.admissible = 2.0 * a_eff + gamma > 1.0;
  const double s = 2.0 * alpha + gamma - 1.0;
  if (alpha <= 0.5)
    v.off_diagonal = DecayRate{-s, 1.0 + 2.0 * log_beta};
  else
    v.off_diagonal = DecayRate{-gamma, 2.0 * log_beta};
  v.diagonal = DecayRate{-s, 2.0 * log_beta};
  const bool off_wins = v.off_diagonal.exponent > v.diagonal.exponent ||
                        (v.off_diagonal.exponent == v.diagonal.exponent &&
                         v.off_diagonal.log_power >= v.diagonal.log_power);
  v.rate = off_wins ? v.off_diagonal : v.diagonal;
  return v;
}

namespace detail {

/// Horizon beyond which the sigma summand is taken to decay monotonically.
inline long long monotone_horizon(const SpectralModel& mu, const OmegaModel& omega, long long N) {
  long long start = std::max(N, omega.head_length() + 1);
  const auto& tail = *omega.tail();
  if (tail.c > 0.0) {
    const double s = 2.0 * tail.alpha + mu.gap_exponent() - 1.0;
    if (s > 0.0) {
      const double peak = std::exp((2.0 * tail.beta + 1.0) / s);
      if (peak > 1e12) return std::numeric_limits<long long>::max();
      start = std::max(start, static_cast<long long>(std::ceil(peak)));
    }
  }
  return start;
}

struct SummandValue {
  double partial = 0.0;
  double partial_decade = 0.0;  // same sum truncated at J/10
};

inline SummandValue sigma_summand(const Tables& t, long long n, double r_n) {
  SummandValue out;
  const double mu_n = t.mu[static_cast<std::size_t>(n - 1)];
  const long long decade = std::max<long long>(1, t.J / 10);
  double acc = 0.0;
  for (long long j = 1; j <= t.J; ++j) {
    if (j == decade + 1) out.partial_decade = acc;
    if (j == n) continue;
    acc += t.w[static_cast<std::size_t>(j - 1)] / std::abs(mu_n - t.mu[static_cast<std::size_t>(j - 1)]);
  }
  if (decade >= t.J) out.partial_decade = acc;
  const double w_n = n <= t.J ? t.w[static_cast<std::size_t>(n - 1)] : 0.0;
  out.partial = acc + w_n / r_n;
  out.partial_decade += w_n / r_n;
  return out;
}

}  // namespace detail

/// sigma_N = sup_{n >= N} ( sum_{j != n} omega_j^2 / |mu_n - mu_j| + omega_n^2 / r_n ).
inline SigmaEstimate sigma_tail(const SpectralModel& mu, const GapRadii& r, const OmegaModel& omega,
                                long long N, const SumOptions& opts = {}) {
  if (N < 1) throw Error(ErrorKind::OutOfDomain, "sigma_tail needs N >= 1");
  if (!omega.has_tail())
    throw Error(ErrorKind::TailModelMissing,
                "omega has no tail model; the sup over n >= " + std::to_string(N) +
                    " and the j-sum need omega beyond k = " + std::to_string(omega.head_length()));
  SigmaEstimate est;
  est.N = N;
  const auto& tail = *omega.tail();
  const long long horizon = detail::monotone_horizon(mu, omega, N);
  const bool summable = tail.summable_against(mu.gap_exponent());
  const long long n_sup = summable ? horizon : N;
  if (n_sup - N > opts.scan_cap)
    throw Error(ErrorKind::HorizonTooLarge,
                "sup scan up to n = " + std::to_string(n_sup) + " exceeds the scan cap");
  long long J = omega.finitely_supported() ? std::max<long long>(omega.head_length(), n_sup + 1)
                                           : std::max({opts.j_max, omega.head_length(), 4 * n_sup + 16});
  const detail::Tables t = detail::make_tables(mu, omega, std::max(J, n_sup + 1));
  J = t.J;
  est.n_sup = n_sup;
  est.value = -1.0;
  for (long long n = N; n <= n_sup; ++n) {
    const double r_n = n <= r.kmax() ? r(n) : half_gap(mu, n);
    const auto s = detail::sigma_summand(t, n, r_n);
    const auto rem = detail::tail_bound(mu, tail, J, Complex(t.mu[static_cast<std::size_t>(n - 1)], 0.0), opts);
    if (s.partial > est.value) {
      est.value = s.partial;
      est.argmax = n;
    }
    est.remainder = std::max(est.remainder, rem.value);
    if (rem.infinite) est.diverged = true;
    if (n == N && s.partial > opts.divergence_threshold && s.partial > 0.0 &&
        (s.partial - s.partial_decade) / s.partial >= opts.divergence_growth)
      est.diverged = true;
  }
  if (est.diverged) est.remainder = std::numeric_limits<double>::infinity();
  return est;
}

/// Majorant sum_j omega_j^2 / |z - mu_j| of ||B(z)||.
inline BNormBound b_norm_upper(Complex z, const SpectralModel& mu, const OmegaModel& omega,
                               const SumOptions& opts = {}) {
  if (!omega.has_tail())
    throw Error(ErrorKind::TailModelMissing, "b_norm_upper needs omega beyond the head");
  const auto& tail = *omega.tail();
  BNormBound out;
  long long J = omega.finitely_supported() ? std::max<long long>(1, omega.head_length())
                                           : std::max(opts.j_max, omega.head_length());
  if (!omega.finitely_supported()) {
    // the tail bound needs mu_{J+1} > Re z
    while (mu.mu(J + 1) <= z.real() + 1.0) {
      J *= 2;
      if (J > 50'000'000)
        throw Error(ErrorKind::HorizonTooLarge, "Re z too far right for the direct sum");
    }
  }
  double acc = 0.0;
  double prev = 0.0;
  for (long long j = 1; j <= J; ++j) {
    const double m = mu.mu(j);
    if (j > 1) mu.check_step(j - 1, prev, m);
    prev = m;
    const double d = std::abs(z - m);
    if (d == 0.0) throw Error(ErrorKind::OnSpectrum, "z coincides with mu_" + std::to_string(j));
    const double w = omega.squared(j);
    if (w != 0.0) acc += w / d;
  }
  out.partial = acc;
  if (z.imag() == 0.0) {
    // points on the real axis beyond the direct range must still avoid the spectrum
    for (long long j = J + 1; mu.mu(j) <= z.real(); ++j)
      if (mu.mu(j) == z.real()) throw Error(ErrorKind::OnSpectrum, "z coincides with mu_" + std::to_string(j));
  }
  const auto rem = detail::tail_bound(mu, tail, J, z, opts);
  out.remainder = rem.value;
  out.diverged = rem.infinite;
  return out;
}

// ---------------------------------------------------------------------------
// Cutoff and enclosure

struct CutoffResult {
  long long N0 = 1;
  SigmaEstimate sigma;
};

struct CutoffOptions {
  double threshold = 0.5;
  long long n_cap = 100'000;
  SumOptions sums{};
};

/// Smallest N with sigma_N (value + remainder) <= threshold.
inline CutoffResult find_cutoff_N0(const SpectralModel& mu, const GapRadii& r, const OmegaModel& omega,
                                   const CutoffOptions& opts = {}) {
  if (!(opts.threshold > 0.0 && opts.threshold < 1.0))
    throw Error(ErrorKind::OutOfDomain, "threshold must lie in (0, 1)");
  auto eval = [&](long long N) { return sigma_tail(mu, r, omega, N, opts.sums); };
  auto passes = [&](const SigmaEstimate& s) { return !s.diverged && s.upper() <= opts.threshold; };

  SigmaEstimate s = eval(1);
  if (s.diverged) throw Error(ErrorKind::NotReached, "sigma_N diverges for this omega model");
  if (passes(s)) return {1, s};
  long long lo = 1;  // fails
  long long hi = 2;
  SigmaEstimate at_hi;
  for (;;) {
    hi = std::min(hi, opts.n_cap);
    at_hi = eval(hi);
    if (passes(at_hi)) break;
    if (hi == opts.n_cap)
      throw Error(ErrorKind::NotReached, "sigma at N_cap = " + std::to_string(opts.n_cap) + " is " +
                                             std::to_string(at_hi.upper()));
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    SigmaEstimate sm = eval(mid);
    if (passes(sm)) {
      hi = mid;
      at_hi = sm;
    } else {
      lo = mid;
    }
  }
  return {hi, at_hi};
}

enum class DiskStatus { Ok, Degenerate, ExceedsHalfGap };

inline const char* to_string(DiskStatus s) {
  switch (s) {
    case DiskStatus::Ok: return "ok";
    case DiskStatus::Degenerate: return "degenerate";
    case DiskStatus::ExceedsHalfGap: return "exceeds_halfgap";
  }
  return "?";
}

struct Disk {
  long long k = 0;
  double center = 0.0;
  double radius_halfgap = 0.0;
  double radius_refined = 0.0;
  DiskStatus refined_status = DiskStatus::Ok;

  bool contains(Complex z, bool refined = false) const {
    const double rad = refined ? radius_refined : radius_halfgap;
    return std::abs(z - center) < rad;
  }
};

/// Pi_0 = (left, right] x [-half_height, half_height].
struct Box {
  double left = 0.0;
  double right = 0.0;
  double half_height = 0.0;

  bool contains(Complex z) const {
    return z.real() > left && z.real() <= right && std::abs(z.imag()) <= half_height;
  }
};

struct EnclosureReport {
  long long N0 = 1;
  double h1 = 0.0;
  double h2 = 0.0;
  double epsilon = 0.0;
  double threshold = 0.5;
  double shift = 0.0;  // enclosure coordinates = raw coordinates + shift
  Box box;
  std::vector<Disk> disks;  // k > N0
  std::optional<SigmaEstimate> sigma_at_N0;
  std::vector<std::string> notes;
};

struct EnclosureOptions {
  double epsilon = 0.1;
  double threshold = 0.5;
  long long n_cap = 100'000;
  int grid_cap_exp = 40;
  int re_samples = 64;
  SumOptions sums{};
  SumOptions b_sums{100'000};  // majorant evaluations during the box search
};

namespace detail {

inline std::optional<double> smallest_grid_value(int cap_exp, const std::function<bool(double)>& ok) {
  for (int m = 0; m <= cap_exp; ++m) {
    const double h = std::ldexp(1.0, m);
    if (ok(h)) return h;
  }
  return std::nullopt;
}

}  // namespace detail

/// Box and disks for a prescribed cutoff N0.
inline EnclosureReport enclosure_for_cutoff(const SpectralModel& mu, const GapRadii& r, const OmegaModel& omega,
                                            long long N0, const EnclosureOptions& opts = {}) {
  if (!(opts.epsilon > 0.0)) throw Error(ErrorKind::OutOfDomain, "epsilon must be positive");
  if (N0 < 1) throw Error(ErrorKind::OutOfDomain, "N0 must be >= 1");
  EnclosureReport rep;
  rep.N0 = N0;
  rep.epsilon = opts.epsilon;
  rep.threshold = opts.threshold;
  rep.shift = mu.shift();
  if (auto w = omega.continuity_warning()) rep.notes.push_back(*w);

  auto below_one = [&](Complex z) { return b_norm_upper(z, mu, omega, opts.b_sums).upper() < 1.0; };
  const auto h1 = detail::smallest_grid_value(opts.grid_cap_exp, [&](double h) { return below_one({-h, 0.0}); });
  if (!h1) throw Error(ErrorKind::BoxSearchFailed, "no h1 <= 2^" + std::to_string(opts.grid_cap_exp));
  rep.h1 = *h1;

  const double rN = N0 <= r.kmax() ? r(N0) : half_gap(mu, N0);
  const double right = mu.mu(N0) + rN;
  std::vector<double> xs;
  const int ns = std::max(2, opts.re_samples);
  for (int i = 0; i < ns; ++i) xs.push_back(-rep.h1 + (right + rep.h1) * i / (ns - 1));
  for (long long k = 1; mu.mu(k) <= right; ++k) xs.push_back(mu.mu(k));
  const auto h2 = detail::smallest_grid_value(opts.grid_cap_exp, [&](double h) {
    return std::all_of(xs.begin(), xs.end(), [&](double x) { return below_one({x, h}); });
  });
  if (!h2) throw Error(ErrorKind::BoxSearchFailed, "no h2 <= 2^" + std::to_string(opts.grid_cap_exp));
  rep.h2 = *h2;
  rep.box = Box{-rep.h1, right, rep.h2};

  for (long long k = N0 + 1; k <= r.kmax(); ++k) {
    Disk d;
    d.k = k;
    d.center = mu.mu(k);
    d.radius_halfgap = r(k);
    d.radius_refined = (1.0 + opts.epsilon) * omega.squared(k);
    if (d.radius_refined == 0.0)
      d.refined_status = DiskStatus::Degenerate;
    else if (d.radius_refined > d.radius_halfgap)
      d.refined_status = DiskStatus::ExceedsHalfGap;
    rep.disks.push_back(d);
  }
  return rep;
}

/// Cutoff from sigma_N, then box and disks.
inline EnclosureReport build_enclosure(const SpectralModel& mu, const GapRadii& r, const OmegaModel& omega,
                                       const EnclosureOptions& opts = {}) {
  const auto cut = find_cutoff_N0(mu, r, omega, CutoffOptions{opts.threshold, opts.n_cap, opts.sums});
  auto rep = enclosure_for_cutoff(mu, r, omega, cut.N0, opts);
  rep.sigma_at_N0 = cut.sigma;
  return rep;
}

/// Box and half-gap disks pairwise disjoint up to tangency (checked in extended precision).
inline bool is_disjoint(const EnclosureReport& rep) {
  using LD = long double;
  LD prev_right = static_cast<LD>(rep.box.right);
  for (const auto& d : rep.disks) {
    const LD left = static_cast<LD>(d.center) - static_cast<LD>(d.radius_halfgap);
    if (left < prev_right) return false;
    prev_right = static_cast<LD>(d.center) + static_cast<LD>(d.radius_halfgap);
  }
  return true;
}

}  // namespace riesz::core
