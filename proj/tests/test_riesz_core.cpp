#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "riesz/riesz_core.hpp"

using namespace riesz;
using namespace riesz::core;
using Catch::Approx;

namespace {

SpectralModel even_ladder() {
  return SpectralModel::closed_form([](double k) { return 2.0 * k; }, 2.0, 1.0);
}

// Independent evaluation of the sigma summand for mu_k = 2k, omega_k = k^-a:
// long double direct sum over j <= J plus the integral of the decreasing tail.
long double brute_summand(long long n, long double a, long long J) {
  long double acc = 0.0L;
  for (long long j = 1; j <= J; ++j) {
    if (j == n) continue;
    acc += std::pow(static_cast<long double>(j), -2.0L * a) / (2.0L * std::fabs(static_cast<long double>(n - j)));
  }
  acc += std::pow(static_cast<long double>(n), -2.0L * a) / 1.0L;  // r_n = 1
  return acc;
}

// int_J^inf x^-1/2 / (2 (x - n)) dx for the a = 1/4 case.
long double quarter_tail_integral(long long n, long long J) {
  const long double sn = std::sqrt(static_cast<long double>(n));
  const long double sJ = std::sqrt(static_cast<long double>(J));
  return 0.5L / sn * std::log((sJ + sn) / (sJ - sn));
}

}  // namespace

TEST_CASE("gap radii of standard ladders", "[core][gap]") {
  const auto r = gap_radii(even_ladder(), 50);
  for (long long k = 1; k <= 50; ++k) CHECK(r(k) == 1.0);

  auto sphere = SpectralModel::closed_form([](double k) { return (k - 1.0) * k; }, 2.0, 2.0, 1.0);
  const auto rs = gap_radii(sphere, 40);
  CHECK(rs(1) == 1.0);
  for (long long k = 2; k <= 40; ++k) CHECK(rs(k) == Approx(k - 1.0));

  auto small = SpectralModel::tabulated({1.0, 2.0, 10.0}, 10.0, 1.0, 1.0);
  const auto r3 = gap_radii(small, 2);
  CHECK(r3(1) == 0.5);
  CHECK(r3(2) == 0.5);
}

TEST_CASE("gap radii reject non-monotone input", "[core][gap]") {
  auto bad = SpectralModel::tabulated({1.0, 3.0, 2.0}, 10.0, 0.5, 1.0);
  try {
    gap_radii(bad, 2);
    FAIL("expected NonMonotoneSpectrum");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonMonotoneSpectrum);
  }
  CHECK_THROWS_AS(gap_radii(even_ladder(), 1), Error);
}

TEST_CASE("gap radii intervals never overlap", "[core][gap][property]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> step(0.1, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> head{0.5};
    for (int i = 0; i < 60; ++i) head.push_back(head.back() + step(rng));
    auto mu = SpectralModel::tabulated(head, 1000.0, 0.05, 1.0);
    const auto r = gap_radii(mu, 59);
    for (long long k = 2; k <= 59; ++k) {
      CHECK(r(k) <= (mu.mu(k + 1) - mu.mu(k - 1)) / 2.0);
      CHECK(mu.mu(k - 1) + r(k - 1) <= mu.mu(k) - r(k) + 1e-12);
    }
  }
}

TEST_CASE("spectral model invariants", "[core][model]") {
  auto mu = even_ladder();
  CHECK_NOTHROW(mu.validate(1000));
  auto sphere = SpectralModel::closed_form([](double k) { return (k - 1.0) * k; }, 2.0, 2.0);
  try {
    sphere.validate(5);
    FAIL("expected BadModel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadModel);
  }
  CHECK_NOTHROW(sphere.shifted(1.0).validate(100));
  auto weak = SpectralModel::closed_form([](double k) { return 2.0 * k; }, 3.0, 1.0);
  try {
    weak.validate(5);
    FAIL("expected GapBoundViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GapBoundViolated);
  }
}

TEST_CASE("omega model evaluation", "[core][omega]") {
  auto om = OmegaModel::power(2.0, 0.5, 0.0, {1.0, 1.0});
  CHECK(om(1) == 1.0);
  CHECK(om(4) == Approx(1.0));
  CHECK(om(16) == Approx(0.5));
  auto logged = OmegaModel::power(1.0, 0.0, 1.0);
  CHECK(logged(1) == 0.0);
  CHECK(logged(10) == Approx(std::log(10.0)));
  auto head = OmegaModel::head_only({1.0});
  try {
    head(2);
    FAIL("expected TailModelMissing");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TailModelMissing);
  }
  CHECK(OmegaModel::finite({1.0})(5) == 0.0);
  CHECK(OmegaModel::power(1.0, 0.5, 0.0, {5.0}).continuity_warning().has_value());
  CHECK_FALSE(OmegaModel::power(1.0, 0.5, 0.0, {1.0}).continuity_warning().has_value());
  CHECK_THROWS_AS(OmegaModel::finite({-1.0}), Error);
}

TEST_CASE("sigma of the zero sequence vanishes", "[core][sigma]") {
  auto mu = even_ladder();
  const auto r = gap_radii(mu, 100);
  const auto s = sigma_tail(mu, r, OmegaModel::zero(), 1);
  CHECK(s.value == 0.0);
  CHECK(s.remainder == 0.0);
  CHECK_FALSE(s.diverged);
}

TEST_CASE("sigma flags divergence for constant omega", "[core][sigma]") {
  auto mu = even_ladder();
  const auto r = gap_radii(mu, 100);
  for (long long N : {1LL, 10LL, 100LL}) {
    const auto s = sigma_tail(mu, r, OmegaModel::power(1.0, 0.0), N);
    CHECK(s.diverged);
  }
  // the harmonic partial sums keep growing: oracle over decades
  long double prev = 0.0L;
  for (long long J : {1000LL, 10000LL, 100000LL}) {
    long double acc = 0.0L;
    for (long long j = 1; j <= J; ++j)
      if (j != 5) acc += 1.0L / (2.0L * std::fabs(5.0L - j));
    CHECK(acc > prev + 1.0L);
    prev = acc;
  }
}

TEST_CASE("sigma needs a tail model", "[core][sigma]") {
  auto mu = even_ladder();
  const auto r = gap_radii(mu, 10);
  try {
    sigma_tail(mu, r, OmegaModel::head_only({1.0, 0.5}), 1);
    FAIL("expected TailModelMissing");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TailModelMissing);
  }
  CHECK_THROWS_AS(sigma_tail(mu, r, OmegaModel::zero(), 0), Error);
}

TEST_CASE("sigma matches brute force at N = 100", "[core][sigma][oracle]") {
  auto mu = even_ladder();
  const auto r = gap_radii(mu, 200);
  const auto om = OmegaModel::power(1.0, 0.25);
  const auto s = sigma_tail(mu, r, om, 100);
  REQUIRE_FALSE(s.diverged);
  const long long J = 1'000'000;
  const long double oracle = brute_summand(100, 0.25L, J) + quarter_tail_integral(100, J);
  CHECK(std::fabs(static_cast<long double>(s.value) - oracle) <= s.remainder);
  CHECK(s.remainder >= quarter_tail_integral(100, J) * 0.999L);
  // the sup over n >= N sits at n = N
  for (long long n : {101LL, 110LL, 200LL})
    CHECK(brute_summand(n, 0.25L, J) < brute_summand(100, 0.25L, J));
}

TEST_CASE("sigma agrees with brute force on head-only models", "[core][sigma][property]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.4);
  auto mu = even_ladder();
  const auto r = gap_radii(mu, 3000);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<double> head(2000);
    for (double& w : head) w = u(rng);
    const auto om = OmegaModel::finite(head);
    for (long long N : {1LL, 50LL, 1500LL}) {
      const auto s = sigma_tail(mu, r, om, N);
      long double best = 0.0L;
      for (long long n = N; n <= 2001; ++n) {
        long double acc = 0.0L;
        for (long long j = 1; j <= 2000; ++j)
          if (j != n) acc += static_cast<long double>(head[j - 1]) * head[j - 1] / (2.0L * std::fabs(n - j + 0.0L));
        if (n <= 2000) acc += static_cast<long double>(head[n - 1]) * head[n - 1];
        best = std::max(best, acc);
      }
      CHECK(std::fabs(static_cast<long double>(s.value) - best) <= s.remainder + 1e-12L * best);
    }
  }
}

TEST_CASE("sigma decays along a geometric grid", "[core][sigma][property]") {
  auto mu = even_ladder();
  const auto r = gap_radii(mu, 10);
  const auto om = OmegaModel::power(1.0, 0.25);
  double prev = std::numeric_limits<double>::infinity();
  double last = 0.0;
  for (long long N = 1; N <= 65536; N *= 4) {
    const auto s = sigma_tail(mu, r, om, N);
    CHECK(s.value <= prev);
    prev = s.upper();
    last = s.upper();
  }
  CHECK(last < 0.1);
}

TEST_CASE("majorant of B(z)", "[core][bnorm]") {
  auto mu = even_ladder();
  CHECK(b_norm_upper({3.0, 0.0}, mu, OmegaModel::finite({1.0})).upper() == Approx(1.0));
  try {
    b_norm_upper({4.0, 0.0}, mu, OmegaModel::power(1.0, 0.25));
    FAIL("expected OnSpectrum");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OnSpectrum);
  }
}

TEST_CASE("majorant at z = 21 matches direct summation", "[core][bnorm][oracle]") {
  auto mu = even_ladder();
  const auto b = b_norm_upper({21.0, 0.0}, mu, OmegaModel::power(1.0, 0.25));
  const long long J = 1'000'000;
  long double acc = 0.0L;
  for (long long j = 1; j <= J; ++j) acc += std::pow(static_cast<long double>(j), -0.5L) / std::fabs(21.0L - 2.0L * j);
  // tail: int_J^inf x^-1/2 / (2x - 21) dx = int x^-1/2 / (2 (x - 10.5))
  const long double sJ = std::sqrt(static_cast<long double>(J));
  const long double sc = std::sqrt(10.5L);
  acc += 0.5L / sc * std::log((sJ + sc) / (sJ - sc));
  CHECK(std::fabs(static_cast<long double>(b.partial) - acc) <= b.remainder);
  CHECK(b.upper() >= static_cast<double>(acc) * (1 - 1e-12));
}

TEST_CASE("majorant decreases to zero left of the spectrum", "[core][bnorm][property]") {
  auto mu = even_ladder();
  const auto om = OmegaModel::power(1.0, 0.25);
  double prev = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= 40; m += 4) {
    const double v = b_norm_upper({-std::ldexp(1.0, m), 0.0}, mu, om).upper();
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("majorant is monotone in the distances", "[core][bnorm][property]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> re(-10.0, 60.0), im(0.01, 5.0), push(0.0, 3.0);
  auto mu = even_ladder();
  const auto om = OmegaModel::power(0.7, 0.3, 0.0, {1.0, 0.2, 0.4});
  SumOptions opts;
  opts.j_max = 20'000;
  for (int i = 0; i < 50; ++i) {
    const Complex z(re(rng), im(rng));
    const Complex far = z + Complex(0.0, push(rng));  // moving away from the real axis
    CHECK(b_norm_upper(z, mu, om, opts).upper() >= b_norm_upper(far, mu, om, opts).upper());
  }
}

TEST_CASE("cutoff search", "[core][cutoff]") {
  auto mu = even_ladder();
  const auto r = gap_radii(mu, 10);
  CHECK(find_cutoff_N0(mu, r, OmegaModel::zero()).N0 == 1);

  const auto om = OmegaModel::power(1.0, 0.25);
  const auto lo = find_cutoff_N0(mu, r, om, {0.99});
  const auto hi = find_cutoff_N0(mu, r, om, {0.3});
  CHECK(lo.N0 <= hi.N0);

  try {
    find_cutoff_N0(mu, r, OmegaModel::power(1.0, 0.0));
    FAIL("expected NotReached");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotReached);
  }
  CHECK_THROWS_AS(find_cutoff_N0(mu, r, om, {1.5}), Error);
}

TEST_CASE("cutoff matches a brute-force scan", "[core][cutoff][oracle]") {
  auto mu = even_ladder();
  const auto r = gap_radii(mu, 10);
  const auto om = OmegaModel::power(1.0, 0.25);
  const auto cut = find_cutoff_N0(mu, r, om, {0.5});
  const long long J = 1'000'000;
  auto oracle = [&](long long N) { return brute_summand(N, 0.25L, J) + quarter_tail_integral(N, J); };
  // bisection on the oracle itself
  long long lo = 1, hi = 1;
  while (oracle(hi) > 0.5L) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const long long mid = (lo + hi) / 2;
    (oracle(mid) <= 0.5L ? hi : lo) = mid;
  }
  CHECK(cut.N0 == hi);
}

TEST_CASE("enclosure with zero perturbation", "[core][enclosure]") {
  auto mu = even_ladder();
  const auto r = gap_radii(mu, 20);
  const auto rep = build_enclosure(mu, r, OmegaModel::zero());
  CHECK(rep.N0 == 1);
  CHECK(rep.h1 == 1.0);
  CHECK(rep.h2 == 1.0);
  REQUIRE(rep.disks.size() == 19);
  for (const auto& d : rep.disks) {
    CHECK(d.radius_refined == 0.0);
    CHECK(d.refined_status == DiskStatus::Degenerate);
  }
  CHECK(is_disjoint(rep));
}

TEST_CASE("enclosure for an oscillator-type omega", "[core][enclosure]") {
  auto mu = SpectralModel::closed_form([](double k) { return 2.0 * k; }, 2.0, 1.0);
  const auto r = gap_radii(mu, 60);
  const double c = 0.1;
  EnclosureOptions opts;
  opts.epsilon = 0.1;
  const auto rep = build_enclosure(mu, r, OmegaModel::power(c, 1.0 / 12.0), opts);
  CHECK(is_disjoint(rep));
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& d : rep.disks) {
    CHECK(d.radius_halfgap == 1.0);
    CHECK(d.radius_refined == Approx(1.1 * c * c * std::pow(static_cast<double>(d.k), -1.0 / 6.0)));
    CHECK(d.radius_refined < prev);
    prev = d.radius_refined;
  }
  CHECK(rep.box.contains({mu.mu(rep.N0), 0.0}));
  CHECK_FALSE(rep.box.contains({-rep.h1, 0.0}));
}

TEST_CASE("enclosure is shift invariant", "[core][enclosure][property]") {
  auto mu = even_ladder();
  const auto om = OmegaModel::power(0.5, 0.3, 0.0);
  const auto r = gap_radii(mu, 40);
  const auto a = build_enclosure(mu, r, om);
  for (double s : {0.5, 3.0, 17.25}) {
    auto shifted = mu.shifted(s);
    const auto b = build_enclosure(shifted, gap_radii(shifted, 40), om);
    CHECK(b.N0 == a.N0);
    CHECK(b.shift == s);
    CHECK(b.box.right == Approx(a.box.right + s));
    REQUIRE(b.disks.size() == a.disks.size());
    for (std::size_t i = 0; i < a.disks.size(); ++i) {
      CHECK(b.disks[i].center == Approx(a.disks[i].center + s));
      CHECK(b.disks[i].radius_halfgap == a.disks[i].radius_halfgap);
      CHECK(b.disks[i].radius_refined == a.disks[i].radius_refined);
    }
    CHECK(is_disjoint(b));
  }
}

TEST_CASE("disjointness predicate detects overlaps", "[core][enclosure]") {
  EnclosureReport rep;
  rep.box = Box{-1.0, 5.0, 1.0};
  rep.disks = {Disk{2, 6.0, 1.0, 0.0}, Disk{3, 8.0, 1.0, 0.0}};
  CHECK(is_disjoint(rep));  // tangency allowed
  rep.disks[1].center = 7.5;
  CHECK_FALSE(is_disjoint(rep));
}

TEST_CASE("power-law admissibility", "[core][powerlaw]") {
  CHECK(power_law_admissible(0.25, 1.0).admissible);
  CHECK_FALSE(power_law_admissible(0.0, 1.0).admissible);
  CHECK(power_law_admissible(0.0, 2.0).admissible);
  const auto v = power_law_admissible(0.25, 1.0);
  CHECK(v.off_diagonal.exponent == Approx(-0.5));
  CHECK(v.off_diagonal.log_power == 1.0);
  CHECK(v.diagonal.exponent == Approx(-0.5));
  CHECK(v.rate.log_power == 1.0);
  const auto big = power_law_admissible(0.8, 1.0);
  CHECK(big.off_diagonal.exponent == -1.0);
  CHECK(big.diagonal.exponent == Approx(-1.6));
  CHECK(big.rate.exponent == -1.0);
  // log factors are absorbed only for the decision
  CHECK_FALSE(power_law_admissible(0.005, 1.0, 0.5).admissible);
  CHECK(power_law_admissible(0.005, 1.0, 0.0).admissible);
}

TEST_CASE("diagonal term decays with the negative exponent", "[core][powerlaw][oracle]") {
  // omega_n^2 / r_n with omega_n = n^-a and r_n ~ n^(gamma-1)
  for (double a : {0.1, 0.25, 0.4}) {
    for (double g : {1.0, 2.0}) {
      const auto v = power_law_admissible(a, g);
      const double n1 = 1e3, n2 = 1e5;
      const double slope = (std::log(std::pow(n2, -2 * a) / std::pow(n2, g - 1)) -
                            std::log(std::pow(n1, -2 * a) / std::pow(n1, g - 1))) /
                           (std::log(n2) - std::log(n1));
      CHECK(slope == Approx(v.diagonal.exponent));
      CHECK(slope < 0.0);
    }
  }
}
