#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "riesz/operator_lab.hpp"

using namespace riesz;
using namespace riesz::lab;
using Catch::Approx;

namespace {

const Complex I(0.0, 1.0);

Index find_basis(const TruncatedOperator& op, long long level, int sector) {
  for (std::size_t i = 0; i < op.basis.size(); ++i)
    if (op.basis[i].level == level && op.basis[i].sector == sector) return static_cast<Index>(i);
  FAIL("basis state not found");
  return -1;
}

TruncatedOperator ho1(int levels, const Potential& p) {
  return perturbation_matrix(catalog::ModelId::make(catalog::ModelKind::HarmonicOscillator, 1, true), p, {levels});
}

TruncatedOperator ho2(int levels, const Potential& p) {
  return perturbation_matrix(catalog::ModelId::make(catalog::ModelKind::HarmonicOscillator, 2), p, {levels});
}

// Random operator: levels mu_k = 2k - 1 with random multiplicities, dense complex V.
TruncatedOperator random_operator(std::mt19937_64& rng, int levels, double scale) {
  std::uniform_int_distribution<int> mult(1, 4);
  std::normal_distribution<double> g;
  std::vector<LevelInfo> lv;
  Index n = 0;
  for (int k = 1; k <= levels; ++k) {
    lv.push_back({k, 2.0 * k - 1.0, mult(rng)});
    n += lv.back().mult;
  }
  MatrixXcd V(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) V(i, j) = scale * Complex(g(rng), g(rng)) / std::sqrt(double(n));
  return TruncatedOperator::from_matrices(lv, V);
}

double rel_frob(const MatrixXcd& a, const MatrixXcd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

// ---------------------------------------------------------------------------
// Assembly

TEST_CASE("constant potential on the 1D oscillator is the identity", "[lab][assembly]") {
  const auto op = ho1(12, Potential::constant(1.0));
  REQUIRE(op.dim() == 12);
  CHECK((op.V - MatrixXcd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("Gaussian matrix entries on the 1D oscillator", "[lab][assembly]") {
  const auto op = ho1(10, Potential::gaussian(1.0, 1.0));
  CHECK(op.V(0, 0).real() == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
  // oracle: adaptive quadrature of h_m h_n e^{-x^2}
  for (auto [m, n] : std::vector<std::pair<int, int>>{{0, 2}, {1, 1}, {3, 5}, {4, 4}, {2, 8}, {9, 9}}) {
    const double ref = quad::integrate_adaptive(
        [&](double x) { return special::hermite_function(m, x) * special::hermite_function(n, x) * std::exp(-x * x); },
        -12.0, 12.0, 1e-14);
    INFO("entry " << m << "," << n);
    CHECK(std::abs(op.V(m, n) - ref) < 1e-12);
    CHECK(std::abs(op.V(n, m) - ref) < 1e-12);
  }
}

TEST_CASE("real potentials give Hermitian matrices", "[lab][assembly]") {
  const auto a = ho2(10, Potential::gaussian(2.0, 0.7, 0.3, -0.2));
  CHECK((a.V - a.V.adjoint()).norm() <= 1e-10 * a.V.norm());
  const auto b = perturbation_matrix(catalog::ModelId::make(catalog::ModelKind::SphereLB, 2),
                                     Potential::gaussian_cap(1.5, 2.0), {8});
  CHECK((b.V - b.V.adjoint()).norm() <= 1e-10 * b.V.norm());
  const auto c = perturbation_matrix(catalog::ModelId::make(catalog::ModelKind::Landau, 2),
                                     Potential::gaussian(1.0, 0.5), {6, 5});
  CHECK((c.V - c.V.adjoint()).norm() <= 1e-10 * c.V.norm());
}

TEST_CASE("dimension and ordering invariants", "[lab][assembly]") {
  const auto op = ho2(9, Potential::gaussian(3.0 * I, 1.0));
  long long total = 0;
  for (const auto& l : op.levels) {
    CHECK(l.mult == l.k);
    total += l.mult;
  }
  CHECK(op.dim() == total);
  for (Index i = 1; i < op.dim(); ++i) CHECK(op.diagA(i) >= op.diagA(i - 1));
  // radial potential: one sector per angular momentum, blocks carry all of V
  CHECK(op.sectors.size() == 17);
  const auto bm = BlockMatrix::from_dense(op.V, op.sectors);
  CHECK((bm.dense() - op.V).norm() <= 1e-12 * op.V.norm());
}

TEST_CASE("rotated basis reproduces the Cartesian spectrum", "[lab][assembly]") {
  // an off-centre Gaussian is assembled in the Cartesian basis; the centred one in
  // L_z sectors; both are unitarily equivalent for the same centred potential
  Potential cart = Potential::custom_plane([](double x, double y) { return 3.0 * I * std::exp(-(x * x + y * y)); }, false);
  const auto a = ho2(8, cart);
  const auto b = ho2(8, Potential::gaussian(3.0 * I, 1.0));
  auto eigs = [](const TruncatedOperator& op) {
    auto v = eigen_decompose(op).all();
    std::sort(v.begin(), v.end(), [](Complex x, Complex y) { return x.real() + 1e-9 * x.imag() < y.real() + 1e-9 * y.imag(); });
    return v;
  };
  const auto sa = eigs(a), sb = eigs(b);
  REQUIRE(sa.size() == sb.size());
  // compare as multisets
  std::vector<bool> used(sb.size(), false);
  for (auto z : sa) {
    double best = 1e300;
    std::size_t bi = 0;
    for (std::size_t j = 0; j < sb.size(); ++j)
      if (!used[j] && std::abs(z - sb[j]) < best) best = std::abs(z - sb[j]), bi = j;
    used[bi] = true;
    CHECK(best < 1e-8);
  }
}

TEST_CASE("delta on the equator of the sphere", "[lab][assembly]") {
  const auto op = perturbation_matrix(catalog::ModelId::make(catalog::ModelKind::SphereDeltaCircle, 2),
                                      Potential::delta_equator(1.0), {6});
  const Index y00 = find_basis(op, 1, 0), y10 = find_basis(op, 2, 0), y11 = find_basis(op, 2, 1);
  CHECK(op.V(y00, y00).real() == Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(op.V(y10, y10)) < 1e-15);
  // |Y_1^1|^2 on the equator integrates to 3/(8 pi) * 2 pi = 3/4
  CHECK(op.V(y11, y11).real() == Approx(0.75).epsilon(1e-13));
  // constant weight couples only equal m
  CHECK(std::abs(op.V(y00, find_basis(op, 3, 2))) < 1e-15);
  CHECK(op.sectors.size() == 11);
}

TEST_CASE("zonal cap potential against direct quadrature", "[lab][assembly]") {
  const auto op = perturbation_matrix(catalog::ModelId::make(catalog::ModelKind::SphereLB, 2),
                                      Potential::gaussian_cap(1.0, 3.0), {7});
  for (auto [l1, l2] : std::vector<std::pair<int, int>>{{0, 0}, {1, 3}, {2, 6}, {5, 5}}) {
    const double ref = quad::integrate_adaptive(
        [&](double x) {
          return special::legendre_normalized(l1, 0, x) * special::legendre_normalized(l2, 0, x) * std::exp(-3.0 * (1.0 - x));
        },
        -1.0, 1.0, 1e-14);
    CHECK(std::abs(op.V(find_basis(op, l1 + 1, 0), find_basis(op, l2 + 1, 0)) - ref) < 1e-12);
  }
}

TEST_CASE("unsupported inputs are rejected", "[lab][assembly]") {
  CHECK_THROWS_MATCHES(perturbation_matrix(catalog::ModelId::make(catalog::ModelKind::Landau, 2),
                                           Potential::gaussian(1.0, 1.0, 0.5, 0.0), {5}),
                       Error, Catch::Matchers::Predicate<Error>([](const Error& e) { return e.kind() == ErrorKind::UnsupportedPotential; }));
  CHECK_THROWS_AS(ho1(1, Potential::constant(1.0)), Error);
  CHECK_THROWS_AS(perturbation_matrix(catalog::ModelId::make(catalog::ModelKind::SphereLB, 2),
                                      Potential::delta_equator(1.0), {5}),
                  Error);
  CHECK_THROWS_AS(perturbation_matrix(catalog::ModelId::make(catalog::ModelKind::HarmonicOscillator, 3),
                                      Potential::constant(1.0), {5}),
                  Error);
}

TEST_CASE("quadrature underflow is reported", "[lab][assembly]") {
  // bump narrower than the node spacing: refinement never settles
  try {
    ho1(10, Potential::gaussian(1.0, 400.0));
    FAIL("expected QuadratureUnderflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::QuadratureUnderflow);
    CHECK(std::string(e.what()).find("entry") != std::string::npos);
  }
}

// ---------------------------------------------------------------------------
// K, B and the resolvent

TEST_CASE("branch of the inverse square root", "[lab][branch]") {
  CHECK(std::abs(inv_sqrt_principal(-1.0) - (-I)) < 1e-15);
  CHECK(std::abs(inv_sqrt_principal(Complex(-1.0, -0.0)) - (-I)) < 1e-15);
  CHECK(std::abs(inv_sqrt_principal(1.0) - 1.0) < 1e-15);
  const auto op = ho1(6, Potential::zero());
  for (long long k = 1; k <= 6; ++k) {
    CHECK(std::abs(k_factor(op.mu(k) + 1.0, op)(k - 1) - 1.0) < 1e-15);
    CHECK(std::abs(k_factor(op.mu(k) - 1.0, op)(k - 1) + I) < 1e-15);
  }
  CHECK_THROWS_AS(k_factor(op.mu(3), op), Error);
}

TEST_CASE("branch-cut sign property on random inputs", "[lab][branch]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const Complex w(u(rng), u(rng));
    const double a = std::arg(w);
    const bool upper = a > 0.0 && a <= std::numbers::pi;
    CHECK((inv_sqrt_principal(w).imag() <= 0.0) == upper);
  }
  // real negative axis with either zero sign
  for (double x : {-0.5, -3.0, -1e6}) {
    CHECK(inv_sqrt_principal(Complex(x, 0.0)).imag() < 0.0);
    CHECK(inv_sqrt_principal(Complex(x, -0.0)).imag() < 0.0);
  }
}

TEST_CASE("K squared is the resolvent of A", "[lab][branch]") {
  const auto op = ho2(6, Potential::zero());
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-20.0, 30.0);
  for (int i = 0; i < 100; ++i) {
    const Complex z(u(rng), u(rng));
    const VectorXcd k = k_factor(z, op);
    for (Index j = 0; j < op.dim(); ++j) CHECK(std::abs(k(j) * k(j) - 1.0 / (z - op.diagA(j))) <= 1e-14 * std::abs(1.0 / (z - op.diagA(j))));
  }
}

TEST_CASE("B for zero and Hermitian perturbations", "[lab][bmatrix]") {
  CHECK(b_matrix({3.0, 1.0}, ho2(5, Potential::zero())).norm() == 0.0);
  const auto op = ho2(7, Potential::gaussian(2.0, 0.5, 0.4, 0.1));
  const double z = op.mu(1) - 1.5;
  const MatrixXcd B = b_matrix(z, op);
  CHECK((B - B.adjoint()).norm() <= 1e-12 * B.norm());
  // K entries are -i/sqrt(mu - z): B = -|K| V |K|
  Eigen::VectorXd absk(op.dim());
  for (Index i = 0; i < op.dim(); ++i) absk(i) = 1.0 / std::sqrt(op.diagA(i) - z);
  const MatrixXcd ref = -(absk.asDiagonal() * op.V * absk.asDiagonal());
  CHECK((B - ref).norm() <= 1e-13 * ref.norm());
}

TEST_CASE("B norm is dominated by the surrogate majorant", "[lab][bmatrix]") {
  const auto op = ho2(10, Potential::gaussian(3.0 * I, 1.0));
  const auto om = surrogate_omega(op);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 40.0);
  for (int i = 0; i < 50; ++i) {
    const Complex z(u(rng), u(rng));
    double maj = 0.0;
    for (long long j = 1; j <= op.num_levels(); ++j) maj += om[j - 1] * om[j - 1] / std::abs(z - op.mu(j));
    const double bn = Eigen::JacobiSVD<MatrixXcd>(b_matrix(z, op)).singularValues()(0);
    CHECK(bn <= maj * (1.0 + 1e-12));
    CHECK(b_norm(z, op) == Approx(bn).epsilon(1e-8));
  }
}

TEST_CASE("resolvent identities", "[lab][resolvent]") {
  const auto zero = ho2(6, Potential::zero());
  const Complex z = zero.mu(1) + 1.0;
  const MatrixXcd R0 = resolvent(z, zero);
  for (Index i = 0; i < zero.dim(); ++i) CHECK(std::abs(R0(i, i) - 1.0 / (z - zero.diagA(i))) < 1e-15);
  CHECK((R0 - MatrixXcd(R0.diagonal().asDiagonal())).norm() == 0.0);

  std::mt19937_64 rng(5);
  std::vector<LevelInfo> lv;
  for (int k = 1; k <= 50; ++k) lv.push_back({k, 2.0 * k - 1.0, 1});
  std::normal_distribution<double> g;
  MatrixXcd V(50, 50);
  for (Index j = 0; j < 50; ++j)
    for (Index i = 0; i < 50; ++i) V(i, j) = Complex(g(rng), g(rng)) * 0.1;
  const auto op = TruncatedOperator::from_matrices(lv, V);
  MatrixXcd T = MatrixXcd(op.diagA.cast<Complex>().asDiagonal()) + op.V;
  std::uniform_real_distribution<double> u(-5.0, 105.0);
  for (int i = 0; i < 10; ++i) {
    const Complex w(u(rng), u(rng) / 10.0);
    const MatrixXcd Rd = resolvent(w, op, ResolventMethod::Direct);
    const MatrixXcd Rf = resolvent(w, op, ResolventMethod::Factorized);
    CHECK(rel_frob(Rf, Rd) <= 1e-9);
    const MatrixXcd id = (w * MatrixXcd::Identity(50, 50) - T) * Rd;
    CHECK((id - MatrixXcd::Identity(50, 50)).cwiseAbs().maxCoeff() <= 1e-10);
  }
  CHECK_THROWS_AS(resolvent(op.mu(3), op, ResolventMethod::Factorized), Error);
}

TEST_CASE("direct and factorized resolvents on random operators", "[lab][resolvent]") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 5; ++t) {
    const auto op = random_operator(rng, 30, 2.0);
    std::uniform_real_distribution<double> u(-3.0, 60.0);
    for (int i = 0; i < 4; ++i) {
      const Complex z(u(rng), u(rng) - 30.0);
      CHECK(rel_frob(resolvent(z, op, ResolventMethod::Factorized), resolvent(z, op)) <= 1e-9);
    }
  }
}

TEST_CASE("block resolvent agrees with the dense one", "[lab][resolvent]") {
  const auto op = ho2(8, Potential::gaussian(3.0 * I, 1.0));
  const Complex z(7.3, 0.4);
  CHECK(rel_frob(resolvent_blocks(z, op).dense(), resolvent(z, op)) <= 1e-12);
  CHECK(rel_frob(resolvent_blocks(z, op, ResolventMethod::Factorized).dense(), resolvent(z, op)) <= 1e-9);
}

// ---------------------------------------------------------------------------
// Projections and verification

TEST_CASE("projections of the unperturbed oscillator are exact", "[lab][projections]") {
  const auto op = ho2(12, Potential::zero());
  const auto enc = build_operator_enclosure(op);
  CHECK(enc.report.N0 == 1);
  CHECK(enc.n0_source == "sigma");
  const auto ps = compute_projections(op, enc.report, ProjectionMethod::Contour);
  CHECK(ps.K_trust == 6);
  for (const auto& [k, P] : ps.P) {
    const auto exact = unperturbed_projection(op, k, k);
    CHECK((P - exact).op_norm() <= 1e-10);
  }
  CHECK((ps.S0 - unperturbed_projection(op, 1, 1)).op_norm() <= 1e-10);

  const auto sd = eigen_decompose(op);
  const auto loc = verify_localization(op, enc.report, sd, &ps);
  CHECK(loc.violations.empty());
  CHECK(loc.counts_match());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  VectorXcd f(op.dim());
  for (Index i = 0; i < f.size(); ++i) f(i) = Complex(g(rng), g(rng));
  CHECK(bari_sum(ps, op, f, 2) <= 1e-10);
  const auto cd = completeness_defect(ps, op, 4, {f});
  CHECK(cd.defect <= 1e-10);
}

TEST_CASE("localization, rank and Riesz-basis checks for a complex Gaussian", "[lab][projections]") {
  const auto op = ho2(24, Potential::gaussian(3.0 * I, 1.0));
  const auto enc = build_operator_enclosure(op);
  const auto sd = eigen_decompose(op);
  const auto pc = compute_projections(op, enc.report, ProjectionMethod::Contour, {}, &sd);
  const auto pe = compute_projections(op, enc.report, ProjectionMethod::Eigen, {}, &sd);
  REQUIRE(pc.K_trust > pc.N0);
  for (const auto& [k, P] : pc.P) {
    INFO("level " << k);
    CHECK((P - pe.at(k)).frobenius() <= 1e-7);
    CHECK((P * P - P).op_norm() <= 1e-8);
  }
  CHECK((pc.S0 - pe.S0).frobenius() <= 1e-7);

  const auto loc = verify_localization(op, enc.report, sd, &pc);
  CHECK(loc.violations.empty());
  for (const auto& lc : loc.levels) {
    INFO("level " << lc.k);
    CHECK(lc.count == lc.k);
    CHECK(*lc.rank_Pk == lc.count);
    CHECK(*lc.sv_below_half < 0.5);
  }
  CHECK(*loc.disjointness_defect <= 1e-8);
  CHECK(*loc.rank_total == loc.trusted);

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    VectorXcd f(op.dim());
    for (Index i = 0; i < f.size(); ++i) f(i) = Complex(g(rng), g(rng));
    f.normalize();
    const double b = bari_sum(pe, op, f, pe.N0 + 1);
    CHECK(b <= 2.0);
    CHECK(bari_sum(pe, op, std::exp(Complex(0.0, 0.7)) * f, pe.N0 + 1) == Approx(b).epsilon(1e-12));
  }
  CHECK_THROWS_AS(bari_sum(pe, op, VectorXcd::Ones(op.dim()), pe.N0), Error);
  CHECK_THROWS_AS(completeness_defect(pe, op, pe.K_trust + 1, {}), Error);
}

TEST_CASE("Hermitian perturbations pass the self-adjoint sanity path", "[lab][projections]") {
  const auto op = ho2(20, Potential::gaussian(2.0, 1.0));
  const auto enc = build_operator_enclosure(op);
  const auto sd = eigen_decompose(op);
  const auto ps = compute_projections(op, enc.report, ProjectionMethod::Eigen, {}, &sd);
  const auto loc = verify_localization(op, enc.report, sd, &ps);
  CHECK(loc.violations.empty());
  for (const auto& lc : loc.levels) CHECK(*lc.hermitian_defect <= 1e-9);
}

TEST_CASE("contour node doubling is stable past 64 nodes", "[lab][projections]") {
  const auto op = ho2(16, Potential::gaussian(3.0 * I, 1.0));
  const auto enc = build_operator_enclosure(op);
  const auto g = raw_geometry(op, enc.report);
  CHECK(node_doubling_change(op, g, 128) <= 1e-10);
}

TEST_CASE("enclosure source selection", "[lab][enclosure]") {
  const auto small = ho2(16, Potential::gaussian(0.05 * I, 1.0));
  const auto e1 = build_operator_enclosure(small);
  CHECK(e1.n0_source == "sigma");
  OperatorEnclosureOptions forced;
  forced.source = N0Source::Matrix;
  const auto e2 = build_operator_enclosure(small, forced);
  CHECK(e2.n0_source == "matrix");
  CHECK(e2.edge_bnorm < 1.0);
  for (long long k = e2.report.N0 + 1; k <= e2.K_trust; ++k) CHECK(e2.circle_bnorm[k - 1] < 1.0);

  const auto big = ho2(16, Potential::gaussian(3.0 * I, 1.0));
  OperatorEnclosureOptions sig;
  sig.source = N0Source::Sigma;
  // sigma_N of a finite-rank surrogate reaches 1/2 only past the trust horizon
  const auto es = build_operator_enclosure(big, sig);
  CHECK(es.n0_source == "sigma");
  CHECK(es.report.N0 >= es.K_trust);
  try {
    compute_projections(big, es.report, ProjectionMethod::Eigen);
    FAIL("expected TrustExhausted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TrustExhausted);
  }
  CHECK(build_operator_enclosure(big).n0_source == "matrix");
}

TEST_CASE("doubling the perturbation never lowers the cutoff", "[lab][enclosure]") {
  for (double a : {0.02, 0.05, 0.1}) {
    const auto op = ho2(12, Potential::gaussian(a * I, 1.0));
    auto om = surrogate_omega(op);
    const auto mu = catalog::spectral_model(op.model);
    const auto r = core::gap_radii(mu, op.num_levels());
    std::vector<double> om2;
    for (double w : om) om2.push_back(std::sqrt(2.0) * w);
    const auto n1 = core::find_cutoff_N0(mu, r, core::OmegaModel::finite(om));
    const auto n2 = core::find_cutoff_N0(mu, r, core::OmegaModel::finite(om2));
    CHECK(n2.N0 >= n1.N0);
    // the surrogate of 2V is sqrt(2) times the surrogate of V
    const auto op2 = ho2(12, Potential::gaussian(2.0 * a * I, 1.0));
    const auto s2 = surrogate_omega(op2);
    for (std::size_t i = 0; i < om.size(); ++i) CHECK(s2[i] == Approx(om2[i]).epsilon(1e-12));
  }
}

TEST_CASE("Landau and sphere pipelines localize", "[lab][projections]") {
  const auto lan = perturbation_matrix(catalog::ModelId::make(catalog::ModelKind::Landau, 2),
                                       Potential::gaussian(2.0 * I, 0.5), {16, 6});
  const auto el = build_operator_enclosure(lan);
  const auto sl = eigen_decompose(lan);
  const auto locl = verify_localization(lan, el.report, sl);
  CHECK(locl.violations.empty());
  for (const auto& lc : locl.levels) CHECK(lc.count == 6);

  const auto sph = perturbation_matrix(catalog::ModelId::make(catalog::ModelKind::SphereDeltaCircle, 2),
                                       Potential::delta_equator(2.0 * I), {16});
  OperatorEnclosureOptions o;
  o.shift = 1.0;
  const auto es = build_operator_enclosure(sph, o);
  const auto ss = eigen_decompose(sph);
  const auto pc = compute_projections(sph, es.report, ProjectionMethod::Contour, {}, &ss);
  const auto pe = compute_projections(sph, es.report, ProjectionMethod::Eigen, {}, &ss);
  for (const auto& [k, P] : pc.P) CHECK((P - pe.at(k)).frobenius() <= 1e-7);
  const auto locs = verify_localization(sph, es.report, ss);
  CHECK(locs.violations.empty());
  for (const auto& lc : locs.levels) CHECK(lc.count == 2 * lc.k - 1);
}
