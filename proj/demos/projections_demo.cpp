// Truncated planar oscillator with a complex Gaussian: localization and per-level ranks.
#include <cstdio>

#include "riesz/operator_lab.hpp"

int main() {
  using namespace riesz;
  const auto model = catalog::ModelId::make(catalog::ModelKind::HarmonicOscillator, 2);
  const auto op = lab::perturbation_matrix(model, lab::Potential::gaussian({0.0, 3.0}, 1.0), {24});
  const auto enc = lab::build_operator_enclosure(op);
  const auto sd = lab::eigen_decompose(op);
  const auto ps = lab::compute_projections(op, enc.report, lab::ProjectionMethod::Contour, {}, &sd);
  const auto loc = lab::verify_localization(op, enc.report, sd, &ps);

  std::printf("dim %lld, N0 %lld (%s), K_trust %lld\n", static_cast<long long>(op.dim()), loc.N0,
              enc.n0_source.c_str(), loc.K_trust);
  std::printf("trusted %lld, in box %lld, violations %zu\n", loc.trusted, loc.in_box, loc.violations.size());
  for (const auto& l : loc.levels)
    std::printf("  k = %2lld  eigenvalues %2lld  rank P_k %2lld  ||P^2 - P|| %.1e\n", l.k, l.count, *l.rank_Pk,
                *l.idempotency_defect);
}
