// Cutoff N0, box and disks for a bounded potential on S^2, omega_k = c k^-alpha from the catalog.
#include <cstdio>

#include "riesz/model_catalog.hpp"
#include "riesz/riesz_core.hpp"

int main() {
  using namespace riesz;
  const auto m = catalog::ModelId::make(catalog::ModelKind::SphereLB, 2);
  const auto r = catalog::LebesgueIndex<double>::infinity();
  const auto e = catalog::omega_model<Rational>(m, catalog::LebesgueIndex<Rational>::infinity());
  std::printf("alpha = %s, admissible = %d\n", e.alpha.str().c_str(), e.admissible);

  const auto mu = catalog::spectral_model(m);
  const auto om = catalog::omega_power_model(m, r, 0.5);
  const auto cut = core::find_cutoff_N0(mu, core::gap_radii(mu, 2), om);
  const auto rep = core::enclosure_for_cutoff(mu, core::gap_radii(mu, cut.N0 + 5), om, cut.N0);
  std::printf("N0 = %lld (sigma %.4g), box (%.3g, %.3g] x [-%.3g, %.3g]\n", rep.N0, cut.sigma.upper(), rep.box.left,
              rep.box.right, rep.h2, rep.h2);
  for (const auto& d : rep.disks)
    std::printf("  k = %lld  center %.3g  half-gap %.3g  refined %.3g (%s)\n", d.k, d.center, d.radius_halfgap,
                d.radius_refined, core::to_string(d.refined_status));
  std::printf("disjoint: %s\n", core::is_disjoint(rep) ? "yes" : "no");
}
