// Growth of L^p norms of zonal and highest-weight harmonics on S^2.
#include <cstdio>

#include "riesz/projection_norms.hpp"

int main() {
  using namespace riesz::norms;
  for (auto f : {Family::ZonalHarmonic, Family::HighestWeight}) {
    const WitnessFamily w{f, 2};
    for (double p : {2.0, 4.0, 6.0, kInf}) {
      const auto fit = fit_slope(w, p, 10, 120, 10);
      std::printf("%-15s p = %-4g slope %+.4f  catalog %+.4f  (%s)\n", to_string(f), p, fit.alpha_hat,
                  fit.reference_rho.value_or(0.0), fit.saturating ? "saturating" : "lower bound");
    }
  }
}
