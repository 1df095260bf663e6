#pragma once

// Localization, rank, Bari and completeness checks on a truncated operator.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "riesz/operator_lab/projections.hpp"

namespace riesz::lab {

/// level_assigned codes besides k > N0.
inline constexpr long long kInBox = 0;
inline constexpr long long kViolation = -1;
inline constexpr long long kUntrusted = -2;

struct EigenAssignment {
  Complex lambda;
  long long level = kUntrusted;
  bool in_refined = false;  // inside the refined disk of its level (disks only)
};

struct LevelCheck {
  long long k = 0;
  long long count = 0;          // eigenvalues strictly inside the half-gap disk
  long long expected_mult = 0;  // retained multiplicity of level k
  long long refined_count = 0;
  std::string refined_status;
  // filled when projections are supplied
  std::optional<long long> rank_Pk;
  std::optional<double> idempotency_defect;
  std::optional<double> sv_below_half;  // largest singular value <= 1/2
  std::optional<double> sv_above_half;  // smallest singular value > 1/2
  std::optional<double> hermitian_defect;
};

struct LocalizationReport {
  long long N0 = 1;
  long long K_trust = 0;
  double trust_re = 0.0;
  long long total = 0;
  long long trusted = 0;
  long long in_box = 0;
  long long untrusted = 0;
  std::vector<Complex> violations;
  long long refined_outside = 0;  // trusted disk eigenvalues outside their refined disk (ok/degenerate levels)
  bool empty_box = false;
  std::vector<LevelCheck> levels;
  std::vector<EigenAssignment> assignments;
  std::optional<long long> rank_S0;
  std::optional<double> disjointness_defect;  // max ||P_j P_k||, j != k, including S0
  std::optional<long long> rank_total;        // rank(S0) + sum rank(P_k)

  bool counts_match() const {
    return std::all_of(levels.begin(), levels.end(), [](const LevelCheck& l) { return l.count == l.expected_mult; });
  }
};

namespace detail {

inline long long numeric_rank(const BlockMatrix& P, double* below = nullptr, double* above = nullptr) {
  long long rank = 0;
  double lo = 0.0, hi = 0.0;
  bool hi_set = false;
  for (double s : P.singular_values()) {
    if (s > 0.5) {
      ++rank;
      hi = hi_set ? std::min(hi, s) : s;
      hi_set = true;
    } else {
      lo = std::max(lo, s);
    }
  }
  if (below) *below = lo;
  if (above) *above = hi;
  return rank;
}

inline double hermitian_defect(const BlockMatrix& P) {
  double m = 0.0;
  for (std::size_t s = 0; s < P.num_blocks(); ++s)
    m = std::max(m, BlockMatrix::spectral_norm(P.block(s) - P.block(s).adjoint()));
  return m;
}

}  // namespace detail

/// Classifies every computed eigenvalue. Trusted eigenvalues (Re below the right end of
/// the last trusted disk) land in the box, in a disk N0 < k <= K_trust, or count as violations.
inline LocalizationReport verify_localization(const TruncatedOperator& op, const core::EnclosureReport& rep,
                                              const SpectrumData& spectrum, const ProjectionSet* ps = nullptr,
                                              double trust_fraction = 0.5) {
  const RawGeometry g = raw_geometry(op, rep, trust_fraction);
  LocalizationReport out;
  out.N0 = g.N0;
  out.K_trust = g.K_trust;
  out.trust_re = g.trust_re;
  for (const auto& d : g.disks) {
    LevelCheck lc;
    lc.k = d.k;
    lc.expected_mult = op.levels.at(static_cast<std::size_t>(d.k - 1)).mult;
    lc.refined_status = core::to_string(d.refined_status);
    out.levels.push_back(lc);
  }
  for (const auto& lam : spectrum.all()) {
    EigenAssignment a{lam};
    ++out.total;
    if (!(lam.real() < g.trust_re)) {
      ++out.untrusted;
      out.assignments.push_back(a);
      continue;
    }
    ++out.trusted;
    if (g.box.contains(lam)) {
      a.level = kInBox;
      ++out.in_box;
    } else {
      a.level = kViolation;
      for (std::size_t i = 0; i < g.disks.size(); ++i) {
        const auto& d = g.disks[i];
        if (!d.contains(lam)) continue;
        a.level = d.k;
        auto& lc = out.levels[i];
        ++lc.count;
        if (d.refined_status != core::DiskStatus::ExceedsHalfGap) {
          a.in_refined = std::abs(lam - d.center) <= d.radius_refined;
          if (a.in_refined)
            ++lc.refined_count;
          else
            ++out.refined_outside;
        }
        break;
      }
      if (a.level == kViolation) out.violations.push_back(lam);
    }
    out.assignments.push_back(a);
  }
  out.empty_box = out.in_box == 0;

  if (ps) {
    long long total = 0;
    for (auto& lc : out.levels) {
      const auto& P = ps->at(lc.k);
      double lo = 0.0, hi = 0.0;
      lc.rank_Pk = detail::numeric_rank(P, &lo, &hi);
      lc.sv_below_half = lo;
      lc.sv_above_half = hi;
      lc.idempotency_defect = (P * P - P).op_norm();
      lc.hermitian_defect = detail::hermitian_defect(P);
      total += *lc.rank_Pk;
    }
    out.rank_S0 = detail::numeric_rank(ps->S0);
    out.rank_total = total + *out.rank_S0;
    std::vector<const BlockMatrix*> all{&ps->S0};
    for (const auto& [k, P] : ps->P) all.push_back(&P);
    double worst = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = 0; j < all.size(); ++j)
        if (i != j) worst = std::max(worst, ((*all[i]) * (*all[j])).op_norm());
    out.disjointness_defect = worst;
  }
  return out;
}

/// P_n^0 as a block matrix (0/1 diagonal on level n).
inline BlockMatrix unperturbed_projection(const TruncatedOperator& op, long long k_lo, long long k_hi) {
  return BlockMatrix::diagonal(op.level_indicator(k_lo, k_hi), op.sectors);
}

/// Sum over trusted n >= Nstar of |<(P_n - P_n^0) f, f>|.
inline double bari_sum(const ProjectionSet& ps, const TruncatedOperator& op, const VectorXcd& f, long long Nstar) {
  if (Nstar <= ps.N0) throw Error(ErrorKind::OutOfDomain, "Nstar must exceed N0");
  if (Nstar > ps.K_trust) throw Error(ErrorKind::TrustExhausted, "Nstar beyond the trust horizon");
  if (f.size() != op.dim() || f.norm() == 0.0) throw Error(ErrorKind::OutOfDomain, "f must be a nonzero vector of the operator's dimension");
  double s = 0.0;
  for (long long n = Nstar; n <= ps.K_trust; ++n) {
    VectorXcd v = ps.at(n).apply(f);
    const auto [b, e] = op.level_range(n);
    v.segment(b, e - b) -= f.segment(b, e - b);
    s += std::abs(f.dot(v));  // <v, f> = f^H v
  }
  return s;
}

struct CompletenessDefect {
  long long n = 0;
  double defect = 0.0;        // ||S_n^0 - S_n||_2
  double max_residual = 0.0;  // max over probes of ||S_n f - f||
};

/// S_n = S_0 + sum_{N0 < k <= n} P_k against the diagonal projection onto levels <= n.
inline CompletenessDefect completeness_defect(const ProjectionSet& ps, const TruncatedOperator& op, long long n,
                                              const std::vector<VectorXcd>& probes) {
  if (n > ps.K_trust) throw Error(ErrorKind::TrustExhausted, "n beyond the trust horizon");
  if (n < ps.N0) throw Error(ErrorKind::OutOfDomain, "n must be >= N0");
  BlockMatrix S = ps.S0;
  for (long long k = ps.N0 + 1; k <= n; ++k) S += ps.at(k);
  CompletenessDefect cd;
  cd.n = n;
  cd.defect = (unperturbed_projection(op, 1, n) - S).op_norm();
  for (const auto& f : probes) cd.max_residual = std::max(cd.max_residual, (S.apply(f) - f).norm());
  return cd;
}

}  // namespace riesz::lab
