#pragma once

// Subcommand bodies. Each returns staged artifacts and a short summary; nothing touches disk here.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "riesz/config.hpp"

namespace riesz::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitComputation = 3;
inline constexpr int kExitViolations = 4;

struct RunResult {
  io::Staging files;
  json summary = json::object();
  int exit_code = kExitOk;
};

namespace detail {

inline json header(const std::string& subcommand, const json& resolved, const RunConfig& c) {
  return {{"subcommand", subcommand}, {"seed", c.seed}, {"config", resolved}};
}

inline void put_json(RunResult& out, const RunConfig& c, const std::string& name, const json& doc) {
  if (c.want_json) out.files.put(name, doc.dump(2) + "\n");
}

inline void put_csv(RunResult& out, const RunConfig& c, const std::string& name, const io::CsvTable& t,
                    const std::string& stamp) {
  if (c.want_csv) out.files.put(name, t.render(stamp));
}

inline void add_circle(io::CsvTable& t, const std::string& shape, long long k, double center, double radius, int n = 96) {
  for (int j = 0; j <= n; ++j) {
    const double th = 2.0 * std::numbers::pi * j / n;
    t.add({shape, std::to_string(k), io::fmt(center + radius * std::cos(th)), io::fmt(radius * std::sin(th))});
  }
}

/// Box and disks as closed polylines: shape, k, re, im.
inline io::CsvTable geometry_table(const core::Box& box, const std::vector<core::Disk>& disks) {
  io::CsvTable t;
  t.header = {"shape", "k", "re", "im"};
  const double xs[] = {box.left, box.right, box.right, box.left, box.left};
  const double ys[] = {-box.half_height, -box.half_height, box.half_height, box.half_height, -box.half_height};
  for (int i = 0; i < 5; ++i) t.add({"box", "0", io::fmt(xs[i]), io::fmt(ys[i])});
  for (const auto& d : disks) {
    add_circle(t, "halfgap", d.k, d.center, d.radius_halfgap);
    if (d.radius_refined > 0.0) add_circle(t, "refined", d.k, d.center, d.radius_refined);
  }
  return t;
}

inline core::OmegaModel omega_for(const RunConfig& c) {
  if (c.omega_c == 0.0) return core::OmegaModel::zero();
  const auto inv = catalog::LebesgueIndex<double>::from_inverse(c.r.inverse().to_double());
  return catalog::omega_power_model(c.model, inv, c.omega_c);
}

inline VectorXcd random_unit(std::mt19937_64& rng, Index dim, Index begin, Index end) {
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXcd f = VectorXcd::Zero(dim);
  for (Index i = begin; i < end; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    f(i) = {re, im};
  }
  return f / f.norm();
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline RunResult check_conditions(const RunConfig& c, const json& resolved, const std::string& stamp) {
  RunResult out;
  const auto e = catalog::omega_model<Rational>(c.model, c.r);
  const auto rho = catalog::rho_exponent<Rational>(c.model, c.r.inv_p());
  const auto range = catalog::admissible_range(c.model);

  json doc = detail::header("check-conditions", resolved, c);
  json s = {{"model", catalog::to_string(c.model.kind)},
            {"d", c.model.d},
            {"r", c.r_text},
            {"inv_p", c.r.inv_p().str()},
            {"rho", rho.value.str()},
            {"rho_branch", rho.branch},
            {"regime", e.regime},
            {"alpha", e.alpha.str()},
            {"log_beta", e.log_beta.str()},
            {"admissible", e.admissible},
            {"admissible_range", range.str()},
            {"r_in_range", range.contains(c.r)}};
  doc["summary"] = s;

  io::CsvTable t;
  t.header = {"N", "value", "remainder", "upper", "diverged"};
  json table = json::array();
  if (!c.sigma_N.empty()) {
    const auto mu = catalog::spectral_model(c.model, c.resolved_shift());
    long long nmax = 2;
    for (long long n : c.sigma_N) nmax = std::max(nmax, n);
    const auto gaps = core::gap_radii(mu, nmax);
    const auto om = detail::omega_for(c);
    for (long long n : c.sigma_N) {
      try {
        const auto est = core::sigma_tail(mu, gaps, om, n, c.enclosure.sums);
        table.push_back(io::to_json(est));
        t.add({std::to_string(n), io::fmt(est.value), io::fmt(est.remainder), io::fmt(est.upper()),
               est.diverged ? "true" : "false"});
      } catch (const Error& err) {
        table.push_back({{"N", n}, {"error", err.what()}});
        t.add({std::to_string(n), "nan", "nan", "nan", "error"});
      }
    }
  }
  doc["sigma_table"] = table;
  out.summary = s;
  detail::put_json(out, c, "check_conditions.json", doc);
  detail::put_csv(out, c, "sigma_table.csv", t, stamp);
  return out;
}

// ---------------------------------------------------------------------------

inline RunResult localize(const RunConfig& c, const json& resolved, const std::string& stamp) {
  RunResult out;
  const auto mu = catalog::spectral_model(c.model, c.resolved_shift());
  const auto om = detail::omega_for(c);
  const auto cut = core::find_cutoff_N0(mu, core::gap_radii(mu, 2), om,
                                        core::CutoffOptions{c.enclosure.threshold, c.enclosure.n_cap, c.enclosure.sums});
  const auto gaps = core::gap_radii(mu, cut.N0 + c.disks);
  auto rep = core::enclosure_for_cutoff(mu, gaps, om, cut.N0, c.enclosure);
  rep.sigma_at_N0 = cut.sigma;

  long long degenerate = 0, exceeds = 0;
  for (const auto& d : rep.disks) {
    degenerate += d.refined_status == core::DiskStatus::Degenerate;
    exceeds += d.refined_status == core::DiskStatus::ExceedsHalfGap;
  }
  json doc = detail::header("localize", resolved, c);
  doc["enclosure"] = io::to_json(rep);
  doc["disjoint"] = core::is_disjoint(rep);
  out.summary = {{"N0", rep.N0},         {"h1", io::num(rep.h1)},     {"h2", io::num(rep.h2)},
                 {"disks", rep.disks.size()}, {"degenerate_disks", degenerate}, {"exceeds_halfgap_disks", exceeds},
                 {"disjoint", core::is_disjoint(rep)}};
  doc["summary"] = out.summary;
  detail::put_json(out, c, "enclosure.json", doc);
  detail::put_csv(out, c, "enclosure_geometry.csv", detail::geometry_table(rep.box, rep.disks), stamp);
  return out;
}

// ---------------------------------------------------------------------------

struct SimulationData {
  lab::TruncatedOperator op;
  lab::OperatorEnclosure enclosure;
  lab::SpectrumData spectrum;
  lab::ProjectionSet projections;  // contour when crosscheck is on, eigen otherwise
  std::optional<double> method_difference;  // max Frobenius distance contour vs eigen
  lab::LocalizationReport localization;
  long long nstar = 0;
  std::vector<double> bari;
  std::vector<lab::CompletenessDefect> completeness;
};

inline SimulationData run_simulation(const RunConfig& c) {
  SimulationData s;
  s.op = lab::perturbation_matrix(c.model, c.make_potential(), c.truncation);
  lab::OperatorEnclosureOptions eo;
  eo.enclosure = c.enclosure;
  eo.source = c.n0_source;
  eo.shift = c.resolved_shift();
  eo.trust_fraction = c.trust_fraction;
  s.enclosure = lab::build_operator_enclosure(s.op, eo);
  s.spectrum = lab::eigen_decompose(s.op);
  const auto& rep = s.enclosure.report;
  auto eig = lab::compute_projections(s.op, rep, lab::ProjectionMethod::Eigen, c.contour, &s.spectrum, c.trust_fraction);
  if (c.crosscheck) {
    s.projections =
        lab::compute_projections(s.op, rep, lab::ProjectionMethod::Contour, c.contour, &s.spectrum, c.trust_fraction);
    double worst = (s.projections.S0 - eig.S0).frobenius();
    for (const auto& [k, P] : s.projections.P) worst = std::max(worst, (P - eig.at(k)).frobenius());
    s.method_difference = worst;
  } else {
    s.projections = std::move(eig);
  }
  s.localization = lab::verify_localization(s.op, rep, s.spectrum, &s.projections, c.trust_fraction);

  const auto& ps = s.projections;
  std::mt19937_64 rng(c.seed);
  s.nstar = c.nstar > 0 ? c.nstar : ps.N0 + 1;
  if (s.nstar <= ps.K_trust) {
    for (int i = 0; i < c.bari_samples; ++i)
      s.bari.push_back(lab::bari_sum(ps, s.op, detail::random_unit(rng, s.op.dim(), 0, s.op.dim()), s.nstar));
  }
  std::vector<VectorXcd> probes;
  const Index probe_end = s.op.level_range(std::min<long long>(c.probe_levels, s.op.num_levels())).second;
  for (int i = 0; i < c.probes; ++i) probes.push_back(detail::random_unit(rng, s.op.dim(), 0, probe_end));
  for (long long n = ps.N0 + 1; n <= ps.K_trust; ++n) s.completeness.push_back(lab::completeness_defect(ps, s.op, n, probes));
  return s;
}

/// Localization violations plus levels whose disk count differs from the retained multiplicity.
inline long long finding_count(const lab::LocalizationReport& r) {
  long long n = static_cast<long long>(r.violations.size());
  for (const auto& l : r.levels) n += l.count != l.expected_mult;
  return n;
}

inline RunResult simulate(const RunConfig& c, const json& resolved, const std::string& stamp) {
  RunResult out;
  const SimulationData s = run_simulation(c);
  const auto& loc = s.localization;
  const auto& ps = s.projections;

  double bari_max = 0.0, bari_mean = 0.0;
  for (double b : s.bari) {
    bari_max = std::max(bari_max, b);
    bari_mean += b / static_cast<double>(s.bari.size());
  }
  json comp = json::array();
  for (const auto& cd : s.completeness)
    comp.push_back({{"n", cd.n}, {"defect", io::num(cd.defect)}, {"max_residual", io::num(cd.max_residual)}});
  double idem = 0.0;
  for (const auto& l : loc.levels) idem = std::max(idem, l.idempotency_defect.value_or(0.0));
  const long long findings = finding_count(loc);

  json doc = detail::header("simulate", resolved, c);
  doc["model"] = {{"kind", catalog::to_string(s.op.model.kind)}, {"d", s.op.model.d}, {"potential", s.op.potential}};
  doc["truncation"] = {{"levels", s.op.num_levels()}, {"dim", s.op.dim()}, {"sectors", s.op.sectors.size()},
                       {"quadrature", {{"family", s.op.quad.family}, {"nodes", s.op.quad.nodes}, {"nodes_aux", s.op.quad.nodes_aux}}}};
  doc["enclosure"] = io::to_json(s.enclosure);
  doc["N0"] = loc.N0;
  doc["K_trust"] = loc.K_trust;
  doc["localization"] = io::to_json(loc);
  doc["violations"] = doc["localization"]["violations"];
  doc["levels"] = doc["localization"]["levels"];
  doc["projections"] = {{"method", ps.method == lab::ProjectionMethod::Contour ? "contour" : "eigen"},
                        {"circle_nodes", ps.circle_nodes},
                        {"box_nodes", ps.box_nodes},
                        {"box_refine_change", io::num(ps.box_refine_change)},
                        {"contour_vs_eigen_frobenius", io::opt(s.method_difference)},
                        {"max_eigenvector_condition", io::num(s.spectrum.max_condition)}};
  doc["bari"] = {{"Nstar", s.nstar}, {"samples", s.bari.size()}, {"max", io::num(bari_max)}, {"mean", io::num(bari_mean)}};
  doc["bari_max"] = io::num(bari_max);
  doc["completeness"] = comp;
  out.summary = {{"N0", loc.N0},
                 {"K_trust", loc.K_trust},
                 {"trusted", loc.trusted},
                 {"in_box", loc.in_box},
                 {"violations", loc.violations.size()},
                 {"counts_match", loc.counts_match()},
                 {"findings", findings},
                 {"rank_total", io::opt(loc.rank_total)},
                 {"max_idempotency_defect", io::num(idem)},
                 {"contour_vs_eigen", io::opt(s.method_difference)},
                 {"bari_max", io::num(bari_max)}};
  doc["summary"] = out.summary;

  io::CsvTable ev;
  ev.header = {"re", "im", "level_assigned"};
  for (const auto& a : loc.assignments) ev.add({io::fmt(a.lambda.real()), io::fmt(a.lambda.imag()), std::to_string(a.level)});
  io::CsvTable cp;
  cp.header = {"n", "defect", "max_residual"};
  for (const auto& cd : s.completeness) cp.add({std::to_string(cd.n), io::fmt(cd.defect), io::fmt(cd.max_residual)});

  detail::put_json(out, c, "simulate_report.json", doc);
  detail::put_csv(out, c, "eigenvalues.csv", ev, stamp);
  detail::put_csv(out, c, "geometry.csv", detail::geometry_table(ps.geometry.box, ps.geometry.disks), stamp);
  detail::put_csv(out, c, "completeness.csv", cp, stamp);
  out.exit_code = findings > 0 ? kExitViolations : kExitOk;
  return out;
}

// ---------------------------------------------------------------------------

inline RunResult project_norms(const RunConfig& c, const json& resolved, const std::string& stamp) {
  RunResult out;
  io::CsvTable t;
  t.header = {"k", "p", "norm", "family"};
  json fits = json::array();
  json brief = json::array();
  for (const auto& name : c.families) {
    const norms::WitnessFamily w{norms::family_from_string(name), c.norms_d};
    for (double p : c.p_values) {
      const auto f = norms::fit_slope(w, p, c.k_lo, c.k_hi, c.points, c.tol);
      fits.push_back(io::to_json(f));
      brief.push_back({{"family", name}, {"p", io::num(p)}, {"alpha_hat", io::num(f.alpha_hat)}, {"pass", io::opt(f.pass)}});
      for (std::size_t i = 0; i < f.ks.size(); ++i)
        t.add({std::to_string(f.ks[i]), io::fmt(p), io::fmt(f.values[i]), name});
    }
  }
  json doc = detail::header("project-norms", resolved, c);
  doc["fits"] = fits;
  out.summary = {{"fits", brief}};
  doc["summary"] = out.summary;
  detail::put_json(out, c, "slope_fits.json", doc);
  detail::put_csv(out, c, "norms.csv", t, stamp);
  return out;
}

// ---------------------------------------------------------------------------

/// Merges every report JSON found in dir into summary.json.
inline RunResult report(const RunConfig& c, const json& resolved, const std::filesystem::path& dir) {
  RunResult out;
  json merged = detail::header("report", resolved, c);
  json reports = json::object();
  std::vector<std::filesystem::path> found;
  if (std::filesystem::is_directory(dir))
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.path().extension() == ".json" && e.path().filename() != "summary.json" && e.path().filename() != "error.json")
        found.push_back(e.path());
  std::sort(found.begin(), found.end());
  json index = json::array();
  for (const auto& p : found) {
    json doc = json::parse(io::read_file(p), nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorKind::OutOfDomain, "unreadable report " + p.string());
    const std::string name = p.filename().string();
    index.push_back({{"file", name}, {"subcommand", doc.value("subcommand", "")}, {"seed", doc.value("seed", json(nullptr))},
                     {"summary", doc.value("summary", json(nullptr))}});
    reports[name] = doc;
  }
  if (found.empty()) throw Error(ErrorKind::OutOfDomain, "no reports to merge in " + dir.string());
  merged["index"] = index;
  merged["reports"] = reports;
  out.summary = {{"merged", found.size()}};
  merged["summary"] = out.summary;
  out.files.put("summary.json", merged.dump(2) + "\n");
  return out;
}

}  // namespace riesz::cli
