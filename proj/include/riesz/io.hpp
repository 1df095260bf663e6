#pragma once

// JSON and CSV rendering of module results, plus staged writes into an output directory.

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "riesz/model_catalog.hpp"
#include "riesz/operator_lab.hpp"
#include "riesz/projection_norms.hpp"
#include "riesz/riesz_core.hpp"

namespace riesz::io {

using json = nlohmann::ordered_json;

/// Shortest round-trip text for a double; non-finite values become inf, -inf, nan.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/// JSON has no infinity.
inline json num(double x) {
  if (std::isfinite(x)) return x;
  return fmt(x);
}

inline json cnum(std::complex<double> z) { return json::array({num(z.real()), num(z.imag())}); }

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// results

inline json to_json(const core::SigmaEstimate& s) {
  return {{"N", s.N}, {"value", num(s.value)}, {"remainder", num(s.remainder)}, {"upper", num(s.upper())},
          {"diverged", s.diverged}, {"n_sup", s.n_sup}, {"argmax", s.argmax}};
}

inline json to_json(const core::Disk& d) {
  return {{"k", d.k}, {"center", num(d.center)}, {"radius_halfgap", num(d.radius_halfgap)},
          {"radius_refined", num(d.radius_refined)}, {"refined_status", core::to_string(d.refined_status)}};
}

inline json to_json(const core::EnclosureReport& r) {
  json disks = json::array();
  for (const auto& d : r.disks) disks.push_back(to_json(d));
  json j = {{"N0", r.N0}, {"h1", num(r.h1)}, {"h2", num(r.h2)}, {"epsilon", num(r.epsilon)},
            {"threshold", num(r.threshold)}, {"shift", num(r.shift)},
            {"box", {{"left", num(r.box.left)}, {"right", num(r.box.right)}, {"half_height", num(r.box.half_height)}}},
            {"disks", disks}};
  j["sigma_at_N0"] = r.sigma_at_N0 ? to_json(*r.sigma_at_N0) : json(nullptr);
  j["notes"] = r.notes;
  return j;
}

inline json to_json(const lab::OperatorEnclosure& e) {
  json j = {{"report", to_json(e.report)}, {"n0_source", e.n0_source}, {"sigma_status", e.sigma_status},
            {"K_trust", e.K_trust}, {"edge_bnorm", num(e.edge_bnorm)}};
  json om = json::array();
  for (double w : e.omega) om.push_back(num(w));
  j["omega_surrogate"] = om;
  return j;
}

template <class T>
json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>)
    return num(*v);
  else
    return *v;
}

inline json to_json(const lab::LevelCheck& l) {
  return {{"k", l.k},
          {"count", l.count},
          {"expected_mult", l.expected_mult},
          {"refined_count", l.refined_count},
          {"refined_status", l.refined_status},
          {"rank_Pk", opt(l.rank_Pk)},
          {"idempotency_defect", opt(l.idempotency_defect)},
          {"sv_below_half", opt(l.sv_below_half)},
          {"sv_above_half", opt(l.sv_above_half)},
          {"hermitian_defect", opt(l.hermitian_defect)}};
}

inline json to_json(const lab::LocalizationReport& r) {
  json v = json::array();
  for (const auto& z : r.violations) v.push_back(cnum(z));
  json lv = json::array();
  for (const auto& l : r.levels) lv.push_back(to_json(l));
  return {{"N0", r.N0},
          {"K_trust", r.K_trust},
          {"trust_re", num(r.trust_re)},
          {"total", r.total},
          {"trusted", r.trusted},
          {"in_box", r.in_box},
          {"untrusted", r.untrusted},
          {"violations", v},
          {"refined_outside", r.refined_outside},
          {"empty_box", r.empty_box},
          {"counts_match", r.counts_match()},
          {"rank_S0", opt(r.rank_S0)},
          {"rank_total", opt(r.rank_total)},
          {"disjointness_defect", opt(r.disjointness_defect)},
          {"levels", lv}};
}

inline json to_json(const norms::SlopeFit& f) {
  json j = {{"family", norms::to_string(f.family)},
            {"d", f.d},
            {"p", num(f.p)},
            {"alpha_hat", num(f.alpha_hat)},
            {"stderr", num(f.stderr_)},
            {"intercept", num(f.intercept)},
            {"k_lo", f.k_lo},
            {"k_hi", f.k_hi},
            {"reference_rho", opt(f.reference_rho)},
            {"reference_branch", f.reference_branch},
            {"saturating", f.saturating},
            {"tol", num(f.tol)},
            {"pass", opt(f.pass)},
            {"note", f.note}};
  return j;
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  /// Payload without the timestamp line.
  std::string body() const {
    std::string s;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ',';
        s += cells[i];
      }
      s += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return s;
  }

  std::string render(const std::string& stamp) const { return "# generated " + stamp + "\n" + body(); }
};

/// Drops a leading "# generated" line.
inline std::string strip_stamp(const std::string& csv) {
  if (csv.rfind("# generated", 0) != 0) return csv;
  const auto nl = csv.find('\n');
  return nl == std::string::npos ? std::string() : csv.substr(nl + 1);
}

// ---------------------------------------------------------------------------
// output directory

/// Exclusive lock on an output directory, held for the lifetime of the object.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir) : path_(dir / ".riesz.lock") {
    std::filesystem::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) throw std::runtime_error("output directory is locked by another run: " + path_.string());
    const std::string pid = std::to_string(::getpid()) + "\n";
    if (::write(fd_, pid.data(), pid.size()) < 0) { /* best effort */ }
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ec;
      std::filesystem::remove(path_, ec);
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

/// Files collected in memory and written only when the whole run succeeded.
class Staging {
 public:
  void put(const std::string& name, std::string content) { files_[name] = std::move(content); }
  const std::map<std::string, std::string>& files() const { return files_; }

  /// Temp file per entry, then rename into place.
  void commit(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> moves;
    for (const auto& [name, content] : files_) {
      const auto final_path = dir / name;
      const auto tmp = dir / ("." + name + ".tmp");
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      os << content;
      os.close();
      if (!os) throw std::runtime_error("cannot write " + tmp.string());
      moves.emplace_back(tmp, final_path);
    }
    for (const auto& [tmp, fin] : moves) std::filesystem::rename(tmp, fin);
  }

 private:
  std::map<std::string, std::string> files_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace riesz::io
