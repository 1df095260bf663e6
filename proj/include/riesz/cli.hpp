#pragma once

// run(subcommand, config, overrides): resolve, validate, compute, then commit artifacts.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "riesz/pipeline.hpp"

namespace riesz::cli {

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"check-conditions", "localize", "simulate", "project-norms", "report"};
  return s;
}

struct Invocation {
  std::string subcommand;
  std::string config_path;  // empty: defaults only
  std::vector<std::string> overrides;
  std::string out_dir;  // empty: output.directory, then RIESZ_OUTPUT_DIR, then ./riesz_out
};

inline std::filesystem::path output_dir(const Invocation& inv, const RunConfig& c) {
  if (!inv.out_dir.empty()) return inv.out_dir;
  if (!c.directory.empty()) return c.directory;
  if (const char* env = std::getenv("RIESZ_OUTPUT_DIR"); env && *env) return env;
  return "riesz_out";
}

namespace detail {

inline void print_summary(std::ostream& os, const std::string& prefix, const json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      print_summary(os, prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
  } else if (j.is_array() && !j.empty() && j[0].is_object()) {
    for (std::size_t i = 0; i < j.size(); ++i) print_summary(os, prefix + "[" + std::to_string(i) + "]", j[i]);
  } else {
    os << prefix << " = " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

inline int fail(std::ostream& err, const std::filesystem::path* dir, const std::string& sub, int code,
                const std::string& kind, const std::string& message, const std::string& path = "") {
  json rec = {{"error", kind}, {"message", message}, {"subcommand", sub}, {"exit_code", code}};
  if (!path.empty()) rec["path"] = path;
  err << rec.dump() << "\n";
  if (dir) {
    try {
      io::Staging s;
      s.put("error.json", rec.dump(2) + "\n");
      s.commit(*dir);
    } catch (const std::exception&) {
      // the record on stderr is enough
    }
  }
  return code;
}

}  // namespace detail

/// Exit codes: 0 ok, 2 config error, 3 computation error, 4 verification findings.
inline int run(const Invocation& inv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), inv.subcommand) == subs.end())
    return detail::fail(err, nullptr, inv.subcommand, kExitConfig, "ConfigError", "unknown subcommand", "<subcommand>");

  json resolved;
  RunConfig cfg;
  try {
    const json file = inv.config_path.empty() ? json::object() : load_config_file(inv.config_path);
    resolved = resolve_config(file, inv.overrides);
    cfg = parse_run_config(resolved);
  } catch (const ConfigError& e) {
    return detail::fail(err, nullptr, inv.subcommand, kExitConfig, "ConfigError", e.what(), e.path());
  } catch (const Error& e) {
    return detail::fail(err, nullptr, inv.subcommand, kExitConfig, "ConfigError", e.what());
  } catch (const std::exception& e) {
    return detail::fail(err, nullptr, inv.subcommand, kExitConfig, "ConfigError", e.what());
  }

  const auto dir = output_dir(inv, cfg);
  std::unique_ptr<io::DirLock> lock;
  try {
    lock = std::make_unique<io::DirLock>(dir);
  } catch (const std::exception& e) {
    return detail::fail(err, nullptr, inv.subcommand, kExitComputation, "Locked", e.what());
  }

  RunResult res;
  try {
    const std::string stamp = io::utc_timestamp();
    if (inv.subcommand == "check-conditions")
      res = check_conditions(cfg, resolved, stamp);
    else if (inv.subcommand == "localize")
      res = localize(cfg, resolved, stamp);
    else if (inv.subcommand == "simulate")
      res = simulate(cfg, resolved, stamp);
    else if (inv.subcommand == "project-norms")
      res = project_norms(cfg, resolved, stamp);
    else
      res = report(cfg, resolved, dir);
    std::error_code ec;
    std::filesystem::remove(dir / "error.json", ec);
    res.files.commit(dir);
  } catch (const Error& e) {
    return detail::fail(err, &dir, inv.subcommand, kExitComputation, std::string(to_string(e.kind())), e.what());
  } catch (const std::exception& e) {
    return detail::fail(err, &dir, inv.subcommand, kExitComputation, "Exception", e.what());
  }

  out << inv.subcommand << " -> " << dir.string() << "\n";
  detail::print_summary(out, "", res.summary);
  for (const auto& [name, _] : res.files.files()) out << "wrote " << (dir / name).string() << "\n";
  return res.exit_code;
}

}  // namespace riesz::cli
