#include <vflab/common.hpp>
#include <vflab/scenarios.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

namespace sn = vflab::scenarios;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitBreakdown = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw vflab::config_error("config: cannot read file '" + path + "'");
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw vflab::config_error("out: cannot write file '" + path + "'");
  out << text;
}

std::string apply_overrides(const std::string& config_text, bool has_seed, long seed,
                            bool has_jobs, long jobs) {
  if (!has_seed && !has_jobs) return config_text;
  nlohmann::json j =
      config_text.empty() ? nlohmann::json::object()
                          : nlohmann::json::parse(config_text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw vflab::config_error("config: not a JSON object");
  if (has_seed) j["seed"] = seed;
  if (has_jobs) j["jobs"] = jobs;
  return j.dump();
}

int run_one(const std::string& scenario, const std::string& config_text,
            const std::string& out_path, const std::string& csv_path) {
  const sn::Report report = sn::run(scenario, config_text);
  const std::string doc = sn::to_json(report, true);
  if (out_path.empty()) {
    std::cout << doc;
  } else {
    write_file(out_path, doc);
    int passed = 0;
    for (const auto& c : report.checks) passed += c.pass ? 1 : 0;
    std::cout << scenario << ": " << passed << "/" << report.checks.size()
              << " checks passed, report written to " << out_path << "\n";
  }
  if (!csv_path.empty()) write_file(csv_path, sn::to_csv(report));
  return report.all_pass() ? kExitPass : kExitCheckFailed;
}

int run_all(bool has_jobs, long jobs) {
  bool all_pass = true;
  for (const auto& info : sn::catalog()) {
    const std::string cfg = apply_overrides("", false, 0, has_jobs, jobs);
    const sn::Report report = sn::run(info.name, cfg);
    int passed = 0;
    for (const auto& c : report.checks) passed += c.pass ? 1 : 0;
    std::printf("%-22s %3d/%-3zu checks  %7.2fs  %s\n", info.name.c_str(), passed,
                report.checks.size(), report.seconds,
                report.all_pass() ? "ok" : "FAIL");
    for (const auto& c : report.checks)
      if (!c.pass)
        std::printf("    FAIL %s: computed (%.6g, %.6g) expected (%.6g, %.6g) tol %.3g\n",
                    c.name.c_str(), c.computed.real(), c.computed.imag(),
                    c.expected.real(), c.expected.imag(), c.tolerance);
    std::fflush(stdout);
    all_pass = all_pass && report.all_pass();
  }
  return all_pass ? kExitPass : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vflab scenario runner"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run one scenario and emit its report");
  std::string scenario, config_path, out_path, csv_path;
  long seed = 0, jobs = 0;
  run_cmd->add_option("scenario", scenario, "Scenario name (see `lab list`)")->required();
  run_cmd->add_option("--config", config_path, "JSON configuration file");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the seed");
  auto* jobs_opt = run_cmd->add_option("--jobs", jobs, "Cap worker count (0 = hardware)");
  run_cmd->add_option("--out", out_path, "Write the JSON report to this path");
  run_cmd->add_option("--csv", csv_path, "Also write the flat table export to this path");

  auto* list_cmd = app.add_subcommand("list", "List the scenario catalog");

  auto* check_cmd = app.add_subcommand("check", "Run the acceptance suite");
  bool check_all = false;
  long check_jobs = 0;
  check_cmd->add_flag("--all", check_all, "Run every scenario with default configuration");
  auto* check_jobs_opt = check_cmd->add_option("--jobs", check_jobs, "Cap worker count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& info : sn::catalog())
        std::printf("%-22s %-11s %s\n", info.name.c_str(), info.anchor.c_str(),
                    info.summary.c_str());
      return kExitPass;
    }
    if (run_cmd->parsed()) {
      std::string config_text = config_path.empty() ? "" : read_file(config_path);
      config_text = apply_overrides(config_text, seed_opt->count() > 0, seed,
                                    jobs_opt->count() > 0, jobs);
      return run_one(scenario, config_text, out_path, csv_path);
    }
    if (check_cmd->parsed()) {
      if (!check_all)
        throw vflab::config_error("check: pass --all to run the acceptance suite");
      return run_all(check_jobs_opt->count() > 0, check_jobs);
    }
  } catch (const vflab::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const vflab::numerical_breakdown& e) {
    std::cerr << "numerical breakdown: " << e.what() << "\n";
    return kExitBreakdown;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBreakdown;
  }
  return kExitConfigError;
}
