// Command-line front end: analyze, check-density, rate, paths.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "chainverifier/commands.hpp"
#include "chainverifier/config.hpp"
#include "chainverifier/errors.hpp"
#include "chainverifier/models.hpp"
#include "chainverifier/report.hpp"
#include "chainverifier/simulate.hpp"

namespace cv = chainverifier;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  std::optional<double> rank_tol;
  bool quiet = false;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

void write_extras(const cv::VerdictReport& rep, const cv::RunConfig& cfg, const fs::path& dir) {
  for (std::size_t i = 0; i < rep.density.size(); ++i) {
    std::ofstream f(dir / ("histogram_" + std::to_string(i) + ".csv"));
    cv::write_histogram_csv(f, rep.density[i].check);
  }
  if (rep.command == "rate" && cfg.rate.trajectory_steps > 0) {
    const auto params = cv::xnes_params_from(cfg);
    const cv::Vector x0 = cfg.rate.x0.value_or(cv::Vector::Unit(cfg.model.n, 0));
    const auto traj = cv::run_chain(cv::make_xnes_chain(params), x0 / cfg.rate.sigma0,
                                    cfg.rate.trajectory_steps,
                                    cv::derive_seed(cv::stream_seed(cfg, cv::SeedStream::kRate), {3}));
    std::ofstream f(dir / "trajectory.csv");
    cv::write_trajectory_csv(f, traj);
  }
}

int run(const std::string& command, const Options& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  cv::Logger log;
  if (!opt.quiet) log = [](const std::string& m) { std::cerr << "[chainverifier] " << m << '\n'; };
  try {
    cv::RunConfig cfg = cv::load_config(opt.config);
    if (opt.seed_override) cfg.seed = *opt.seed_override;
    if (opt.rank_tol) cfg.analysis.rank_tol = *opt.rank_tol;
    cv::validate_config(cfg);

    cv::CommandResult res;
    if (command == "analyze") {
      res = cv::cmd_analyze(cfg, log);
    } else if (command == "check-density") {
      res = cv::cmd_check_density(cfg, log);
    } else if (command == "rate") {
      res = cv::cmd_rate(cfg, log);
    } else {
      res = cv::cmd_paths(cfg, log);
    }
    res.report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string text = cv::dump_report(res.report);
    std::cout << text;
    if (!opt.out_dir.empty()) {
      fs::create_directories(opt.out_dir);
      write_file(fs::path(opt.out_dir) / "report.json", text);
      write_extras(res.report, cfg, opt.out_dir);
    }
    return res.exit_code;
  } catch (const cv::ConfigError& e) {
    std::cerr << "config error in " << e.field() << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov chain stability verifier"};
  app.require_subcommand(1);
  Options opt;
  std::string chosen;
  for (const char* name : {"analyze", "check-density", "rate", "paths"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "INI run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "directory for report.json and CSV files");
    sub->add_option("--seed-override", opt.seed_override, "replace [run] seed");
    sub->add_option("--rank-tol", opt.rank_tol, "relative singular-value tolerance");
    sub->add_flag("--quiet", opt.quiet, "no progress on stderr");
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return run(chosen, opt);
}
