#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "steklov/report.hpp"

namespace {

spdlog::level::level_enum log_level_from_env() {
  const char* env = std::getenv("STEKLOV_LOG");
  std::string s = env ? env : "info";
  if (s == "quiet") return spdlog::level::err;
  if (s == "debug") return spdlog::level::debug;
  if (s != "info") std::cerr << "STEKLOV_LOG=" << s << " not recognised, using info\n";
  return spdlog::level::info;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("steklov");
  logger->set_level(log_level_from_env());
  logger->set_pattern("[%l] %v");

  CLI::App app{"Hardy-Steklov operator analysis: fairways, functionals, norm estimates and embedding bounds"};
  app.require_subcommand(1);

  std::string config, out;
  double tol = 0;
  std::vector<double> window;
  unsigned jobs = 1;
  bool timing = false;

  const std::pair<const char*, const char*> subs[] = {
      {"fairway", "solve the fairway and the dual fairway"},
      {"functionals", "evaluate the boundedness functionals of the operator"},
      {"norm", "estimate the operator norm from below"},
      {"embedding", "constant bounds for the fractional embedding"},
      {"verify", "run the acceptance battery"},
      {"phase", "criterion phase table over the smoothness index"},
  };
  for (const auto& [name, help] : subs) {
    auto* sc = app.add_subcommand(name, help);
    auto* cfg = sc->add_option("--config", config, "scenario file")->check(CLI::ExistingFile);
    if (std::string(name) != "verify") cfg->required();
    sc->add_option("--out", out, "CSV destination (default stdout)");
    sc->add_option("--tol", tol, "convergence tolerance override")->check(CLI::Range(1e-12, 0.5));
    sc->add_option("--window", window, "integration window lo,hi")->delimiter(',')->expected(2);
    sc->add_option("--jobs", jobs, "scenarios run concurrently")->check(CLI::Range(1u, 256u));
    sc->add_flag("--timing", timing, "fill the ms column with wall time");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;  // --help is not an error; usage errors share the error status
  }
  std::string task = app.get_subcommands().front()->get_name();

  std::vector<steklov::Scenario> scenarios;
  try {
    std::string text = config.empty() ? "name = verify\n" : read_file(config);
    scenarios = steklov::parse_scenarios(text, task);
  } catch (const std::exception& ex) {
    logger->error("{}: {}", config.empty() ? "<builtin>" : config, ex.what());
    return 1;
  }

  steklov::RunOptions ro;
  ro.timing = timing;
  if (tol > 0) ro.tol = tol;
  if (!window.empty()) {
    if (!(window[0] > 0 && window[1] > window[0])) {
      logger->error("--window needs 0 < lo < hi");
      return 1;
    }
    ro.window = std::make_pair(window[0], window[1]);
  }
  ro.log = [&](steklov::LogLevel l, const std::string& m) {
    if (l == steklov::LogLevel::debug)
      logger->debug(m);
    else
      logger->info(m);
  };

  auto rows = steklov::run_all(scenarios, ro, jobs);
  for (const auto& r : rows)
    if (r.error) logger->error("{} / {}: {}", r.scenario, r.task, r.quantity);

  try {
    if (out.empty()) {
      steklov::emit_csv(rows, std::cout);
    } else {
      std::ofstream f(out, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + out);
      steklov::emit_csv(rows, f);
    }
  } catch (const std::exception& ex) {
    logger->error("{}", ex.what());
    return 1;
  }
  int code = steklov::exit_code(rows);
  logger->info("{} rows, exit {}", rows.size(), code);
  return code;
}
