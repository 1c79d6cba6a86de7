// oqs-cli: runs one JSON-configured computation and writes a table plus manifest.json.
// Exit codes: 0 ok, 2 bad config or arguments, 3 numerical failure, 4 resource cap or I/O, 1 other.

#include "run.hpp"

#include "oqs/numeric.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  CLI::App app{"Open quantum systems batch runner"};
  std::string config_path;
  oqs::cli::Overrides ov;
  unsigned long long seed = 0;
  int threads = 1;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
  auto* thr_opt = app.add_option("--threads", threads, "worker threads (overrides the config)");
  app.add_option("--out", ov.out_dir, "output directory");
  app.set_version_flag("--version", std::string(OQS_VERSION));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (*seed_opt) ov.seed = seed;
  if (*thr_opt) ov.threads = threads;

  try {
    std::ifstream f(config_path);
    if (!f) throw oqs::InputError("cannot read config " + config_path);
    std::stringstream ss;
    ss << f.rdbuf();
    nlohmann::json cfg;
    try {
      cfg = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception& e) {
      throw oqs::InputError(std::string("config is not valid JSON: ") + e.what());
    }
    const std::string path = oqs::cli::run(cfg, ov);
    std::cout << path << "\n";
    return 0;
  } catch (const oqs::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const oqs::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const oqs::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
