// gpjet <experiment> --config <path> [--seed N | --seeds a..b] [--plot] [--out DIR]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gpjet/errors.hpp"
#include "gpjet/experiments.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};

SeedRange parse_seeds(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) gpjet::fail(gpjet::ErrorCode::ConfigError, "--seeds expects a..b");
  try {
    std::size_t used = 0;
    SeedRange r{std::stoull(text.substr(0, dots), &used), 0};
    if (used != dots) throw std::invalid_argument("seed");
    const std::string tail = text.substr(dots + 2);
    r.last = std::stoull(tail, &used);
    if (used != tail.size() || r.last < r.first) throw std::invalid_argument("seed");
    return r;
  } catch (const std::logic_error&) {
    gpjet::fail(gpjet::ErrorCode::ConfigError, "--seeds expects a..b with a <= b");
  }
}

gpjet::io::Json load_config(const std::string& path) {
  if (path.empty()) return gpjet::io::Json::object();
  std::ifstream in(path);
  if (!in) gpjet::fail(gpjet::ErrorCode::ConfigError, "cannot read config " + path);
  try {
    return gpjet::io::Json::parse(in);
  } catch (const std::exception& e) {
    gpjet::fail(gpjet::ErrorCode::ConfigError, std::string("invalid JSON in ") + path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed experiment planning on a virtual melt-electrowriting machine"};
  std::string experiment, config_path, seeds_text, out_dir = ".";
  std::uint64_t seed = 0;
  bool plot = false;
  app.add_option("experiment", experiment, "fig5a..fig9 or metrology-bench")->required();
  app.add_option("--config", config_path, "JSON configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  auto* seeds_opt = app.add_option("--seeds", seeds_text, "seed sweep a..b, run concurrently");
  seed_opt->excludes(seeds_opt);
  app.add_flag("--plot", plot, "also write plot.svg");
  app.add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  gpjet::exp::Settings settings;
  std::vector<std::uint64_t> seeds;
  try {
    if (!gpjet::exp::is_experiment(experiment))
      gpjet::fail(gpjet::ErrorCode::ConfigError, "unknown experiment '" + experiment + "'");
    const gpjet::io::Json config = load_config(config_path);
    if (config.contains("experiment") && config["experiment"] != experiment)
      gpjet::fail(gpjet::ErrorCode::ConfigError, "config names a different experiment");
    if (config.contains("seed") && seed_opt->count() == 0) {
      if (!config["seed"].is_number_unsigned()) gpjet::fail(gpjet::ErrorCode::ConfigError, "seed must be a non-negative integer");
      seed = config["seed"].get<std::uint64_t>();
    }
    settings = gpjet::exp::settings_from_json(config);
    if (seeds_opt->count()) {
      const SeedRange r = parse_seeds(seeds_text);
      for (std::uint64_t s = r.first; s <= r.last; ++s) seeds.push_back(s);
    }
  } catch (const gpjet::Error& e) {
    std::cerr << "gpjet: " << e.what() << '\n';
    return e.code() == gpjet::ErrorCode::ConfigError || e.code() == gpjet::ErrorCode::InvalidArgument ? kConfigError
                                                                                                       : kRuntimeError;
  }

  const auto run_one = [&](std::uint64_t s, const std::filesystem::path& dir) {
    const auto artifacts = gpjet::exp::run_experiment(experiment, settings, s, plot);
    gpjet::exp::write_artifacts(dir, artifacts);
  };

  try {
    if (seeds.empty()) {
      run_one(seed, out_dir);
      return 0;
    }
    // Independent runs share nothing mutable; a small pool works through them.
    std::atomic<std::size_t> next{0};
    std::mutex err_m;
    std::string first_error;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto n_threads = std::min<std::size_t>(hw, seeds.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
          try {
            run_one(seeds[i], std::filesystem::path(out_dir) / ("seed_" + std::to_string(seeds[i])));
          } catch (const std::exception& e) {
            std::lock_guard lock(err_m);
            if (first_error.empty()) first_error = "seed " + std::to_string(seeds[i]) + ": " + e.what();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (!first_error.empty()) {
      std::cerr << "gpjet: " << first_error << '\n';
      return kRuntimeError;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "gpjet: " << e.what() << '\n';
    return kRuntimeError;
  }
}
