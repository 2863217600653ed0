#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "gpjet/experiments.hpp"
#include "gpjet/plot.hpp"
#include "support.hpp"

using namespace gpjet;

TEST_SUITE("cli_runner") {
  TEST_CASE("every experiment name is recognized") {
    const auto& names = exp::experiment_names();
    CHECK(names.size() == 10);
    for (const auto& n : names) CHECK(exp::is_experiment(n));
    CHECK_FALSE(exp::is_experiment("fig10"));
  }

  TEST_CASE("runs are reproducible byte for byte") {
    const exp::Settings s;
    for (const char* name : {"fig5b", "fig6a", "fig8"}) {
      const auto a = exp::run_experiment(name, s, 7, true);
      const auto b = exp::run_experiment(name, s, 7, true);
      CHECK(a.result.dump() == b.result.dump());
      CHECK(a.trace_csv == b.trace_csv);
      REQUIRE(a.plot_svg.has_value());
      CHECK(*a.plot_svg == *b.plot_svg);
    }
  }

  TEST_CASE("radius regression reports its error") {
    const auto a = exp::run_experiment("fig5b", exp::Settings{}, 7, false);
    CHECK(a.result["experiment"] == "fig5b");
    CHECK(a.result.contains("rmse"));
    CHECK(a.result["rmse"].get<double>() > 0.0);
    CHECK_FALSE(a.plot_svg.has_value());
  }

  TEST_CASE("optimization result carries the best ratio and its regret trace") {
    const auto a = exp::run_experiment("fig9", exp::Settings{}, 3, false);
    for (const char* key : {"best_ratio", "best_lag", "regret_trace", "true_minimizer", "successful"})
      CHECK(a.result.contains(key));
    CHECK(a.result["successful"].get<int>() <= 3);
    CHECK(a.result["regret_trace"].size() >= 1);
  }

  TEST_CASE("paired learning runs share their initial points") {
    const auto a = exp::run_experiment("fig7", exp::Settings{}, 2, false);
    const auto& gp = a.result["gp"]["iterations"];
    const auto& mf = a.result["mf"]["iterations"];
    const auto init = a.result["init"];
    REQUIRE(init.size() >= 1);
    for (std::size_t i = 0; i < init.size(); ++i) {
      CHECK(gp[i]["x"] == init[i]);
      CHECK(mf[i]["x"] == init[i]);
    }
  }

  TEST_CASE("artifacts land on disk") {
    const auto dir = std::filesystem::temp_directory_path() / "gpjet_artifacts_test";
    std::filesystem::remove_all(dir);
    exp::write_artifacts(dir, exp::run_experiment("fig8", exp::Settings{}, 1, true));
    CHECK(std::filesystem::exists(dir / "result.json"));
    CHECK(std::filesystem::exists(dir / "trace.csv"));
    CHECK(std::filesystem::exists(dir / "plot.svg"));
    CHECK(std::filesystem::exists(dir / "iterations.jsonl"));
    CHECK(support::read_file((dir / "trace.csv").string()).rfind("iter,x,y,rmse,mciw,min_regret\n", 0) == 0);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("configuration parsing is strict") {
    CHECK(support::error_code_of([] { exp::settings_from_json(io::Json::parse(R"({"no_such_key": 1})")); }) ==
          ErrorCode::ConfigError);
    CHECK(support::error_code_of([] { exp::settings_from_json(io::Json::parse(R"({"grid_points": "many"})")); }) ==
          ErrorCode::ConfigError);
    const auto s = exp::settings_from_json(io::Json::parse(R"({"groups": {"Ca": 900.0}, "grid_points": 50})"));
    CHECK(s.groups.Ca == 900.0);
    CHECK(s.grid_points == 50);
    CHECK(support::error_code_of([] { exp::run_experiment("fig10", exp::Settings{}, 0, false); }) ==
          ErrorCode::ConfigError);
  }

  TEST_CASE("grid helpers") {
    const exp::Settings s;
    const auto z = exp::z_grid(s);
    CHECK(z.size() == 93);
    CHECK(z.front() == 0.0);
    CHECK(z.back() == doctest::Approx(17.5).epsilon(1e-15));
    const auto r = exp::ratio_grid(s);
    CHECK(r.size() == 50);
    CHECK(r.front() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.back() == doctest::Approx(15.0).epsilon(1e-12));
    const auto sub = exp::equispaced(z, 5);
    CHECK(sub.size() == 5);
    CHECK(sub.front() == z.front());
    CHECK(sub.back() == z.back());
    CHECK(exp::snap(r, 1.0) == doctest::Approx(1.0).epsilon(0.06));
  }

  TEST_CASE("plot band spans the 95% interval") {
    plot::PlotTrace t;
    for (int i = 0; i < 10; ++i) {
      t.x.push_back(i);
      t.mean.push_back(0.5 * i);
      t.sd.push_back(0.1 + 0.05 * i);
    }
    t.obs_x = {2.0};
    t.obs_y = {1.0};
    const std::string svg = plot::emit_plot(t, plot::PlotKind::Posterior);
    CHECK(svg.rfind("<?xml", 0) == 0);
    const auto start = svg.find("points=\"", svg.find("id=\"ci95\""));
    REQUIRE(start != std::string::npos);
    std::istringstream pts(svg.substr(start + 8, svg.find('"', start + 8) - start - 8));
    std::vector<std::pair<double, double>> p;
    std::string tok;
    while (pts >> tok) {
      const auto comma = tok.find(',');
      p.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
    }
    REQUIRE(p.size() == 20);
    // Upper edge left to right, lower edge right to left.
    for (int i = 0; i < 10; ++i) {
      const double upper = p[static_cast<std::size_t>(i)].second;
      const double lower = p[static_cast<std::size_t>(19 - i)].second;
      CHECK(p[static_cast<std::size_t>(19 - i)].first == p[static_cast<std::size_t>(i)].first);
      CHECK(upper - lower == doctest::Approx(3.92 * t.sd[static_cast<std::size_t>(i)]).epsilon(1e-9));
    }
  }

  TEST_CASE("nothing to plot") {
    CHECK(support::error_code_of([] { plot::emit_plot({}, plot::PlotKind::Posterior); }) == ErrorCode::EmptyTrace);
  }
}
