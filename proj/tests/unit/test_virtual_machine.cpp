#include <doctest.h>

#include <cmath>
#include <set>

#include "gpjet/experiments.hpp"
#include "gpjet/virtual_machine.hpp"
#include "support.hpp"

using namespace gpjet;

namespace {

const vm::VirtualMachine& machine() {
  static const vm::VirtualMachine m;
  return m;
}

}  // namespace

TEST_SUITE("virtual_machine") {
  TEST_CASE("settings table rows") {
    const auto& t = vm::list_settings();
    REQUIRE(t.size() == 12);
    CHECK(t[0].air_pressure_bar == 1.2);
    CHECK(t[0].tip_to_collector_mm == 3.5);
    CHECK(t[0].collector_speed_mm_s == 191.2);
    CHECK(t[0].frames == 1341);
    CHECK(t[0].duration_s == 26.82);
    CHECK(t[11].air_pressure_bar == 2.4);
    CHECK(t[11].tip_to_collector_mm == 4.5);
    CHECK(t[11].collector_speed_mm_s == 4420.0);
    std::set<int> ids;
    for (const auto& s : t) ids.insert(s.id);
    CHECK(ids.size() == 12);
    CHECK(*ids.begin() == 1);
    CHECK(*ids.rbegin() == 12);
  }

  TEST_CASE("settings export matches the reference CSV byte for byte") {
    CHECK(vm::settings_csv(vm::list_settings()) == support::read_file(support::data_path("machine_settings.csv")));
  }

  TEST_CASE("noise-free radius observations equal the truth") {
    vm::TruthOptions o;
    o.sigma_radius = 0.0;
    const vm::VirtualMachine m(jet::default_pcl_groups(), o);
    const std::vector<double> z{0.0, 1.0, 4.2, 17.5};
    const auto obs = m.observe_radius(z, 3);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(obs[i] == m.radius_truth(z[i]));
    CHECK(obs[0] == doctest::Approx(1.08).epsilon(1e-15));
  }

  TEST_CASE("truth is the physics solve times a nozzle bump") {
    const auto& m = machine();
    CHECK(m.radius_physics(0.0) == 1.0);
    CHECK(m.radius_truth(0.0) == doctest::Approx(1.08).epsilon(1e-15));
    for (double z : {0.5, 2.0, 6.0, 12.0}) {
      const double bump = 1.0 + 0.08 * std::exp(-(z / 2.0) * (z / 2.0));
      CHECK(m.radius_truth(z) == doctest::Approx(m.radius_physics(z) * bump).epsilon(1e-15));
    }
    CHECK(m.radius_truth(10.0) / m.radius_physics(10.0) - 1.0 < 1e-10);
  }

  TEST_CASE("physics interpolation reproduces the solver stations") {
    const auto& m = machine();
    const auto& p = m.dense_profile();
    for (std::size_t i = 0; i < p.z_grid.size(); i += 46) CHECK(m.radius_physics(p.z_grid[i]) == p.radii[i]);
    const auto coarse = jet::solve_jet_profile(jet::default_pcl_groups(), 93).profile;
    for (std::size_t i = 0; i < coarse.z_grid.size(); ++i)
      CHECK(m.radius_physics(coarse.z_grid[i]) == doctest::Approx(coarse.radii[i]).epsilon(1e-8));
  }

  TEST_CASE("observations are deterministic per seed and query") {
    const auto& m = machine();
    const std::vector<double> z{0.3, 5.0, 9.1};
    CHECK(m.observe_radius(z, 11) == m.observe_radius(z, 11));
    CHECK(m.observe_radius(z, 11) != m.observe_radius(z, 12));
    CHECK(m.observe_lag(2.0, 4) == m.observe_lag(2.0, 4));
    CHECK(vm::seeded_normal(5, 1.5) == vm::seeded_normal(5, 1.5));
    CHECK(vm::seeded_normal(5, 1.5) != vm::seeded_normal(5, 1.25));
  }

  TEST_CASE("radius queries outside the jet are rejected") {
    const auto& m = machine();
    CHECK(support::error_code_of([&] { m.observe_radius(std::vector<double>{-0.1}, 0); }) == ErrorCode::OutOfDomain);
    CHECK(support::error_code_of([&] { m.observe_radius(std::vector<double>{m.chi() + 0.1}, 0); }) ==
          ErrorCode::OutOfDomain);
  }

  TEST_CASE("lag observations fail below the stability boundary") {
    const auto& m = machine();
    CHECK(support::error_code_of([&] { m.observe_lag(0.5, 0); }) == ErrorCode::UnstableRegime);
    CHECK(support::error_code_of([&] { m.observe_lag(0.0, 0); }) == ErrorCode::NonPositiveRatio);
    CHECK(support::error_code_of([&] { m.observe_lag(-1.0, 0); }) == ErrorCode::NonPositiveRatio);
    CHECK(support::error_code_of([&] { m.lag_truth(0.99); }) == ErrorCode::UnstableRegime);
  }

  TEST_CASE("noise-free lag rises with the speed ratio") {
    vm::TruthOptions o;
    o.sigma_lag = 0.0;
    const vm::VirtualMachine m(jet::default_pcl_groups(), o);
    CHECK(m.observe_lag(1.0, 0) < m.observe_lag(2.0, 0));
    CHECK(m.observe_lag(2.0, 0) < m.observe_lag(5.0, 0));
    CHECK(m.observe_lag(1.0, 0) == doctest::Approx(0.2).epsilon(1e-3));
  }

  TEST_CASE("speed ratio uses the configured jet speed") {
    const auto& m = machine();
    const auto& t = vm::list_settings();
    CHECK(m.speed_ratio(t[0]) == doctest::Approx(191.2 / 300.0).epsilon(1e-15));
    vm::TruthOptions o;
    o.jet_speed_mm_s = 500.0;
    const vm::VirtualMachine fast(jet::default_pcl_groups(), o);
    CHECK(fast.speed_ratio(t[11]) == doctest::Approx(4420.0 / 500.0).epsilon(1e-15));
    double lo = 1e9, hi = 0.0;
    for (const auto& s : t) {
      lo = std::min(lo, m.speed_ratio(s));
      hi = std::max(hi, m.speed_ratio(s));
    }
    CHECK(lo < 1.0);
    CHECK(hi > 10.0);
  }

  TEST_CASE("lag minimizer on the ratio grid is the point nearest one") {
    const auto& m = machine();
    const exp::Settings s;
    const auto grid = exp::ratio_grid(s);
    double best = 1e300, arg = 0.0;
    for (double r : grid) {
      if (r < 1.0) continue;
      const double v = m.lag_truth(r);
      if (v < best) {
        best = v;
        arg = r;
      }
    }
    CHECK(arg == exp::snap(grid, 1.0));
  }

  TEST_CASE("invalid truth options are rejected") {
    vm::TruthOptions o;
    o.jet_speed_mm_s = 0.0;
    CHECK(support::error_code_of([&] { vm::VirtualMachine(jet::default_pcl_groups(), o); }) == ErrorCode::InvalidArgument);
  }
}
