#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>

#include "gpjet/metrology.hpp"
#include "gpjet/physics_jet.hpp"
#include "support.hpp"

using namespace gpjet;
using metrology::Frame;
using metrology::Geometry;

namespace {

Frame blank(int width, int height, int collector_row, double cf) {
  Frame f;
  f.width = width;
  f.height = height;
  f.collector_row = collector_row;
  f.nozzle_x = width / 2;
  f.cf = cf;
  f.fps = 50.0;
  f.binary = true;
  f.pixels.assign(static_cast<std::size_t>(width * height), 0);
  return f;
}

void fill(Frame& f, int row, int le, int re) {
  for (int c = le; c <= re; ++c) f.pixels[static_cast<std::size_t>(row * f.width + c)] = 255;
}

const jet::RadiusProfile& jet_profile() {
  static const jet::RadiusProfile p = jet::solve_jet_profile(jet::default_pcl_groups(), 93).profile;
  return p;
}

metrology::FrameSource sweep(int count, double lag_max, const Geometry& g, bool grayscale = false) {
  return [=, i = 0]() mutable -> std::optional<Frame> {
    if (i >= count) return std::nullopt;
    Frame f = metrology::render_synthetic_frame(jet_profile(), lag_max * i++ / std::max(count - 1, 1), g);
    f.binary = !grayscale;
    return f;
  };
}

struct EnvGuard {
  explicit EnvGuard(const char* value) { setenv("GPJET_THREADS", value, 1); }
  ~EnvGuard() { unsetenv("GPJET_THREADS"); }
};

}  // namespace

TEST_SUITE("metrology") {
  TEST_CASE("row diameter from edge columns") {
    Frame f = blank(200, 30, 20, 0.005);
    for (int r = 0; r < 20; ++r) fill(f, r, 100, 140);
    const auto feat = metrology::edge_scan(f, 10);
    REQUIRE(feat.rows.size() == 2);
    CHECK(feat.rows[0].row == 9);
    CHECK(feat.rows[1].row == 19);
    for (const auto& r : feat.rows) CHECK(r.diameter_mm == doctest::Approx(0.2).epsilon(1e-12));
  }

  TEST_CASE("edge angles and printed area rule") {
    Frame f = blank(200, 30, 20, 0.005);
    fill(f, 9, 100, 140);
    fill(f, 19, 105, 143);
    auto feat = metrology::edge_scan(f, 10);
    CHECK(feat.rows[1].theta_l == doctest::Approx(std::atan(0.5)).epsilon(1e-12));
    CHECK(feat.rows[1].theta_l == doctest::Approx(0.46365).epsilon(1e-5));
    CHECK(feat.rows[1].theta_r == doctest::Approx(std::atan(0.3)).epsilon(1e-12));
    CHECK(feat.rows[1].area_mm2 == doctest::Approx((40 + 38) * 10 * 0.005 * 0.005).epsilon(1e-12));
    CHECK(feat.rows[1].area_mm2 == doctest::Approx(0.0195).epsilon(1e-12));
    metrology::ScanOptions half;
    half.trapezoid_half_factor = true;
    feat = metrology::edge_scan(f, 10, half);
    CHECK(feat.rows[1].area_mm2 == doctest::Approx(0.00975).epsilon(1e-12));
  }

  TEST_CASE("scan rows are anchored at the collector") {
    const auto rows = metrology::scan_rows(440, 8);
    CHECK(rows.size() == 55);
    CHECK(rows.back() == 439);
    CHECK(rows.front() == 439 - 54 * 8);
    CHECK(metrology::scan_rows(441, 8).size() == 55);
    CHECK(support::error_code_of([] { metrology::scan_rows(440, 0); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("empty rows are flagged with zero diameter") {
    Frame f = blank(100, 30, 20, 0.01);
    fill(f, 19, 40, 60);
    const auto feat = metrology::edge_scan(f, 10);
    CHECK(feat.rows[0].empty);
    CHECK(feat.rows[0].diameter_mm == 0.0);
    CHECK_FALSE(feat.rows[1].empty);
  }

  TEST_CASE("x-velocity from right-edge motion") {
    Frame a = blank(200, 30, 20, 0.005), b = a;
    for (int r = 0; r < 20; ++r) {
      fill(a, r, 90, 120);
      fill(b, r, 90, 123);
    }
    const auto fa = metrology::edge_scan(a, 10), fb = metrology::edge_scan(b, 10);
    for (double u : metrology::jet_velocity(fa, fb, 0.005, 50.0)) CHECK(u == doctest::Approx(0.75).epsilon(1e-12));
    for (double u : metrology::jet_velocity(fa, fa, 0.005, 50.0)) CHECK(u == 0.0);
    const auto other = metrology::edge_scan(a, 5);
    CHECK(support::error_code_of([&] { metrology::jet_velocity(fa, other, 0.005, 50.0); }) == ErrorCode::RowMismatch);
  }

  TEST_CASE("constant radius renders a vertical bar") {
    const jet::RadiusProfile bar{{0.0, 17.5}, {1.0, 1.0}};
    const Geometry g;
    const Frame f = metrology::render_synthetic_frame(bar, 0.0, g);
    const int width = static_cast<int>(std::lround(2.0 * g.nozzle_radius_mm / g.cf));
    for (int r = 0; r < g.collector_row; ++r) {
      int count = 0;
      for (int c = 0; c < f.width; ++c) count += f.at(r, c) == 255;
      CHECK(count == width + 1);
    }
    for (const auto& row : metrology::edge_scan(f, 8).rows) CHECK(row.diameter_mm == doctest::Approx(0.4).epsilon(1e-12));
  }

  TEST_CASE("lag shifts the bottom centerline by lag over cf") {
    const jet::RadiusProfile bar{{0.0, 40.0}, {1.0, 1.0}};
    Geometry g;
    g.cf = 0.005;
    g.nozzle_radius_mm = 0.05;
    const Frame f = metrology::render_synthetic_frame(bar, 0.5, g);
    const auto feat = metrology::edge_scan(f, 8);
    const auto& bottom = feat.rows.back();
    CHECK(bottom.row == g.collector_row - 1);
    CHECK(0.5 * (bottom.le + bottom.re) - g.nozzle_x == doctest::Approx(100.0));
    CHECK(metrology::lag_from_frame(f, feat) == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("rendering round trip recovers diameters and lag within one pixel") {
    const Geometry g;
    const auto& p = jet_profile();
    for (double lag : {-0.6, 0.0, 0.25, 0.5, 1.0}) {
      const Frame f = metrology::render_synthetic_frame(p, lag, g);
      const auto feat = metrology::edge_scan(f, 8);
      for (const auto& row : feat.rows) {
        const double expected = 2.0 * metrology::profile_radius_at(p, row.row * g.cf / g.nozzle_radius_mm) * g.nozzle_radius_mm;
        CHECK(std::abs(row.diameter_mm - expected) <= g.cf);
        CHECK(std::abs(row.theta_l) <= M_PI / 2);
        CHECK(std::abs(row.theta_r) <= M_PI / 2);
      }
      CHECK(std::abs(metrology::lag_from_frame(f, feat) - lag) <= g.cf);
    }
  }

  TEST_CASE("centered jet has zero lag") {
    const Frame f = metrology::render_synthetic_frame(jet_profile(), 0.0, Geometry{});
    CHECK(metrology::lag_from_frame(f, metrology::edge_scan(f, 8)) == 0.0);
  }

  TEST_CASE("missing deposition point") {
    Frame f = blank(100, 30, 20, 0.01);
    fill(f, 9, 40, 60);
    const auto feat = metrology::edge_scan(f, 10);
    CHECK(support::error_code_of([&] { metrology::lag_from_frame(f, feat); }) == ErrorCode::NoDeposition);
  }

  TEST_CASE("jet too long or too wide for the frame") {
    Geometry g;
    g.collector_row = 100;
    CHECK(support::error_code_of([&] { metrology::render_synthetic_frame(jet_profile(), 0.0, g); }) ==
          ErrorCode::GeometryOverflow);
    CHECK(support::error_code_of([&] { metrology::render_synthetic_frame(jet_profile(), 10.0, Geometry{}); }) ==
          ErrorCode::GeometryOverflow);
  }

  TEST_CASE("edge jitter is seeded") {
    const metrology::RenderNoise n{2, 77};
    const Frame a = metrology::render_synthetic_frame(jet_profile(), 0.3, Geometry{}, n);
    const Frame b = metrology::render_synthetic_frame(jet_profile(), 0.3, Geometry{}, n);
    const Frame c = metrology::render_synthetic_frame(jet_profile(), 0.3, Geometry{});
    CHECK(a.pixels == b.pixels);
    CHECK(a.pixels != c.pixels);
  }

  TEST_CASE("gradient edges agree with the binary scan on clean silhouettes") {
    Frame f = metrology::render_synthetic_frame(jet_profile(), 0.4, Geometry{});
    const auto binary = metrology::edge_scan(f, 8);
    f.binary = false;
    const auto gray = metrology::edge_scan(f, 8);
    REQUIRE(gray.rows.size() == binary.rows.size());
    for (std::size_t i = 0; i < gray.rows.size(); ++i) {
      CHECK(std::abs(gray.rows[i].le - binary.rows[i].le) <= 1);
      CHECK(std::abs(gray.rows[i].re - binary.rows[i].re) <= 1);
    }
  }

  TEST_CASE("velocity of a steadily swept jet") {
    const Geometry g;
    auto source = sweep(50, 1.0, g);
    std::vector<metrology::JetFeatures> feats;
    while (auto f = source()) feats.push_back(metrology::edge_scan(*f, 8));
    const double expected = 1.0 / 49.0 * g.fps;  // mm per frame times frames per second
    for (std::size_t i = 1; i < feats.size(); ++i) {
      const double u = metrology::jet_velocity(feats[i - 1], feats[i], g.cf, g.fps).back();
      CHECK(std::abs(u - expected) <= 2.0 * g.cf * g.fps);
    }
  }

  TEST_CASE("stream output is independent of the worker count and execution mode") {
    const EnvGuard env("8");
    CHECK(metrology::worker_cap() == 8);
    const Geometry g;
    const auto one = metrology::process_stream(sweep(40, 1.0, g), 8, 1, metrology::ExecutionMode::ParallelScan);
    const auto many = metrology::process_stream(sweep(40, 1.0, g), 8, 4, metrology::ExecutionMode::ParallelScan);
    const auto seq = metrology::process_stream(sweep(40, 1.0, g), 8, 4, metrology::ExecutionMode::Sequential);
    const auto io = metrology::process_stream(sweep(40, 1.0, g), 8, 4, metrology::ExecutionMode::PipelinedIO);
    CHECK(many.report.workers == 4);
    CHECK(one.features.size() == 40);
    const std::string ref = metrology::features_csv(one.features);
    CHECK(metrology::features_csv(many.features) == ref);
    CHECK(metrology::features_csv(seq.features) == ref);
    CHECK(metrology::features_csv(io.features) == ref);
    for (std::size_t i = 0; i < one.features.size(); ++i) {
      REQUIRE(one.features[i].lag_mm.has_value());
      CHECK(*one.features[i].lag_mm == *many.features[i].lag_mm);
      CHECK(one.features[i].processing_time > 0.0);
    }
  }

  TEST_CASE("worker cap follows the environment") {
    {
      const EnvGuard env("3");
      CHECK(metrology::worker_cap() == 3);
    }
    CHECK(metrology::worker_cap() >= 1);
  }

  TEST_CASE("empty source yields an empty stream") {
    const auto res = metrology::process_stream([]() -> std::optional<Frame> { return std::nullopt; }, 8, 2);
    CHECK(res.features.empty());
    CHECK(res.report.frames == 0);
    CHECK(res.report.mean_frame_s == 0.0);
    CHECK(res.report.wall_s == 0.0);
  }

  TEST_CASE("per-frame failures travel in band") {
    int i = 0;
    const metrology::FrameSource source = [&]() -> std::optional<Frame> {
      if (i++ >= 2) return std::nullopt;
      Frame f = blank(100, 30, 20, 0.01);
      if (i == 1) fill(f, 19, 40, 60);
      return f;
    };
    const auto res = metrology::process_stream(source, 10, 1);
    REQUIRE(res.features.size() == 2);
    CHECK(res.features[0].error.empty());
    CHECK(res.features[0].lag_mm.has_value());
    CHECK_FALSE(res.features[1].error.empty());
    CHECK_FALSE(res.features[1].lag_mm.has_value());
  }

  TEST_CASE("doubling the stride never raises the scan cost") {
    const Geometry g;
    std::vector<Frame> frames;
    auto source = sweep(100, 1.0, g, true);
    while (auto f = source()) frames.push_back(std::move(*f));
    double previous = std::numeric_limits<double>::infinity();
    for (int stride : {2, 4, 8, 16}) {
      double total = 0.0;
      for (const Frame& f : frames) total += metrology::edge_scan(f, stride).processing_time;
      CHECK(total <= previous);
      previous = total;
    }
  }

  TEST_CASE("row count follows the collector row and stride") {
    const Frame f = metrology::render_synthetic_frame(jet_profile(), 0.2, Geometry{});
    for (int stride : {1, 3, 8, 16}) CHECK(metrology::edge_scan(f, stride).rows.size() == static_cast<std::size_t>(440 / stride));
  }

  TEST_CASE("binary PGM round trip") {
    const Frame f = metrology::render_synthetic_frame(jet_profile(), 0.3, Geometry{});
    const auto path = std::filesystem::temp_directory_path() / "gpjet_roundtrip.pgm";
    metrology::write_pgm(path.string(), f);
    const Frame g = metrology::read_pgm(path.string(), Geometry{});
    std::filesystem::remove(path);
    CHECK(g.width == f.width);
    CHECK(g.height == f.height);
    CHECK(g.pixels == f.pixels);
    CHECK(g.binary);
    CHECK(support::error_code_of([] { metrology::read_pgm("/nonexistent/x.pgm", Geometry{}); }) == ErrorCode::IoError);
  }

  TEST_CASE("per-frame CSV layout") {
    const auto res = metrology::process_stream(sweep(3, 0.5, Geometry{}), 8, 1);
    const std::string csv = metrology::frames_csv(res.features);
    CHECK(csv.rfind("frame,lag_mm,proc_time_s\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(metrology::features_csv(res.features).rfind("frame,row_z_px,diameter_mm,area_mm2,theta_l,theta_r,re_px\n", 0) == 0);
  }
}
