#include "gpjet/metrology.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "gpjet/errors.hpp"
#include "gpjet/format.hpp"

namespace gpjet::metrology {

bool Frame::valid() const noexcept {
  return width > 0 && height > 0 && cf > 0.0 && fps > 0.0 && nozzle_x >= 0 && nozzle_x < width &&
         collector_row >= 0 && collector_row < height &&
         pixels.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

double profile_radius_at(const jet::RadiusProfile& p, double z) {
  const auto& zs = p.z_grid;
  if (z <= zs.front()) return p.radii.front();
  if (z >= zs.back()) return p.radii.back();
  const auto it = std::upper_bound(zs.begin(), zs.end(), z);
  const auto i = static_cast<std::size_t>(it - zs.begin()) - 1;
  const double t = (z - zs[i]) / (zs[i + 1] - zs[i]);
  return p.radii[i] + t * (p.radii[i + 1] - p.radii[i]);
}

Frame render_synthetic_frame(const jet::RadiusProfile& profile, double lag_mm, const Geometry& g,
                             const RenderNoise& noise) {
  require(profile.valid(), "invalid radius profile");
  require(g.cf > 0.0 && g.fps > 0.0 && g.nozzle_radius_mm > 0.0, "geometry scales must be positive");
  require(g.width > 0 && g.height > 0, "frame size must be positive");
  require(g.nozzle_x >= 0 && g.nozzle_x < g.width, "nozzle outside the frame");
  require(g.collector_row >= 2 && g.collector_row < g.height, "collector row outside the frame");
  require(noise.edge_jitter_px >= 0, "edge jitter must be non-negative");

  const double jet_rows = profile.z_grid.back() * g.nozzle_radius_mm / g.cf;
  if (jet_rows > g.collector_row) fail(ErrorCode::GeometryOverflow, "jet longer than the nozzle-collector span");

  Frame f;
  f.width = g.width;
  f.height = g.height;
  f.cf = g.cf;
  f.fps = g.fps;
  f.nozzle_x = g.nozzle_x;
  f.collector_row = g.collector_row;
  f.binary = true;
  f.pixels.assign(static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height), 0);

  std::mt19937_64 rng(noise.seed);
  std::uniform_int_distribution<int> jitter(-noise.edge_jitter_px, noise.edge_jitter_px);
  const double last = static_cast<double>(g.collector_row - 1);
  for (int r = 0; r < g.collector_row; ++r) {
    const double z = r * g.cf / g.nozzle_radius_mm;
    const double half = profile_radius_at(profile, z) * g.nozzle_radius_mm / g.cf;
    const double bend = r / last;
    const double center = g.nozzle_x + lag_mm / g.cf * bend * bend;
    long le = std::lround(center - half);
    long re = std::lround(center + half);
    if (noise.edge_jitter_px > 0) {
      le += jitter(rng);
      re += jitter(rng);
    }
    if (le < 0 || re >= g.width) fail(ErrorCode::GeometryOverflow, "jet leaves the frame");
    if (re < le) continue;
    auto* row = f.pixels.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(g.width);
    std::fill(row + le, row + re + 1, std::uint8_t{255});
  }
  return f;
}

std::vector<int> scan_rows(int collector_row, int stride) {
  require(stride >= 1, "stride must be at least 1");
  const int n = collector_row / stride;
  std::vector<int> rows(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) rows[static_cast<std::size_t>(n - 1 - k)] = collector_row - 1 - k * stride;
  return rows;
}

namespace {

struct Edges {
  int le = -1;
  int re = -1;
};

Edges binary_edges(const Frame& f, int r) {
  const std::uint8_t* row = f.pixels.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(f.width);
  Edges e;
  for (int c = 0; c < f.width; ++c)
    if (row[c] >= 128) {
      e.le = c;
      break;
    }
  if (e.le < 0) return e;
  for (int c = f.width - 1; c >= 0; --c)
    if (row[c] >= 128) {
      e.re = c;
      break;
    }
  return e;
}

// Sobel magnitude along one row, non-maximum suppression along x and
// two-threshold hysteresis. Rising edges open the jet, falling ones close it.
Edges gradient_edges(const Frame& f, int r, int lo, int hi) {
  const int w = f.width;
  const auto px = [&](int rr, int cc) {
    rr = std::clamp(rr, 0, f.height - 1);
    cc = std::clamp(cc, 0, w - 1);
    return static_cast<int>(f.at(rr, cc));
  };
  std::vector<double> mag(static_cast<std::size_t>(w));
  std::vector<int> gx(static_cast<std::size_t>(w));
  for (int c = 0; c < w; ++c) {
    const int dx = (px(r - 1, c + 1) + 2 * px(r, c + 1) + px(r + 1, c + 1)) -
                   (px(r - 1, c - 1) + 2 * px(r, c - 1) + px(r + 1, c - 1));
    const int dy = (px(r + 1, c - 1) + 2 * px(r + 1, c) + px(r + 1, c + 1)) -
                   (px(r - 1, c - 1) + 2 * px(r - 1, c) + px(r - 1, c + 1));
    gx[static_cast<std::size_t>(c)] = dx;
    mag[static_cast<std::size_t>(c)] = (std::abs(dx) + std::abs(dy)) / 4.0;
  }
  std::vector<std::uint8_t> cls(static_cast<std::size_t>(w), 0);  // 0 none, 1 weak, 2 strong
  for (int c = 0; c < w; ++c) {
    const double m = mag[static_cast<std::size_t>(c)];
    const double left = c > 0 ? mag[static_cast<std::size_t>(c - 1)] : 0.0;
    const double right = c + 1 < w ? mag[static_cast<std::size_t>(c + 1)] : 0.0;
    if (!(m > left && m >= right)) continue;
    if (m >= hi)
      cls[static_cast<std::size_t>(c)] = 2;
    else if (m >= lo)
      cls[static_cast<std::size_t>(c)] = 1;
  }
  // Promote weak pixels touching a strong run, both directions.
  for (int pass = 0; pass < 2; ++pass)
    for (int k = 0; k < w; ++k) {
      const int c = pass == 0 ? k : w - 1 - k;
      const int prev = pass == 0 ? c - 1 : c + 1;
      if (cls[static_cast<std::size_t>(c)] == 1 && prev >= 0 && prev < w && cls[static_cast<std::size_t>(prev)] == 2)
        cls[static_cast<std::size_t>(c)] = 2;
    }
  Edges e;
  for (int c = 0; c < w; ++c)
    if (cls[static_cast<std::size_t>(c)] == 2 && gx[static_cast<std::size_t>(c)] > 0) {
      e.le = c + 1;
      break;
    }
  for (int c = w - 1; c >= 0; --c)
    if (cls[static_cast<std::size_t>(c)] == 2 && gx[static_cast<std::size_t>(c)] < 0) {
      e.re = c;
      break;
    }
  if (e.le < 0 || e.re < 0 || e.re < e.le) return {};
  return e;
}

}  // namespace

JetFeatures edge_scan(const Frame& frame, int stride, const ScanOptions& options) {
  require(stride >= 1, "stride must be at least 1");
  require(frame.valid(), "invalid frame");
  const auto t0 = std::chrono::steady_clock::now();

  JetFeatures out;
  out.stride = stride;
  const std::vector<int> rows = scan_rows(frame.collector_row, stride);
  out.rows.reserve(rows.size());
  const double cf2 = frame.cf * frame.cf;
  const double area_factor = options.trapezoid_half_factor ? 0.5 : 1.0;
  const RowFeature* prev = nullptr;
  for (int r : rows) {
    const Edges e = frame.binary ? binary_edges(frame, r) : gradient_edges(frame, r, options.canny_lo, options.canny_hi);
    RowFeature f;
    f.row = r;
    f.le = e.le;
    f.re = e.re;
    f.empty = e.le < 0;
    if (!f.empty) {
      f.diameter_mm = (e.re - e.le) * frame.cf;
      if (prev && !prev->empty) {
        f.area_mm2 = area_factor * ((prev->re - prev->le) + (e.re - e.le)) * stride * cf2;
        f.theta_l = std::atan(static_cast<double>(e.le - prev->le) / stride);
        f.theta_r = std::atan(static_cast<double>(e.re - prev->re) / stride);
      }
    }
    out.rows.push_back(f);
    prev = &out.rows.back();
  }
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  out.processing_time = std::max(dt.count(), 1e-9);
  return out;
}

std::vector<double> jet_velocity(const JetFeatures& prev, const JetFeatures& cur, double cf, double fps) {
  if (prev.rows.size() != cur.rows.size() || prev.stride != cur.stride)
    fail(ErrorCode::RowMismatch, "frames were scanned with different row layouts");
  std::vector<double> u(cur.rows.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (prev.rows[i].row != cur.rows[i].row) fail(ErrorCode::RowMismatch, "scanned rows differ");
    if (prev.rows[i].empty || cur.rows[i].empty)
      u[i] = std::nan("");
    else
      u[i] = (cur.rows[i].re - prev.rows[i].re) * cf * fps;
  }
  return u;
}

double lag_from_frame(const Frame& frame, const JetFeatures& features) {
  if (features.rows.empty()) fail(ErrorCode::NoDeposition, "no scanned rows");
  const RowFeature& bottom = features.rows.back();
  if (bottom.empty) fail(ErrorCode::NoDeposition, "no jet at the last scanned row");
  const double deposition = 0.5 * (bottom.le + bottom.re);
  return (deposition - frame.nozzle_x) * frame.cf;
}

std::string_view to_string(ExecutionMode mode) noexcept {
  switch (mode) {
    case ExecutionMode::Sequential: return "sequential";
    case ExecutionMode::PipelinedIO: return "pipelined-io";
    case ExecutionMode::ParallelScan: return "parallel-scan";
  }
  return "unknown";
}

int worker_cap() {
  if (const char* env = std::getenv("GPJET_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

using Clock = std::chrono::steady_clock;

JetFeatures process_one(const Frame& frame, int stride, const ScanOptions& options) {
  const auto t0 = Clock::now();
  JetFeatures f;
  try {
    f = edge_scan(frame, stride, options);
    f.lag_mm = lag_from_frame(frame, f);
  } catch (const Error& e) {
    f.stride = stride;
    f.error = e.what();
  }
  const std::chrono::duration<double> dt = Clock::now() - t0;
  f.processing_time = std::max(dt.count(), 1e-9);
  return f;
}

template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(T item) {
    std::unique_lock lock(m_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(item));
    not_empty_.notify_one();
  }

  void close() {
    std::lock_guard lock(m_);
    closed_ = true;
    not_empty_.notify_all();
  }

  std::optional<T> pop() {
    std::unique_lock lock(m_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex m_;
  std::condition_variable not_full_, not_empty_;
};

struct Indexed {
  std::size_t index;
  Frame frame;
};

}  // namespace

StreamResult process_stream(const FrameSource& source, int stride, int workers, ExecutionMode mode,
                            const ScanOptions& options) {
  require(workers >= 1, "workers must be at least 1");
  require(stride >= 1, "stride must be at least 1");
  const int n_workers = std::min(workers, worker_cap());

  StreamResult result;
  result.report.mode = mode;
  result.report.workers = mode == ExecutionMode::ParallelScan ? n_workers : 1;
  const auto t0 = Clock::now();

  if (mode == ExecutionMode::Sequential) {
    while (auto frame = source()) result.features.push_back(process_one(*frame, stride, options));
  } else {
    BoundedQueue<Indexed> queue(static_cast<std::size_t>(4 * n_workers + 4));
    std::thread reader([&] {
      std::size_t i = 0;
      while (auto frame = source()) queue.push(Indexed{i++, std::move(*frame)});
      queue.close();
    });
    if (mode == ExecutionMode::PipelinedIO) {
      while (auto item = queue.pop()) result.features.push_back(process_one(item->frame, stride, options));
    } else {
      std::mutex done_m;
      std::map<std::size_t, JetFeatures> done;
      std::vector<std::thread> pool;
      for (int w = 0; w < n_workers; ++w)
        pool.emplace_back([&] {
          while (auto item = queue.pop()) {
            JetFeatures f = process_one(item->frame, stride, options);
            std::lock_guard lock(done_m);
            done.emplace(item->index, std::move(f));
          }
        });
      for (auto& t : pool) t.join();
      for (auto& [i, f] : done) result.features.push_back(std::move(f));
    }
    reader.join();
  }

  const std::chrono::duration<double> wall = Clock::now() - t0;
  ModeReport& rep = result.report;
  rep.frames = result.features.size();
  if (rep.frames > 0) {
    std::vector<double> times;
    for (const auto& f : result.features) times.push_back(f.processing_time);
    double sum = 0.0;
    for (double t : times) sum += t;
    rep.mean_frame_s = sum / static_cast<double>(times.size());
    std::sort(times.begin(), times.end());
    const auto k = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(times.size()))) - 1;
    rep.p95_frame_s = times[std::min(k, times.size() - 1)];
    rep.wall_s = wall.count();
    rep.throughput_frame_s = rep.wall_s / static_cast<double>(rep.frames);
  }
  return result;
}

std::string features_csv(const std::vector<JetFeatures>& stream) {
  std::string out = "frame,row_z_px,diameter_mm,area_mm2,theta_l,theta_r,re_px\n";
  for (std::size_t i = 0; i < stream.size(); ++i)
    for (const RowFeature& r : stream[i].rows) {
      out += std::to_string(i) + ',' + std::to_string(r.row) + ',' + shortest(r.diameter_mm) + ',' +
             shortest(r.area_mm2) + ',' + shortest(r.theta_l) + ',' + shortest(r.theta_r) + ',' + std::to_string(r.re) +
             '\n';
    }
  return out;
}

std::string frames_csv(const std::vector<JetFeatures>& stream) {
  std::string out = "frame,lag_mm,proc_time_s\n";
  for (std::size_t i = 0; i < stream.size(); ++i) {
    out += std::to_string(i) + ',' + (stream[i].lag_mm ? shortest(*stream[i].lag_mm) : std::string()) + ',' +
           shortest(stream[i].processing_time) + '\n';
  }
  return out;
}

}  // namespace gpjet::metrology
