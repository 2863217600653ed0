#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "gpjet/errors.hpp"
#include "gpjet/metrology.hpp"

namespace gpjet::metrology {

void write_pgm(const std::string& path, const Frame& frame) {
  require(frame.valid(), "invalid frame");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

}  // namespace

Frame read_pgm(const std::string& path, const Geometry& geometry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  if (header_token(in) != "P5") fail(ErrorCode::IoError, path + " is not a binary PGM");
  Frame f;
  try {
    f.width = std::stoi(header_token(in));
    f.height = std::stoi(header_token(in));
    if (std::stoi(header_token(in)) != 255) fail(ErrorCode::IoError, "only 8-bit PGM is supported");
  } catch (const std::logic_error&) {
    fail(ErrorCode::IoError, "malformed PGM header in " + path);
  }
  if (f.width <= 0 || f.height <= 0) fail(ErrorCode::IoError, "bad PGM dimensions");
  f.pixels.resize(static_cast<std::size_t>(f.width) * static_cast<std::size_t>(f.height));
  in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(f.pixels.size())) fail(ErrorCode::IoError, "truncated PGM data");
  f.cf = geometry.cf;
  f.fps = geometry.fps;
  f.nozzle_x = geometry.nozzle_x;
  f.collector_row = geometry.collector_row;
  f.binary = std::all_of(f.pixels.begin(), f.pixels.end(), [](std::uint8_t p) { return p == 0 || p == 255; });
  return f;
}

}  // namespace gpjet::metrology
