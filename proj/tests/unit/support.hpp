#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "gpjet/errors.hpp"

namespace support {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string data_path(const std::string& name) { return std::string(GPJET_TEST_DATA_DIR) + "/" + name; }

/// Runs `f` and returns the error code it throws; fails the test if it does not throw.
template <class F>
gpjet::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const gpjet::Error& e) {
    return e.code();
  }
  FAIL("expected a gpjet::Error");
  return gpjet::ErrorCode::InvalidArgument;
}

}  // namespace support
