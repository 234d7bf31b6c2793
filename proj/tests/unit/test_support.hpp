#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "colearn/numerics/dense_vector.hpp"
#include "colearn/numerics/rng.hpp"

namespace test_support {

inline colearn::DenseVector random_vector(std::size_t d, colearn::RngStream& rng, double sd = 1.0) {
  colearn::DenseVector v(d);
  for (double& x : v) x = sd * rng.normal();
  return v;
}

// Reads whitespace separated hex byte pairs; '#' starts a comment line.
inline std::vector<std::uint8_t> read_hex_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(static_cast<std::uint8_t>(std::stoul(tok, nullptr, 16)));
  }
  return out;
}

inline std::string golden_path(const std::string& name) { return std::string(COLEARN_GOLDEN_DIR) + "/" + name; }

}  // namespace test_support
