#pragma once

#include <map>
#include <string>
#include <vector>

#include "ami/linalg/matrix.hpp"

namespace ami {

// Client-computed gradients. `score` is the largest |entry| over the
// parameters listed in `monitored`.
struct GradientReport {
  std::map<std::string, Matrix> grads;
  std::vector<std::string> monitored;
  double score = 0.0;

  const Matrix& at(const std::string& name) const;
  void rescore();
};

// Floating-point guard for "non-zero gradient".
inline constexpr double kEta = 1e-9;

}  // namespace ami
