#pragma once

#include <vector>

#include "ami/data/token_batch.hpp"

namespace ami {

struct DataStats {
  double M = 0.0;
  // Minimum over sequences and positions of x_i.x_i - max_{j != i} x_i.x_j.
  // A sequence of a single token contributes +inf.
  double delta = 0.0;
  std::vector<double> mean_token;
};

DataStats measure_stats(const TokenBatch& batch);

// Separation of one sequence given as l tokens of dimension d.
double sequence_separation(const double* tokens, std::size_t l, std::size_t d);

}  // namespace ami
