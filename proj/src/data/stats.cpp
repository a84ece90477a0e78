#include "ami/data/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ami/core/error.hpp"

namespace ami {

double sequence_separation(const double* tokens, std::size_t l, std::size_t d) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> g(l * l);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = i; j < l; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += tokens[i * d + k] * tokens[j * d + k];
      g[i * l + j] = g[j * l + i] = s;
    }
  for (std::size_t i = 0; i < l; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < l; ++j)
      if (j != i) mx = std::max(mx, g[i * l + j]);
    best = std::min(best, g[i * l + i] - mx);
  }
  return best;
}

DataStats measure_stats(const TokenBatch& batch) {
  if (batch.n == 0 || batch.l == 0) throw ContractError("measure_stats: empty batch");
  DataStats st;
  st.delta = std::numeric_limits<double>::infinity();
  st.mean_token.assign(batch.d, 0.0);
  for (std::size_t s = 0; s < batch.n; ++s) {
    for (std::size_t t = 0; t < batch.l; ++t) {
      const double* x = batch.token(s, t);
      double nrm = 0.0;
      for (std::size_t k = 0; k < batch.d; ++k) {
        nrm += x[k] * x[k];
        st.mean_token[k] += x[k];
      }
      st.M = std::max(st.M, std::sqrt(nrm));
    }
    st.delta = std::min(st.delta, sequence_separation(batch.sequence(s), batch.l, batch.d));
  }
  const double count = static_cast<double>(batch.n * batch.l);
  for (double& m : st.mean_token) m /= count;
  return st;
}

}  // namespace ami
