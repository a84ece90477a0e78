#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ami/core/error.hpp"
#include "ami/game/game.hpp"

namespace ami {

double auc_bruteforce(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty()) throw ContractError("auc_bruteforce: both score lists must be nonempty");
  double s = 0.0;
  for (double p : pos)
    for (double q : neg) s += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
  return s / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double auc_rank(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty()) return std::numeric_limits<double>::quiet_NaN();
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> all;
  all.reserve(pos.size() + neg.size());
  for (double p : pos) all.push_back({p, true});
  for (double q : neg) all.push_back({q, false});
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

  // Ranks are 1-based; a run of ties shares the average of its ranks. The
  // sums stay integral or half-integral, so doubles hold them exactly.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (all[t].positive) rank_sum += avg;
    i = j;
  }
  const double np = static_cast<double>(pos.size()), nn = static_cast<double>(neg.size());
  return (rank_sum - np * (np + 1) / 2) / (np * nn);
}

Metrics compute_metrics(const std::vector<GameOutcome>& outcomes) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::vector<double> pos, neg;
  for (const GameOutcome& o : outcomes) {
    if (o.b == 1) {
      pos.push_back(o.score);
      (o.b_prime == 1 ? tp : fn)++;
    } else {
      neg.push_back(o.score);
      (o.b_prime == 0 ? tn : fp)++;
    }
  }
  Metrics m;
  const double total = static_cast<double>(outcomes.size());
  m.acc = total > 0 ? static_cast<double>(tp + tn) / total : nan;
  const std::size_t f1_den = 2 * tp + fp + fn;
  m.f1 = f1_den > 0 ? 2.0 * static_cast<double>(tp) / static_cast<double>(f1_den) : nan;
  m.tpr = pos.empty() ? nan : static_cast<double>(tp) / static_cast<double>(pos.size());
  m.tnr = neg.empty() ? nan : static_cast<double>(tn) / static_cast<double>(neg.size());
  m.advantage = m.tpr + m.tnr - 1.0;
  m.auc = auc_rank(pos, neg);
  return m;
}

}  // namespace ami
