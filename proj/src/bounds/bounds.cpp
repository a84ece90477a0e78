#include "ami/bounds/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ami/attack/attn_attack.hpp"
#include "ami/core/error.hpp"
#include "ami/core/parallel.hpp"

namespace ami {
namespace {

void check_source(Source s) {
  if (s != Source::OneHot && s != Source::Spherical && s != Source::Gaussian)
    throw ConfigError("bounds: source '" + to_string(s) + "' has no sampler; use onehot, spherical or gaussian");
}

// One token. For one-hot, `avoid` is an index the draw must differ from
// (pairs are conditioned on being distinct); pass d to disable.
std::size_t draw_token(Source s, std::size_t d, Rng& rng, double* x, std::size_t avoid) {
  if (s == Source::OneHot) {
    std::size_t i = avoid < d ? rng.below(d - 1) : rng.below(d);
    if (avoid < d && i >= avoid) ++i;
    std::fill(x, x + d, 0.0);
    x[i] = 1.0;
    return i;
  }
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = rng.normal();
      norm2 += x[j] * x[j];
    }
  } while (norm2 == 0.0);
  if (s == Source::Spherical) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t j = 0; j < d; ++j) x[j] *= inv;
  }
  return d;
}

double fraction_le(const std::vector<double>& sorted, double t) {
  if (sorted.empty()) return 0.0;
  auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

}  // namespace

BoundSamples BoundSamples::draw(Source source, std::size_t d, std::size_t samples, std::uint64_t seed,
                                bool parallel) {
  check_source(source);
  if (d < 2) throw ConfigError("bounds: d_X must be at least 2");
  if (samples == 0) throw ConfigError("bounds: samples must be positive");
  BoundSamples out;
  out.source_ = source;
  out.d_ = d;
  out.proj_.resize(samples);
  out.box_.resize(samples);
  // The mean is known by symmetry: zero, or the uniform centroid for one-hot.
  const double mu = source == Source::OneHot ? 1.0 / static_cast<double>(d) : 0.0;
  const std::size_t chunks = (samples + kBoundChunk - 1) / kBoundChunk;

#pragma omp parallel for schedule(dynamic, 1) if (parallel && !in_parallel())
  for (std::size_t c = 0; c < chunks; ++c) {
    Rng rng(derive_seed(seed, c, Stream::Bounds));
    std::vector<double> x(d), v(d);
    const std::size_t end = std::min(samples, (c + 1) * kBoundChunk);
    for (std::size_t i = c * kBoundChunk; i < end; ++i) {
      std::size_t vi = draw_token(source, d, rng, v.data(), d);
      draw_token(source, d, rng, x.data(), vi);
      double dot = 0.0, vv = 0.0, box = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        dot += x[j] * v[j];
        vv += v[j] * v[j];
        box = std::max(box, std::abs(x[j] - mu));
      }
      out.proj_[i] = std::abs(dot) / std::sqrt(vv);
      out.box_[i] = box;
    }
  }
  std::sort(out.proj_.begin(), out.proj_.end());
  std::sort(out.box_.begin(), out.box_.end());
  return out;
}

double BoundSamples::p_proj(double delta) const { return fraction_le(proj_, delta); }
double BoundSamples::p_box(double half_width) const { return fraction_le(box_, half_width); }

double BoundSamples::p_proj_iid(double delta) const {
  if (source_ != Source::OneHot) return p_proj(delta);
  // Without conditioning, x = v with probability 1/d and then |x.v| = 1.
  const double same = 1.0 / static_cast<double>(d_);
  return (1.0 - same) * p_proj(delta) + same * (delta >= 1.0 ? 1.0 : 0.0);
}

double estimate_p_proj(Source source, std::size_t d, double delta, std::size_t samples, Rng& rng) {
  return BoundSamples::draw(source, d, samples, rng.engine()()).p_proj(delta);
}

double estimate_p_box(Source source, std::size_t d, double half_width, std::size_t samples, Rng& rng) {
  return BoundSamples::draw(source, d, samples, rng.engine()()).p_box(half_width);
}

double eval_lower_bound(double p_proj, double p_box, std::size_t n, std::size_t l) {
  if (!(p_proj >= 0 && p_proj <= 1 && p_box >= 0 && p_box <= 1))
    throw ContractError("eval_lower_bound: probabilities must lie in [0, 1]");
  return p_proj + std::pow(p_proj, 2.0 * static_cast<double>(n) * static_cast<double>(l)) - p_box - 1.0;
}

Condition check_condition(double delta, double beta, std::size_t l, double M) {
  const double lb = beta * static_cast<double>(l);
  const double rhs =
      2.0 / lb + std::log(2.0 * static_cast<double>(l - 1) * static_cast<double>(l) * beta * M * M) / beta;
  Condition c;
  if (!(rhs > 0.0)) {
    c.ratio = std::numeric_limits<double>::infinity();
  } else {
    c.ratio = delta / rhs;
  }
  c.holds = c.ratio >= 1.0;
  return c;
}

TypicalStats typical_stats(Source source, std::size_t d) {
  check_source(source);
  if (source == Source::Gaussian) return {static_cast<double>(d), std::sqrt(static_cast<double>(d))};
  return {1.0, 1.0};
}

double BetaRule::value(Source source, std::size_t d) const {
  if (fixed) return *fixed;
  return source == Source::Gaussian ? 10.0 / static_cast<double>(d) : 10.0;
}

BoundEstimate evaluate_bound(const BoundSamples& s, std::size_t l, std::size_t n, double beta) {
  if (l < 1 || n < 1 || !(beta > 0)) throw ConfigError("bounds: l_X, n and beta must be positive");
  BoundEstimate e;
  e.source = s.source();
  e.d = s.d();
  e.l = l;
  e.n = n;
  e.beta = beta;
  TypicalStats ts = typical_stats(e.source, e.d);
  e.delta = ts.delta;
  e.M = ts.M;
  const double arg = 1.0 / (beta * static_cast<double>(l) * ts.M);
  e.bar_delta = compute_bar_delta(ts.M, l, beta, ts.delta);
  e.p_proj = s.p_proj(arg);
  e.p_proj_iid = s.p_proj_iid(arg);
  e.p_box = s.p_box(3.0 * e.bar_delta);
  e.lower_bound = eval_lower_bound(e.p_proj, e.p_box, n, l);
  Condition c = check_condition(ts.delta, beta, l, ts.M);
  e.condition_ratio = c.ratio;
  e.condition_holds = c.holds;
  e.samples = s.size();
  const double N = static_cast<double>(e.samples);
  e.p_proj_sigma3 = 3.0 * std::sqrt(e.p_proj * (1.0 - e.p_proj) / N);
  e.p_box_sigma3 = 3.0 * std::sqrt(e.p_box * (1.0 - e.p_box) / N);
  return e;
}

std::vector<BoundEstimate> sweep_bounds(const BoundGridConfig& cfg) {
  if (cfg.sources.empty() || cfg.l_list.empty() || cfg.d_list.empty())
    throw ConfigError("bounds: sources, l_X and d_X lists must be nonempty");
  std::vector<BoundEstimate> rows;
  std::uint64_t point = 0;
  for (Source src : cfg.sources) {
    for (std::size_t d : cfg.d_list) {
      // One sample set per (source, d); the l_X values reuse it.
      BoundSamples s = BoundSamples::draw(src, d, cfg.samples, derive_seed(cfg.seed, point++));
      for (std::size_t l : cfg.l_list) rows.push_back(evaluate_bound(s, l, cfg.n, cfg.beta.value(src, d)));
    }
  }
  return rows;
}

}  // namespace ami
