#include "ami/data/generators.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string_view>
#include <unordered_map>

#include "ami/core/error.hpp"

namespace ami {
namespace {

// Partial Fisher-Yates: first `take` entries of a uniform permutation of [0, n).
void distinct_indices(Rng& rng, std::size_t n, std::size_t take, std::uint32_t* out) {
  if (take * 4 < n) {
    // Rejection is cheaper than a full index array for sparse draws.
    for (std::size_t i = 0; i < take;) {
      auto v = static_cast<std::uint32_t>(rng.below(n));
      if (std::find(out, out + i, v) == out + i) out[i++] = v;
    }
    return;
  }
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t j = i + rng.below(n - i);
    std::swap(perm[i], perm[j]);
    out[i] = perm[i];
  }
}

class OneHotSource : public SequenceSource {
 public:
  OneHotSource(std::size_t l, std::size_t d) : l_(l), d_(d) {
    if (l > d) throw ConfigError("one-hot data needs l_X <= d_X");
  }
  Source kind() const override { return Source::OneHot; }
  std::size_t l() const override { return l_; }
  std::size_t d() const override { return d_; }
  void draw(Rng& rng, double* values, std::uint32_t*) const override {
    std::vector<std::uint32_t> idx(l_);
    distinct_indices(rng, d_, l_, idx.data());
    std::fill(values, values + l_ * d_, 0.0);
    for (std::size_t t = 0; t < l_; ++t) values[t * d_ + idx[t]] = 1.0;
  }

 private:
  std::size_t l_, d_;
};

class GaussianSource : public SequenceSource {
 public:
  GaussianSource(std::size_t l, std::size_t d, bool normalize) : l_(l), d_(d), normalize_(normalize) {
    if (d == 0) throw ConfigError("d_X must be positive");
    if (normalize && d < 2) throw ConfigError("spherical data needs d_X >= 2");
  }
  Source kind() const override { return normalize_ ? Source::Spherical : Source::Gaussian; }
  std::size_t l() const override { return l_; }
  std::size_t d() const override { return d_; }
  void draw(Rng& rng, double* values, std::uint32_t*) const override {
    for (std::size_t t = 0; t < l_; ++t) {
      double* x = values + t * d_;
      double nrm;
      do {
        nrm = 0.0;
        for (std::size_t i = 0; i < d_; ++i) {
          x[i] = rng.normal();
          nrm += x[i] * x[i];
        }
      } while (normalize_ && nrm == 0.0);
      if (normalize_) {
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < d_; ++i) x[i] /= nrm;
      }
    }
  }

 private:
  std::size_t l_, d_;
  bool normalize_;
};

class VocabSource : public SequenceSource {
 public:
  VocabSource(std::shared_ptr<const Vocabulary> v, std::size_t l, Source kind)
      : vocab_(std::move(v)), l_(l), kind_(kind) {
    if (l_ > vocab_->k) throw ConfigError("l_X exceeds vocabulary size");
  }
  Source kind() const override { return kind_; }
  std::size_t l() const override { return l_; }
  std::size_t d() const override { return vocab_->d; }
  const Vocabulary* vocab() const override { return vocab_.get(); }
  void draw(Rng& rng, double* values, std::uint32_t* ids) const override {
    std::vector<std::uint32_t> idx(l_);
    distinct_indices(rng, vocab_->k, l_, idx.data());
    for (std::size_t t = 0; t < l_; ++t) {
      std::memcpy(values + t * vocab_->d, vocab_->embedding(idx[t]), vocab_->d * sizeof(double));
      if (ids != nullptr) ids[t] = idx[t];
    }
  }

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  std::size_t l_;
  Source kind_;
};

class PoolSource : public SequenceSource {
 public:
  explicit PoolSource(std::shared_ptr<const TokenBatch> pool) : pool_(std::move(pool)) {
    if (pool_->n == 0) throw ConfigError("embedding file holds no sequences");
  }
  Source kind() const override { return Source::EmbedFile; }
  std::size_t l() const override { return pool_->l; }
  std::size_t d() const override { return pool_->d; }
  void draw(Rng& rng, double* values, std::uint32_t*) const override {
    std::size_t s = rng.below(pool_->n);
    std::memcpy(values, pool_->sequence(s), pool_->seq_stride() * sizeof(double));
  }

 private:
  std::shared_ptr<const TokenBatch> pool_;
};

class IdPoolSource : public SequenceSource {
 public:
  explicit IdPoolSource(std::shared_ptr<const Vocabulary> v) : vocab_(std::move(v)) {
    if (vocab_->count == 0) throw ConfigError("vocabulary file holds no id sequences");
  }
  Source kind() const override { return Source::IndexFile; }
  std::size_t l() const override { return vocab_->l; }
  std::size_t d() const override { return vocab_->d; }
  const Vocabulary* vocab() const override { return vocab_.get(); }
  void draw(Rng& rng, double* values, std::uint32_t* ids) const override {
    std::size_t s = rng.below(vocab_->count);
    for (std::size_t t = 0; t < vocab_->l; ++t) {
      std::uint32_t id = vocab_->token_ids[s * vocab_->l + t];
      std::memcpy(values + t * vocab_->d, vocab_->embedding(id), vocab_->d * sizeof(double));
      if (ids != nullptr) ids[t] = id;
    }
  }

 private:
  std::shared_ptr<const Vocabulary> vocab_;
};

}  // namespace

std::unique_ptr<SequenceSource> make_onehot_source(std::size_t l, std::size_t d) {
  return std::make_unique<OneHotSource>(l, d);
}
std::unique_ptr<SequenceSource> make_spherical_source(std::size_t l, std::size_t d) {
  return std::make_unique<GaussianSource>(l, d, true);
}
std::unique_ptr<SequenceSource> make_gaussian_source(std::size_t l, std::size_t d) {
  return std::make_unique<GaussianSource>(l, d, false);
}
std::unique_ptr<SequenceSource> make_vocab_source(std::shared_ptr<const Vocabulary> vocab,
                                                  std::size_t l, Source kind) {
  return std::make_unique<VocabSource>(std::move(vocab), l, kind);
}
std::unique_ptr<SequenceSource> make_pool_source(std::shared_ptr<const TokenBatch> pool) {
  return std::make_unique<PoolSource>(std::move(pool));
}
std::unique_ptr<SequenceSource> make_id_pool_source(std::shared_ptr<const Vocabulary> vocab) {
  return std::make_unique<IdPoolSource>(std::move(vocab));
}

TokenBatch sample_distinct(const SequenceSource& src, std::size_t n, Rng& rng) {
  TokenBatch b;
  b.source = src.kind();
  b.n = n;
  b.l = src.l();
  b.d = src.d();
  b.values.resize(n * b.l * b.d);
  const bool with_ids = src.vocab() != nullptr;
  if (with_ids) b.ids.resize(n * b.l);

  std::unordered_multimap<std::size_t, std::size_t> seen;
  const std::size_t bytes = b.seq_stride() * sizeof(double);
  std::size_t rejected = 0;
  for (std::size_t s = 0; s < n;) {
    double* x = b.sequence(s);
    src.draw(rng, x, with_ids ? b.ids.data() + s * b.l : nullptr);
    std::size_t h = std::hash<std::string_view>{}(std::string_view(reinterpret_cast<const char*>(x), bytes));
    bool dup = false;
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi && !dup; ++it) dup = std::memcmp(b.sequence(it->second), x, bytes) == 0;
    if (dup) {
      if (++rejected > kResampleCap)
        throw ConfigError("could not draw " + std::to_string(n) +
                          " distinct sequences; the data domain is too small");
      continue;
    }
    seen.emplace(h, s);
    ++s;
  }
  return b;
}

TokenBatch gen_onehot(std::size_t n, std::size_t l, std::size_t d, Rng& rng) {
  return sample_distinct(OneHotSource(l, d), n, rng);
}
TokenBatch gen_spherical(std::size_t n, std::size_t l, std::size_t d, Rng& rng) {
  return sample_distinct(GaussianSource(l, d, true), n, rng);
}
TokenBatch gen_gaussian(std::size_t n, std::size_t l, std::size_t d, Rng& rng) {
  return sample_distinct(GaussianSource(l, d, false), n, rng);
}

}  // namespace ami
