#pragma once

#include <memory>

#include "ami/core/rng.hpp"
#include "ami/data/token_batch.hpp"

namespace ami {

inline constexpr std::size_t kResampleCap = 10000;

// Draws single sequences. Implementations are immutable and may be shared
// across threads; all randomness comes from the caller's Rng.
class SequenceSource {
 public:
  virtual ~SequenceSource() = default;
  virtual Source kind() const = 0;
  virtual std::size_t l() const = 0;
  virtual std::size_t d() const = 0;
  // Writes l * d values and, when vocab() is set, l ids.
  virtual void draw(Rng& rng, double* values, std::uint32_t* ids) const = 0;
  virtual const Vocabulary* vocab() const { return nullptr; }
};

std::unique_ptr<SequenceSource> make_onehot_source(std::size_t l, std::size_t d);
std::unique_ptr<SequenceSource> make_spherical_source(std::size_t l, std::size_t d);
std::unique_ptr<SequenceSource> make_gaussian_source(std::size_t l, std::size_t d);
// Tokens are l distinct ids drawn uniformly from the vocabulary.
std::unique_ptr<SequenceSource> make_vocab_source(std::shared_ptr<const Vocabulary> vocab,
                                                  std::size_t l, Source kind);
// Uniform rows of a fixed pool (AMIE contents, or AMIV id sequences).
std::unique_ptr<SequenceSource> make_pool_source(std::shared_ptr<const TokenBatch> pool);
std::unique_ptr<SequenceSource> make_id_pool_source(std::shared_ptr<const Vocabulary> vocab);

// n pairwise distinct sequences. Throws ConfigError after kResampleCap
// rejected draws.
TokenBatch sample_distinct(const SequenceSource& src, std::size_t n, Rng& rng);

TokenBatch gen_onehot(std::size_t n, std::size_t l, std::size_t d, Rng& rng);
TokenBatch gen_spherical(std::size_t n, std::size_t l, std::size_t d, Rng& rng);
TokenBatch gen_gaussian(std::size_t n, std::size_t l, std::size_t d, Rng& rng);

}  // namespace ami
