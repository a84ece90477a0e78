#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ami/linalg/matrix.hpp"

namespace ami {

enum class Source { OneHot, Spherical, Gaussian, EmbedFile, IndexFile, SyntheticVocab };

std::string to_string(Source s);
Source source_from_string(const std::string& s);

// n sequences of l tokens of dimension d, stored [sequence][token][dim].
struct TokenBatch {
  Source source = Source::Gaussian;
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t d = 0;
  std::vector<double> values;
  // Vocabulary indices, n * l, when the batch was embedded from a vocabulary.
  std::vector<std::uint32_t> ids;

  bool has_ids() const { return !ids.empty(); }
  std::size_t seq_stride() const { return l * d; }
  const double* sequence(std::size_t s) const { return values.data() + s * seq_stride(); }
  double* sequence(std::size_t s) { return values.data() + s * seq_stride(); }
  const double* token(std::size_t s, std::size_t t) const { return sequence(s) + t * d; }
  const std::uint32_t* sequence_ids(std::size_t s) const { return ids.data() + s * l; }

  // Sequence s as a d x l matrix (tokens are columns).
  Matrix sequence_matrix(std::size_t s) const;
};

struct Vocabulary {
  std::size_t k = 0;
  std::size_t d = 0;
  Matrix table;  // k x d
  // Optional id sequences shipped with an AMIV file.
  std::size_t count = 0;
  std::size_t l = 0;
  std::vector<std::uint32_t> token_ids;

  const double* embedding(std::uint32_t id) const { return table.row(id); }
};

Vocabulary onehot_vocabulary(std::size_t k);

// Looks up ids (n * l, all < k) in the table.
TokenBatch embed_ids(const Vocabulary& vocab, const std::vector<std::uint32_t>& ids, std::size_t n,
                     std::size_t l, Source source);

bool same_sequence(const TokenBatch& a, std::size_t sa, const TokenBatch& b, std::size_t sb);

}  // namespace ami
