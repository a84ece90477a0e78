#include "ami/data/token_batch.hpp"

#include <cstring>

#include "ami/core/error.hpp"

namespace ami {

std::string to_string(Source s) {
  switch (s) {
    case Source::OneHot: return "onehot";
    case Source::Spherical: return "spherical";
    case Source::Gaussian: return "gaussian";
    case Source::EmbedFile: return "embed_file";
    case Source::IndexFile: return "index_file";
    case Source::SyntheticVocab: return "synthetic_vocab";
  }
  return "unknown";
}

Source source_from_string(const std::string& s) {
  for (Source v : {Source::OneHot, Source::Spherical, Source::Gaussian, Source::EmbedFile,
                   Source::IndexFile, Source::SyntheticVocab})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown data source '" + s + "'");
}

Matrix TokenBatch::sequence_matrix(std::size_t s) const {
  Matrix x(d, l);
  for (std::size_t t = 0; t < l; ++t)
    for (std::size_t i = 0; i < d; ++i) x(i, t) = token(s, t)[i];
  return x;
}

Vocabulary onehot_vocabulary(std::size_t k) {
  Vocabulary v;
  v.k = k;
  v.d = k;
  v.table = Matrix::identity(k);
  return v;
}

TokenBatch embed_ids(const Vocabulary& vocab, const std::vector<std::uint32_t>& ids, std::size_t n,
                     std::size_t l, Source source) {
  if (ids.size() != n * l) throw ContractError("embed_ids: id count does not match n * l");
  TokenBatch b;
  b.source = source;
  b.n = n;
  b.l = l;
  b.d = vocab.d;
  b.ids = ids;
  b.values.resize(n * l * vocab.d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab.k) throw DomainError("embed_ids: id out of vocabulary range");
    std::memcpy(b.values.data() + i * vocab.d, vocab.embedding(ids[i]), vocab.d * sizeof(double));
  }
  return b;
}

bool same_sequence(const TokenBatch& a, std::size_t sa, const TokenBatch& b, std::size_t sb) {
  if (a.l != b.l || a.d != b.d) return false;
  return std::memcmp(a.sequence(sa), b.sequence(sb), a.seq_stride() * sizeof(double)) == 0;
}

}  // namespace ami
