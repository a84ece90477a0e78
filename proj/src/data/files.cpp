#include "ami/data/files.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "ami/core/error.hpp"

namespace ami {
namespace {

static_assert(std::endian::native == std::endian::little, "AMIE/AMIV readers assume a little-endian host");

class Reader {
 public:
  explicit Reader(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'", 0);
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  void magic(const char* want) {
    need(4, std::string("magic ") + want);
    if (std::memcmp(buf_.data(), want, 4) != 0) throw FormatError(std::string("bad magic, expected ") + want, 0);
    pos_ = 4;
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, buf_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }

  void f32s(std::size_t count, double* out, const char* what) {
    need(count * 4, what);
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, buf_.data() + pos_ + i * 4, 4);
      out[i] = f;
    }
    pos_ += count * 4;
  }

  void u32s(std::size_t count, std::uint32_t* out, const char* what) {
    need(count * 4, what);
    std::memcpy(out, buf_.data() + pos_, count * 4);
    pos_ += count * 4;
  }

  void finish() const {
    if (pos_ != buf_.size()) throw FormatError("dimension mismatch: trailing bytes after payload", pos_);
  }

 private:
  void need(std::size_t bytes, const std::string& what) const {
    if (buf_.size() - pos_ < bytes) throw FormatError("truncated while reading " + what, pos_);
  }

  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw FormatError("cannot create '" + path + "'", 0);
  }
  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u32(std::size_t v) {
    if (v > 0xffffffffu) throw ContractError("value does not fit in u32");
    auto x = static_cast<std::uint32_t>(v);
    raw(&x, 4);
  }
  void f32(double v) {
    auto f = static_cast<float>(v);
    raw(&f, 4);
  }
  void close() {
    out_.close();
    if (!out_) throw FormatError("write failed", 0);
  }

 private:
  std::ofstream out_;
};

}  // namespace

TokenBatch load_embed_file(const std::string& path) {
  Reader r(path);
  r.magic("AMIE");
  if (r.u32("version") != 1) throw FormatError("unsupported AMIE version", 4);
  TokenBatch b;
  b.source = Source::EmbedFile;
  b.n = r.u32("count");
  b.l = r.u32("l_X");
  b.d = r.u32("d_X");
  b.values.resize(b.n * b.l * b.d);
  r.f32s(b.values.size(), b.values.data(), "embedding payload");
  r.finish();
  return b;
}

void save_embed_file(const std::string& path, const TokenBatch& batch) {
  Writer w(path);
  w.raw("AMIE", 4);
  w.u32(1);
  w.u32(batch.n);
  w.u32(batch.l);
  w.u32(batch.d);
  for (double v : batch.values) w.f32(v);
  w.close();
}

Vocabulary load_vocab_file(const std::string& path) {
  Reader r(path);
  r.magic("AMIV");
  if (r.u32("version") != 1) throw FormatError("unsupported AMIV version", 4);
  Vocabulary v;
  v.k = r.u32("k");
  v.d = r.u32("d_X");
  v.table = Matrix(v.k, v.d);
  r.f32s(v.k * v.d, v.table.data(), "embedding table");
  v.count = r.u32("count");
  v.l = r.u32("l_X");
  v.token_ids.resize(v.count * v.l);
  r.u32s(v.token_ids.size(), v.token_ids.data(), "token ids");
  r.finish();
  const std::size_t ids_at = 16 + v.k * v.d * 4 + 8;
  for (std::size_t i = 0; i < v.token_ids.size(); ++i)
    if (v.token_ids[i] >= v.k)
      throw FormatError("token id " + std::to_string(v.token_ids[i]) + " outside vocabulary", ids_at + 4 * i);
  return v;
}

void save_vocab_file(const std::string& path, const Vocabulary& vocab) {
  Writer w(path);
  w.raw("AMIV", 4);
  w.u32(1);
  w.u32(vocab.k);
  w.u32(vocab.d);
  for (std::size_t i = 0; i < vocab.table.size(); ++i) w.f32(vocab.table.data()[i]);
  w.u32(vocab.count);
  w.u32(vocab.l);
  w.raw(vocab.token_ids.data(), vocab.token_ids.size() * 4);
  w.close();
}

}  // namespace ami
