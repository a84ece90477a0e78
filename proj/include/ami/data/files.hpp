#pragma once

#include <string>

#include "ami/data/token_batch.hpp"

namespace ami {

// AMIE: "AMIE", u32 version = 1, u32 count, u32 l, u32 d, then count*l*d f32.
TokenBatch load_embed_file(const std::string& path);
void save_embed_file(const std::string& path, const TokenBatch& batch);

// AMIV: "AMIV", u32 version = 1, u32 k, u32 d, k*d f32, u32 count, u32 l,
// count*l u32 ids.
Vocabulary load_vocab_file(const std::string& path);
void save_vocab_file(const std::string& path, const Vocabulary& vocab);

}  // namespace ami
