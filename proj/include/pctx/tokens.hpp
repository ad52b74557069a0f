#pragma once

#include <span>
#include <string>
#include <vector>

namespace pctx {

// Byte-level vocabulary: ids 0..255 are raw bytes, then the two specials.
using TokenSeq = std::vector<int>;

constexpr int kByteVocab = 256;
constexpr int kBosToken = 256;
constexpr int kEosToken = 257;
constexpr int kVocabSize = 258;

inline TokenSeq to_tokens(const std::string& text) {
    TokenSeq out;
    out.reserve(text.size());
    for (unsigned char c : text) out.push_back(static_cast<int>(c));
    return out;
}

// Specials are dropped; byte ids map back 1:1.
inline std::string to_text(std::span<const int> tokens) {
    std::string out;
    out.reserve(tokens.size());
    for (int t : tokens) {
        if (t >= 0 && t < kByteVocab) out.push_back(static_cast<char>(t));
    }
    return out;
}

}  // namespace pctx
