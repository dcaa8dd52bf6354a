#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace trend::tokenizer {

// Uncased subword vocabulary: fixed specials, printable-ASCII character
// fallback pieces, then corpus words by frequency.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  static Vocab build(const std::vector<std::string>& texts, int speaker_cap = 9,
                     int max_vocab = 30000);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const { return tokens_[static_cast<size_t>(id)]; }
  int find(const std::string& token) const;  // -1 when absent
  int speaker_cap() const { return speaker_cap_; }
  // Token id of reserved speaker k (1-based), -1 beyond the cap.
  int speaker_id(int k) const;

  uint64_t fingerprint() const;
  std::string serialize() const;
  static Vocab deserialize(const std::string& text);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int speaker_cap_ = 0;

  void push(const std::string& token);
};

// One subword with its half-open character range in the source text.
// Continuation pieces carry the "##" marker in `text` but offsets cover
// only the characters they stand for.
struct TokenPiece {
  std::string text;
  int id = 0;
  int begin = 0;
  int end = 0;
};

// Lowercasing greedy longest-match tokenization. Reserved speaker tokens
// "[S1]".."[Sk]" are atomic; unknown non-ASCII spans become [UNK].
std::vector<TokenPiece> tokenize(const Vocab& vocab, const std::string& text);

// Reserved speaker token surface form for index k (1-based).
std::string speaker_token(int k);

}  // namespace trend::tokenizer
