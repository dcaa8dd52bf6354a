#include "trend/tokenizer.hpp"

#include <algorithm>
#include <map>

#include "trend/common.hpp"

namespace trend::tokenizer {

namespace {

bool is_word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}
bool is_ws(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
bool is_printable_ascii(unsigned char c) { return c >= '!' && c <= '~'; }

// Length of a reserved speaker token "[S<digits>]" at position i, else 0.
size_t speaker_token_len(const std::string& s, size_t i) {
  if (s[i] != '[' || i + 3 > s.size() || s[i + 1] != 'S') return 0;
  size_t j = i + 2;
  while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
  if (j == i + 2 || j >= s.size() || s[j] != ']') return 0;
  return j + 1 - i;
}

struct Word {
  std::string text;
  int begin;
  int end;
  bool atomic;  // reserved token: never split, never lowercased
};

std::vector<Word> basic_split(const std::string& text) {
  std::vector<Word> words;
  size_t i = 0;
  while (i < text.size()) {
    unsigned char c = text[i];
    if (is_ws(c)) {
      ++i;
      continue;
    }
    size_t sp = speaker_token_len(text, i);
    if (sp > 0) {
      words.push_back({text.substr(i, sp), static_cast<int>(i), static_cast<int>(i + sp), true});
      i += sp;
      continue;
    }
    if (is_word_char(c)) {
      size_t j = i + 1;
      while (j < text.size() && is_word_char(text[j])) ++j;
      words.push_back({text.substr(i, j - i), static_cast<int>(i), static_cast<int>(j), false});
      i = j;
      continue;
    }
    // punctuation or a non-ASCII byte run: single unit per char
    if (c < 0x80) {
      words.push_back({std::string(1, static_cast<char>(c)), static_cast<int>(i),
                       static_cast<int>(i + 1), false});
      ++i;
    } else {
      size_t j = i + 1;
      while (j < text.size() && static_cast<unsigned char>(text[j]) >= 0x80) ++j;
      words.push_back({text.substr(i, j - i), static_cast<int>(i), static_cast<int>(j), false});
      i = j;
    }
  }
  return words;
}

}  // namespace

std::string speaker_token(int k) { return "[S" + std::to_string(k) + "]"; }

void Vocab::push(const std::string& token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

int Vocab::find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

int Vocab::speaker_id(int k) const {
  if (k < 1 || k > speaker_cap_) return -1;
  return 4 + (k - 1);
}

Vocab Vocab::build(const std::vector<std::string>& texts, int speaker_cap, int max_vocab) {
  if (speaker_cap < 1) throw InputError("speaker_cap must be at least 1");
  Vocab v;
  v.speaker_cap_ = speaker_cap;
  v.push("[PAD]");
  v.push("[UNK]");
  v.push("[CLS]");
  v.push("[SEP]");
  for (int k = 1; k <= speaker_cap; ++k) v.push(speaker_token(k));
  for (unsigned char c = '!'; c <= '~'; ++c) v.push(std::string(1, static_cast<char>(c)));
  for (unsigned char c = '!'; c <= '~'; ++c) v.push("##" + std::string(1, static_cast<char>(c)));

  std::map<std::string, long> counts;
  for (const std::string& text : texts) {
    for (const Word& w : basic_split(text)) {
      if (w.atomic) continue;
      std::string lw = lower_ascii(w.text);
      if (lw.size() > 1 && v.find(lw) < 0) ++counts[lw];
    }
  }
  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [word, count] : ranked) {
    if (v.size() >= max_vocab) break;
    v.push(word);
  }
  return v;
}

uint64_t Vocab::fingerprint() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::string& t : tokens_) {
    h = fnv1a64(t.data(), t.size(), h);
    h = fnv1a64("\n", 1, h);
  }
  return h;
}

std::string Vocab::serialize() const {
  std::string out;
  for (const std::string& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

Vocab Vocab::deserialize(const std::string& text) {
  Vocab v;
  for (const std::string& line : split_lines(text)) {
    if (line.empty()) continue;
    v.push(line);
  }
  if (v.size() < 4 || v.tokens_[0] != "[PAD]" || v.tokens_[1] != "[UNK]" ||
      v.tokens_[2] != "[CLS]" || v.tokens_[3] != "[SEP]")
    throw CheckpointError("vocab file is missing the fixed special tokens");
  int cap = 0;
  while (v.find(speaker_token(cap + 1)) == 4 + cap) ++cap;
  if (cap == 0) throw CheckpointError("vocab file has no reserved speaker tokens");
  v.speaker_cap_ = cap;
  return v;
}

std::vector<TokenPiece> tokenize(const Vocab& vocab, const std::string& text) {
  std::vector<TokenPiece> out;
  for (const Word& w : basic_split(text)) {
    if (w.atomic) {
      int id = vocab.find(w.text);
      out.push_back({w.text, id >= 0 ? id : Vocab::kUnk, w.begin, w.end});
      continue;
    }
    bool ascii = true;
    for (char c : w.text)
      if (!is_printable_ascii(static_cast<unsigned char>(c))) ascii = false;
    std::string lw = lower_ascii(w.text);
    if (!ascii) {
      out.push_back({"[UNK]", Vocab::kUnk, w.begin, w.end});
      continue;
    }
    // greedy longest match with character fallback
    size_t start = 0;
    std::vector<TokenPiece> pieces;
    while (start < lw.size()) {
      size_t best = 0;
      int best_id = -1;
      for (size_t end = lw.size(); end > start; --end) {
        std::string sub = lw.substr(start, end - start);
        if (start > 0) sub = "##" + sub;
        int id = vocab.find(sub);
        if (id >= 0) {
          best = end;
          best_id = id;
          break;
        }
      }
      if (best_id < 0) {  // cannot happen for printable ASCII, but stay safe
        pieces.clear();
        pieces.push_back({"[UNK]", Vocab::kUnk, w.begin, w.end});
        break;
      }
      pieces.push_back({vocab.token(best_id), best_id, w.begin + static_cast<int>(start),
                        w.begin + static_cast<int>(best)});
      start = best;
    }
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

}  // namespace trend::tokenizer
