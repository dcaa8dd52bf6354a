#include "trend/text.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "trend/common.hpp"

namespace trend::text {

namespace {

bool is_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

// Full-token contraction lexicon, keys lowercase with ASCII apostrophes.
const std::unordered_map<std::string, std::string>& contractions() {
  static const std::unordered_map<std::string, std::string> table{
      {"ain't", "is not"},        {"aren't", "are not"},
      {"can't", "cannot"},        {"couldn't", "could not"},
      {"didn't", "did not"},      {"doesn't", "does not"},
      {"don't", "do not"},        {"hadn't", "had not"},
      {"hasn't", "has not"},      {"haven't", "have not"},
      {"isn't", "is not"},        {"mightn't", "might not"},
      {"mustn't", "must not"},    {"needn't", "need not"},
      {"shan't", "shall not"},    {"shouldn't", "should not"},
      {"wasn't", "was not"},      {"weren't", "were not"},
      {"won't", "will not"},      {"wouldn't", "would not"},
      {"i'm", "i am"},            {"i've", "i have"},
      {"i'll", "i will"},         {"i'd", "i would"},
      {"you're", "you are"},      {"you've", "you have"},
      {"you'll", "you will"},     {"you'd", "you would"},
      {"he's", "he is"},          {"he'll", "he will"},
      {"he'd", "he would"},       {"she's", "she is"},
      {"she'll", "she will"},     {"she'd", "she would"},
      {"it's", "it is"},          {"it'll", "it will"},
      {"it'd", "it would"},       {"we're", "we are"},
      {"we've", "we have"},       {"we'll", "we will"},
      {"we'd", "we would"},       {"they're", "they are"},
      {"they've", "they have"},   {"they'll", "they will"},
      {"they'd", "they would"},   {"that's", "that is"},
      {"that'll", "that will"},   {"there's", "there is"},
      {"there'll", "there will"}, {"here's", "here is"},
      {"what's", "what is"},      {"what're", "what are"},
      {"what'll", "what will"},   {"who's", "who is"},
      {"who're", "who are"},      {"who'll", "who will"},
      {"where's", "where is"},    {"when's", "when is"},
      {"why's", "why is"},        {"how's", "how is"},
      {"let's", "let us"},        {"ma'am", "madam"},
      {"y'all", "you all"},       {"c'mon", "come on"},
      {"could've", "could have"}, {"should've", "should have"},
      {"would've", "would have"}, {"might've", "might have"},
      {"must've", "must have"},   {"gonna", "going to"},
      {"wanna", "want to"},       {"gotta", "got to"},
      {"lemme", "let me"},        {"dunno", "do not know"},
  };
  return table;
}

const std::unordered_map<std::string, std::string>& irregular_lemmas() {
  static const std::unordered_map<std::string, std::string> table{
      {"am", "be"},          {"is", "be"},           {"are", "be"},
      {"was", "be"},         {"were", "be"},         {"been", "be"},
      {"being", "be"},       {"has", "have"},        {"had", "have"},
      {"having", "have"},    {"does", "do"},         {"did", "do"},
      {"done", "do"},        {"doing", "do"},        {"goes", "go"},
      {"went", "go"},        {"gone", "go"},         {"going", "go"},
      {"dying", "die"},      {"lying", "lie"},       {"tying", "tie"},
      {"said", "say"},       {"made", "make"},
      {"got", "get"},        {"gotten", "get"},      {"took", "take"},
      {"taken", "take"},     {"knew", "know"},       {"known", "know"},
      {"saw", "see"},        {"seen", "see"},        {"came", "come"},
      {"gave", "give"},      {"given", "give"},      {"told", "tell"},
      {"thought", "think"},  {"felt", "feel"},       {"met", "meet"},
      {"kept", "keep"},      {"found", "find"},      {"heard", "hear"},
      {"held", "hold"},      {"brought", "bring"},   {"bought", "buy"},
      {"spoke", "speak"},    {"spoken", "speak"},    {"wrote", "write"},
      {"written", "write"},  {"ran", "run"},         {"ate", "eat"},
      {"eaten", "eat"},      {"drank", "drink"},     {"drunk", "drink"},
      {"sang", "sing"},      {"sung", "sing"},       {"began", "begin"},
      {"begun", "begin"},    {"broke", "break"},     {"broken", "break"},
      {"chose", "choose"},   {"chosen", "choose"},   {"drove", "drive"},
      {"driven", "drive"},   {"fell", "fall"},       {"fallen", "fall"},
      {"flew", "fly"},       {"flown", "fly"},       {"forgot", "forget"},
      {"forgotten", "forget"}, {"lost", "lose"},     {"paid", "pay"},
      {"sent", "send"},      {"sold", "sell"},       {"spent", "spend"},
      {"stood", "stand"},    {"understood", "understand"},
      {"wore", "wear"},      {"worn", "wear"},       {"won", "win"},
      {"men", "man"},        {"women", "woman"},     {"children", "child"},
      {"feet", "foot"},      {"teeth", "tooth"},     {"mice", "mouse"},
      {"wives", "wife"},     {"knives", "knife"},    {"wolves", "wolf"},
      {"shelves", "shelf"},  {"movies", "movie"},    {"cookies", "cookie"},
      {"shoes", "shoe"},     {"used", "use"},        {"aches", "ache"},
      {"headaches", "headache"},
  };
  return table;
}

// Words the suffix rules would mangle; returned untouched.
const std::unordered_set<std::string>& keep_words() {
  static const std::unordered_set<std::string> table{
      "need",       "feed",      "indeed",     "hundred",   "naked",
      "wicked",     "sacred",    "thing",      "anything",  "everything",
      "nothing",    "something", "morning",    "evening",   "ceiling",
      "darling",    "wedding",   "during",     "news",      "clothes",
      "themselves", "ourselves", "yourselves", "series",    "species",
      "always",     "perhaps",   "sometimes",  "besides",   "towards",
      "afterwards", "backwards", "forwards",   "upstairs",  "downstairs",
      "outdoors",   "indoors",   "whereas",    "nowadays",  "anyways",
  };
  return table;
}

bool is_cons(const std::string& w, int i) {
  char c = w[static_cast<size_t>(i)];
  if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return false;
  if (c == 'y') return i == 0 ? true : !is_cons(w, i - 1);
  return true;
}

// Porter's measure: number of vowel-to-consonant transitions.
int measure(const std::string& w) {
  int m = 0;
  bool prev_vowel = false;
  for (int i = 0; i < static_cast<int>(w.size()); ++i) {
    bool v = !is_cons(w, i);
    if (!v && prev_vowel) ++m;
    prev_vowel = v;
  }
  return m;
}

bool contains_vowel(const std::string& w) {
  for (int i = 0; i < static_cast<int>(w.size()); ++i)
    if (!is_cons(w, i)) return true;
  return false;
}

// consonant-vowel-consonant ending, last consonant not w/x/y
bool ends_cvc(const std::string& w) {
  int n = static_cast<int>(w.size());
  if (n < 3) return false;
  char last = w[static_cast<size_t>(n - 1)];
  if (last == 'w' || last == 'x' || last == 'y') return false;
  return is_cons(w, n - 1) && !is_cons(w, n - 2) && is_cons(w, n - 3);
}

// Repairs a stem after stripping -ed/-ing: undoubles consonants and
// restores silent e where the shape calls for it.
std::string fixup_stem(std::string stem) {
  size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && is_cons(stem, static_cast<int>(n) - 1) &&
      stem[n - 1] != 'l' && stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  char last = stem[n - 1];
  if (last == 'c' || last == 'g' || last == 'v' || last == 'u') return stem + "e";
  // single trailing s (raised -> raise); also keeps the stem a fixed point
  if (last == 's' && stem[n - 2] != 's') return stem + "e";
  if (ends_cvc(stem) && measure(stem) == 1) return stem + "e";
  return stem;
}

bool all_lower_alpha(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < 'a' || c > 'z') return false;
  return true;
}

// Lemmatize each lowercase word of a space-joined phrase.
std::string lemmatize_phrase(const std::string& phrase) {
  std::string out;
  size_t i = 0;
  while (i < phrase.size()) {
    size_t j = phrase.find(' ', i);
    if (j == std::string::npos) j = phrase.size();
    std::string word = phrase.substr(i, j - i);
    if (!out.empty()) out += ' ';
    out += all_lower_alpha(word) ? lemmatize_word(word) : word;
    i = j + 1;
  }
  return out;
}

}  // namespace

namespace {

std::string lemmatize_once(const std::string& w) {
  {
    auto it = irregular_lemmas().find(w);
    if (it != irregular_lemmas().end()) return it->second;
  }
  if (keep_words().count(w)) return w;
  size_t n = w.size();
  if (n < 3) return w;

  auto tail = [&](size_t k) { return w.substr(n - k); };
  auto drop = [&](size_t k) { return w.substr(0, n - k); };

  if (n >= 5 && tail(3) == "ies") return drop(3) + "y";
  if (tail(3) == "ied") return n >= 5 ? drop(3) + "y" : drop(1);
  if (n >= 5 && tail(4) == "sses") return drop(2);
  if (n >= 4 && (tail(3) == "xes" || (n >= 5 && (tail(4) == "shes" || tail(4) == "ches" ||
                                                 tail(4) == "zzes"))))
    return drop(2);
  if (n >= 4 && w.back() == 's' && tail(2) != "ss" && tail(2) != "us" && tail(2) != "is")
    return drop(1);
  if (tail(3) == "eed") return measure(drop(3)) > 0 ? drop(1) : w;
  if (tail(2) == "ed" && n >= 4 && contains_vowel(drop(2))) return fixup_stem(drop(2));
  if (tail(3) == "ing" && n >= 6 && contains_vowel(drop(3))) return fixup_stem(drop(3));
  return w;
}

}  // namespace

std::string lemmatize_word(const std::string& w) {
  // Iterate to a fixed point so lemmas survive re-lemmatization; the rule
  // set shrinks the word, so this terminates.
  std::string cur = w;
  for (size_t i = 0; i <= w.size() + 1; ++i) {
    std::string next = lemmatize_once(cur);
    if (next == cur) return cur;
    cur = std::move(next);
  }
  return cur;
}

namespace {

// One scanned token: letters plus internal apostrophes, with its source
// byte range. `canon` has the UTF-8 right single quote folded to '.
struct Token {
  std::string canon;
  size_t begin = 0;
  size_t end = 0;
  bool altered = false;  // canon differs from the raw bytes
};

// Length of an apostrophe at position i (ASCII ' or UTF-8 ’), else 0.
size_t apostrophe_len(const std::string& s, size_t i) {
  if (s[i] == '\'') return 1;
  if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xe2 &&
      static_cast<unsigned char>(s[i + 1]) == 0x80 &&
      static_cast<unsigned char>(s[i + 2]) == 0x99)
    return 3;
  return 0;
}

Token scan_token(const std::string& raw, size_t i) {
  Token t;
  t.begin = i;
  size_t j = i;
  while (j < raw.size()) {
    if (is_alpha(raw[j])) {
      t.canon += raw[j];
      ++j;
      continue;
    }
    size_t al = apostrophe_len(raw, j);
    if (al > 0 && !t.canon.empty() && j + al < raw.size() && is_alpha(raw[j + al])) {
      t.canon += '\'';
      if (al != 1) t.altered = true;
      j += al;
      continue;
    }
    break;
  }
  t.end = j;
  return t;
}

// Replacement for a scanned token, or the token itself when untouched.
std::string rewrite_token(const Token& t) {
  std::string lower = lower_ascii(t.canon);
  {
    auto it = contractions().find(lower);
    if (it != contractions().end()) return lemmatize_phrase(it->second);
  }
  if (lower.find('\'') != std::string::npos) {
    auto suffix_expand = [&](const std::string& suf,
                             const std::string& word) -> std::string {
      if (lower.size() > suf.size() && ends_with(lower, suf)) {
        std::string stem = lower.substr(0, lower.size() - suf.size());
        if (all_lower_alpha(stem)) return lemmatize_phrase(stem) + " " + word;
      }
      return "";
    };
    static const std::pair<const char*, const char*> kSuffixes[] = {
        {"n't", "not"}, {"'ll", "will"}, {"'re", "are"}, {"'ve", "have"}};
    for (auto& [suf, word] : kSuffixes) {
      std::string r = suffix_expand(suf, word);
      if (!r.empty()) return r;
    }
    return t.canon;  // possessives and the like pass through
  }
  if (all_lower_alpha(t.canon)) return lemmatize_word(t.canon);
  return t.canon;  // capitalized words are likely names; leave them alone
}

}  // namespace

std::pair<int, int> Normalized::map_span(int begin, int end) const {
  begin = std::max(begin, 0);
  end = std::min(end, static_cast<int>(map_begin.size()));
  int lo = -1, hi = -1;
  for (int i = begin; i < end; ++i) {
    if (map_begin[static_cast<size_t>(i)] >= map_end[static_cast<size_t>(i)]) continue;
    if (lo < 0 || map_begin[static_cast<size_t>(i)] < lo) lo = map_begin[static_cast<size_t>(i)];
    if (map_end[static_cast<size_t>(i)] > hi) hi = map_end[static_cast<size_t>(i)];
  }
  if (lo < 0) return {-1, -1};
  return {lo, hi};
}

Normalized normalize_mapped(const std::string& raw) {
  Normalized out;
  out.map_begin.assign(raw.size(), 0);
  out.map_end.assign(raw.size(), 0);
  std::string& dst = out.text;

  bool pending_space = false;
  auto mark_empty = [&](size_t pos) {
    out.map_begin[pos] = out.map_end[pos] = static_cast<int>(dst.size());
  };
  auto flush_space = [&] {
    if (pending_space) {
      dst += ' ';
      pending_space = false;
    }
  };

  size_t i = 0;
  while (i < raw.size()) {
    unsigned char c = raw[i];
    if (is_space(c)) {
      mark_empty(i);
      if (!dst.empty()) pending_space = true;  // leading whitespace is dropped
      ++i;
      continue;
    }
    if (is_alpha(c)) {
      Token t = scan_token(raw, i);
      std::string repl = rewrite_token(t);
      flush_space();
      size_t a = dst.size();
      dst += repl;
      size_t b = dst.size();
      if (!t.altered && repl == t.canon) {
        for (size_t k = t.begin; k < t.end; ++k) {
          out.map_begin[k] = static_cast<int>(a + (k - t.begin));
          out.map_end[k] = static_cast<int>(a + (k - t.begin) + 1);
        }
      } else {
        for (size_t k = t.begin; k < t.end; ++k) {
          out.map_begin[k] = static_cast<int>(a);
          out.map_end[k] = static_cast<int>(b);
        }
      }
      i = t.end;
      continue;
    }
    flush_space();
    out.map_begin[i] = static_cast<int>(dst.size());
    out.map_end[i] = static_cast<int>(dst.size() + 1);
    dst += static_cast<char>(c);
    ++i;
  }
  // trailing pending space stays unemitted; its source bytes already map empty
  return out;
}

std::string normalize_text(const std::string& raw) { return normalize_mapped(raw).text; }

}  // namespace trend::text
