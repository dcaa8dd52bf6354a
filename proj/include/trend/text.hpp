#pragma once

#include <string>
#include <utility>
#include <vector>

namespace trend::text {

// Normalized text plus a byte-level map back to the source string, so
// character spans annotated on the raw text can be carried across edits.
struct Normalized {
  std::string text;
  // Per source byte i, the half-open range [map_begin[i], map_end[i]) it
  // occupies in `text`. Deleted bytes have an empty range. Bytes of a
  // replaced token all share the replacement's full range.
  std::vector<int> map_begin;
  std::vector<int> map_end;

  // Smallest normalized range covering source range [begin, end).
  // {-1, -1} when nothing of the range survives.
  std::pair<int, int> map_span(int begin, int end) const;
};

// Expands contractions, lemmatizes lowercase words, collapses whitespace.
// Idempotent: normalize(normalize(x)) == normalize(x).
Normalized normalize_mapped(const std::string& raw);
std::string normalize_text(const std::string& raw);

// Rule-plus-exception-table lemmatizer for a single lowercase alphabetic
// word. Words with other characters should not be passed in.
std::string lemmatize_word(const std::string& word);

}  // namespace trend::text
