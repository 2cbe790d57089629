// Plain-text stroke sequence files.
//
// Tokens are separated by any whitespace; a line whose first non-blank
// character is '#' is a comment. Tokens are resolved against a copy of the
// standard vocabulary; unknown tokens are interned into that copy and listed
// in `unknown_tokens` (one entry per distinct token, first-seen order).

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "taal/core.h"

namespace taal {

struct ParsedStrokes {
  StrokeSequence sequence;
  Vocabulary vocabulary;
  std::vector<std::string> unknown_tokens;
  int unknown_count = 0;  // occurrences, not distinct tokens
};

ParsedStrokes parse_stroke_text(std::istream& in);
ParsedStrokes parse_stroke_text(std::string_view text);

/// Writes `per_line` tokens per line after optional '#' comment lines.
void write_stroke_text(std::ostream& out, const StrokeSequence& seq,
                       const Vocabulary& vocab, int per_line,
                       const std::vector<std::string>& comments = {});

}  // namespace taal
