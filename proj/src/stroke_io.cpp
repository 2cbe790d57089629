#include "taal/stroke_io.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace taal {

ParsedStrokes parse_stroke_text(std::istream& in) {
  ParsedStrokes out;
  out.vocabulary = Vocabulary::standard();
  const auto known = out.vocabulary.size();
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      auto id = out.vocabulary.intern(tok);
      if (id.value >= known) {
        ++out.unknown_count;
        if (std::find(out.unknown_tokens.begin(), out.unknown_tokens.end(), tok) ==
            out.unknown_tokens.end()) {
          out.unknown_tokens.push_back(tok);
        }
      }
      out.sequence.strokes.push_back(id);
    }
  }
  return out;
}

ParsedStrokes parse_stroke_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_stroke_text(in);
}

void write_stroke_text(std::ostream& out, const StrokeSequence& seq,
                       const Vocabulary& vocab, int per_line,
                       const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  if (per_line <= 0) per_line = 16;
  for (std::size_t i = 0; i < seq.strokes.size(); ++i) {
    out << vocab.name(seq.strokes[i]);
    bool eol = (i + 1) % static_cast<std::size_t>(per_line) == 0 ||
               i + 1 == seq.strokes.size();
    out << (eol ? '\n' : ' ');
  }
}

}  // namespace taal
