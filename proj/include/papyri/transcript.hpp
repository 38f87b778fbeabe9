// Copyright 2026 The papyri Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Transcript rendering (plain text, TEI XML) and stem search.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "papyri/coco.hpp"
#include "papyri/error.hpp"
#include "papyri/layout.hpp"
#include "papyri/parallel.hpp"
#include "papyri/utf8.hpp"
#include "papyri/xml_writer.hpp"

namespace papyri {

// paragraphs[p][l] is one line of text, UTF-8, one character per box.
struct Transcript {
  std::string document_id;
  std::vector<std::vector<std::string>> paragraphs;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

inline Transcript to_transcript(const PageLayout& layout, const CategoryTable& categories,
                                std::string document_id = {}) {
  Transcript t;
  t.document_id = std::move(document_id);
  for (const auto& p : layout.paragraphs) {
    auto& lines = t.paragraphs.emplace_back();
    for (const auto& l : p.lines) {
      std::string text;
      for (const auto& b : l.boxes) {
        const Category* c = categories.find(b.category_id);
        if (c == nullptr) {
          throw ReferentialError("layout box with unknown category_id " +
                                 std::to_string(b.category_id));
        }
        text += glyph_for(c->name);
      }
      lines.push_back(std::move(text));
    }
  }
  return t;
}

// One line per text line, a blank line between paragraphs, LF endings and a
// trailing newline. Empty transcripts render as "".
inline std::string render_plain_text(const Transcript& t) {
  std::string out;
  for (std::size_t p = 0; p < t.paragraphs.size(); ++p) {
    if (p > 0) out += '\n';
    for (const auto& line : t.paragraphs[p]) {
      out += line;
      out += '\n';
    }
  }
  return out;
}

inline std::string to_plain_text(const PageLayout& layout, const CategoryTable& categories) {
  return render_plain_text(to_transcript(layout, categories));
}

// Inverse of render_plain_text. CR before LF is tolerated.
inline Transcript parse_plain_text(std::string document_id, std::string_view text) {
  Transcript t;
  t.document_id = std::move(document_id);
  utf8::decode(text);  // validates
  bool new_paragraph = true;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      new_paragraph = true;
    } else {
      if (new_paragraph) t.paragraphs.emplace_back();
      t.paragraphs.back().emplace_back(line);
      new_paragraph = false;
    }
    pos = end + 1;
  }
  return t;
}

struct TeiMetadata {
  std::string title;
  std::string source_id;
};

// Minimal TEI: header with title and source, body with one <p> per paragraph
// and one <l n="k"> per line, numbered from 1 across the document.
inline std::string render_tei(const Transcript& t, const TeiMetadata& meta) {
  XmlWriter w;
  w.open("TEI", {{"xmlns", "http://www.tei-c.org/ns/1.0"}});
  w.open("teiHeader");
  w.open("fileDesc");
  w.open("titleStmt");
  w.text_element("title", meta.title);
  w.close();
  w.open("publicationStmt");
  w.text_element("p", "Automatic transcription from character detections.");
  w.close();
  w.open("sourceDesc");
  w.text_element("idno", meta.source_id);
  w.close();
  w.close();  // fileDesc
  w.close();  // teiHeader
  w.open("text");
  if (t.paragraphs.empty()) {
    w.empty_element("body");
  } else {
    w.open("body");
    std::size_t n = 1;
    for (const auto& p : t.paragraphs) {
      w.open("p");
      for (const auto& line : p) w.text_element("l", line, {{"n", std::to_string(n++)}});
      w.close();
    }
    w.close();
  }
  return w.finish();
}

inline std::string to_tei(const PageLayout& layout, const CategoryTable& categories,
                          const TeiMetadata& meta) {
  return render_tei(to_transcript(layout, categories, meta.source_id), meta);
}

struct SearchHit {
  std::string document_id;
  std::size_t paragraph = 0;  // 0-based
  std::size_t line = 0;       // 0-based, within the paragraph
  std::size_t column = 0;     // 0-based, in characters
  std::string match;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

// A literal, optionally followed by a single trailing '*' that extends the
// match over the letters that follow (punctuation and whitespace stop it).
class SearchPattern {
 public:
  explicit SearchPattern(std::string_view pattern) {
    std::u32string cps = utf8::decode(pattern);
    if (!cps.empty() && cps.back() == U'*') {
      prefix_ = true;
      cps.pop_back();
    }
    if (cps.empty()) throw PatternError("search pattern must contain at least one character");
    if (cps.find(U'*') != std::u32string::npos) {
      throw PatternError("'*' is only allowed as the last character of a pattern");
    }
    literal_ = std::move(cps);
  }

  const std::u32string& literal() const { return literal_; }
  bool is_prefix() const { return prefix_; }

  static bool is_letter(char32_t c) {
    return c != U'\'' && c != U'.' && c != U' ' && c != U'\t' && c != U'\n' && c != U'\r';
  }

  // Every occurrence in one line, including overlapping ones.
  template <typename OnHit>
  void scan(const std::u32string& line, OnHit&& on_hit) const {
    if (line.size() < literal_.size()) return;
    for (std::size_t pos = line.find(literal_); pos != std::u32string::npos;
         pos = line.find(literal_, pos + 1)) {
      std::size_t end = pos + literal_.size();
      if (prefix_) {
        while (end < line.size() && is_letter(line[end])) ++end;
      }
      on_hit(pos, std::u32string_view(line).substr(pos, end - pos));
    }
  }

 private:
  std::u32string literal_;
  bool prefix_ = false;
};

inline std::vector<SearchHit> search(const Transcript& doc, const SearchPattern& pattern) {
  std::vector<SearchHit> hits;
  for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
    for (std::size_t l = 0; l < doc.paragraphs[p].size(); ++l) {
      const std::u32string line = utf8::decode(doc.paragraphs[p][l]);
      pattern.scan(line, [&](std::size_t col, std::u32string_view m) {
        hits.push_back({doc.document_id, p, l, col, utf8::encode(m)});
      });
    }
  }
  return hits;
}

// Hits in corpus order, then paragraph, line and column. Documents are
// searched on up to `jobs` threads.
inline std::vector<SearchHit> search(std::span<const Transcript> corpus, std::string_view pattern,
                                     std::size_t jobs = 1) {
  const SearchPattern compiled(pattern);
  std::vector<std::vector<SearchHit>> per_doc(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) { per_doc[i] = search(corpus[i], compiled); });
  std::vector<SearchHit> hits;
  for (auto& h : per_doc) hits.insert(hits.end(), h.begin(), h.end());
  return hits;
}

// Tab-separated: document id, paragraph, line, column, match.
inline std::string format_hits(std::span<const SearchHit> hits) {
  std::string out;
  for (const auto& h : hits) {
    out += h.document_id + '\t' + std::to_string(h.paragraph) + '\t' + std::to_string(h.line) +
           '\t' + std::to_string(h.column) + '\t' + h.match + '\n';
  }
  return out;
}

inline Transcript load_transcript(const std::filesystem::path& path) {
  try {
    return parse_plain_text(path.stem().string(), detail::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace papyri
