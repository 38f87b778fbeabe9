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

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "papyri/utf8.hpp"

namespace papyri {

using XmlAttrs = std::vector<std::pair<std::string, std::string>>;

// Escapes character data and attribute values. Characters XML 1.0 forbids
// are dropped and malformed UTF-8 becomes U+FFFD.
inline std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : utf8::decode_lenient(text)) {
    switch (c) {
      case U'&': out += "&amp;"; break;
      case U'<': out += "&lt;"; break;
      case U'>': out += "&gt;"; break;
      case U'"': out += "&quot;"; break;
      case U'\'': out += "&apos;"; break;
      default:
        if (c < 0x20 && c != U'\t' && c != U'\n' && c != U'\r') break;
        if (c == 0xFFFE || c == 0xFFFF) break;
        utf8::append(out, c);
    }
  }
  return out;
}

// Minimal indenting writer. Elements holding character data are written on
// one line; containers put each child on its own line.
class XmlWriter {
 public:
  XmlWriter() { out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"; }

  void open(std::string_view name, const XmlAttrs& attrs = {}) {
    indent();
    out_ += '<';
    out_ += name;
    write_attrs(attrs);
    out_ += ">\n";
    open_.emplace_back(name);
  }

  void close() {
    std::string name = std::move(open_.back());
    open_.pop_back();
    indent();
    out_ += "</" + name + ">\n";
  }

  void text_element(std::string_view name, std::string_view text, const XmlAttrs& attrs = {}) {
    indent();
    out_ += '<';
    out_ += name;
    write_attrs(attrs);
    out_ += '>';
    out_ += xml_escape(text);
    out_ += "</";
    out_ += name;
    out_ += ">\n";
  }

  void empty_element(std::string_view name, const XmlAttrs& attrs = {}) {
    indent();
    out_ += '<';
    out_ += name;
    write_attrs(attrs);
    out_ += "/>\n";
  }

  // Closes anything still open and returns the document.
  std::string finish() {
    while (!open_.empty()) close();
    return std::move(out_);
  }

 private:
  void indent() { out_.append(2 * open_.size(), ' '); }

  void write_attrs(const XmlAttrs& attrs) {
    for (const auto& [k, v] : attrs) {
      out_ += ' ';
      out_ += k;
      out_ += "=\"";
      out_ += xml_escape(v);
      out_ += '"';
    }
  }

  std::string out_;
  std::vector<std::string> open_;
};

}  // namespace papyri
