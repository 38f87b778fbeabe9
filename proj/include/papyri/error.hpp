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

#include <stdexcept>
#include <string>

namespace papyri {

// Base class for every error raised by the library. Messages carry the
// offending file / record context so the CLI can print them verbatim.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed JSON, malformed UTF-8, unreadable text.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input missing a required field or carrying a wrong type.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Dangling image / category / annotation reference, or duplicate id.
class ReferentialError : public Error {
 public:
  using Error::Error;
};

// Value outside its admissible range (scores, thresholds, probabilities).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Recognizer outputs not index-aligned with the boxes they vote on.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Search pattern with an interior wildcard, or empty.
class PatternError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace papyri
