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

// COCO annotation and results files.
//
// Ground truth is the usual `{images, annotations, categories}` object; model
// output is the flat results array `[{image_id, category_id, bbox, score}]`.
// Keys this module does not understand are carried through a load/write round
// trip on datasets (top level, images, categories and annotations). Unknown
// keys on prediction records are dropped and reported as a warning.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "papyri/error.hpp"
#include "papyri/geometry.hpp"
#include "papyri/utf8.hpp"

namespace papyri {

using Json = nlohmann::ordered_json;
using ImageId = std::int64_t;
using CategoryId = std::int64_t;
using AnnotationId = std::int64_t;

inline constexpr std::string_view kApostrophe = "APOSTROPHE";
inline constexpr std::string_view kPeriod = "PERIOD";

// True for a single uppercase Greek letter U+0391..U+03A9 (U+03A2 is
// unassigned). These are the only scored categories.
inline bool is_greek_capital(std::string_view name) {
  std::u32string cps;
  try {
    cps = utf8::decode(name);
  } catch (const ParseError&) {
    return false;
  }
  return cps.size() == 1 && cps[0] >= U'Α' && cps[0] <= U'Ω' && cps[0] != 0x03A2;
}

// Text a category contributes to a transcript.
inline std::string glyph_for(std::string_view name) {
  if (name == kApostrophe) return "'";
  if (name == kPeriod) return ".";
  return std::string(name);
}

struct Category {
  CategoryId id = 0;
  std::string name;
  bool evaluated = false;
  Json extra = Json::object();

  friend bool operator==(const Category&, const Category&) = default;
};

class CategoryTable {
 public:
  CategoryTable() = default;

  explicit CategoryTable(std::vector<Category> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& c = entries_[i];
      if (c.id <= 0) {
        throw SchemaError("category " + std::to_string(c.id) + ": id must be positive");
      }
      if (!index_.emplace(c.id, i).second) {
        throw ReferentialError("category " + std::to_string(c.id) + ": duplicate id");
      }
    }
  }

  // Ids 1..24 are Α..Ω in alphabet order, 25 is APOSTROPHE, 26 is PERIOD.
  static const CategoryTable& greek_default() {
    static const CategoryTable table = [] {
      std::vector<Category> entries;
      CategoryId id = 1;
      for (char32_t cp = U'Α'; cp <= U'Ω'; ++cp) {
        if (cp == 0x03A2) continue;
        entries.push_back({id++, utf8::encode(std::u32string(1, cp)), true, Json::object()});
      }
      entries.push_back({id++, std::string(kApostrophe), false, Json::object()});
      entries.push_back({id++, std::string(kPeriod), false, Json::object()});
      return CategoryTable(std::move(entries));
    }();
    return table;
  }

  const std::vector<Category>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const Category* find(CategoryId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entries_[it->second];
  }
  bool contains(CategoryId id) const { return index_.count(id) != 0; }
  bool is_evaluated(CategoryId id) const {
    const Category* c = find(id);
    return c != nullptr && c->evaluated;
  }

  std::optional<CategoryId> id_for_name(std::string_view name) const {
    for (const auto& c : entries_) {
      if (c.name == name) return c.id;
    }
    return std::nullopt;
  }

  // Evaluated ids in ascending order.
  std::vector<CategoryId> evaluated_ids() const {
    std::vector<CategoryId> ids;
    for (const auto& c : entries_) {
      if (c.evaluated) ids.push_back(c.id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  friend bool operator==(const CategoryTable& a, const CategoryTable& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<Category> entries_;
  std::unordered_map<CategoryId, std::size_t> index_;
};

struct ImageRecord {
  ImageId id = 0;
  std::string file_name;
  double width = 0.0;
  double height = 0.0;
  Json extra = Json::object();

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct Annotation {
  AnnotationId id = 0;
  ImageId image_id = 0;
  CategoryId category_id = 0;
  Box bbox;
  Json extra = Json::object();

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Dataset {
  std::vector<ImageRecord> images;
  CategoryTable categories;
  std::vector<Annotation> annotations;
  Json extra = Json::object();

  const ImageRecord* find_image(ImageId id) const {
    for (const auto& im : images) {
      if (im.id == id) return &im;
    }
    return nullptr;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct ScoredBox {
  Box bbox;
  CategoryId category_id = 0;
  double score = 0.0;

  friend bool operator==(const ScoredBox&, const ScoredBox&) = default;
};

// Scored detections bucketed by image; iteration order (image id ascending,
// then insertion order within an image) is the canonical record order used
// by files and by positional alignment of recognizer outputs.
struct PredictionSet {
  std::map<ImageId, std::vector<ScoredBox>> images;

  void add(ImageId image, ScoredBox box) { images[image].push_back(box); }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [id, boxes] : images) n += boxes.size();
    return n;
  }
  bool empty() const { return size() == 0; }

  const std::vector<ScoredBox>& boxes(ImageId image) const {
    static const std::vector<ScoredBox> kNone;
    auto it = images.find(image);
    return it == images.end() ? kNone : it->second;
  }

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path.string() + ": read failed");
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError(path.string() + ": write failed");
}

inline Json parse_json(std::string_view text, const std::string& context) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(context + ": " + e.what());
  }
}

inline const Json& require(const Json& obj, const char* key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(context + ": missing field '" + key + "'");
  return *it;
}

inline std::int64_t require_int(const Json& obj, const char* key, const std::string& context) {
  const Json& v = require(obj, key, context);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d)) return static_cast<std::int64_t>(d);
  }
  throw SchemaError(context + ": field '" + key + "' must be an integer");
}

inline double require_number(const Json& obj, const char* key, const std::string& context) {
  const Json& v = require(obj, key, context);
  if (!v.is_number()) throw SchemaError(context + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline std::string require_string(const Json& obj, const char* key, const std::string& context) {
  const Json& v = require(obj, key, context);
  if (!v.is_string()) throw SchemaError(context + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline Box parse_bbox(const Json& obj, const std::string& context) {
  const Json& v = require(obj, "bbox", context);
  if (!v.is_array() || v.size() != 4) {
    throw SchemaError(context + ": bbox must be an array [x, y, width, height]");
  }
  for (const auto& c : v) {
    if (!c.is_number()) throw SchemaError(context + ": bbox entries must be numbers");
  }
  Box b{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
  if (!is_valid(b)) {
    throw SchemaError(context + ": bbox must be finite with positive width and height");
  }
  return b;
}

inline Json bbox_json(const Box& b) {
  // Explicit doubles so integral values still serialize as reals.
  return Json::array({b.x, b.y, b.w, b.h});
}

inline Json number_json(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) {
    return Json(static_cast<std::int64_t>(v));
  }
  return Json(v);
}

inline Json extras_of(const Json& obj, std::initializer_list<const char*> known) {
  Json extra = Json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (const char* k : known) {
      if (it.key() == k) is_known = true;
    }
    if (!is_known) extra[it.key()] = it.value();
  }
  return extra;
}

inline void merge_extras(Json& obj, const Json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    if (!obj.contains(it.key())) obj[it.key()] = it.value();
  }
}

}  // namespace detail

// Checks every Dataset invariant; throws naming the offending record.
inline void validate(const Dataset& ds) {
  std::unordered_set<ImageId> image_ids;
  for (const auto& im : ds.images) {
    if (!image_ids.insert(im.id).second) {
      throw ReferentialError("image " + std::to_string(im.id) + ": duplicate id");
    }
    if (!(im.width > 0.0) || !(im.height > 0.0)) {
      throw SchemaError("image " + std::to_string(im.id) + ": width and height must be positive");
    }
  }
  std::unordered_set<AnnotationId> ann_ids;
  for (const auto& a : ds.annotations) {
    const std::string ctx = "annotation " + std::to_string(a.id);
    if (!ann_ids.insert(a.id).second) throw ReferentialError(ctx + ": duplicate id");
    if (!image_ids.count(a.image_id)) {
      throw ReferentialError(ctx + ": image_id " + std::to_string(a.image_id) + " not found");
    }
    if (!ds.categories.contains(a.category_id)) {
      throw ReferentialError(ctx + ": category_id " + std::to_string(a.category_id) +
                             " not found");
    }
    if (!is_valid(a.bbox)) throw SchemaError(ctx + ": invalid bbox");
  }
}

inline Dataset dataset_from_json(const Json& root, const std::string& context = "dataset") {
  if (!root.is_object()) throw SchemaError(context + ": top level must be an object");
  Dataset ds;
  ds.extra = detail::extras_of(root, {"images", "annotations", "categories"});

  const Json& cats = detail::require(root, "categories", context);
  if (!cats.is_array()) throw SchemaError(context + ": 'categories' must be an array");
  std::vector<Category> entries;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const Json& c = cats[i];
    const std::string ctx = context + ": categories[" + std::to_string(i) + "]";
    if (!c.is_object()) throw SchemaError(ctx + ": must be an object");
    Category cat;
    cat.id = detail::require_int(c, "id", ctx);
    cat.name = detail::require_string(c, "name", ctx);
    cat.evaluated = is_greek_capital(cat.name);
    cat.extra = detail::extras_of(c, {"id", "name"});
    entries.push_back(std::move(cat));
  }
  ds.categories = CategoryTable(std::move(entries));

  const Json& images = detail::require(root, "images", context);
  if (!images.is_array()) throw SchemaError(context + ": 'images' must be an array");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Json& im = images[i];
    std::string ctx = context + ": images[" + std::to_string(i) + "]";
    if (!im.is_object()) throw SchemaError(ctx + ": must be an object");
    ImageRecord rec;
    rec.id = detail::require_int(im, "id", ctx);
    ctx = context + ": image " + std::to_string(rec.id);
    rec.file_name = detail::require_string(im, "file_name", ctx);
    rec.width = detail::require_number(im, "width", ctx);
    rec.height = detail::require_number(im, "height", ctx);
    rec.extra = detail::extras_of(im, {"id", "file_name", "width", "height"});
    ds.images.push_back(std::move(rec));
  }

  const Json& anns = detail::require(root, "annotations", context);
  if (!anns.is_array()) throw SchemaError(context + ": 'annotations' must be an array");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const Json& a = anns[i];
    std::string ctx = context + ": annotations[" + std::to_string(i) + "]";
    if (!a.is_object()) throw SchemaError(ctx + ": must be an object");
    Annotation ann;
    ann.id = detail::require_int(a, "id", ctx);
    ctx = context + ": annotation " + std::to_string(ann.id);
    ann.image_id = detail::require_int(a, "image_id", ctx);
    ann.category_id = detail::require_int(a, "category_id", ctx);
    ann.bbox = detail::parse_bbox(a, ctx);
    ann.extra = detail::extras_of(a, {"id", "image_id", "category_id", "bbox"});
    ds.annotations.push_back(std::move(ann));
  }

  try {
    validate(ds);
  } catch (const ReferentialError& e) {
    throw ReferentialError(context + ": " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(context + ": " + e.what());
  }
  return ds;
}

inline Json to_json(const Dataset& ds) {
  Json root = Json::object();
  Json images = Json::array();
  for (const auto& im : ds.images) {
    Json j = Json::object();
    j["id"] = im.id;
    j["file_name"] = im.file_name;
    j["width"] = detail::number_json(im.width);
    j["height"] = detail::number_json(im.height);
    detail::merge_extras(j, im.extra);
    images.push_back(std::move(j));
  }
  Json anns = Json::array();
  for (const auto& a : ds.annotations) {
    Json j = Json::object();
    j["id"] = a.id;
    j["image_id"] = a.image_id;
    j["category_id"] = a.category_id;
    j["bbox"] = detail::bbox_json(a.bbox);
    detail::merge_extras(j, a.extra);
    anns.push_back(std::move(j));
  }
  Json cats = Json::array();
  for (const auto& c : ds.categories.entries()) {
    Json j = Json::object();
    j["id"] = c.id;
    j["name"] = c.name;
    detail::merge_extras(j, c.extra);
    cats.push_back(std::move(j));
  }
  root["images"] = std::move(images);
  root["annotations"] = std::move(anns);
  root["categories"] = std::move(cats);
  detail::merge_extras(root, ds.extra);
  return root;
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  const std::string ctx = path.string();
  return dataset_from_json(detail::parse_json(detail::read_file(path), ctx), ctx);
}

inline void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  detail::write_file(path, to_json(ds).dump(2) + "\n");
}

// Throws RangeError for scores outside [0, 1]; with a companion dataset, also
// checks that image and category ids resolve.
inline void validate(const PredictionSet& preds, const Dataset* dataset = nullptr) {
  std::size_t index = 0;
  for (const auto& [image, boxes] : preds.images) {
    if (dataset != nullptr && dataset->find_image(image) == nullptr) {
      throw ReferentialError("prediction for image_id " + std::to_string(image) +
                             ": image not in dataset");
    }
    for (const auto& b : boxes) {
      const std::string ctx = "prediction " + std::to_string(index);
      if (!(b.score >= 0.0 && b.score <= 1.0)) {
        throw RangeError(ctx + ": score " + std::to_string(b.score) + " outside [0, 1]");
      }
      if (!is_valid(b.bbox)) throw SchemaError(ctx + ": invalid bbox");
      if (dataset != nullptr && !dataset->categories.contains(b.category_id)) {
        throw ReferentialError(ctx + ": category_id " + std::to_string(b.category_id) +
                               " not in dataset");
      }
      ++index;
    }
  }
}

inline PredictionSet predictions_from_json(const Json& root, const Dataset* dataset = nullptr,
                                           std::vector<std::string>* warnings = nullptr,
                                           const std::string& context = "predictions") {
  if (!root.is_array()) throw SchemaError(context + ": results file must be a JSON array");
  PredictionSet preds;
  std::size_t dropped_fields = 0;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const Json& r = root[i];
    const std::string ctx = context + ": record " + std::to_string(i);
    if (!r.is_object()) throw SchemaError(ctx + ": must be an object");
    ScoredBox box;
    const ImageId image = detail::require_int(r, "image_id", ctx);
    box.category_id = detail::require_int(r, "category_id", ctx);
    box.bbox = detail::parse_bbox(r, ctx);
    box.score = detail::require_number(r, "score", ctx);
    if (!(box.score >= 0.0 && box.score <= 1.0)) {
      throw RangeError(ctx + ": score " + std::to_string(box.score) + " outside [0, 1]");
    }
    if (dataset != nullptr) {
      if (dataset->find_image(image) == nullptr) {
        throw ReferentialError(ctx + ": image_id " + std::to_string(image) + " not in dataset");
      }
      if (!dataset->categories.contains(box.category_id)) {
        throw ReferentialError(ctx + ": category_id " + std::to_string(box.category_id) +
                               " not in dataset");
      }
    }
    dropped_fields += detail::extras_of(r, {"image_id", "category_id", "bbox", "score"}).size();
    preds.add(image, box);
  }
  if (dropped_fields > 0 && warnings != nullptr) {
    warnings->push_back(context + ": dropped " + std::to_string(dropped_fields) +
                        " unrecognized prediction field(s)");
  }
  return preds;
}

inline Json to_json(const PredictionSet& preds) {
  Json out = Json::array();
  for (const auto& [image, boxes] : preds.images) {
    for (const auto& b : boxes) {
      Json j = Json::object();
      j["image_id"] = image;
      j["category_id"] = b.category_id;
      j["bbox"] = detail::bbox_json(b.bbox);
      j["score"] = b.score;
      out.push_back(std::move(j));
    }
  }
  return out;
}

inline PredictionSet load_predictions(const std::filesystem::path& path,
                                      const Dataset* dataset = nullptr,
                                      std::vector<std::string>* warnings = nullptr) {
  const std::string ctx = path.string();
  return predictions_from_json(detail::parse_json(detail::read_file(path), ctx), dataset,
                               warnings, ctx);
}

inline void write_predictions(const PredictionSet& preds, const std::filesystem::path& path) {
  const Json j = to_json(preds);
  // One record per line keeps large results files diffable.
  std::string text = "[";
  bool first = true;
  for (const auto& rec : j) {
    text += first ? "\n  " : ",\n  ";
    text += rec.dump();
    first = false;
  }
  text += first ? "]\n" : "\n]\n";
  detail::write_file(path, text);
}

// Turns confident predictions into ground truth for another training round.
// Predictions on images outside `images`, or with categories outside
// `categories`, are skipped so the result always validates.
inline Dataset export_pseudo_labels(const PredictionSet& preds, double min_conf,
                                    std::vector<ImageRecord> images,
                                    const CategoryTable& categories = CategoryTable::greek_default()) {
  if (!(min_conf >= 0.0 && min_conf <= 1.0)) {
    throw RangeError("min_conf " + std::to_string(min_conf) + " outside [0, 1]");
  }
  Dataset ds;
  ds.images = std::move(images);
  ds.categories = categories;
  std::unordered_set<ImageId> known;
  for (const auto& im : ds.images) known.insert(im.id);
  AnnotationId next = 1;
  for (const auto& [image, boxes] : preds.images) {
    if (!known.count(image)) continue;
    for (const auto& b : boxes) {
      if (b.score < min_conf || !categories.contains(b.category_id)) continue;
      Annotation a;
      a.id = next++;
      a.image_id = image;
      a.category_id = b.category_id;
      a.bbox = b.bbox;
      a.extra = Json::object({{"area", b.bbox.w * b.bbox.h}, {"iscrowd", 0}});
      ds.annotations.push_back(std::move(a));
    }
  }
  return ds;
}

}  // namespace papyri
