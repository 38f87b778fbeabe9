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

#include "cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "papyri/papyri.hpp"

namespace papyri::cli {
namespace {

namespace fs = std::filesystem;

ScoreRescale parse_rescale(const std::string& s) {
  if (s == "clipped") return ScoreRescale::clipped;
  if (s == "proportional") return ScoreRescale::proportional;
  throw RangeError("unknown rescale mode '" + s + "' (expected clipped or proportional)");
}

void write_json(const Json& j, const fs::path& path) { detail::write_file(path, j.dump(2) + "\n"); }

CategoryTable load_categories(const std::optional<fs::path>& path) {
  if (!path) return CategoryTable::greek_default();
  return load_dataset(*path).categories;
}

std::string document_id(ImageId image, const Dataset* dataset) {
  if (dataset != nullptr) {
    if (const ImageRecord* im = dataset->find_image(image)) {
      const std::string stem = fs::path(im->file_name).stem().string();
      if (!stem.empty()) return stem;
    }
  }
  return "image-" + std::to_string(image);
}

PredictionSet fuse_sets(const std::vector<PredictionSet>& models, const FusionConfig& cfg,
                        std::size_t jobs) {
  std::set<ImageId> ids;
  for (const auto& m : models) {
    for (const auto& [id, boxes] : m.images) ids.insert(id);
  }
  const std::vector<ImageId> images(ids.begin(), ids.end());
  FusionConfig per_image = cfg;
  if (per_image.model_count == 0) per_image.model_count = models.size();
  std::vector<std::vector<FusedBox>> fused(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) {
    std::vector<std::vector<ScoredBox>> per_model;
    per_model.reserve(models.size());
    for (const auto& m : models) per_model.push_back(m.boxes(images[i]));
    fused[i] = weighted_boxes_fusion(per_model, per_image);
  });
  PredictionSet out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (const auto& f : fused[i]) out.add(images[i], f.as_scored());
  }
  return out;
}

PredictionSet postprocess_set(const PredictionSet& in, double min_conf, double iou_threshold,
                              std::size_t jobs) {
  std::vector<ImageId> images;
  for (const auto& [id, boxes] : in.images) images.push_back(id);
  std::vector<std::vector<ScoredBox>> kept(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) {
    const auto confident = filter_confidence(in.boxes(images[i]), min_conf);
    kept[i] = suppress_overlaps(confident, iou_threshold);
  });
  PredictionSet out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!kept[i].empty()) out.images[images[i]] = std::move(kept[i]);
  }
  return out;
}

std::vector<LayoutDocument> layout_set(const PredictionSet& in, const LayoutConfig& cfg,
                                       const Dataset* dataset, std::size_t jobs) {
  std::vector<ImageId> images;
  for (const auto& [id, boxes] : in.images) images.push_back(id);
  std::vector<LayoutDocument> docs(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) {
    docs[i].image_id = images[i];
    docs[i].document_id = document_id(images[i], dataset);
    docs[i].layout = analyze_layout(in.boxes(images[i]), cfg);
  });
  return docs;
}

void check_unique_ids(const std::vector<LayoutDocument>& docs) {
  std::set<std::string> seen;
  for (const auto& d : docs) {
    if (!seen.insert(d.document_id).second) {
      throw ReferentialError("duplicate document id '" + d.document_id + "' in layout");
    }
  }
}

void write_text_dir(const std::vector<LayoutDocument>& docs, const CategoryTable& table,
                    const fs::path& dir) {
  check_unique_ids(docs);
  fs::create_directories(dir);
  for (const auto& d : docs) {
    detail::write_file(dir / (d.document_id + ".txt"), to_plain_text(d.layout, table));
  }
}

void write_tei_dir(const std::vector<LayoutDocument>& docs, const CategoryTable& table,
                   const fs::path& dir, const std::string& title) {
  check_unique_ids(docs);
  fs::create_directories(dir);
  for (const auto& d : docs) {
    const TeiMetadata meta{title.empty() ? d.document_id : title + " " + d.document_id, d.document_id};
    detail::write_file(dir / (d.document_id + ".xml"), to_tei(d.layout, table, meta));
  }
}

std::vector<LayoutDocument> load_layout(const fs::path& path) {
  const std::string ctx = path.string();
  return layout_documents_from_json(detail::parse_json(detail::read_file(path), ctx), ctx);
}

std::vector<Transcript> load_corpus(const std::vector<fs::path>& paths) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
      }
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw IoError(p.string() + ": no such file or directory");
    }
  }
  std::vector<Transcript> corpus;
  corpus.reserve(files.size());
  for (const auto& f : files) corpus.push_back(load_transcript(f));
  std::stable_sort(corpus.begin(), corpus.end(),
                   [](const Transcript& a, const Transcript& b) { return a.document_id < b.document_id; });
  return corpus;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "papyri: warning: " << w << "\n";
}

fs::path resolve(const fs::path& base, const Json& j, const std::string& ctx) {
  if (!j.is_string()) throw SchemaError(ctx + " must be a path string");
  fs::path p = j.get<std::string>();
  return p.is_absolute() ? p : base / p;
}

}  // namespace

PipelineConfig PipelineConfig::load(const fs::path& path) {
  const std::string ctx = path.string();
  const Json j = detail::parse_json(detail::read_file(path), ctx);
  if (!j.is_object()) throw SchemaError(ctx + ": top level must be an object");
  detail::reject_unknown(j, {"predictions", "families", "dataset", "out_dir", "fusion", "postprocess",
                             "layout", "tei"},
                         ctx);
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  PipelineConfig cfg;
  const Json& preds = detail::require(j, "predictions", ctx);
  if (!preds.is_array() || preds.empty()) throw SchemaError(ctx + ": 'predictions' must be a non-empty array");
  for (const auto& p : preds) cfg.predictions.push_back(resolve(base, p, ctx + ": predictions entry"));
  if (auto it = j.find("families"); it != j.end()) {
    if (!it->is_array()) throw SchemaError(ctx + ": 'families' must be an array");
    for (const auto& p : *it) cfg.families.push_back(resolve(base, p, ctx + ": families entry"));
  }
  if (auto it = j.find("dataset"); it != j.end()) cfg.dataset = resolve(base, *it, ctx + ": dataset");
  cfg.out_dir = resolve(base, detail::require(j, "out_dir", ctx), ctx + ": out_dir");
  if (auto it = j.find("fusion"); it != j.end()) {
    detail::reject_unknown(*it, {"iou", "skip", "rescale"}, ctx + ".fusion");
    detail::read_opt(*it, "iou", cfg.fusion.iou_match_threshold, ctx);
    detail::read_opt(*it, "skip", cfg.fusion.skip_box_threshold, ctx);
    std::string mode = "clipped";
    detail::read_opt(*it, "rescale", mode, ctx);
    cfg.fusion.rescale = parse_rescale(mode);
  }
  if (auto it = j.find("postprocess"); it != j.end()) {
    detail::reject_unknown(*it, {"min_conf", "iou"}, ctx + ".postprocess");
    detail::read_opt(*it, "min_conf", cfg.min_conf, ctx);
    detail::read_opt(*it, "iou", cfg.overlap_iou, ctx);
  }
  if (auto it = j.find("layout"); it != j.end()) {
    detail::reject_unknown(*it, {"feather_x", "feather_y", "para_gap"}, ctx + ".layout");
    detail::read_opt(*it, "feather_x", cfg.layout.feather_x, ctx);
    detail::read_opt(*it, "feather_y", cfg.layout.feather_y, ctx);
    detail::read_opt(*it, "para_gap", cfg.layout.paragraph_gap_factor, ctx);
  }
  detail::read_opt(j, "tei", cfg.tei, ctx);
  cfg.fusion.validate();
  cfg.layout.validate();
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Character-detection post-processing for Greek papyri: fusion, recognition "
               "ensembling, layout, transcripts, search and COCO-style scoring."};
  app.name("papyri");
  app.require_subcommand(1);

  std::size_t jobs = 1;
  const auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  // fuse
  std::vector<std::string> fuse_inputs;
  FusionConfig fusion;
  std::string rescale = "clipped";
  std::string fuse_out;
  auto* fuse = app.add_subcommand("fuse", "Weighted Boxes Fusion over N prediction files");
  fuse->add_option("inputs", fuse_inputs, "Prediction files, one per model")->required();
  fuse->add_option("--iou", fusion.iou_match_threshold, "Cluster match IoU threshold")->capture_default_str();
  fuse->add_option("--skip", fusion.skip_box_threshold, "Ignore boxes scored below this")->capture_default_str();
  fuse->add_option("--rescale", rescale, "clipped | proportional")->capture_default_str();
  fuse->add_option("-o,--out", fuse_out, "Fused predictions")->required();
  add_jobs(fuse);

  // ensemble
  std::string ens_fused, ens_out;
  std::vector<std::string> ens_families;
  auto* ensemble = app.add_subcommand("ensemble", "Split fused boxes by recognizer votes");
  ensemble->add_option("--fused", ens_fused, "Fused predictions")->required();
  ensemble->add_option("--family", ens_families, "Recognizer-output file (repeatable)");
  ensemble->add_option("-o,--out", ens_out, "Vote-split predictions")->required();

  // postprocess
  std::string pp_in, pp_out;
  double min_conf = 0.3;
  double overlap_iou = 0.5;
  auto* post = app.add_subcommand("postprocess", "Confidence filter and overlap suppression");
  post->add_option("input", pp_in, "Predictions")->required();
  post->add_option("--min-conf", min_conf, "Minimum confidence")->capture_default_str();
  post->add_option("--iou", overlap_iou, "Suppress boxes overlapping a stronger one above this IoU")->capture_default_str();
  post->add_option("-o,--out", pp_out, "Filtered predictions")->required();
  add_jobs(post);

  // layout
  std::string lay_in, lay_out, lay_dataset;
  LayoutConfig layout;
  auto* lay = app.add_subcommand("layout", "Recover lines and paragraphs");
  lay->add_option("input", lay_in, "Predictions")->required();
  lay->add_option("--feather-x", layout.feather_x, "Horizontal feathering fraction")->capture_default_str();
  lay->add_option("--feather-y", layout.feather_y, "Vertical feathering fraction")->capture_default_str();
  lay->add_option("--para-gap", layout.paragraph_gap_factor, "Paragraph gap, in median line heights")->capture_default_str();
  lay->add_option("--dataset", lay_dataset, "COCO dataset naming the images");
  lay->add_option("-o,--out", lay_out, "Layout JSON")->required();
  add_jobs(lay);

  // text / tei
  std::string text_in, text_out, text_categories;
  auto* text = app.add_subcommand("text", "Render a layout file as plain-text transcripts");
  text->add_option("input", text_in, "Layout JSON")->required();
  text->add_option("--categories", text_categories, "COCO dataset providing the category table");
  text->add_option("-o,--out", text_out, "Output directory")->required();

  std::string tei_in, tei_out, tei_categories, tei_title;
  auto* tei = app.add_subcommand("tei", "Render a layout file as TEI XML");
  tei->add_option("input", tei_in, "Layout JSON")->required();
  tei->add_option("--categories", tei_categories, "COCO dataset providing the category table");
  tei->add_option("--title", tei_title, "Title prefix for the TEI header");
  tei->add_option("-o,--out", tei_out, "Output directory")->required();

  // search
  std::string pattern, search_out;
  std::vector<std::string> search_paths;
  auto* srch = app.add_subcommand("search", "Stem search over plain-text transcripts");
  srch->add_option("--pattern", pattern, "Literal, optionally ending in '*'")->required();
  srch->add_option("paths", search_paths, "Transcript files or directories")->required();
  srch->add_option("-o,--out", search_out, "Also write hits to this file");
  add_jobs(srch);

  // eval
  std::string eval_gt, eval_pred, eval_mode = "recognition", eval_out;
  std::size_t max_dets = 2000;
  double confusion_iou = 0.5;
  auto* ev = app.add_subcommand("eval", "COCO-style mAP / mAR against ground truth");
  ev->add_option("--gt", eval_gt, "Ground-truth dataset")->required();
  ev->add_option("--pred", eval_pred, "Predictions")->required();
  ev->add_option("--mode", eval_mode, "detection | recognition")->capture_default_str();
  ev->add_option("--max-dets", max_dets, "Detections kept per image")->capture_default_str()->check(CLI::PositiveNumber);
  ev->add_option("--iou", confusion_iou, "IoU threshold for the confusion matrix")->capture_default_str();
  ev->add_option("-o,--out", eval_out, "JSON report");
  add_jobs(ev);

  // pseudo
  std::string pseudo_in, pseudo_images, pseudo_out;
  double pseudo_min_conf = 0.3;
  auto* pseudo = app.add_subcommand("pseudo", "Export confident predictions as a pseudo-label dataset");
  pseudo->add_option("input", pseudo_in, "Predictions")->required();
  pseudo->add_option("--images", pseudo_images, "COCO dataset providing images and categories")->required();
  pseudo->add_option("--min-conf", pseudo_min_conf, "Minimum confidence")->capture_default_str();
  pseudo->add_option("-o,--out", pseudo_out, "Pseudo-label dataset")->required();

  // synth
  std::string synth_config, synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* syn = app.add_subcommand("synth", "Generate synthetic ground truth and detector outputs");
  syn->add_option("--config", synth_config, "Synthetic scene / noise configuration")->required();
  syn->add_option("--seed", synth_seed, "Override the scene seed");
  syn->add_option("-o,--out", synth_out, "Output directory")->required();

  // pipeline
  std::string pipe_config;
  auto* pipe = app.add_subcommand("pipeline", "fuse, ensemble, postprocess, layout and text in one run");
  pipe->add_option("--config", pipe_config, "Pipeline configuration")->required();
  add_jobs(pipe);

  std::vector<const char*> argv{"papyri"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  std::vector<std::string> warnings;
  try {
    if (*fuse) {
      fusion.rescale = parse_rescale(rescale);
      std::vector<PredictionSet> models;
      for (const auto& f : fuse_inputs) models.push_back(load_predictions(f, nullptr, &warnings));
      write_predictions(fuse_sets(models, fusion, jobs), fuse_out);
    } else if (*ensemble) {
      const auto fused = load_predictions(ens_fused, nullptr, &warnings);
      std::vector<std::vector<MemberVotes>> families;
      for (const auto& f : ens_families) families.push_back(load_recognizer_outputs(f));
      write_predictions(ensemble_recognition(fused, families), ens_out);
    } else if (*post) {
      const auto in = load_predictions(pp_in, nullptr, &warnings);
      write_predictions(postprocess_set(in, min_conf, overlap_iou, jobs), pp_out);
    } else if (*lay) {
      const auto in = load_predictions(lay_in, nullptr, &warnings);
      std::optional<Dataset> ds;
      if (!lay_dataset.empty()) ds = load_dataset(lay_dataset);
      const auto docs = layout_set(in, layout, ds ? &*ds : nullptr, jobs);
      write_json(to_json(std::span<const LayoutDocument>(docs)), lay_out);
    } else if (*text) {
      const auto table =
          load_categories(text_categories.empty() ? std::nullopt : std::optional<fs::path>(text_categories));
      write_text_dir(load_layout(text_in), table, text_out);
    } else if (*tei) {
      const auto table =
          load_categories(tei_categories.empty() ? std::nullopt : std::optional<fs::path>(tei_categories));
      write_tei_dir(load_layout(tei_in), table, tei_out, tei_title);
    } else if (*srch) {
      std::vector<fs::path> paths(search_paths.begin(), search_paths.end());
      const auto corpus = load_corpus(paths);
      const std::string tsv = format_hits(search(corpus, pattern, jobs));
      out << tsv;
      if (!search_out.empty()) detail::write_file(search_out, tsv);
    } else if (*ev) {
      const Dataset gt = load_dataset(eval_gt);
      const PredictionSet preds = load_predictions(eval_pred, &gt, &warnings);
      EvalConfig cfg;
      cfg.mode = parse_eval_mode(eval_mode);
      cfg.max_detections = max_dets;
      const EvalReport report = evaluate(gt, preds, cfg, jobs);
      const ConfusionMatrix cm = confusion(gt, preds, confusion_iou);
      out << format_report(report);
      if (!eval_out.empty()) write_json(to_json(report, &cm), eval_out);
    } else if (*pseudo) {
      const Dataset images = load_dataset(pseudo_images);
      const auto preds = load_predictions(pseudo_in, &images, &warnings);
      write_dataset(export_pseudo_labels(preds, pseudo_min_conf, images.images, images.categories), pseudo_out);
    } else if (*syn) {
      const std::string ctx = synth_config;
      const Json j = detail::parse_json(detail::read_file(synth_config), ctx);
      if (!j.is_object()) throw SchemaError(ctx + ": top level must be an object");
      detail::reject_unknown(j, {"scene", "images", "models"}, ctx);
      SceneSpec spec = j.contains("scene") ? scene_spec_from_json(j["scene"], ctx + ".scene") : SceneSpec{};
      if (synth_seed) spec.seed = *synth_seed;
      std::size_t images = 1;
      detail::read_opt(j, "images", images, ctx);
      const Scene scene = generate_corpus(spec, images);
      const fs::path dir = synth_out;
      write_dataset(scene.dataset, dir / "gt.json");
      for (const auto& t : scene.transcripts) {
        detail::write_file(dir / "transcripts" / (t.document_id + ".txt"), render_plain_text(t));
      }
      if (auto it = j.find("models"); it != j.end()) {
        if (!it->is_array()) throw SchemaError(ctx + ": 'models' must be an array");
        for (std::size_t k = 0; k < it->size(); ++k) {
          const std::string mctx = ctx + ".models[" + std::to_string(k) + "]";
          NoiseSpec noise = noise_spec_from_json((*it)[k], spec.effective_alphabet(), mctx);
          if (!(*it)[k].contains("seed")) noise.seed = derive_seed(spec.seed, 1000 + k);
          write_predictions(perturb(scene.dataset, noise), dir / ("pred-" + std::to_string(k + 1) + ".json"));
        }
      }
    } else if (*pipe) {
      const PipelineConfig cfg = PipelineConfig::load(pipe_config);
      std::optional<Dataset> ds;
      if (cfg.dataset) ds = load_dataset(*cfg.dataset);
      const Dataset* dsp = ds ? &*ds : nullptr;
      std::vector<PredictionSet> models;
      for (const auto& f : cfg.predictions) models.push_back(load_predictions(f, dsp, &warnings));
      const PredictionSet fused = fuse_sets(models, cfg.fusion, jobs);
      write_predictions(fused, cfg.out_dir / "fused.json");
      std::vector<std::vector<MemberVotes>> families;
      for (const auto& f : cfg.families) families.push_back(load_recognizer_outputs(f));
      const PredictionSet voted = ensemble_recognition(fused, families);
      write_predictions(voted, cfg.out_dir / "ensembled.json");
      const PredictionSet kept = postprocess_set(voted, cfg.min_conf, cfg.overlap_iou, jobs);
      write_predictions(kept, cfg.out_dir / "postprocessed.json");
      const auto docs = layout_set(kept, cfg.layout, dsp, jobs);
      write_json(to_json(std::span<const LayoutDocument>(docs)), cfg.out_dir / "layout.json");
      const CategoryTable& table = ds ? ds->categories : CategoryTable::greek_default();
      write_text_dir(docs, table, cfg.out_dir / "text");
      if (cfg.tei) write_tei_dir(docs, table, cfg.out_dir / "tei", "");
      out << "fused " << fused.size() << " boxes, " << voted.size() << " after vote splitting, "
          << kept.size() << " after post-processing; " << docs.size() << " page(s) written to "
          << cfg.out_dir.string() << "\n";
    }
  } catch (const Error& e) {
    print_warnings(warnings, err);
    err << "papyri: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    print_warnings(warnings, err);
    err << "papyri: error: " << e.what() << "\n";
    return 2;
  }
  print_warnings(warnings, err);
  return 0;
}

}  // namespace papyri::cli
