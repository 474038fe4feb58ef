#pragma once

// Model files. Plain text, one key per line, doubles as hex floats:
//
//   SPAMURL-MODEL
//   version 1
//   schema 13 url_length has_subscribe ...
//   model <family>
//   scaler 0|1            (followed by mean/scale lines when 1)
//   ...family payload...
//   end <family>
//
// Stacking payloads nest one model block per kept base, then the meta model.

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "urlspam/error.hpp"
#include "urlspam/model.hpp"
#include "urlspam/serialization.hpp"
#include "urlspam/url_features.hpp"

namespace urlspam {

inline constexpr std::string_view kModelMagic = "SPAMURL-MODEL";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline void save_block(io::Writer& w, const Model& m);
inline Model load_block(io::Reader& r);

inline void save_block(io::Writer& w, const Model& m) {
  const auto tag = family_tag(m.family());
  w.line("model", tag);
  w.line("scaler", m.scaler().has_value());
  if (m.scaler()) m.scaler()->save(w);
  std::visit(
      [&](const auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, StackingModel>) {
          w.line("bases", impl.bases.size());
          for (const auto& b : impl.bases) save_block(w, b);
          impl.meta.save(w);
        } else {
          impl.save(w);
        }
      },
      m.impl());
  w.line("end", tag);
}

inline Model load_block(io::Reader& r) {
  const auto tag = r.word("model");
  const ModelFamily family = [&] {
    try {
      return parse_family(tag);
    } catch (const Error&) {
      throw Error(ErrorCode::ModelFormat, "unknown model family '" + tag + "'");
    }
  }();
  const auto has_scaler = r.integer("scaler");
  if (has_scaler != 0 && has_scaler != 1) throw Error(ErrorCode::ModelFormat, "scaler flag must be 0 or 1");
  std::optional<Standardizer> scaler;
  if (has_scaler) scaler = Standardizer::load(r);

  Model::Impl impl;
  switch (family) {
    case ModelFamily::logreg: impl = LogisticRegressionModel::load(r); break;
    case ModelFamily::knn: impl = KnnModel::load(r); break;
    case ModelFamily::dtree: impl = DecisionTree::load(r); break;
    case ModelFamily::bnb:
    case ModelFamily::mnb: impl = NaiveBayesModel::load(r); break;
    case ModelFamily::mlp: impl = MlpModel::load(r); break;
    case ModelFamily::bagging: impl = BaggingModel::load(r); break;
    case ModelFamily::forest: impl = RandomForestModel::load(r); break;
    case ModelFamily::adaboost: impl = AdaBoostModel::load(r); break;
    case ModelFamily::gboost: impl = GradientBoostingModel::load(r); break;
    case ModelFamily::stacking: {
      StackingModel s;
      const auto n = r.integer("bases");
      if (n < 1) throw Error(ErrorCode::ModelFormat, "stacking needs at least one base");
      for (std::int64_t i = 0; i < n; ++i) s.bases.push_back(load_block(r));
      s.meta = LogisticRegressionModel::load(r);
      if (s.meta.weights.size() != s.bases.size()) throw Error(ErrorCode::ModelFormat, "meta width mismatch");
      impl = std::move(s);
      break;
    }
  }
  if (r.word("end") != tag) throw Error(ErrorCode::ModelFormat, "unterminated model block '" + tag + "'");
  return Model(family, std::move(scaler), std::move(impl));
}

}  // namespace detail

inline void save_model(std::ostream& out, const Model& model) {
  io::Writer w(out);
  w.line(kModelMagic);
  w.line("version", kModelFormatVersion);
  std::string schema = std::to_string(kFeatureCount);
  for (auto name : kFeatureNames) {
    schema += ' ';
    schema += name;
  }
  w.line("schema", schema);
  detail::save_block(w, model);
}

inline std::string model_to_string(const Model& model) {
  std::ostringstream out;
  save_model(out, model);
  return out.str();
}

inline Model load_model(std::istream& in) {
  io::Reader r(in);
  const auto magic = r.next_line();
  if (magic.size() != 1 || magic[0] != kModelMagic) throw Error(ErrorCode::ModelFormat, "not a model file");
  const auto version = r.integer("version");
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::ModelFormat, "unsupported format version " + std::to_string(version));
  }
  const auto schema = r.expect("schema");
  bool same = schema.size() == kFeatureCount + 1 && schema[0] == std::to_string(kFeatureCount);
  for (std::size_t i = 0; same && i < kFeatureCount; ++i) same = schema[i + 1] == kFeatureNames[i];
  if (!same) throw Error(ErrorCode::ModelFormat, "feature schema mismatch");
  Model m = detail::load_block(r);
  if (!r.next_line().empty()) throw Error(ErrorCode::ModelFormat, "trailing content after model block");
  return m;
}

inline Model model_from_string(const std::string& text) {
  std::istringstream in(text);
  return load_model(in);
}

inline void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  save_model(out, model);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

inline Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  return load_model(in);
}

}  // namespace urlspam
