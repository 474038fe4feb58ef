#pragma once

// The urlspam command line. Kept in a header so tests can drive it in-process.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "urlspam/urlspam.hpp"

namespace urlspam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

struct Options {
  std::string in;
  std::string out;
  std::string model = "bagging";
  std::string model_file;
  std::string url;
  std::uint64_t seed = 0;
  int k = 10;
  double test_fraction = 0.20;
  bool no_stratify = false;
  std::size_t trials = 25;
  std::string url_column = "url";
  std::string label_column = "is_spam";
  std::vector<std::string> set;
  unsigned threads = 0;
  bool svg = false;
};

namespace detail {

/// Writes to --out when given, otherwise to the command's stdout.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::Io, "cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

inline Dataset load(const Options& o, std::ostream& err) {
  if (o.in.empty()) throw Error(ErrorCode::InvalidParameter, "--in is required");
  LoadSummary summary;
  Dataset data = load_csv(std::filesystem::path(o.in), CsvColumns{o.url_column, o.label_column}, summary);
  err << summary.to_text();
  return data;
}

inline std::vector<ModelFamily> families(const std::string& arg) {
  std::vector<ModelFamily> out;
  if (arg == "all") {
    for (const auto& info : kFamilies) out.push_back(info.family);
    return out;
  }
  std::string_view rest = arg;
  while (!rest.empty()) {
    const auto cut = rest.find(',');
    out.push_back(parse_family(rest.substr(0, cut)));
    rest = cut == std::string_view::npos ? std::string_view{} : rest.substr(cut + 1);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidParameter, "no model named");
  return out;
}

inline ModelFamily single_family(const std::string& arg) {
  const auto f = families(arg);
  if (f.size() != 1) throw Error(ErrorCode::InvalidParameter, "this command takes exactly one model family");
  return f.front();
}

inline ParamSet overrides(const std::vector<std::string>& set) {
  ParamSet out;
  for (const auto& kv : set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::InvalidParameter, "--set expects key=value, got '" + kv + "'");
    out.emplace_back(kv.substr(0, eq), parse_param_value(std::string_view(kv).substr(eq + 1)));
  }
  return out;
}

inline ModelSpec spec_for(ModelFamily f, const Options& o) {
  return apply_params(ModelSpec::defaults(f), overrides(o.set));
}

inline SplitConfig split_config(const Options& o) { return {o.test_fraction, o.seed, !o.no_stratify}; }

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string report_text(const std::string& name, const MetricsReport& r) {
  std::ostringstream os;
  os << "model: " << name << "\n";
  os << "accuracy: " << fixed(r.metrics.accuracy, 6) << "\n";
  os << "precision: " << fixed(r.metrics.precision, 6) << (r.metrics.precision_defined ? "" : " (undefined)") << "\n";
  os << "recall: " << fixed(r.metrics.recall, 6) << (r.metrics.recall_defined ? "" : " (undefined)") << "\n";
  os << "f1: " << fixed(r.metrics.f1, 6) << (r.metrics.f1_defined ? "" : " (undefined)") << "\n";
  os << "r_square: " << fixed(r.r_square, 6) << "\n";
  os << "auc: " << fixed(r.auc, 6) << "\n";
  if (r.kfold_mean_accuracy) os << "kfold_mean_accuracy: " << fixed(*r.kfold_mean_accuracy, 6) << "\n";
  os << "confusion: tp=" << r.confusion.tp << " fp=" << r.confusion.fp << " fn=" << r.confusion.fn
     << " tn=" << r.confusion.tn << "\n";
  return os.str();
}

}  // namespace detail

inline int cmd_extract(const Options& o, std::ostream& out, std::ostream& err) {
  const Dataset data = detail::load(o, err);
  detail::Output sink(o.out, out);
  csv::Row header(kFeatureNames.begin(), kFeatureNames.end());
  header.push_back(o.label_column);
  csv::write_row(sink.stream(), header);
  csv::Row row(kFeatureCount + 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto f = data.features().row(i);
    for (std::size_t c = 0; c < kFeatureCount; ++c) row[c] = csv::format_double(f[c]);
    row[kFeatureCount] = std::to_string(data.labels()[i]);
    csv::write_row(sink.stream(), row);
  }
  return kExitOk;
}

inline int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  const Dataset data = detail::load(o, err);
  detail::Output sink(o.out, out);
  sink.stream() << eda_report(data).to_text();
  return kExitOk;
}

inline int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw Error(ErrorCode::InvalidParameter, "--out is required");
  const Dataset data = detail::load(o, err);
  const ModelFamily f = detail::single_family(o.model);
  const Model model = fit_model(detail::spec_for(f, o), data, o.seed);
  save_model(std::filesystem::path(o.out), model);
  out << "trained " << family_tag(f) << " on " << data.size() << " rows -> " << o.out << "\n";
  return kExitOk;
}

inline int cmd_tune(const Options& o, std::ostream& out, std::ostream& err) {
  const Dataset data = detail::load(o, err);
  const ModelFamily f = detail::single_family(o.model);
  const auto result = random_search(data.features(), data.labels(), detail::spec_for(f, o), default_search_space(f),
                                    o.trials, o.k, o.seed);
  if (!o.out.empty()) {
    detail::Output sink(o.out, out);
    write_trial_log(sink.stream(), result, o.k);
  }
  std::size_t failed = 0;
  for (const auto& t : result.trials) failed += !t.ok();
  out << "trials: " << result.trials.size() << " (" << failed << " failed)\n";
  if (!result.best) throw Error(ErrorCode::InvalidParameter, "every trial failed");
  const auto& best = result.best_trial();
  out << "best_trial: " << best.trial_index << "\n";
  out << "best_params: " << to_string(best.params) << "\n";
  out << "best_mean_accuracy: " << detail::fixed(best.mean_accuracy, 6) << "\n";
  return kExitOk;
}

inline int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const Dataset data = detail::load(o, err);
  if (!o.model_file.empty()) {
    const Model model = load_model(std::filesystem::path(o.model_file));
    detail::Output sink(o.out, out);
    sink.stream() << detail::report_text(std::string(display_name(model.family())),
                                         evaluate_model(model, data.features(), data.labels()));
    return kExitOk;
  }
  const ModelFamily f = detail::single_family(o.model);
  const ModelSpec spec = detail::spec_for(f, o);
  const auto [train, test] = train_test_split(data, detail::split_config(o));
  MetricsReport report = evaluate_model(fit_model(spec, train, o.seed), test.features(), test.labels());
  const auto cv = cross_validate(data, spec, o.k, o.seed);
  report.kfold_mean_accuracy = cv.mean_accuracy;
  detail::Output sink(o.out, out);
  sink.stream() << detail::report_text(std::string(display_name(f)), report);
  sink.stream() << "fold_accuracy:";
  for (double a : cv.fold_accuracy) sink.stream() << ' ' << detail::fixed(a, 6);
  sink.stream() << "\n";
  return kExitOk;
}

inline int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  const Dataset data = detail::load(o, err);
  std::vector<ModelSpec> specs;
  for (auto f : detail::families(o.model)) specs.push_back(detail::spec_for(f, o));
  const auto table = compare_models(data, specs, {o.seed, o.k, o.test_fraction, !o.no_stratify});
  if (!o.out.empty()) {
    detail::Output sink(o.out, out);
    table.write_csv(sink.stream());
  }
  out << table.to_text();
  for (const auto& row : table.rows) {
    const auto& c = row.report.confusion;
    out << row.name << ": auc=" << detail::fixed(row.report.auc, 4) << " tp=" << c.tp << " fp=" << c.fp
        << " fn=" << c.fn << " tn=" << c.tn << "\n";
  }
  return kExitOk;
}

inline int cmd_predict(const Options& o, std::ostream& out, std::ostream&) {
  if (o.model_file.empty()) throw Error(ErrorCode::InvalidParameter, "--model-file is required");
  if (o.url.empty() == o.in.empty()) throw Error(ErrorCode::InvalidParameter, "give exactly one of --url or --in");
  const Model model = load_model(std::filesystem::path(o.model_file));
  std::vector<std::string> urls;
  if (!o.url.empty()) {
    urls.push_back(o.url);
  } else {
    // A CSV with the url column, or a plain list with one URL per line.
    std::ifstream in(o.in, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, o.in);
    csv::Row row;
    std::optional<std::size_t> column;
    bool first = true;
    while (csv::read_row(in, row)) {
      if (first) {
        first = false;
        if (!row.empty() && row[0].starts_with("\xEF\xBB\xBF")) row[0].erase(0, 3);
        for (std::size_t c = 0; c < row.size(); ++c) {
          if (row[c] == o.url_column) column = c;
        }
        if (column) continue;
        column = 0;
      }
      if (row.size() == 1 && row[0].empty()) continue;
      if (*column < row.size()) urls.push_back(row[*column]);
    }
  }
  detail::Output sink(o.out, out);
  csv::write_row(sink.stream(), {"url", "score", "label"});
  for (const auto& u : urls) {
    const auto f = extract_features(u).to_array();
    const double s = model.predict_score(f);
    csv::write_row(sink.stream(), {u, csv::format_double(s), s >= model.threshold() ? "1" : "0"});
  }
  return kExitOk;
}

inline int cmd_roc(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw Error(ErrorCode::InvalidParameter, "--out (a directory) is required");
  const Dataset data = detail::load(o, err);
  const auto [train, test] = train_test_split(data, detail::split_config(o));
  std::filesystem::create_directories(o.out);
  for (auto f : detail::families(o.model)) {
    const Model model = fit_model(detail::spec_for(f, o), train, o.seed);
    const RocCurve curve = roc_and_auc(test.labels(), model.predict_scores(test.features()));
    const auto base = std::filesystem::path(o.out) / ("roc_" + std::string(family_tag(f)));
    {
      std::ofstream csv_out(base.string() + ".csv", std::ios::binary);
      if (!csv_out) throw Error(ErrorCode::Io, "cannot write " + base.string() + ".csv");
      write_roc_csv(csv_out, curve);
    }
    if (o.svg) {
      std::ofstream svg_out(base.string() + ".svg", std::ios::binary);
      if (!svg_out) throw Error(ErrorCode::Io, "cannot write " + base.string() + ".svg");
      svg_out << roc_svg(curve, std::string(display_name(f)));
    }
    out << display_name(f) << ": auc=" << detail::fixed(curve.auc, 6) << "\n";
  }
  return kExitOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"URL spam classification toolkit", "urlspam"};
  app.require_subcommand(1);
  Options o;

  const auto add_io = [&](CLI::App* c) {
    c->add_option("--in", o.in, "Input CSV");
    c->add_option("--out", o.out, "Output path");
    c->add_option("--url-column", o.url_column, "URL column name")->capture_default_str();
    c->add_option("--label-column", o.label_column, "Label column name")->capture_default_str();
    c->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  };
  const auto add_model = [&](CLI::App* c) {
    c->add_option("--model,--models", o.model, "Model family, comma list, or all")->capture_default_str();
    c->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    c->add_option("--set", o.set, "Hyperparameter override key=value (repeatable)");
  };
  const auto add_split = [&](CLI::App* c) {
    c->add_option("--k", o.k, "Fold count")->capture_default_str();
    c->add_option("--test-fraction", o.test_fraction, "Held-out fraction")->capture_default_str();
    c->add_flag("--no-stratify", o.no_stratify, "Plain random train/test split");
  };

  auto* extract = app.add_subcommand("extract", "Write the 13 URL features plus label as CSV");
  add_io(extract);
  auto* analyze = app.add_subcommand("analyze", "Exploratory statistics report");
  add_io(analyze);
  auto* train = app.add_subcommand("train", "Fit a model on all rows and save it");
  add_io(train);
  add_model(train);
  auto* tune = app.add_subcommand("tune", "Random hyperparameter search under k-fold CV");
  add_io(tune);
  add_model(tune);
  tune->add_option("--k", o.k, "Fold count")->capture_default_str();
  tune->add_option("--trials", o.trials, "Number of trials")->capture_default_str();
  auto* eval = app.add_subcommand("eval", "Held-out and k-fold metrics for one model");
  add_io(eval);
  add_model(eval);
  add_split(eval);
  eval->add_option("--model-file", o.model_file, "Evaluate a saved model on --in instead");
  auto* compare = app.add_subcommand("compare", "Comparison table across model families");
  add_io(compare);
  add_model(compare);
  add_split(compare);
  auto* predict = app.add_subcommand("predict", "Score URLs with a saved model");
  predict->add_option("--model-file", o.model_file, "Saved model");
  predict->add_option("--url", o.url, "Single URL");
  predict->add_option("--in", o.in, "File of URLs (CSV with url column, or one per line)");
  predict->add_option("--out", o.out, "Output CSV");
  predict->add_option("--url-column", o.url_column, "URL column name")->capture_default_str();
  auto* roc = app.add_subcommand("roc", "ROC curve CSV (and optional SVG) per model");
  add_io(roc);
  add_model(roc);
  add_split(roc);
  roc->add_flag("--svg", o.svg, "Also write an SVG chart per model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (o.k < 2) throw Error(ErrorCode::InvalidParameter, "--k must be at least 2");
    if (!(o.test_fraction > 0.0 && o.test_fraction < 1.0)) {
      throw Error(ErrorCode::InvalidParameter, "--test-fraction must lie in (0,1)");
    }
    set_thread_count(o.threads);
    if (extract->parsed()) return cmd_extract(o, out, err);
    if (analyze->parsed()) return cmd_analyze(o, out, err);
    if (train->parsed()) return cmd_train(o, out, err);
    if (tune->parsed()) return cmd_tune(o, out, err);
    if (eval->parsed()) return cmd_eval(o, out, err);
    if (compare->parsed()) return cmd_compare(o, out, err);
    if (predict->parsed()) return cmd_predict(o, out, err);
    if (roc->parsed()) return cmd_roc(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidParameter ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace urlspam::cli
