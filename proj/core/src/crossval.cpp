#include "socmap/crossval.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "socmap/error.hpp"
#include "socmap/learners/model_io.hpp"
#include "socmap/learners/tune.hpp"
#include "socmap/parallel.hpp"
#include "socmap/random.hpp"

namespace socmap {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MetricsReport fold_report(std::span<const double> observed, std::span<const double> predicted) {
  MetricsReport r;
  r.mae = mae(observed, predicted);
  r.rmse = rmse(observed, predicted);
  try {
    r.r2 = r2(observed, predicted);
  } catch (const Error&) {
    r.r2 = kNaN;
  }
  r.ccc = ccc(observed, predicted);
  r.n = observed.size();
  return r;
}

void check_inputs(const SampleTable& table, const FeatureMask& mask, const FoldAssignment& folds) {
  if (mask.size() != table.feature_count()) {
    fail(Errc::shape, "mask has " + std::to_string(mask.size()) + " bits but the table has " +
                          std::to_string(table.feature_count()) + " features");
  }
  if (!mask.valid()) fail(Errc::configuration, "feature mask selects no covariates");
  if (folds.fold_of.size() != table.size()) {
    fail(Errc::shape, "fold assignment covers " + std::to_string(folds.fold_of.size()) +
                          " rows but the table has " + std::to_string(table.size()));
  }
  for (auto f : folds.fold_of) {
    if (f >= folds.k) fail(Errc::configuration, "fold index out of range");
  }
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<double> CvRun::back_transformed() const {
  std::vector<double> out(predictions.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = transform.backward(predictions[i]);
  return out;
}

CvRun cross_validate(const SampleTable& table, const FeatureMask& mask, const LearnerSpec& spec,
                     const FoldAssignment& folds, const CvOptions& options) {
  check_inputs(table, mask, folds);
  validate(spec);

  const auto columns = mask.indices();
  const Matrix x = table.features(columns);
  for (double v : x.data()) {
    if (is_missing(v)) fail(Errc::data, "covariates contain missing values; impute them first");
  }
  const auto y = table.targets();

  CvRun run;
  run.spec = spec;
  run.folds = folds;
  run.features = mask.names(table.feature_names());
  run.transform = table.transform();
  for (const auto& r : table.rows()) {
    run.ids.push_back(r.id);
    run.observed.push_back(run.transform.backward(r.target));
  }

  const std::size_t k = folds.k;
  std::vector<std::vector<std::size_t>> train(k), valid(k);
  for (std::size_t f = 0; f < k; ++f) {
    train[f] = folds.training_rows(f);
    valid[f] = folds.validation_rows(f);
    if (train[f].size() < 5) {
      fail(Errc::insufficient_data, "fold " + std::to_string(f) + " leaves only " +
                                        std::to_string(train[f].size()) + " training rows");
    }
  }

  LearnerSpec base = spec;
  if (options.tune == TuneMode::global) {
    base = tune(SpecSpace{spec, {}}, x, y, options.tune_budget, options.inner_folds,
                derive_seed(spec.seed, "tune"))
               .best;
    base.seed = spec.seed;
  }

  std::vector<std::optional<TrainedModel>> models(k);
  parallel_for(
      k,
      [&](std::size_t f) {
        const Matrix xf = x.select_rows(train[f]);
        std::vector<double> yf;
        yf.reserve(train[f].size());
        for (auto r : train[f]) yf.push_back(y[r]);
        LearnerSpec fold_spec = base;
        fold_spec.seed = derive_seed(spec.seed, f);
        if (options.tune == TuneMode::nested) {
          const auto seed = fold_spec.seed;
          fold_spec = tune(SpecSpace{base, {}}, xf, yf, options.tune_budget, options.inner_folds,
                           derive_seed(seed, "tune"))
                          .best;
          fold_spec.seed = seed;
        }
        models[f].emplace(fit(fold_spec, xf, yf, run.features));
      },
      options.threads);

  run.predictions.assign(table.size(), kNaN);
  std::vector<MetricsReport> reports(k);
  for (std::size_t f = 0; f < k; ++f) {
    const auto p = predict(*models[f], x.select_rows(valid[f]));
    std::vector<double> obs, pred;
    for (std::size_t i = 0; i < valid[f].size(); ++i) {
      run.predictions[valid[f][i]] = p[i];
      obs.push_back(run.observed[valid[f][i]]);
      pred.push_back(run.transform.backward(p[i]));
    }
    reports[f] = fold_report(obs, pred);
    run.fold_models.push_back(std::move(*models[f]));
  }
  run.metrics = aggregate_folds(reports);
  return run;
}

std::size_t pick_best(std::span<const FoldedMetrics> rows) {
  if (rows.empty()) fail(Errc::insufficient_data, "nothing to compare");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i].mean;
    const auto& b = rows[best].mean;
    if (a.rmse < b.rmse || (a.rmse == b.rmse && a.ccc > b.ccc)) best = i;
  }
  return best;
}

Comparison compare(const SampleTable& table, const FeatureMask& mask,
                   std::span<const LearnerSpec> specs, const FoldAssignment& folds,
                   const CvOptions& options) {
  if (specs.empty()) fail(Errc::configuration, "compare needs at least one learner spec");
  Comparison out;
  std::vector<FoldedMetrics> rows;
  for (const auto& spec : specs) {
    out.runs.push_back(cross_validate(table, mask, spec, folds, options));
    rows.push_back(out.runs.back().metrics);
  }
  out.best = pick_best(rows);
  return out;
}

json metrics_to_json(const MetricsReport& m) {
  return {{"mae", number(m.mae)}, {"rmse", number(m.rmse)}, {"r2", number(m.r2)},
          {"ccc", number(m.ccc)}, {"n", m.n}};
}

namespace {
MetricsReport metrics_from_json(const json& j) {
  return {number(j.at("mae")), number(j.at("rmse")), number(j.at("r2")), number(j.at("ccc")),
          j.at("n").get<std::size_t>()};
}
}  // namespace

json folded_to_json(const FoldedMetrics& m) {
  json per = json::array();
  for (const auto& r : m.per_fold) per.push_back(metrics_to_json(r));
  return {{"per_fold", per}, {"mean", metrics_to_json(m.mean)}, {"sd", metrics_to_json(m.sd)}};
}

FoldedMetrics folded_from_json(const json& j) {
  FoldedMetrics m;
  for (const auto& r : j.at("per_fold")) m.per_fold.push_back(metrics_from_json(r));
  m.mean = metrics_from_json(j.at("mean"));
  m.sd = metrics_from_json(j.at("sd"));
  return m;
}

json folds_to_json(const FoldAssignment& folds) {
  return {{"k", folds.k}, {"seed", folds.seed}, {"fold_of", folds.fold_of}};
}

FoldAssignment folds_from_json(const json& j) {
  FoldAssignment f;
  f.k = j.at("k").get<std::size_t>();
  f.seed = j.at("seed").get<std::uint64_t>();
  f.fold_of = j.at("fold_of").get<std::vector<std::size_t>>();
  return f;
}

void save_cv_run(const CvRun& run, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::io, "cannot create " + dir.string() + ": " + ec.message());

  auto write_text = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) fail(Errc::io, "cannot write " + path.string());
    out << text;
    if (!out) fail(Errc::io, "failed writing " + path.string());
  };

  write_text(dir / "folds.json", folds_to_json(run.folds).dump(2) + "\n");
  for (std::size_t f = 0; f < run.fold_models.size(); ++f) {
    save_model(run.fold_models[f], dir / ("model_fold_" + std::to_string(f) + ".bin"));
  }

  std::ostringstream csv;
  csv << "id,fold,observed,predicted\n";
  const auto back = run.back_transformed();
  for (std::size_t i = 0; i < run.ids.size(); ++i) {
    csv << run.ids[i] << ',' << run.folds.fold_of[i] << ',' << format_double(run.observed[i]) << ','
        << format_double(back[i]) << '\n';
  }
  write_text(dir / "oof_predictions.csv", csv.str());

  json meta = {{"spec", spec_to_json(run.spec)},
               {"features", run.features},
               {"transform", {{"kind", run.transform.active() ? "log" : "identity"},
                              {"offset", run.transform.offset}}},
               {"metrics", folded_to_json(run.metrics)}};
  write_text(dir / "metrics.json", meta.dump(2) + "\n");
}

CvRun load_cv_run(const std::filesystem::path& dir) {
  auto read_json = [&](const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io, "cannot open " + path.string());
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      fail(Errc::parse, path.string() + ": " + e.what());
    }
  };

  CvRun run;
  run.folds = folds_from_json(read_json(dir / "folds.json"));
  const auto meta = read_json(dir / "metrics.json");
  run.spec = spec_from_json(meta.at("spec"));
  run.features = meta.at("features").get<std::vector<std::string>>();
  const auto& t = meta.at("transform");
  run.transform.kind = t.at("kind").get<std::string>() == "log" ? TransformKind::log_anchored
                                                                 : TransformKind::identity;
  run.transform.offset = t.at("offset").get<double>();
  run.metrics = folded_from_json(meta.at("metrics"));
  for (std::size_t f = 0; f < run.folds.k; ++f) {
    run.fold_models.push_back(load_model(dir / ("model_fold_" + std::to_string(f) + ".bin")));
  }

  std::ifstream in(dir / "oof_predictions.csv");
  if (!in) fail(Errc::io, "cannot open " + (dir / "oof_predictions.csv").string());
  std::string line;
  std::getline(in, line);
  auto parse = [](const std::string& s) {
    if (s == "NA") return kNaN;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      fail(Errc::parse, "bad number \"" + s + "\" in oof_predictions.csv");
    }
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) fail(Errc::parse, "oof_predictions.csv row has wrong column count");
    run.ids.push_back(cells[0]);
    run.observed.push_back(parse(cells[2]));
    const double back = parse(cells[3]);
    run.predictions.push_back(run.transform.active() ? run.transform.forward(back) : back);
  }
  if (run.ids.size() != run.folds.fold_of.size()) {
    fail(Errc::format, "oof_predictions.csv row count does not match folds.json");
  }
  return run;
}

}  // namespace socmap
