#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "fixtures/fixtures.hpp"
#include "socmap/error.hpp"
#include "socmap/learners/ensemble.hpp"
#include "socmap/learners/model.hpp"
#include "socmap/learners/model_io.hpp"
#include "socmap/learners/tune.hpp"
#include "socmap/metrics.hpp"
#include "socmap/parallel.hpp"

using namespace socmap;

namespace {

struct Split {
  Matrix x_train, x_test;
  std::vector<double> y_train, y_test;
};

Split friedman_split(std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
  const auto t = fixtures::friedman1(n_train + n_test, seed);
  std::vector<std::size_t> a(n_train), b(n_test);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), n_train);
  const auto x = t.features();
  const auto y = t.targets();
  Split s{x.select_rows(a), x.select_rows(b), {}, {}};
  for (auto i : a) s.y_train.push_back(y[i]);
  for (auto i : b) s.y_test.push_back(y[i]);
  return s;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::state;
}

}  // namespace

TEST(Cart, RecoversAStepFunction) {
  Matrix x(40, 1);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    x(i, 0) = static_cast<double>(i);
    y[i] = i < 25 ? 1.0 : 4.0;
  }
  const auto tree = fit_cart(x, y, 1, 1);
  ASSERT_FALSE(tree.nodes[0].is_leaf());
  EXPECT_EQ(tree.nodes[0].feature, 0);
  EXPECT_EQ(tree.nodes[0].threshold, 24.5);
  const double low[] = {3.0}, high[] = {30.0};
  EXPECT_EQ(tree.predict(low), 1.0);
  EXPECT_EQ(tree.predict(high), 4.0);
  EXPECT_EQ(tree.leaf_count(), 2u);
}

TEST(Cart, RespectsMinLeafAndDepth) {
  const auto s = friedman_split(200, 0, 4);
  const auto tree = fit_cart(s.x_train, s.y_train, 4, 12);
  EXPECT_LE(tree.depth(), 4);
  std::vector<int> counts(tree.nodes.size(), 0);
  for (std::size_t i = 0; i < s.x_train.rows(); ++i) ++counts[tree.leaf_index(s.x_train.row(i))];
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    if (tree.nodes[k].is_leaf()) EXPECT_GE(counts[k], 12);
  }
}

TEST(Cart, PresortedBuilderMatchesPlainBuilder) {
  const auto s = friedman_split(150, 0, 5);
  const auto order = presort_columns(s.x_train);
  std::vector<std::size_t> rows(150), features(10);
  std::iota(features.begin(), features.end(), 0);
  Rng boot(3);
  std::uniform_int_distribution<std::size_t> pick(0, 149);
  for (auto& r : rows) r = pick(boot);
  TreeBuilder plain(s.x_train, s.y_train, TreeOptions{-1, 3, 4});
  TreeBuilder sorted(s.x_train, s.y_train, TreeOptions{-1, 3, 4}, &order);
  Rng a(9), b(9);
  EXPECT_EQ(plain.build(rows, features, &a), sorted.build(rows, features, &b));
}

TEST(RandomForest, FitsFriedmanAndIsSeedDeterministic) {
  const auto s = friedman_split(300, 200, 6);
  RfParams p;
  p.ntree = 100;
  const auto f1 = fit_random_forest(s.x_train, s.y_train, p, 11);
  EXPECT_EQ(f1.trees.size(), 100u);
  std::vector<double> pred;
  for (std::size_t i = 0; i < s.x_test.rows(); ++i) pred.push_back(f1.predict(s.x_test.row(i)));
  EXPECT_GT(r2(s.y_test, pred), 0.6);
  EXPECT_TRUE(std::isfinite(f1.oob_rmse));

  set_default_threads(1);
  const auto serial = fit_random_forest(s.x_train, s.y_train, p, 11);
  set_default_threads(4);
  const auto threaded = fit_random_forest(s.x_train, s.y_train, p, 11);
  set_default_threads(0);
  EXPECT_EQ(serial, threaded);
  EXPECT_NE(serial, fit_random_forest(s.x_train, s.y_train, p, 12));
}

TEST(Boosting, TrainingErrorNeverIncreases) {
  const auto s = friedman_split(200, 100, 7);
  XgbParams p;
  p.rounds = 60;
  p.early_stopping_rounds = 0;
  p.eta = 0.1;
  p.max_depth = 3;
  const auto fit = fit_xgb(s.x_train, s.y_train, p, 1);
  ASSERT_EQ(fit.train_rmse.size(), 60u);
  for (std::size_t i = 1; i < fit.train_rmse.size(); ++i) EXPECT_LE(fit.train_rmse[i], fit.train_rmse[i - 1] + 1e-12);
  EXPECT_TRUE(fit.holdout_rmse.empty());
  std::vector<double> pred;
  for (std::size_t i = 0; i < s.x_test.rows(); ++i) pred.push_back(fit.model.predict(s.x_test.row(i)));
  EXPECT_GT(r2(s.y_test, pred), 0.6);
}

TEST(Boosting, EarlyStoppingCapsRounds) {
  const auto s = friedman_split(200, 0, 8);
  XgbParams p;
  p.rounds = 400;
  p.early_stopping_rounds = 10;
  const auto fit = fit_xgb(s.x_train, s.y_train, p, 1);
  EXPECT_LT(fit.model.trees.size(), 400u);
  EXPECT_FALSE(fit.holdout_rmse.empty());
}

TEST(Svr, FitsSmoothCurve) {
  Matrix x(80, 1);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < 80; ++i) {
    x(i, 0) = -3.0 + 6.0 * static_cast<double>(i) / 79.0;
    y[i] = std::sin(x(i, 0));
  }
  SvrParams p;
  p.C = 10.0;
  p.epsilon = 0.01;
  const auto model = fit_svr(x, y, p);
  std::vector<double> pred;
  for (std::size_t i = 0; i < 80; ++i) pred.push_back(model.predict(x.row(i)));
  EXPECT_GT(r2(y, pred), 0.97);
  EXPECT_LT(model.dual_gap, 1e-3);
}

TEST(Svr, IterationCapIsAConvergenceError) {
  const auto s = friedman_split(60, 0, 9);
  SvrSolverOptions opt;
  opt.C = 50.0;
  opt.max_iterations = 3;
  EXPECT_EQ(code_of([&] { solve_svr_dual(rbf_gram(s.x_train, 1.0), s.y_train, opt); }), Errc::convergence);
  EXPECT_EQ(exit_code(Errc::convergence), 4);
}

TEST(Networks, TrainingReducesLoss) {
  const auto s = friedman_split(200, 0, 10);
  AnnParams ann;
  ann.epochs = 300;
  const auto mlp = fit_mlp(s.x_train, s.y_train, ann, 3);
  ASSERT_FALSE(mlp.loss_curve.empty());
  EXPECT_LT(mlp.loss_curve.back(), 0.5 * mlp.loss_curve.front());

  DnnParams dnn;
  dnn.epochs = 40;
  dnn.hidden = 2;
  dnn.size = 16;
  const auto a = fit_dnn(s.x_train, s.y_train, dnn, 4);
  const auto b = fit_dnn(s.x_train, s.y_train, dnn, 4);
  EXPECT_EQ(a.model, b.model);
  EXPECT_LT(a.loss_curve.back(), a.loss_curve.front());
}

TEST(ModelTree, FitsLinearSurfaceClosely) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix x(200, 2);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    x(i, 0) = u(rng);
    x(i, 1) = u(rng);
    y[i] = 1.0 + 3.0 * x(i, 0) - 2.0 * x(i, 1);
  }
  ModelTreeParams params;
  params.ridge = 1e-10;
  const auto m = fit_model_tree(x, y, params, 1);
  for (std::size_t i = 0; i < 200; i += 17) EXPECT_NEAR(m.predict(x.row(i)), y[i], 1e-6);
}

TEST(GenericFit, ValidatesInputs) {
  const auto s = friedman_split(30, 0, 11);
  auto spec = default_spec(Algorithm::RF, 1);
  std::vector<std::size_t> four = {0, 1, 2, 3};
  const std::vector<double> y4(s.y_train.begin(), s.y_train.begin() + 4);
  EXPECT_EQ(code_of([&] { fit(spec, s.x_train.select_rows(four), y4); }), Errc::insufficient_data);
  Matrix bad = s.x_train;
  bad(3, 2) = std::nan("");
  EXPECT_EQ(code_of([&] { fit(spec, bad, s.y_train); }), Errc::data);
  std::get<RfParams>(spec.params).ntree = 50;
  try {
    fit(spec, s.x_train, s.y_train);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::spec);
    EXPECT_NE(std::string(e.what()).find("[100, 3000]"), std::string::npos);
  }
}

TEST(GenericFit, MeanBaselinePredictsTrainingMean) {
  const auto s = friedman_split(40, 5, 12);
  const auto m = fit(default_spec(Algorithm::Mean), s.x_train, s.y_train);
  const double mean = std::accumulate(s.y_train.begin(), s.y_train.end(), 0.0) / 40.0;
  for (double v : predict(m, s.x_test)) EXPECT_NEAR(v, mean, 1e-12);
}

TEST(GenericFit, PredictChecksColumnNames) {
  const auto s = friedman_split(40, 5, 13);
  auto spec = default_spec(Algorithm::Mean);
  std::vector<std::string> names;
  for (int j = 0; j < 10; ++j) names.push_back("f" + std::to_string(j));
  const auto m = fit(spec, s.x_train, s.y_train, names);
  auto swapped = names;
  std::swap(swapped[0], swapped[1]);
  EXPECT_EQ(code_of([&] { predict(m, s.x_test, swapped); }), Errc::shape);
  EXPECT_NO_THROW(predict(m, s.x_test, names));
}

class ModelRoundTrip : public ::testing::TestWithParam<Algorithm> {};

TEST_P(ModelRoundTrip, SavedModelPredictsIdentically) {
  const auto s = friedman_split(120, 30, 14);
  auto spec = default_spec(GetParam(), 21);
  if (auto* a = std::get_if<AnnParams>(&spec.params)) a->epochs = 100;
  if (auto* d = std::get_if<DnnParams>(&spec.params)) d->epochs = 10;
  if (auto* x = std::get_if<XgbParams>(&spec.params)) x->rounds = 30;
  if (auto* r = std::get_if<RfParams>(&spec.params)) r->ntree = 100;
  const auto model = fit(spec, s.x_train, s.y_train);
  const auto dir = fixtures::scratch_dir(std::string("model_") + std::string(to_string(GetParam())));
  save_model(model, dir / "m.bin");
  const auto back = load_model(dir / "m.bin");
  EXPECT_EQ(back.spec(), model.spec());
  EXPECT_EQ(back.feature_names(), model.feature_names());
  EXPECT_EQ(predict(back, s.x_test), predict(model, s.x_test));
}

INSTANTIATE_TEST_SUITE_P(AllAlgorithms, ModelRoundTrip,
                         ::testing::Values(Algorithm::SVR, Algorithm::ANN, Algorithm::ModelTree, Algorithm::RF,
                                           Algorithm::XGB, Algorithm::DNN, Algorithm::Mean),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(ModelIo, RejectsBadDocuments) {
  EXPECT_EQ(code_of([] { spec_from_json({{"algorithm", "RF"}, {"params", {{"trees", 5}}}}); }), Errc::spec);
  EXPECT_EQ(code_of([] { spec_from_json({{"algorithm", "GLM"}}); }), Errc::spec);
  const auto dir = fixtures::scratch_dir("model_bad");
  std::ofstream(dir / "junk.bin") << "not cbor at all";
  EXPECT_EQ(code_of([&] { load_model(dir / "junk.bin"); }), Errc::format);
  EXPECT_EQ(code_of([&] { load_model(dir / "missing.bin"); }), Errc::io);
}

TEST(Tuning, SampledSpecsStayInRange) {
  Rng rng(2);
  for (auto a : kStudyAlgorithms) {
    const auto space = SpecSpace::defaults(a);
    for (int i = 0; i < 20; ++i) EXPECT_NO_THROW(validate(sample_spec(space, rng, 6))) << to_string(a);
  }
}

TEST(Tuning, PicksLowestInnerRmse) {
  const auto s = friedman_split(100, 0, 15);
  std::vector<LearnerSpec> candidates = {default_spec(Algorithm::Mean, 1), default_spec(Algorithm::RF, 1)};
  std::get<RfParams>(candidates[1].params).ntree = 100;
  const auto result = tune_candidates(candidates, s.x_train, s.y_train, 3, 8);
  ASSERT_EQ(result.scores.size(), 2u);
  EXPECT_LT(result.scores[1], result.scores[0]);
  EXPECT_EQ(result.best, candidates[1]);
}
