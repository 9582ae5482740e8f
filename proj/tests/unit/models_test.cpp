#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "doctest.h"
#include "intimacy/common/error.hpp"
#include "intimacy/common/io.hpp"
#include "intimacy/models.hpp"
#include "intimacy/reliability.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace intimacy;
using namespace intimacy::models;

namespace {

using V = std::vector<double>;

std::string temp_file(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "intimacy_models_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / name).string();
  io::atomic_write(path, content);
  return path;
}

std::string code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(synth::item_name(i));
  return out;
}

}  // namespace

TEST_CASE("split sizes") {
  const auto s = split_dataset(ids(2247), {8, 1, 1}, 3);
  CHECK(s.train.size() == 1798);
  CHECK(s.validation.size() == 225);
  CHECK(s.test.size() == 224);
  const auto t = split_dataset(ids(10));
  CHECK(t.train.size() == 8);
  CHECK(t.validation.size() == 1);
  CHECK(t.test.size() == 1);
}

TEST_CASE("split is a deterministic partition") {
  const auto all = ids(500);
  const auto a = split_dataset(all, {8, 1, 1}, 9), b = split_dataset(all, {8, 1, 1}, 9);
  CHECK(format_split(a) == format_split(b));
  CHECK(format_split(a) != format_split(split_dataset(all, {8, 1, 1}, 10)));
  std::set<std::string> u;
  for (const auto* part : {&a.train, &a.validation, &a.test})
    for (const auto& id : *part) CHECK(u.insert(id).second);
  CHECK(u.size() == all.size());
  CHECK(code_of([] { split_dataset(ids(5)); }) == "too_few_items");
}

TEST_CASE("split file round trip") {
  const auto s = split_dataset(ids(40), {8, 1, 1}, 1);
  const auto back = read_split(temp_file("split.csv", format_split(s)));
  CHECK(back.train == s.train);
  CHECK(back.validation == s.validation);
  CHECK(back.test == s.test);
}

TEST_CASE("n-gram counts") {
  NgramVocabulary v({"what", "is", "what is", "is is"});
  const auto x = build_ngram_features({"what is is", "", "zebra crossing"}, v);
  CHECK(x.rows() == 3);
  CHECK(x.cols() == 4);
  const Eigen::MatrixXd d(x);
  CHECK(d.row(0) == Eigen::RowVector4d(1, 2, 1, 1));
  CHECK(d.row(1).isZero());
  CHECK(d.row(2).isZero());
  CHECK(code_of([] { NgramVocabulary({"a", "a"}); }) == "duplicate_ngram");
}

TEST_CASE("n-gram vocabulary keeps the most frequent grams") {
  const auto v = NgramVocabulary::build({"a b a", "a c", "b b"}, 3, 2);
  CHECK(v.ngrams() == std::vector<std::string>{"a", "b", "a b"});
  CHECK(v.index("b") == 1u);
  CHECK_FALSE(v.index("zzz").has_value());
  auto grams = extract_ngrams({"x", "y", "z"}, 3);
  std::sort(grams.begin(), grams.end());
  CHECK(grams == std::vector<std::string>{"x", "x y", "x y z", "y", "y z", "z"});
}

TEST_CASE("ridge: zero target") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 0, 0, 1, 1, 1, 2, 1;
  const auto m = train_ridge(x, V{0, 0, 0, 0}, 1.0);
  CHECK(m.weights.isZero());
  CHECK(m.bias == 0.0);
}

TEST_CASE("ridge: one feature closed form") {
  // x = (1,2,3), y = (1,3,2): centered sums Sxx = 2, Sxy = 1, so w = 1/(2+1), b = 2 - 2w.
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  const auto m = train_ridge(x, V{1, 3, 2}, 1.0);
  CHECK(m.weights(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(m.bias == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("ridge: lambda 0 is ordinary least squares") {
  Rng rng(2);
  std::normal_distribution<double> n(0, 1);
  std::vector<std::vector<double>> rows;
  V y;
  Eigen::MatrixXd x(30, 3);
  for (int i = 0; i < 30; ++i) {
    rows.push_back({n(rng), n(rng), n(rng)});
    for (int j = 0; j < 3; ++j) x(i, j) = rows.back()[j];
    y.push_back(1.0 + 2.0 * rows.back()[0] - rows.back()[2] + 0.1 * n(rng));
  }
  const auto m = train_ridge(x, y, 0.0);
  const auto beta = oracle::ols_with_intercept(rows, y);
  CHECK(m.bias == doctest::Approx(beta[0]).epsilon(1e-9));
  for (int j = 0; j < 3; ++j) CHECK(m.weights(j) == doctest::Approx(beta[j + 1]).epsilon(1e-9));
}

TEST_CASE("ridge: huge lambda predicts the mean") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 0, 0, 1, 1, 1, 2, 1;
  const V y{1, 2, 4, 5};
  const auto m = train_ridge(x, y, 1e9);
  CHECK(m.weights.cwiseAbs().maxCoeff() < 1e-3);
  for (double p : predict_ridge(m, x)) CHECK(p == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("ridge: more features than rows matches the closed form") {
  Rng rng(6);
  std::normal_distribution<double> n(0, 1);
  Eigen::MatrixXd wide(10, 40);
  V y(10);
  for (int i = 0; i < 10; ++i) {
    y[i] = n(rng);
    for (int j = 0; j < 40; ++j) wide(i, j) = n(rng);
  }
  const auto m = train_ridge(wide, y, 2.0);
  Eigen::VectorXd yc(10);
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / 10.0;
  for (int i = 0; i < 10; ++i) yc(i) = y[i] - ybar;
  const Eigen::MatrixXd xc = wide.rowwise() - wide.colwise().mean();
  const Eigen::VectorXd w =
      (xc.transpose() * xc + 2.0 * Eigen::MatrixXd::Identity(40, 40)).ldlt().solve(xc.transpose() * yc);
  CHECK((m.weights - w).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ridge errors") {
  Eigen::MatrixXd x(3, 2);
  x << 1, 2, 2, 4, 3, 6;
  CHECK(code_of([&] { train_ridge(x, V{1, 2, 3}, 0.0); }) == "rank_deficient");
  CHECK(code_of([&] { train_ridge(x, V{1, 2}, 1.0); }) == "dimension_mismatch");
  CHECK(code_of([&] { train_ridge(x, V{1, 2, 3}, -1.0); }) == "invalid_argument");
}

TEST_CASE("lda recovers two planted vocabularies") {
  std::vector<std::string> corpus;
  for (int d = 0; d < 40; ++d) {
    std::string text;
    const char* prefix = d % 2 ? "sea" : "fire";
    for (int k = 0; k < 12; ++k) text += std::string(prefix) + std::to_string((d * 7 + k * 3) % 10) + " ";
    corpus.push_back(text);
  }
  LdaOptions opt;
  opt.topics = 2;
  opt.alpha = 0.1;
  opt.iterations = 200;
  opt.seed = 4;
  const auto m = train_lda_gibbs(corpus, opt);
  std::set<std::size_t> dominant[2];
  for (int d = 0; d < 40; ++d) {
    const auto theta = infer_topics(m, corpus[d], 50, 1);
    const auto top = std::max_element(theta.begin(), theta.end()) - theta.begin();
    CHECK(theta[top] > 0.9);
    dominant[d % 2].insert(top);
  }
  CHECK(dominant[0].size() == 1);
  CHECK(dominant[1].size() == 1);
  CHECK(*dominant[0].begin() != *dominant[1].begin());
  for (std::size_t k = 0; k < 2; ++k) {
    const auto phi = m.topic_word_distribution(k);
    CHECK(std::accumulate(phi.begin(), phi.end(), 0.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("lda is deterministic and its likelihood improves") {
  const auto data = synth::themed_corpus(200, 4, 3);
  std::vector<std::string> corpus;
  for (const auto& q : data) corpus.push_back(q.text);
  LdaOptions opt;
  opt.topics = 4;
  opt.iterations = 60;
  opt.seed = 11;
  opt.track_likelihood = true;
  const auto a = train_lda_gibbs(corpus, opt), b = train_lda_gibbs(corpus, opt);
  CHECK(a.word_topic == b.word_topic);
  CHECK(a.log_likelihood_trace.size() == 60);
  CHECK(a.log_likelihood_trace.back() > a.log_likelihood_trace.front());
  CHECK(lda_log_likelihood(a) == doctest::Approx(a.log_likelihood_trace.back()));
  const auto fa = topic_features(a, corpus, 20, 5, 1), fb = topic_features(a, corpus, 20, 5, 3);
  CHECK(fa == fb);
  const auto empty = infer_topics(a, "", 20, 0);
  for (double t : empty) CHECK(t == doctest::Approx(0.25));
  CHECK(code_of([] { train_lda_gibbs({}, {}); }) == "empty_corpus");
}

TEST_CASE("mean predictor and evaluate") {
  CHECK(mean_predictor(V{-1, 1}).value == 0.0);
  const V gold{1, 3, 2};
  auto r = evaluate(gold, gold);
  CHECK(r.mse == 0.0);
  CHECK(r.pearson_r == doctest::Approx(1.0));
  r = evaluate(V{1.1, 3.1, 2.1}, gold);
  CHECK(r.mse == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(r.pearson_r == doctest::Approx(1.0));
  r = evaluate(V{1, 2, 3}, gold);
  CHECK(r.mse == doctest::Approx(2.0 / 3.0));
  CHECK(r.pearson_r == doctest::Approx(0.5));
  CHECK(evaluate(V{0, 0, 0}, gold).pearson_r == 0.0);
  CHECK(code_of([] { evaluate(V{1}, V{1, 2}); }) == "length_mismatch");
}

TEST_CASE("external score ingestion") {
  CHECK(ingest_external_scores(temp_file("ok.csv", "question_id,score\nq1,0.1\nq2,-0.5\nq3,1\n"))
            .size() == 3);
  CHECK(ingest_external_scores(temp_file("nohead.csv", "q1,0.1\nq2,-0.5\nq3,1\n")).size() == 3);
  try {
    ingest_external_scores(temp_file("dup.csv", "q1,0.1\nq7,0.2\nq7,0.3\n"));
    FAIL("expected duplicate_id");
  } catch (const Error& e) {
    CHECK(e.code() == "duplicate_id");
    CHECK(std::string(e.what()).find("q7") != std::string::npos);
  }
  CHECK(code_of([] { ingest_external_scores(temp_file("nan.csv", "q1,0.1\nq2,NaN\n")); }) ==
        "parse_error");
}

TEST_CASE("model artifacts round trip") {
  const auto data = synth::linear_signal_corpus(300, 8, 5);
  std::vector<std::string> texts;
  V y;
  for (const auto& q : data) {
    texts.push_back(q.text);
    y.push_back(q.score);
  }
  TrainOptions opt;
  opt.lda.topics = 5;
  opt.lda.iterations = 30;
  opt.infer_iterations = 10;
  for (auto kind : {ModelKind::kMean, ModelKind::kRidgeNgram, ModelKind::kLdaRidge}) {
    const auto m = fit_model(kind, texts, y, opt);
    const auto json = serialize_model(m);
    const auto back = deserialize_model(json);
    CHECK(serialize_model(back) == json);
    CHECK(back.predict(texts, 1) == m.predict(texts, 1));
    CHECK(parse_model_kind(to_string(kind)) == kind);
  }
  CHECK(code_of([] { deserialize_model("{\"format\":\"other\"}"); }) == "parse_error");
}

TEST_CASE("ridge on n-grams recovers a planted linear signal") {
  const auto data = synth::linear_signal_corpus(2000, 8, 17);
  const auto split = split_dataset(
      [&] {
        std::vector<std::string> v;
        for (const auto& q : data) v.push_back(q.id);
        return v;
      }(),
      {8, 1, 1}, 17);
  TrainOptions opt;
  opt.lda.topics = 5;
  opt.lda.iterations = 20;
  opt.infer_iterations = 10;
  const auto rows = baseline_comparison(data, split, opt);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].model == "mean_predictor");
  CHECK(rows[0].test.pearson_r == 0.0);
  CHECK(rows[1].model == "lr_bow");
  CHECK(rows[1].test.pearson_r >= 0.95);
  CHECK(format_comparison(rows).rfind("model,mse,pearson_r\n", 0) == 0);
}
