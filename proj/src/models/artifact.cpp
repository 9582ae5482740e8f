#include <map>

#include "json.hpp"

#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/parallel.hpp"
#include "intimacy/common/rng.hpp"
#include "intimacy/models.hpp"

namespace intimacy::models {

namespace {

constexpr int kArtifactVersion = 1;
constexpr const char* kArtifactFormat = "intimacy-model";

std::uint64_t inference_seed(const TopicModel& lda) { return derive_seed(lda.seed, 0x696e666572ULL); }

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kMean: return "mean";
    case ModelKind::kRidgeNgram: return "ridge_ngram";
    case ModelKind::kLdaRidge: return "lda_ridge";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "mean") return ModelKind::kMean;
  if (s == "ridge_ngram") return ModelKind::kRidgeNgram;
  if (s == "lda_ridge") return ModelKind::kLdaRidge;
  throw Error("invalid_argument", "unknown model kind '" + s + "' (mean, ridge_ngram, lda_ridge)");
}

IntimacyModel fit_model(ModelKind kind, const std::vector<std::string>& texts,
                        std::span<const double> y, const TrainOptions& options,
                        const std::vector<std::string>& extra_topic_corpus) {
  if (texts.size() != y.size())
    throw Error("dimension_mismatch", std::to_string(texts.size()) + " texts vs " +
                                          std::to_string(y.size()) + " targets");
  IntimacyModel m;
  m.kind = kind;
  m.mean = mean_predictor(y).value;
  m.infer_iterations = options.infer_iterations;
  switch (kind) {
    case ModelKind::kMean:
      break;
    case ModelKind::kRidgeNgram:
      m.vocabulary = NgramVocabulary::build(texts, options.vocabulary_size, options.max_n);
      m.ridge = train_ridge(build_ngram_features(texts, m.vocabulary), y, options.lambda);
      break;
    case ModelKind::kLdaRidge: {
      std::vector<std::string> corpus(texts);
      corpus.insert(corpus.end(), extra_topic_corpus.begin(), extra_topic_corpus.end());
      m.lda = train_lda_gibbs(corpus, options.lda);
      // Sampler state is only needed while training.
      m.lda->documents.clear();
      m.lda->assignments.clear();
      const Eigen::MatrixXd features =
          topic_features(*m.lda, texts, m.infer_iterations, inference_seed(*m.lda), 1);
      m.ridge = train_ridge(features, y, options.lambda);
      break;
    }
  }
  return m;
}

std::vector<double> IntimacyModel::predict(const std::vector<std::string>& texts,
                                           std::size_t threads) const {
  switch (kind) {
    case ModelKind::kMean:
      return MeanPredictor{mean}.predict(texts.size());
    case ModelKind::kRidgeNgram:
      return predict_ridge(ridge, build_ngram_features(texts, vocabulary));
    case ModelKind::kLdaRidge:
      if (!lda) throw Error("invalid_argument", "LDA model missing its topic model");
      return predict_ridge(
          ridge, topic_features(*lda, texts, infer_iterations, inference_seed(*lda), threads));
  }
  return {};
}

std::string serialize_model(const IntimacyModel& m) {
  nlohmann::ordered_json j;
  j["format"] = kArtifactFormat;
  j["version"] = kArtifactVersion;
  j["kind"] = to_string(m.kind);
  j["mean"] = m.mean;
  j["infer_iterations"] = m.infer_iterations;
  j["vocabulary"] = {{"max_n", m.vocabulary.max_n()}, {"ngrams", m.vocabulary.ngrams()}};
  j["ridge"] = {{"lambda", m.ridge.lambda}, {"bias", m.ridge.bias},
                {"weights", to_vector(m.ridge.weights)}};
  if (m.lda) {
    const auto& t = *m.lda;
    j["lda"] = {{"topics", t.topics},         {"alpha", t.alpha},
                {"beta", t.beta},             {"seed", t.seed},
                {"words", t.words},           {"word_topic", t.word_topic},
                {"topic_totals", t.topic_totals}};
  } else {
    j["lda"] = nullptr;
  }
  return j.dump() + "\n";
}

IntimacyModel deserialize_model(const std::string& content) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", std::string("model artifact is not JSON: ") + e.what());
  }
  try {
    if (j.at("format") != kArtifactFormat) throw Error("parse_error", "not a model artifact");
    if (j.at("version").get<int>() != kArtifactVersion)
      throw Error("parse_error", "unsupported artifact version " + j.at("version").dump());
    IntimacyModel m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.mean = j.at("mean").get<double>();
    m.infer_iterations = j.at("infer_iterations").get<std::size_t>();
    m.vocabulary = NgramVocabulary(j.at("vocabulary").at("ngrams").get<std::vector<std::string>>());
    const auto& r = j.at("ridge");
    m.ridge.lambda = r.at("lambda").get<double>();
    m.ridge.bias = r.at("bias").get<double>();
    const auto w = r.at("weights").get<std::vector<double>>();
    m.ridge.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    if (!j.at("lda").is_null()) {
      const auto& l = j.at("lda");
      TopicModel t;
      t.topics = l.at("topics").get<std::size_t>();
      t.alpha = l.at("alpha").get<double>();
      t.beta = l.at("beta").get<double>();
      t.seed = l.at("seed").get<std::uint64_t>();
      t.words = l.at("words").get<std::vector<std::string>>();
      t.word_topic = l.at("word_topic").get<std::vector<std::int32_t>>();
      t.topic_totals = l.at("topic_totals").get<std::vector<std::int64_t>>();
      if (t.word_topic.size() != t.words.size() * t.topics || t.topic_totals.size() != t.topics)
        throw Error("parse_error", "topic model dimensions are inconsistent");
      t.rebuild_index();
      m.lda = std::move(t);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", std::string("malformed model artifact: ") + e.what());
  }
}

std::string format_predictions(const std::vector<std::string>& ids,
                               const std::vector<double>& scores) {
  if (ids.size() != scores.size()) throw Error("length_mismatch", "ids vs scores");
  std::string out = "question_id,score\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    out += csv::format_row({ids[i], csv::format_double(scores[i])});
  return out;
}

namespace {

struct SplitData {
  std::vector<std::string> train_text, test_text, test_ids;
  std::vector<double> train_y, test_y;
};

SplitData gather(const std::vector<LabeledQuestion>& data, const DataSplit& split) {
  std::map<std::string, const LabeledQuestion*> by_id;
  for (const auto& q : data) by_id[q.id] = &q;
  auto find = [&](const std::string& id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error("unknown_item", "split id '" + id + "' has no label");
    return it->second;
  };
  SplitData s;
  for (const auto& id : split.train) {
    const auto* q = find(id);
    s.train_text.push_back(q->text);
    s.train_y.push_back(q->score);
  }
  for (const auto& id : split.test) {
    const auto* q = find(id);
    s.test_ids.push_back(id);
    s.test_text.push_back(q->text);
    s.test_y.push_back(q->score);
  }
  if (s.train_y.empty() || s.test_y.empty())
    throw Error("insufficient_data", "train and test parts must be non-empty");
  return s;
}

std::string lda_row_name(std::size_t k) { return "lr_lda" + std::to_string(k); }

}  // namespace

std::vector<ComparisonRow> baseline_comparison(const std::vector<LabeledQuestion>& data,
                                               const DataSplit& split, const TrainOptions& options,
                                               const std::map<std::string, double>* external) {
  const auto s = gather(data, split);
  std::vector<ComparisonRow> rows;
  for (auto kind : {ModelKind::kMean, ModelKind::kRidgeNgram, ModelKind::kLdaRidge}) {
    const auto model = fit_model(kind, s.train_text, s.train_y, options);
    const auto name = kind == ModelKind::kMean         ? std::string("mean_predictor")
                      : kind == ModelKind::kRidgeNgram ? std::string("lr_bow")
                                                       : lda_row_name(options.lda.topics);
    rows.push_back({name, evaluate(model.predict(s.test_text), s.test_y)});
  }
  if (external) {
    std::vector<double> pred;
    for (const auto& id : s.test_ids) {
      auto it = external->find(id);
      if (it == external->end())
        throw Error("unknown_item", "external scores lack test id '" + id + "'");
      pred.push_back(it->second);
    }
    rows.push_back({"external", evaluate(pred, s.test_y)});
  }
  return rows;
}

std::vector<ComparisonRow> topic_sweep(const std::vector<LabeledQuestion>& data,
                                       const DataSplit& split, const std::vector<std::size_t>& ks,
                                       const TrainOptions& options, std::size_t threads) {
  const auto s = gather(data, split);
  std::vector<ComparisonRow> rows(ks.size());
  parallel_for(
      ks.size(),
      [&](std::size_t i) {
        TrainOptions o = options;
        o.lda.topics = ks[i];
        const auto model = fit_model(ModelKind::kLdaRidge, s.train_text, s.train_y, o);
        rows[i] = {lda_row_name(ks[i]), evaluate(model.predict(s.test_text, 1), s.test_y)};
      },
      threads);
  return rows;
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
  std::string out = "model,mse,pearson_r\n";
  for (const auto& r : rows)
    out += csv::format_row(
        {r.model, csv::format_double(r.test.mse, 4), csv::format_double(r.test.pearson_r, 4)});
  return out;
}

}  // namespace intimacy::models
