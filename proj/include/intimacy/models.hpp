#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace intimacy::models {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// --- dataset ------------------------------------------------------------------

struct LabeledQuestion {
  std::string id;
  std::string text;
  double score = 0.0;
};

// CSV with columns id,text,score.
std::vector<LabeledQuestion> read_labeled(const std::string& path);

struct DataSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

// Seeded shuffle, then train = round(n*r0/sum), validation = round(n*r1/sum),
// test = the rest.
DataSplit split_dataset(const std::vector<std::string>& ids,
                        std::array<std::size_t, 3> ratios = {8, 1, 1}, std::uint64_t seed = 0);

std::string format_split(const DataSplit& split);
DataSplit read_split(const std::string& path);

// --- n-gram features -------------------------------------------------------------

// Space-joined 1..max_n grams of a token sequence, in text order.
std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, int max_n);

class NgramVocabulary {
 public:
  NgramVocabulary() = default;
  // Index i is assigned to ngrams[i].
  explicit NgramVocabulary(std::vector<std::string> ngrams);

  // Top `max_size` 1..max_n grams by raw corpus frequency, ties broken
  // lexicographically.
  static NgramVocabulary build(const std::vector<std::string>& texts, std::size_t max_size = 10000,
                               int max_n = 3);

  std::optional<std::size_t> index(const std::string& ngram) const;
  std::size_t size() const { return ngrams_.size(); }
  int max_n() const { return max_n_; }
  const std::vector<std::string>& ngrams() const { return ngrams_; }

 private:
  std::vector<std::string> ngrams_;
  std::unordered_map<std::string, std::size_t> index_;
  int max_n_ = 0;
};

// Row i holds the counts of in-vocabulary n-grams of texts[i].
SparseMatrix build_ngram_features(const std::vector<std::string>& texts,
                                  const NgramVocabulary& vocabulary);

// --- ridge ------------------------------------------------------------------------

struct RidgeModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double lambda = 1.0;
};

// Minimizes ||y - Xw - b||^2 + lambda ||w||^2 with b unpenalized. Solves the
// primal normal equations when features <= rows, otherwise the equivalent
// dual (kernel) system. lambda == 0 requires full column rank.
RidgeModel train_ridge(const SparseMatrix& x, std::span<const double> y, double lambda = 1.0);
RidgeModel train_ridge(const Eigen::MatrixXd& x, std::span<const double> y, double lambda = 1.0);
std::vector<double> predict_ridge(const RidgeModel& model, const SparseMatrix& x);
std::vector<double> predict_ridge(const RidgeModel& model, const Eigen::MatrixXd& x);

// --- LDA ----------------------------------------------------------------------------

struct LdaOptions {
  std::size_t topics = 50;
  double alpha = 0.0;  // 0 means 50 / topics
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  bool track_likelihood = false;
};

struct TopicModel {
  std::size_t topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> words;                     // sorted vocabulary
  std::unordered_map<std::string, std::size_t> word_index;
  std::vector<std::int32_t> word_topic;               // words.size() x topics, row-major
  std::vector<std::int64_t> topic_totals;             // per topic
  std::vector<std::vector<std::int32_t>> documents;   // word ids per training doc
  std::vector<std::vector<std::int32_t>> assignments; // topic per token
  std::vector<double> log_likelihood_trace;           // per iteration, when tracked

  std::size_t vocabulary_size() const { return words.size(); }
  // Normalized topic-word distribution phi_k.
  std::vector<double> topic_word_distribution(std::size_t topic) const;
  void rebuild_index();
};

// Collapsed Gibbs sampling over token-topic assignments.
TopicModel train_lda_gibbs(const std::vector<std::string>& corpus, const LdaOptions& options);

// log p(w | z) of the current assignment state.
double lda_log_likelihood(const TopicModel& model);

// Smoothed document-topic proportions from Gibbs sampling against the fixed
// trained topics, averaged over the second half of the sweeps. Empty or
// fully out-of-vocabulary text yields the uniform vector.
std::vector<double> infer_topics(const TopicModel& model, std::string_view text,
                                 std::size_t iterations, std::uint64_t seed);

// Rows are infer_topics of each text. Each row's seed mixes `seed` with a hash
// of the text, so identical texts get identical features in any batch.
Eigen::MatrixXd topic_features(const TopicModel& model, const std::vector<std::string>& texts,
                               std::size_t iterations, std::uint64_t seed,
                               std::size_t threads = 0);

// --- evaluation -------------------------------------------------------------------------

struct MeanPredictor {
  double value = 0.0;
  std::vector<double> predict(std::size_t n) const { return std::vector<double>(n, value); }
};

MeanPredictor mean_predictor(std::span<const double> y_train);

struct EvalResult {
  double mse = 0.0;
  double pearson_r = 0.0;
};

EvalResult evaluate(std::span<const double> predictions, std::span<const double> gold);

// Two-column CSV (question_id,score); an optional header row is skipped.
std::map<std::string, double> ingest_external_scores(const std::string& path);

// --- trained regressors and artifacts --------------------------------------------------

enum class ModelKind { kMean, kRidgeNgram, kLdaRidge };
std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

struct TrainOptions {
  double lambda = 1.0;
  std::size_t vocabulary_size = 10000;
  int max_n = 3;
  LdaOptions lda;
  std::size_t infer_iterations = 50;
};

struct IntimacyModel {
  ModelKind kind = ModelKind::kMean;
  double mean = 0.0;
  NgramVocabulary vocabulary;
  RidgeModel ridge;
  std::optional<TopicModel> lda;
  std::size_t infer_iterations = 50;

  std::vector<double> predict(const std::vector<std::string>& texts, std::size_t threads = 0) const;
};

// `extra_topic_corpus` adds unlabeled text to LDA training only.
IntimacyModel fit_model(ModelKind kind, const std::vector<std::string>& texts,
                        std::span<const double> y, const TrainOptions& options,
                        const std::vector<std::string>& extra_topic_corpus = {});

// Versioned JSON artifact with embedded vocabulary and hyperparameters.
std::string serialize_model(const IntimacyModel& model);
IntimacyModel deserialize_model(const std::string& content);

std::string format_predictions(const std::vector<std::string>& ids,
                               const std::vector<double>& scores);

// --- comparison harnesses ----------------------------------------------------------------

struct ComparisonRow {
  std::string model;
  EvalResult test;
};

// Mean predictor, ridge on n-grams and ridge on LDA topics (topics from
// options.lda), trained on the split's train ids and scored on its test ids.
// External predictions, when given, are scored on the same test ids.
std::vector<ComparisonRow> baseline_comparison(const std::vector<LabeledQuestion>& data,
                                               const DataSplit& split, const TrainOptions& options,
                                               const std::map<std::string, double>* external = nullptr);

// Ridge on LDA topic features for each topic count.
std::vector<ComparisonRow> topic_sweep(const std::vector<LabeledQuestion>& data,
                                       const DataSplit& split, const std::vector<std::size_t>& ks,
                                       const TrainOptions& options, std::size_t threads = 0);

// model,mse,pearson_r
std::string format_comparison(const std::vector<ComparisonRow>& rows);

}  // namespace intimacy::models
