#include <algorithm>
#include <cmath>
#include <set>

#include "intimacy/common/error.hpp"
#include "intimacy/common/parallel.hpp"
#include "intimacy/common/rng.hpp"
#include "intimacy/common/text.hpp"
#include "intimacy/models.hpp"

namespace intimacy::models {

namespace {

// Portable uniform draw in [0, 1); std distributions differ across libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample_index(const std::vector<double>& cumulative, Rng& rng) {
  const double u = uniform01(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

// FNV-1a; seeds inference by content so a text's features do not depend on
// where it sits in the batch.
std::uint64_t text_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

}  // namespace

std::vector<double> TopicModel::topic_word_distribution(std::size_t topic) const {
  if (topic >= topics) throw Error("invalid_argument", "topic out of range");
  const std::size_t v = words.size();
  std::vector<double> phi(v);
  const double denom = static_cast<double>(topic_totals[topic]) + static_cast<double>(v) * beta;
  for (std::size_t w = 0; w < v; ++w)
    phi[w] = (word_topic[w * topics + topic] + beta) / denom;
  return phi;
}

void TopicModel::rebuild_index() {
  word_index.clear();
  for (std::size_t i = 0; i < words.size(); ++i) word_index.emplace(words[i], i);
}

TopicModel train_lda_gibbs(const std::vector<std::string>& corpus, const LdaOptions& options) {
  if (corpus.empty()) throw Error("empty_corpus", "LDA needs at least one document");
  if (options.topics < 2) throw Error("invalid_argument", "LDA needs at least 2 topics");
  if (options.beta <= 0.0 || options.alpha < 0.0)
    throw Error("invalid_argument", "LDA hyperparameters must be positive");

  TopicModel m;
  m.topics = options.topics;
  m.alpha = options.alpha > 0.0 ? options.alpha : 50.0 / static_cast<double>(options.topics);
  m.beta = options.beta;
  m.seed = options.seed;

  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(corpus.size());
  std::set<std::string> vocab;
  for (const auto& doc : corpus) {
    tokenized.push_back(text::tokenize(doc));
    vocab.insert(tokenized.back().begin(), tokenized.back().end());
  }
  if (vocab.empty()) throw Error("empty_corpus", "every LDA document is empty");
  m.words.assign(vocab.begin(), vocab.end());
  m.rebuild_index();

  const std::size_t k_count = m.topics, v_count = m.words.size();
  m.word_topic.assign(v_count * k_count, 0);
  m.topic_totals.assign(k_count, 0);
  m.documents.resize(corpus.size());
  m.assignments.resize(corpus.size());
  std::vector<std::vector<std::int32_t>> doc_topic(corpus.size(),
                                                   std::vector<std::int32_t>(k_count, 0));

  Rng rng(options.seed);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& tok : tokenized[d]) {
      const auto w = static_cast<std::int32_t>(m.word_index.at(tok));
      const auto z = static_cast<std::int32_t>(rng() % k_count);
      m.documents[d].push_back(w);
      m.assignments[d].push_back(z);
      ++m.word_topic[static_cast<std::size_t>(w) * k_count + static_cast<std::size_t>(z)];
      ++m.topic_totals[static_cast<std::size_t>(z)];
      ++doc_topic[d][static_cast<std::size_t>(z)];
    }
  }

  const double v_beta = static_cast<double>(v_count) * m.beta;
  std::vector<double> inv_total(k_count);
  for (std::size_t k = 0; k < k_count; ++k)
    inv_total[k] = 1.0 / (static_cast<double>(m.topic_totals[k]) + v_beta);
  std::vector<double> cumulative(k_count);

  for (std::size_t it = 0; it < options.iterations; ++it) {
    for (std::size_t d = 0; d < m.documents.size(); ++d) {
      auto& dt = doc_topic[d];
      for (std::size_t i = 0; i < m.documents[d].size(); ++i) {
        const auto w = static_cast<std::size_t>(m.documents[d][i]);
        auto old = static_cast<std::size_t>(m.assignments[d][i]);
        std::int32_t* wt = &m.word_topic[w * k_count];
        --wt[old];
        --dt[old];
        --m.topic_totals[old];
        inv_total[old] = 1.0 / (static_cast<double>(m.topic_totals[old]) + v_beta);

        double acc = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
          acc += (dt[k] + m.alpha) * (wt[k] + m.beta) * inv_total[k];
          cumulative[k] = acc;
        }
        const std::size_t z = sample_index(cumulative, rng);
        ++wt[z];
        ++dt[z];
        ++m.topic_totals[z];
        inv_total[z] = 1.0 / (static_cast<double>(m.topic_totals[z]) + v_beta);
        m.assignments[d][i] = static_cast<std::int32_t>(z);
      }
    }
    if (options.track_likelihood) m.log_likelihood_trace.push_back(lda_log_likelihood(m));
  }
  return m;
}

double lda_log_likelihood(const TopicModel& m) {
  // Cells with zero count contribute lgamma(beta), which cancels the
  // -V lgamma(beta) normalizer, so only non-zero cells are visited.
  const std::size_t v_count = m.words.size();
  const double v_beta = static_cast<double>(v_count) * m.beta;
  const double lg_beta = std::lgamma(m.beta);
  double ll = static_cast<double>(m.topics) * std::lgamma(v_beta);
  for (std::size_t k = 0; k < m.topics; ++k) {
    for (std::size_t w = 0; w < v_count; ++w) {
      const auto c = m.word_topic[w * m.topics + k];
      if (c > 0) ll += std::lgamma(c + m.beta) - lg_beta;
    }
    ll -= std::lgamma(static_cast<double>(m.topic_totals[k]) + v_beta);
  }
  return ll;
}

std::vector<double> infer_topics(const TopicModel& m, std::string_view text,
                                 std::size_t iterations, std::uint64_t seed) {
  const std::size_t k_count = m.topics;
  std::vector<double> theta(k_count, 1.0 / static_cast<double>(k_count));
  std::vector<std::size_t> doc;
  for (const auto& tok : text::tokenize(text)) {
    auto it = m.word_index.find(tok);
    if (it != m.word_index.end()) doc.push_back(it->second);
  }
  if (doc.empty()) return theta;

  const double v_beta = static_cast<double>(m.words.size()) * m.beta;
  auto phi = [&](std::size_t w, std::size_t k) {
    return (m.word_topic[w * k_count + k] + m.beta) /
           (static_cast<double>(m.topic_totals[k]) + v_beta);
  };

  Rng rng(seed);
  std::vector<std::size_t> z(doc.size());
  std::vector<double> counts(k_count, 0.0), cumulative(k_count);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    z[i] = static_cast<std::size_t>(rng() % k_count);
    counts[z[i]] += 1.0;
  }

  const double denom = static_cast<double>(doc.size()) + static_cast<double>(k_count) * m.alpha;
  const std::size_t sweeps = std::max<std::size_t>(iterations, 1);
  const std::size_t burn = sweeps / 2;
  std::vector<double> accum(k_count, 0.0);
  std::size_t samples = 0;
  for (std::size_t it = 0; it < sweeps; ++it) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      counts[z[i]] -= 1.0;
      double acc = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        acc += (counts[k] + m.alpha) * phi(doc[i], k);
        cumulative[k] = acc;
      }
      z[i] = sample_index(cumulative, rng);
      counts[z[i]] += 1.0;
    }
    if (it >= burn) {
      for (std::size_t k = 0; k < k_count; ++k) accum[k] += (counts[k] + m.alpha) / denom;
      ++samples;
    }
  }
  double total = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) total += theta[k] = accum[k] / samples;
  for (auto& t : theta) t /= total;
  return theta;
}

Eigen::MatrixXd topic_features(const TopicModel& model, const std::vector<std::string>& texts,
                               std::size_t iterations, std::uint64_t seed, std::size_t threads) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()),
                      static_cast<Eigen::Index>(model.topics));
  parallel_for(
      texts.size(),
      [&](std::size_t i) {
        const auto theta =
            infer_topics(model, texts[i], iterations, derive_seed(seed, text_hash(texts[i])));
        for (std::size_t k = 0; k < theta.size(); ++k)
          out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = theta[k];
      },
      threads);
  return out;
}

}  // namespace intimacy::models
