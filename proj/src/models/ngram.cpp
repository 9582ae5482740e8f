#include <algorithm>

#include "intimacy/common/error.hpp"
#include "intimacy/common/text.hpp"
#include "intimacy/models.hpp"

namespace intimacy::models {

std::vector<std::string> extract_ngrams(const std::vector<std::string>& tokens, int max_n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string gram;
    for (int n = 1; n <= max_n && i + static_cast<std::size_t>(n) <= tokens.size(); ++n) {
      if (n > 1) gram.push_back(' ');
      gram += tokens[i + static_cast<std::size_t>(n) - 1];
      out.push_back(gram);
    }
  }
  return out;
}

NgramVocabulary::NgramVocabulary(std::vector<std::string> ngrams) : ngrams_(std::move(ngrams)) {
  for (std::size_t i = 0; i < ngrams_.size(); ++i) {
    if (!index_.emplace(ngrams_[i], i).second)
      throw Error("duplicate_ngram", "'" + ngrams_[i] + "' appears twice");
    int n = 1 + static_cast<int>(std::count(ngrams_[i].begin(), ngrams_[i].end(), ' '));
    max_n_ = std::max(max_n_, n);
  }
}

NgramVocabulary NgramVocabulary::build(const std::vector<std::string>& texts,
                                       std::size_t max_size, int max_n) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& t : texts)
    for (auto& g : extract_ngrams(text::tokenize(t), max_n)) ++counts[std::move(g)];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> grams;
  grams.reserve(ranked.size());
  for (auto& [g, _] : ranked) grams.push_back(std::move(g));
  NgramVocabulary vocab(std::move(grams));
  vocab.max_n_ = max_n;
  return vocab;
}

std::optional<std::size_t> NgramVocabulary::index(const std::string& ngram) const {
  auto it = index_.find(ngram);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseMatrix build_ngram_features(const std::vector<std::string>& texts,
                                  const NgramVocabulary& vocabulary) {
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t row = 0; row < texts.size(); ++row) {
    for (const auto& g : extract_ngrams(text::tokenize(texts[row]), vocabulary.max_n())) {
      if (auto col = vocabulary.index(g))
        entries.emplace_back(static_cast<int>(row), static_cast<int>(*col), 1.0);
    }
  }
  SparseMatrix x(static_cast<Eigen::Index>(texts.size()),
                 static_cast<Eigen::Index>(vocabulary.size()));
  x.setFromTriplets(entries.begin(), entries.end());  // duplicates are summed
  return x;
}

}  // namespace intimacy::models
