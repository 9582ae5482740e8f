#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/text.hpp"
#include "intimacy/models.hpp"
#include "intimacy/reliability.hpp"

namespace intimacy::models {

MeanPredictor mean_predictor(std::span<const double> y_train) {
  if (y_train.empty()) throw Error("insufficient_data", "mean predictor needs training targets");
  return {std::accumulate(y_train.begin(), y_train.end(), 0.0) /
          static_cast<double>(y_train.size())};
}

EvalResult evaluate(std::span<const double> predictions, std::span<const double> gold) {
  if (predictions.size() != gold.size())
    throw Error("length_mismatch", std::to_string(predictions.size()) + " predictions vs " +
                                       std::to_string(gold.size()) + " gold");
  if (gold.empty()) throw Error("insufficient_data", "nothing to evaluate");
  EvalResult r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const double e = predictions[i] - gold[i];
    r.mse += e * e;
  }
  r.mse /= static_cast<double>(gold.size());
  r.pearson_r = gold.size() < 2 ? 0.0 : reliability::pearson_r(predictions, gold);
  return r;
}

std::map<std::string, double> ingest_external_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path);
  csv::Reader reader(in);
  std::map<std::string, double> out;
  bool first = true;
  while (auto rec = reader.next()) {
    const auto where = path + ":" + std::to_string(reader.line());
    if (rec->size() != 2)
      throw Error("parse_error", where + ": expected 2 columns, got " + std::to_string(rec->size()));
    const std::string id = text::trim((*rec)[0]);
    const std::string raw = text::trim((*rec)[1]);
    double value = 0.0;
    auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    const bool parsed = ec == std::errc() && end == raw.data() + raw.size();
    if (!parsed || !std::isfinite(value)) {
      if (first && !parsed) {  // header row
        first = false;
        continue;
      }
      throw Error("parse_error", where + ": score '" + raw + "' is not a finite number");
    }
    first = false;
    if (!out.emplace(id, value).second)
      throw Error("duplicate_id", where + ": id '" + id + "' repeats");
  }
  return out;
}

}  // namespace intimacy::models
