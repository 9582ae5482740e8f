#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/rng.hpp"
#include "intimacy/models.hpp"

namespace intimacy::models {

std::vector<LabeledQuestion> read_labeled(const std::string& path) {
  auto table = csv::read_file(path);
  const auto id = table.column("id"), text = table.column("text"), score = table.column("score");
  std::vector<LabeledQuestion> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = path + ":" + std::to_string(table.lines[r]);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(row[score], &used);
      if (used != row[score].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error("parse_error", where + ": bad score '" + row[score] + "'");
    }
    if (!std::isfinite(value)) throw Error("parse_error", where + ": score must be finite");
    if (!seen.insert(row[id]).second)
      throw Error("duplicate_id", where + ": id '" + row[id] + "' repeats");
    out.push_back({row[id], row[text], value});
  }
  return out;
}

DataSplit split_dataset(const std::vector<std::string>& ids, std::array<std::size_t, 3> ratios,
                        std::uint64_t seed) {
  if (ids.size() < 10)
    throw Error("too_few_items", "need at least 10 ids, got " + std::to_string(ids.size()));
  const std::size_t total = ratios[0] + ratios[1] + ratios[2];
  if (total == 0) throw Error("invalid_argument", "ratios must not all be zero");

  std::vector<std::string> order(ids);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const double n = static_cast<double>(order.size());
  const auto n_train = static_cast<std::size_t>(std::llround(n * ratios[0] / total));
  const auto n_val = std::min(order.size() - n_train,
                              static_cast<std::size_t>(std::llround(n * ratios[1] / total)));
  DataSplit split;
  split.seed = seed;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.validation.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  return split;
}

std::string format_split(const DataSplit& split) {
  std::string out = "id,part\n";
  for (const auto& id : split.train) out += csv::format_row({id, "train"});
  for (const auto& id : split.validation) out += csv::format_row({id, "validation"});
  for (const auto& id : split.test) out += csv::format_row({id, "test"});
  return out;
}

DataSplit read_split(const std::string& path) {
  auto table = csv::read_file(path);
  const auto id = table.column("id"), part = table.column("part");
  DataSplit split;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[part] == "train") {
      split.train.push_back(row[id]);
    } else if (row[part] == "validation") {
      split.validation.push_back(row[id]);
    } else if (row[part] == "test") {
      split.test.push_back(row[id]);
    } else {
      throw Error("parse_error", path + ":" + std::to_string(table.lines[r]) + ": unknown part '" +
                                     row[part] + "'");
    }
  }
  return split;
}

}  // namespace intimacy::models
