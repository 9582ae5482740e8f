#include <cmath>
#include <map>

#include "doctest.h"
#include "intimacy/common/error.hpp"
#include "intimacy/common/rng.hpp"
#include "intimacy/reliability.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace intimacy;
using namespace intimacy::reliability;

namespace {

using V = std::vector<double>;

LabelTable table_of(const std::vector<std::vector<const char*>>& rows) {
  LabelTable t;
  for (const auto& r : rows) {
    std::vector<std::optional<std::string>> u;
    for (const char* v : r) u.push_back(v ? std::optional<std::string>(v) : std::nullopt);
    t.push_back(u);
  }
  return t;
}

LabelTable random_table(std::size_t units, std::size_t coders, int values, double missing,
                        std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> v(0, values - 1);
  std::uniform_real_distribution<double> u(0, 1);
  LabelTable t(units, std::vector<std::optional<std::string>>(coders));
  for (auto& row : t)
    for (auto& cell : row)
      if (u(rng) >= missing) cell = "v" + std::to_string(v(rng));
  return t;
}

}  // namespace

TEST_CASE("pearson_r fixtures") {
  CHECK(pearson_r(V{1, 2, 3}, V{1, 2, 3}) == doctest::Approx(1.0));
  CHECK(pearson_r(V{1, 2, 3}, V{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(pearson_r(V{1, 2, 3, 4}, V{2, 1, 4, 3}) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(pearson_r(V{1, 1, 1}, V{1, 2, 3}) == 0.0);
}

TEST_CASE("pearson_r is symmetric and invariant under positive affine maps") {
  Rng rng(3);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    V x(30), y(30);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = n(rng);
      y[i] = 0.5 * x[i] + n(rng);
    }
    const double r = pearson_r(x, y);
    CHECK(pearson_r(y, x) == doctest::Approx(r).epsilon(1e-12));
    V x2 = x;
    for (auto& v : x2) v = 3.5 * v - 7.0;
    CHECK(pearson_r(x2, y) == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("krippendorff: perfect agreement") {
  LabelTable t;
  for (int i = 0; i < 10; ++i) {
    const std::string v = i % 3 ? "x" : "y";
    t.push_back({v, v});
  }
  CHECK(krippendorff_alpha(t) == 1.0);
}

TEST_CASE("krippendorff: hand-computed fixture") {
  // Coincidences: o_aa=2, o_ab=o_ba=1, o_bb=2, o_bc=o_cb=1; n_a=3, n_b=4, n_c=1, n=8.
  // alpha = 1 - (n-1) * 4 / (2 * (12 + 3 + 4)) = 1 - 28/38 = 5/19.
  const auto t = table_of({{"a", "a"}, {"a", "b"}, {"b", "b"}, {"b", "c"}});
  CHECK(krippendorff_alpha(t) == doctest::Approx(5.0 / 19.0).epsilon(1e-12));
  CHECK(std::fabs(krippendorff_alpha(t) - oracle::krippendorff_nominal(t)) < 1e-9);
}

TEST_CASE("krippendorff: missing values and unpairable units") {
  const auto t = table_of({{"a", "a", nullptr}, {"a", "b", "b"}, {nullptr, "c", nullptr},
                           {"b", nullptr, "b"}, {"c", "c", "a"}});
  CHECK(std::fabs(krippendorff_alpha(t) - oracle::krippendorff_nominal(t)) < 1e-9);
}

TEST_CASE("krippendorff agrees with the pairwise oracle on random tables") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = random_table(40, 3, 3, 0.2, seed);
    CHECK(std::fabs(krippendorff_alpha(t) - oracle::krippendorff_nominal(t)) < 1e-9);
  }
}

TEST_CASE("krippendorff: random labels give alpha near zero") {
  const double a = krippendorff_alpha(random_table(10000, 2, 4, 0.0, 77));
  CHECK(a >= -0.05);
  CHECK(a <= 0.05);
}

TEST_CASE("krippendorff is invariant under relabeling") {
  auto t = random_table(60, 2, 3, 0.1, 5);
  const double a = krippendorff_alpha(t);
  for (int k = 0; k < 7; ++k) t.push_back({"v0", "v0"});
  const double b = krippendorff_alpha(t);
  for (auto& row : t)
    for (auto& c : row)
      if (c) *c = *c == "v0" ? "zz" : *c == "v1" ? "v0" : "v1";
  CHECK(krippendorff_alpha(t) == doctest::Approx(b).epsilon(1e-12));
  CHECK(a <= 1.0);
}

TEST_CASE("split-half on identical halves is 1") {
  const auto world = synth::uniform_world(40, 2);
  const auto judged =
      synth::simulate_bws(bws::generate_tuples(world.ids, 12, 2), world.truth, 3.0, 3);
  CHECK(split_half_correlation(judged, judged) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("split-half ranking is deterministic and thread-independent") {
  const auto world = synth::uniform_world(100, 8);
  const auto judged =
      synth::simulate_bws(bws::generate_tuples(world.ids, 12, 8), world.truth, 5.0, 9);
  const auto a = split_half_ranking(judged, 50, 123, {}, 1);
  const auto b = split_half_ranking(judged, 50, 123, {}, 3);
  CHECK(a.per_resample == b.per_resample);
  CHECK(a.mean == b.mean);
  double m = 0.0;
  for (double r : a.per_resample) m += r;
  CHECK(a.mean == doctest::Approx(m / 50.0).epsilon(1e-12));
  CHECK(a.mean >= 0.7);
}

TEST_CASE("bws alpha table has two units per tuple") {
  const auto world = synth::uniform_world(8, 1);
  const auto tuples = bws::generate_tuples(world.ids, 2, 1);
  auto a = synth::simulate_bws(tuples, world.truth, 2.0, 1, "ann1");
  const auto b = synth::simulate_bws(tuples, world.truth, 2.0, 2, "ann2");
  a.insert(a.end(), b.begin(), b.end());
  const auto t = bws_alpha_table(a);
  CHECK(t.size() == 2 * tuples.size());
  for (const auto& row : t) CHECK(row.size() == 2);
}

TEST_CASE("validation sampling plan: 10 bins of 30") {
  const auto world = synth::uniform_world(400, 4);
  const auto pairs = sample_validation_pairs(world.truth, 10, 30, 0.1, 6);
  CHECK(pairs.size() == 300);
  std::map<std::size_t, int> per_bin;
  for (const auto& p : pairs) {
    per_bin[p.bin]++;
    CHECK(p.model_gap == doctest::Approx(world.truth.at(p.question_a) - world.truth.at(p.question_b)));
    CHECK(p.model_gap >= 0.1 * p.bin - 1e-12);
    CHECK(p.model_gap < 0.1 * (p.bin + 1) + 1e-12);
  }
  CHECK(per_bin.size() == 10);
  for (const auto& [_, n] : per_bin) CHECK(n == 30);
  CHECK_THROWS_AS(sample_validation_pairs({{"a", 0.0}, {"b", 0.05}}, 10, 30, 0.1, 1), Error);
}

TEST_CASE("validation: humans who always follow the model") {
  std::vector<PairJudgment> js;
  for (int i = 0; i < 50; ++i)
    for (const char* a : {"h1", "h2"})
      js.push_back({"p" + std::to_string(i), "a", "b", 0.02 * i, a, PairLabel::kAMore});
  const auto rep = pairwise_validation(js);
  for (const auto& b : rep.bins) CHECK(b.agreement == 1.0);
  CHECK(rep.overall_agreement == 1.0);
  CHECK(rep.total_pairs == 50);
}

TEST_CASE("validation: humans follow the model only for large gaps") {
  const auto world = synth::uniform_world(400, 12);
  const auto plan = sample_validation_pairs(world.truth, 10, 30, 0.1, 13);
  Rng rng(14);
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<PairJudgment> js;
  for (const auto& p : plan)
    for (const char* a : {"h1", "h2"}) {
      const auto label = p.model_gap >= 0.2 ? PairLabel::kAMore : static_cast<PairLabel>(pick(rng));
      js.push_back({p.pair_id, p.question_a, p.question_b, p.model_gap, a, label});
    }
  const auto rep = pairwise_validation(js);
  CHECK(rep.bins.size() == 10);
  for (const auto& b : rep.bins) {
    CHECK(b.pairs == 30);
    if (b.low >= 0.2 - 1e-9) CHECK(b.agreement >= 0.8);
  }
}

TEST_CASE("pair labels parse") {
  for (auto l : {PairLabel::kAMore, PairLabel::kBMore, PairLabel::kSame})
    CHECK(parse_pair_label(to_string(l)) == l);
  CHECK_THROWS_AS(parse_pair_label("maybe"), Error);
}
