// intimacy: command-line entry point for the question-intimacy toolkit.

#include <atomic>
#include <cmath>
#include <memory>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "intimacy/analysis/identity.hpp"
#include "intimacy/analysis/markers.hpp"
#include "intimacy/analysis/regression.hpp"
#include "intimacy/analysis/stats.hpp"
#include "intimacy/bws.hpp"
#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/io.hpp"
#include "intimacy/common/parallel.hpp"
#include "intimacy/common/text.hpp"
#include "intimacy/corpus.hpp"
#include "intimacy/graph.hpp"
#include "intimacy/models.hpp"
#include "intimacy/reliability.hpp"
#include "intimacy/service.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace intimacy;

namespace {

std::string data_file(const std::string& name) {
  const char* env = std::getenv("INTIMACY_DATA");
  const std::string dir = env && *env ? env : INTIMACY_DATA_DIR;
  return (fs::path(dir) / name).string();
}

void write_output(const std::string& path, const std::string& content) {
  io::atomic_write(path, content);
}

// Every option of the subcommand, defaults included, next to its output.
void echo_config(const CLI::App* cmd, const std::string& output) {
  std::string target = output;
  if (fs::is_directory(output)) target = (fs::path(output) / "config.toml").string();
  else target += ".config.toml";
  write_output(target, "# " + cmd->get_name() + "\n" + cmd->config_to_str(true, false));
}

struct Item {
  std::string id;
  std::string text;
};

// CSV with an id column (text optional) or JSONL with "id" and "text".
std::vector<Item> read_items(const std::string& path) {
  std::vector<Item> out;
  if (fs::path(path).extension() == ".jsonl") {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open " + path);
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("id"))
        throw Error("parse_error", path + ":" + std::to_string(lineno) + ": bad record");
      out.push_back({j["id"].get<std::string>(), j.value("text", std::string())});
    }
    return out;
  }
  const auto table = csv::read_file(path);
  const auto id = table.column("id");
  const auto text_col = table.find_column("text");
  for (const auto& row : table.rows) out.push_back({row[id], text_col ? row[*text_col] : ""});
  return out;
}

std::vector<std::string> ids_of(const std::vector<Item>& items) {
  std::vector<std::string> ids;
  for (const auto& i : items) ids.push_back(i.id);
  return ids;
}

std::vector<std::string> texts_of(const std::vector<Item>& items) {
  std::vector<std::string> t;
  for (const auto& i : items) t.push_back(i.text);
  return t;
}

double parse_double(const std::string& raw, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used == raw.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error("parse_error", where + ": '" + raw + "' is not a finite number");
}

bool parse_bool(const std::string& raw) {
  const auto l = text::to_lower(text::trim(raw));
  return l == "1" || l == "true" || l == "yes" || l == "t" || l == "y";
}

std::string where(const std::string& path, const csv::Table& t, std::size_t r) {
  return path + ":" + std::to_string(t.lines[r]);
}

std::map<std::string, double> read_score_map(const std::string& path) {
  const auto table = csv::read_file(path);
  const auto id = table.column("item_id"), score = table.column("score");
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    out[table.rows[r][id]] = parse_double(table.rows[r][score], where(path, table, r));
  return out;
}

models::DataSplit load_or_make_split(const std::vector<models::LabeledQuestion>& data,
                                     const std::string& split_path, std::uint64_t seed) {
  if (!split_path.empty() && fs::exists(split_path)) return models::read_split(split_path);
  std::vector<std::string> ids;
  for (const auto& q : data) ids.push_back(q.id);
  auto split = models::split_dataset(ids, {8, 1, 1}, seed);
  if (!split_path.empty()) write_output(split_path, models::format_split(split));
  return split;
}

// --- subcommands ------------------------------------------------------------------

struct ExtractArgs {
  std::string input, out, rejected, abbreviations, mention_names;
  bool keep_duplicates = false;
};

void run_extract(const ExtractArgs& a, const CLI::App* cmd) {
  const auto items = corpus::read_raw_items(a.input);
  auto table = a.abbreviations.empty() ? corpus::AbbreviationTable::defaults()
                                       : corpus::AbbreviationTable::load(a.abbreviations);
  corpus::DomainRules rules;
  rules.drop_duplicates = !a.keep_duplicates;
  if (!a.mention_names.empty()) rules.mention_names = corpus::load_mention_names(a.mention_names);
  const auto result = corpus::extract_questions(items, table, rules);
  std::string accepted, rejected;
  for (const auto& q : result.accepted) accepted += corpus::to_jsonl(q);
  for (const auto& r : result.rejected) rejected += corpus::to_jsonl(r);
  write_output(a.out, accepted);
  if (!a.rejected.empty()) write_output(a.rejected, rejected);
  echo_config(cmd, a.out);
  std::cerr << "accepted " << result.accepted.size() << ", rejected " << result.rejected.size()
            << "\n";
}

struct TuplesArgs {
  std::string items, out, questions_out;
  std::size_t tuples_per_item = 12;
  std::uint64_t seed = 0;
};

void run_tuples(const TuplesArgs& a, const CLI::App* cmd) {
  const auto items = read_items(a.items);
  const auto tuples = bws::generate_tuples(ids_of(items), a.tuples_per_item, a.seed);
  write_output(a.out, bws::format_tuples(tuples));
  if (!a.questions_out.empty()) {
    std::string q = "id,text\n";
    for (const auto& i : items) q += csv::format_row({i.id, i.text});
    write_output(a.questions_out, q);
  }
  echo_config(cmd, a.out);
  std::cerr << tuples.size() << " tuples\n";
}

struct ServeArgs {
  std::string data_dir, host = "127.0.0.1", instructions, clock = "wall", port_file;
  int port = 8080;
  std::uint64_t seed = 0;
};

service::Server* g_server = nullptr;

void run_serve(const ServeArgs& a) {
  service::Clock clock = service::utc_now;
  if (a.clock == "logical") {
    // Sequence numbers instead of wall time, for byte-reproducible journals.
    auto counter = std::make_shared<std::atomic<std::uint64_t>>(0);
    clock = [counter] {
      char buf[24];
      std::snprintf(buf, sizeof buf, "seq-%08llu", static_cast<unsigned long long>(++*counter));
      return std::string(buf);
    };
  }
  service::Store store(a.data_dir, a.seed, clock);
  service::ServerOptions options;
  options.host = a.host;
  options.port = a.port;
  options.instructions =
      io::read_file(a.instructions.empty() ? data_file("instructions.txt") : a.instructions);
  service::Server server(store, options);
  const int port = server.bind();
  if (!a.port_file.empty()) io::atomic_write(a.port_file, std::to_string(port) + "\n");
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cerr << "serving " << store.tuple_sets().size() << " tuple set(s) on http://" << a.host
            << ":" << port << "\n";
  server.run();
  g_server = nullptr;
}

struct IlsrArgs {
  double regularization = 0.01, tolerance = 1e-9;
  std::size_t max_iterations = 1000;

  bws::IlsrOptions options() const { return {regularization, tolerance, max_iterations}; }
};

void add_ilsr_options(CLI::App* cmd, IlsrArgs& a) {
  cmd->add_option("--regularization", a.regularization,
                  "Pseudo-comparisons added between every pair of items")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--tolerance", a.tolerance, "ILSR convergence tolerance")->capture_default_str();
  cmd->add_option("--max-iterations", a.max_iterations, "ILSR iteration cap")->capture_default_str();
}

struct ScoreArgs {
  std::string judgments, out;
  IlsrArgs ilsr;
};

void run_score(const ScoreArgs& a, const CLI::App* cmd) {
  const auto judged = bws::read_judgments(a.judgments);
  const auto scores = bws::score_judgments(judged, a.ilsr.options());
  write_output(a.out, bws::format_scores(scores));
  echo_config(cmd, a.out);
  if (scores.degenerate) std::cerr << "warning: all strengths equal; every score is 0\n";
}

struct ReliabilityArgs {
  std::string judgments, out, pairs, bins_out, sample_scores, plan_out;
  std::size_t resamples = 50, bins = 10, per_bin = 30;
  double bin_width = 0.1;
  std::uint64_t seed = 0;
  IlsrArgs ilsr;
};

void run_reliability(const ReliabilityArgs& a, const CLI::App* cmd) {
  std::string echo_target;
  if (!a.judgments.empty()) {
    if (a.out.empty()) throw Error("invalid_argument", "--judgments needs --out");
    const auto judged = bws::read_judgments(a.judgments);
    reliability::ReliabilityReport report;
    report.judgments = judged.size();
    report.shr = reliability::split_half_ranking(judged, a.resamples, a.seed, a.ilsr.options());
    try {
      report.krippendorff_alpha = reliability::krippendorff_alpha(reliability::bws_alpha_table(judged));
    } catch (const Error& e) {
      report.notes.push_back(std::string("krippendorff_alpha unavailable: ") + e.what());
    }
    write_output(a.out, reliability::format_report(report));
    echo_target = a.out;
  }
  if (!a.pairs.empty()) {
    if (a.bins_out.empty()) throw Error("invalid_argument", "--pairs needs --bins-out");
    const auto report =
        reliability::pairwise_validation(reliability::read_pair_judgments(a.pairs), a.bin_width);
    write_output(a.bins_out, reliability::format_validation_bins(report));
    if (echo_target.empty()) echo_target = a.bins_out;
  }
  if (!a.sample_scores.empty()) {
    if (a.plan_out.empty()) throw Error("invalid_argument", "--sample-pairs needs --plan-out");
    const auto plan = reliability::sample_validation_pairs(read_score_map(a.sample_scores), a.bins,
                                                           a.per_bin, a.bin_width, a.seed);
    std::string out = "pair_id,qa_id,qb_id,model_gap,bin\n";
    for (const auto& p : plan)
      out += csv::format_row({p.pair_id, p.question_a, p.question_b,
                              csv::format_double(p.model_gap), std::to_string(p.bin)});
    write_output(a.plan_out, out);
    if (echo_target.empty()) echo_target = a.plan_out;
  }
  if (echo_target.empty())
    throw Error("invalid_argument", "give --judgments, --pairs or --sample-pairs");
  echo_config(cmd, echo_target);
}

struct ModelArgs {
  double lambda = 1.0;
  std::size_t vocabulary = 10000;
  int max_n = 3;
  std::size_t topics = 50, lda_iterations = 1000, infer_iterations = 50;
  double lda_alpha = 0.0, lda_beta = 0.01;
  std::uint64_t seed = 0;

  models::TrainOptions options() const {
    models::TrainOptions o;
    o.lambda = lambda;
    o.vocabulary_size = vocabulary;
    o.max_n = max_n;
    o.lda.topics = topics;
    o.lda.alpha = lda_alpha;
    o.lda.beta = lda_beta;
    o.lda.iterations = lda_iterations;
    o.lda.seed = seed;
    o.infer_iterations = infer_iterations;
    return o;
  }
};

void add_model_options(CLI::App* cmd, ModelArgs& a) {
  cmd->add_option("--lambda", a.lambda, "Ridge L2 strength")->capture_default_str();
  cmd->add_option("--vocabulary", a.vocabulary, "Maximum n-gram vocabulary size")
      ->capture_default_str();
  cmd->add_option("--max-n", a.max_n, "Longest n-gram")->capture_default_str()->check(CLI::Range(1, 5));
  cmd->add_option("--topics", a.topics, "LDA topic count")->capture_default_str();
  cmd->add_option("--lda-iterations", a.lda_iterations, "Gibbs sweeps")->capture_default_str();
  cmd->add_option("--lda-alpha", a.lda_alpha, "Document-topic prior (0 = 50/K)")
      ->capture_default_str();
  cmd->add_option("--lda-beta", a.lda_beta, "Topic-word prior")->capture_default_str();
  cmd->add_option("--infer-iterations", a.infer_iterations, "Gibbs sweeps per inferred document")
      ->capture_default_str();
  cmd->add_option("--seed", a.seed, "Seed for the split and the sampler")->capture_default_str();
}

struct TrainArgs {
  std::string data, out, split, kind = "ridge_ngram";
  ModelArgs model;
};

void run_train(const TrainArgs& a, const CLI::App* cmd) {
  const auto data = models::read_labeled(a.data);
  const auto split = load_or_make_split(data, a.split, a.model.seed);
  std::set<std::string> train(split.train.begin(), split.train.end());
  std::vector<std::string> texts;
  std::vector<double> y;
  for (const auto& q : data)
    if (train.count(q.id)) {
      texts.push_back(q.text);
      y.push_back(q.score);
    }
  const auto model = models::fit_model(models::parse_model_kind(a.kind), texts, y, a.model.options());
  write_output(a.out, models::serialize_model(model));
  echo_config(cmd, a.out);
}

struct PredictArgs {
  std::string model, input, out;
};

void run_predict(const PredictArgs& a, const CLI::App* cmd) {
  const auto model = models::deserialize_model(io::read_file(a.model));
  const auto items = read_items(a.input);
  write_output(a.out, models::format_predictions(ids_of(items), model.predict(texts_of(items))));
  echo_config(cmd, a.out);
}

struct EvaluateArgs {
  std::string data, split, out, external, predictions;
  bool baselines = false;
  std::vector<std::size_t> sweep;
  ModelArgs model;
};

void run_evaluate(const EvaluateArgs& a, const CLI::App* cmd) {
  const auto data = models::read_labeled(a.data);
  const auto split = load_or_make_split(data, a.split, a.model.seed);
  std::vector<models::ComparisonRow> rows;
  std::map<std::string, double> external;
  if (!a.external.empty()) external = models::ingest_external_scores(a.external);
  if (a.baselines) {
    auto r = models::baseline_comparison(data, split, a.model.options(),
                                         a.external.empty() ? nullptr : &external);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (!a.sweep.empty()) {
    auto r = models::topic_sweep(data, split, a.sweep, a.model.options());
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (!a.predictions.empty()) {
    const auto preds = models::ingest_external_scores(a.predictions);
    std::map<std::string, double> gold;
    for (const auto& q : data) gold[q.id] = q.score;
    std::vector<double> p, g;
    for (const auto& id : split.test) {
      auto it = preds.find(id);
      if (it == preds.end()) throw Error("unknown_item", "no prediction for test id '" + id + "'");
      p.push_back(it->second);
      g.push_back(gold.at(id));
    }
    rows.push_back({"predictions", models::evaluate(p, g)});
  }
  if (rows.empty() && !a.external.empty() && !a.baselines) {
    auto r = models::baseline_comparison(data, split, a.model.options(), &external);
    rows.push_back(r.back());
  }
  if (rows.empty())
    throw Error("invalid_argument", "choose --baselines, --topic-sweep, --predictions or --external");
  write_output(a.out, models::format_comparison(rows));
  echo_config(cmd, a.out);
}

struct MarkersArgs {
  std::string input, out;
  std::vector<std::string> lexicons;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0;
  bool standardized = false;
};

void run_markers(const MarkersArgs& a, const CLI::App* cmd) {
  const auto table = csv::read_file(a.input);
  const auto dom = table.column("domain"), txt = table.column("text"), sc = table.column("score");
  std::vector<std::string> domains;
  std::vector<double> scores;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    domains.push_back(table.rows[r][dom]);
    scores.push_back(parse_double(table.rows[r][sc], where(a.input, table, r)));
  }
  const auto z = a.standardized ? scores : analysis::zstandardize_within_domain(domains, scores);
  std::vector<analysis::ScoredQuestion> questions;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    questions.push_back({domains[r], table.rows[r][txt], z[r]});

  std::string out;
  for (std::size_t l = 0; l < a.lexicons.size(); ++l) {
    const auto lexicon = analysis::Lexicon::load(a.lexicons[l]);
    const auto contrast = analysis::marker_contrast(questions, lexicon, a.bootstrap, a.seed);
    for (const auto& w : contrast.warnings) std::cerr << "warning: " << lexicon.name() << ": " << w << "\n";
    auto body = analysis::format_contrast(contrast);
    // One CSV across lexicons: prefix a lexicon column, header once.
    std::istringstream lines(body);
    std::string line;
    bool header = true;
    while (std::getline(lines, line)) {
      if (header) {
        if (l == 0) out += "lexicon," + line + "\n";
        header = false;
        continue;
      }
      out += csv::escape(lexicon.name()) + "," + line + "\n";
    }
  }
  write_output(a.out, out);
  echo_config(cmd, a.out);
}

struct RegressionArgs {
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0;
};

void write_regression(const std::string& dir, const std::string& tag,
                      const analysis::RegressionData& data, const RegressionArgs& a) {
  const auto result = analysis::group_intercept_regression(data);
  const auto effects = analysis::marginal_effects(data, a.bootstrap, a.seed);
  write_output((fs::path(dir) / ("regression_" + tag + ".csv")).string(),
               analysis::format_regression(result));
  write_output((fs::path(dir) / ("ame_" + tag + ".csv")).string(),
               analysis::format_effects(effects));
}

std::vector<std::size_t> group_columns(const csv::Table& table, const std::string& spec) {
  std::vector<std::size_t> cols;
  for (const auto& name : text::split(spec, ','))
    if (!text::trim(name).empty()) cols.push_back(table.column(text::trim(name)));
  return cols;
}

struct DyadArgs {
  std::string input, out_dir, groups = "author_id,book_id", names, standardize = "domain";
  RegressionArgs reg;
};

void run_dyads(const DyadArgs& a, const CLI::App* cmd) {
  const auto table = csv::read_file(a.input);
  const auto sc = table.column("score");
  const auto dom = table.find_column("domain");
  const auto sg = table.find_column("speaker_gender"), ag = table.find_column("audience_gender");
  const auto sn = table.find_column("speaker_name"), qt = table.find_column("text");
  const auto author_g = table.find_column("author_gender");
  const auto gcols = group_columns(table, a.groups);
  const auto names = analysis::NameDatabase::load(a.names.empty() ? data_file("names.csv") : a.names);
  const auto words = analysis::GenderedWords::defaults();

  std::vector<double> scores;
  std::vector<std::string> domains, dyads, author;
  std::vector<std::vector<std::string>> groups;
  std::size_t skipped = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::optional<analysis::Gender> speaker, audience;
    if (sg) speaker = analysis::parse_gender(row[*sg]);
    if (!speaker && sn)
      speaker = analysis::infer_gender(row[*sn], analysis::NameKind::kCharacter, names, words);
    if (ag) audience = analysis::parse_gender(row[*ag]);
    if (!audience && qt)
      if (auto who = analysis::extract_addressee(row[*qt], words))
        audience = analysis::infer_gender(*who, analysis::NameKind::kCharacter, names, words);
    if (!speaker || !audience) {
      ++skipped;
      continue;
    }
    scores.push_back(parse_double(row[sc], where(a.input, table, r)));
    domains.push_back(dom ? row[*dom] : "all");
    dyads.push_back(analysis::to_string(*speaker) + analysis::to_string(*audience));
    std::string tag = "all";
    if (author_g) {
      const auto g = analysis::parse_gender(row[*author_g]);
      tag = g ? analysis::to_string(*g) : "unknown";
    }
    author.push_back(tag);
    std::vector<std::string> path;
    for (auto c : gcols) path.push_back(row[c]);
    groups.push_back(std::move(path));
  }
  if (skipped) std::cerr << "skipped " << skipped << " rows without both genders\n";
  const auto z = a.standardize == "domain" ? analysis::zstandardize_within_domain(domains, scores)
                                           : scores;
  std::map<std::string, analysis::RegressionData> by_author;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (author[i] == "unknown") continue;
    auto& d = by_author[author[i]];
    d.reference = "FF";
    d.y.push_back(z[i]);
    d.focal.push_back(dyads[i]);
    if (!gcols.empty()) d.groups.push_back(groups[i]);
  }
  fs::create_directories(a.out_dir);
  for (const auto& [tag, data] : by_author) write_regression(a.out_dir, tag == "all" ? "all" : "author_" + tag, data, a.reg);
  echo_config(cmd, a.out_dir);
}

struct AnonymityArgs {
  std::string input, out_dir, names, group = "subreddit", standardize = "none";
  std::vector<std::string> lexicons;
  RegressionArgs reg;
};

void run_anonymity(const AnonymityArgs& a, const CLI::App* cmd) {
  const auto table = csv::read_file(a.input);
  const auto user = table.column("username"), sc = table.column("score");
  const auto gcols = group_columns(table, a.group);
  const auto names = analysis::NameDatabase::load(a.names.empty() ? data_file("names.csv") : a.names);
  const auto words = analysis::GenderedWords::defaults();
  const auto lexicons = a.lexicons.empty() ? analysis::IdentityLexicons::defaults()
                                           : analysis::IdentityLexicons::load(a.lexicons);
  const analysis::NameListGenderClassifier gender(names, words);

  analysis::RegressionData data;
  data.reference = analysis::to_string(analysis::IdentityCategory::kOther);
  std::vector<double> scores;
  std::string categories = "username,category\n";
  std::map<std::string, std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto [it, fresh] = seen.try_emplace(row[user]);
    if (fresh) {
      it->second = analysis::to_string(analysis::classify_identity(row[user], names, lexicons, gender));
      categories += csv::format_row({row[user], it->second});
    }
    scores.push_back(parse_double(row[sc], where(a.input, table, r)));
    data.focal.push_back(it->second);
    std::vector<std::string> path;
    for (auto c : gcols) path.push_back(row[c]);
    if (!gcols.empty()) data.groups.push_back(std::move(path));
  }
  data.y = a.standardize == "all" ? analysis::zstandardize(scores) : scores;
  fs::create_directories(a.out_dir);
  write_output((fs::path(a.out_dir) / "categories.csv").string(), categories);
  write_regression(a.out_dir, "anonymity", data, a.reg);
  echo_config(cmd, a.out_dir);
}

struct GraphBuildArgs {
  std::vector<std::string> events;
  std::string out;
};

void run_graph_build(const GraphBuildArgs& a, const CLI::App* cmd) {
  std::vector<graph::MentionEvent> events;
  for (const auto& path : a.events) {
    auto e = graph::read_mention_events(path);
    events.insert(events.end(), e.begin(), e.end());
  }
  const auto g = graph::MutualGraph::build(events);
  if (auto parent = fs::path(a.out).parent_path(); !parent.empty()) fs::create_directories(parent);
  g.save(a.out);
  echo_config(cmd, a.out);
  std::cerr << g.node_count() << " users, " << g.edge_count() << " mutual edges\n";
}

struct GraphDistanceArgs {
  std::string graph, pairs, out;
  int max_depth = 6;
};

void run_graph_distance(const GraphDistanceArgs& a, const CLI::App* cmd) {
  const auto g = graph::MutualGraph::load(a.graph);
  const auto table = csv::read_file(a.pairs);
  const auto u = table.column("asker"), v = table.column("recipient");
  std::vector<std::string> degrees(table.rows.size());
  parallel_for(table.rows.size(), [&](std::size_t r) {
    const auto& row = table.rows[r];
    const auto a_id = g.find(row[u]), b_id = g.find(row[v]);
    if (row[u] == row[v]) {
      degrees[r] = "self";
    } else if (!a_id || !b_id) {
      degrees[r] = "unreachable";
    } else {
      const auto d = graph::degree_of_separation(g, *a_id, *b_id, a.max_depth);
      degrees[r] = d.degree ? std::to_string(*d.degree) : "unreachable";
    }
  });
  std::string out = "asker,recipient,degree\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    out += csv::format_row({table.rows[r][u], table.rows[r][v], degrees[r]});
  write_output(a.out, out);
  echo_config(cmd, a.out);
}

struct DistanceArgs {
  std::string graph, questions, out, standardize = "all";
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0;
  int max_depth = 6;
  long long follower_limit = 5000;
  bool keep_verified = false;
};

void run_distance(const DistanceArgs& a, const CLI::App* cmd) {
  const auto g = graph::MutualGraph::load(a.graph);
  const auto table = csv::read_file(a.questions);
  const auto u = table.column("asker"), v = table.column("recipient"), sc = table.column("score");
  const auto fol = table.find_column("recipient_followers");
  const auto ver = table.find_column("recipient_verified");
  std::vector<double> scores;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    scores.push_back(parse_double(table.rows[r][sc], where(a.questions, table, r)));
  const auto z = a.standardize == "all" ? analysis::zstandardize(scores) : scores;
  std::vector<graph::DistanceQuestion> questions;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    graph::DistanceQuestion q{row[u], row[v], z[r], 0, false};
    if (fol && !row[*fol].empty())
      q.recipient_followers = static_cast<long long>(parse_double(row[*fol], where(a.questions, table, r)));
    if (ver) q.recipient_verified = parse_bool(row[*ver]);
    questions.push_back(std::move(q));
  }
  graph::PopularityFilter filter{a.follower_limit, !a.keep_verified};
  const auto report = graph::intimacy_by_distance(questions, g, filter, a.bootstrap, a.seed, a.max_depth);
  write_output(a.out, graph::format_distance(report));
  echo_config(cmd, a.out);
  std::cerr << "dropped " << report.dropped_popular << " popular-recipient and "
            << report.dropped_self << " self-addressed questions\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question intimacy toolkit: extraction, best-worst annotation, scoring, models "
               "and analyses."};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it")
      ->envname("INTIMACY_THREADS");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Clean raw items into single-sentence questions");
  extract->add_option("--input", ex.input, "Raw items, JSONL {id,domain,text,metadata}")->required();
  extract->add_option("--out", ex.out, "Accepted questions (JSONL)")->required();
  extract->add_option("--rejected", ex.rejected, "Rejected items with reasons (JSONL)");
  extract->add_option("--abbreviations", ex.abbreviations, "pattern<TAB>replacement table");
  extract->add_option("--mention-names", ex.mention_names, "handle<TAB>display name table");
  extract->add_flag("--keep-duplicates", ex.keep_duplicates, "Do not drop repeated tweet texts");
  extract->footer(
      "Output: one JSON object per line {id,domain,text,metadata,rejected}; rejected is null for "
      "accepted questions and a reason (no_question_mark, multi_sentence, too_short, "
      "empty_after_cleaning, duplicate, self_reply, multiple_question_marks) otherwise.");

  TuplesArgs tu;
  auto* tuples = app.add_subcommand("tuples", "Generate best-worst 4-tuples");
  tuples->add_option("--items", tu.items, "Question ids: CSV with id[,text] or JSONL")->required();
  tuples->add_option("--out", tu.out, "Tuple file")->required();
  tuples->add_option("--questions-out", tu.questions_out, "Also write id,text for the service");
  tuples->add_option("--tuples-per-item", tu.tuples_per_item, "Minimum tuples per item")
      ->capture_default_str();
  tuples->add_option("--seed", tu.seed, "Random seed")->capture_default_str();
  tuples->footer("Output: CSV tuple_id,item_1,item_2,item_3,item_4.");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the annotation HTTP service");
  serve->add_option("--data-dir", sv.data_dir, "Directory of tuple sets (<set>/tuples.csv)")
      ->required()
      ->envname("INTIMACY_SERVE_DIR");
  serve->add_option("--host", sv.host, "Bind address")->capture_default_str()->envname("INTIMACY_HOST");
  serve->add_option("--port", sv.port, "Port (0 = any free port)")
      ->capture_default_str()
      ->envname("INTIMACY_PORT");
  serve->add_option("--instructions", sv.instructions, "Guideline text served at /instructions")
      ->envname("INTIMACY_INSTRUCTIONS");
  serve->add_option("--seed", sv.seed, "Seed for per-session tuple order")->capture_default_str();
  serve->add_option("--clock", sv.clock, "Timestamps: wall (UTC) or logical (seq-NNNNNNNN)")
      ->capture_default_str()
      ->check(CLI::IsMember({"wall", "logical"}));
  serve->add_option("--port-file", sv.port_file, "Write the bound port here once listening");
  serve->footer(
      "Endpoints: POST /sessions, GET /sessions/{id}/next, POST /sessions/{id}/judgments, GET "
      "/sessions/{id}/progress, GET /tuple-sets, GET /tuple-sets/{id}/export, GET /instructions. "
      "Each set keeps <set>/journal.jsonl.");

  ScoreArgs scr;
  auto* score = app.add_subcommand("score", "Infer intimacy scores from best-worst judgments");
  score->add_option("--judgments", scr.judgments, "Judgment file")->required()->check(CLI::ExistingFile);
  score->add_option("--out", scr.out, "Score file")->required();
  add_ilsr_options(score, scr.ilsr);
  score->footer("Output: CSV item_id,score with scores in [-1, 1], items sorted by id.");

  ReliabilityArgs rl;
  auto* rel = app.add_subcommand("reliability", "Split-half ranking, Krippendorff's alpha and "
                                                "pairwise model validation");
  rel->add_option("--judgments", rl.judgments, "Judgment file for SHR and alpha");
  rel->add_option("--out", rl.out, "Report (key=value lines)");
  rel->add_option("--resamples", rl.resamples, "Split-half resamples")->capture_default_str();
  rel->add_option("--seed", rl.seed, "Random seed")->capture_default_str();
  rel->add_option("--pairs", rl.pairs, "Pair judgments pair_id,qa_id,qb_id,model_gap,annotator_id,label");
  rel->add_option("--bins-out", rl.bins_out, "Per-bin validation CSV");
  rel->add_option("--bin-width", rl.bin_width, "Score-gap bin width")->capture_default_str();
  rel->add_option("--sample-pairs", rl.sample_scores, "Scores (item_id,score) to draw a pair plan from");
  rel->add_option("--plan-out", rl.plan_out, "Pair plan CSV");
  rel->add_option("--bins", rl.bins, "Gap bins in the plan")->capture_default_str();
  rel->add_option("--per-bin", rl.per_bin, "Pairs per bin")->capture_default_str();
  add_ilsr_options(rel, rl.ilsr);
  rel->footer(
      "Outputs: report lines judgments=, shr_mean=, shr_resamples=, shr_per_resample=, "
      "krippendorff_alpha= (NA when no tuple has two annotators), note=; bins CSV "
      "bin_low,bin_high,pairs,alpha,agreement plus an 'all' row; plan CSV "
      "pair_id,qa_id,qb_id,model_gap,bin.");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Fit a baseline regressor on the training split");
  train->add_option("--data", tr.data, "Labeled questions CSV id,text,score")->required();
  train->add_option("--out", tr.out, "Model artifact (JSON)")->required();
  train->add_option("--kind", tr.kind, "mean, ridge_ngram or lda_ridge")->capture_default_str();
  train->add_option("--split", tr.split, "Split CSV id,part; created from --seed if missing");
  add_model_options(train, tr.model);
  train->footer("Output: versioned JSON artifact with vocabulary, weights and topic counts.");

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "Score questions with a trained model");
  predict->add_option("--model", pr.model, "Model artifact")->required()->check(CLI::ExistingFile);
  predict->add_option("--input", pr.input, "Questions: CSV id,text or JSONL")->required();
  predict->add_option("--out", pr.out, "Predictions CSV")->required();
  predict->footer("Output: CSV question_id,score.");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Compare regressors on the test split");
  evaluate->add_option("--data", ev.data, "Labeled questions CSV id,text,score")->required();
  evaluate->add_option("--split", ev.split, "Split CSV id,part; created from --seed if missing");
  evaluate->add_option("--out", ev.out, "Comparison CSV")->required();
  evaluate->add_flag("--baselines", ev.baselines, "Mean predictor, ridge on n-grams, ridge on topics");
  evaluate->add_option("--topic-sweep", ev.sweep, "Topic counts for ridge-on-topics rows")
      ->delimiter(',');
  evaluate->add_option("--external", ev.external, "Externally produced scores question_id,score");
  evaluate->add_option("--predictions", ev.predictions, "Score a predictions file on the test split");
  add_model_options(evaluate, ev.model);
  evaluate->footer("Output: CSV model,mse,pearson_r on the test split.");

  MarkersArgs mk;
  auto* markers = app.add_subcommand("analyze-markers", "Intimacy of questions with and without "
                                                        "hedges or swearing");
  markers->add_option("--input", mk.input, "CSV domain,text,score")->required();
  markers->add_option("--lexicon", mk.lexicons, "Lexicon file(s), one phrase per line")->required();
  markers->add_option("--out", mk.out, "Contrast CSV")->required();
  markers->add_option("--bootstrap", mk.bootstrap, "Bootstrap resamples")->capture_default_str();
  markers->add_option("--seed", mk.seed, "Random seed")->capture_default_str();
  markers->add_flag("--standardized", mk.standardized, "Scores are already z-scores");
  markers->footer(
      "Output: CSV lexicon,domain,n_with,n_without,mean_with,with_low,with_high,mean_without,"
      "without_low,without_high,delta,delta_low,delta_high (z-scores within domain, 95% "
      "percentile bootstrap).");

  DyadArgs dy;
  auto* dyads = app.add_subcommand("analyze-dyads", "Gender-dyad regressions per author gender");
  dyads->add_option("--input", dy.input,
                    "CSV with score and speaker_gender|speaker_name, audience_gender|text; optional "
                    "domain, author_gender and group columns")
      ->required();
  dyads->add_option("--out-dir", dy.out_dir, "Output directory")->required();
  dyads->add_option("--groups", dy.groups, "Nested group columns, outermost first")
      ->capture_default_str();
  dyads->add_option("--names", dy.names, "Name database CSV name,gender,count");
  dyads->add_option("--standardize", dy.standardize, "domain or none")
      ->capture_default_str()
      ->check(CLI::IsMember({"domain", "none"}));
  dyads->add_option("--bootstrap", dy.reg.bootstrap, "Bootstrap resamples")->capture_default_str();
  dyads->add_option("--seed", dy.reg.seed, "Random seed")->capture_default_str();
  dyads->footer(
      "Outputs per author gender (author_F, author_M, or all): regression_<tag>.csv "
      "term,beta,se,p_stars with FF as reference; ame_<tag>.csv level,ame,ci_low,ci_high.");

  AnonymityArgs an;
  auto* anon = app.add_subcommand("analyze-anonymity", "Identity categories of usernames and "
                                                       "their intimacy");
  anon->add_option("--input", an.input, "CSV username,score and the group column")->required();
  anon->add_option("--out-dir", an.out_dir, "Output directory")->required();
  anon->add_option("--group", an.group, "Group column(s), outermost first")->capture_default_str();
  anon->add_option("--names", an.names, "Name database CSV name,gender,count");
  anon->add_option("--identity-lexicon", an.lexicons, "Identity term files (default: built in)");
  anon->add_option("--standardize", an.standardize, "all or none")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "none"}));
  anon->add_option("--bootstrap", an.reg.bootstrap, "Bootstrap resamples")->capture_default_str();
  anon->add_option("--seed", an.reg.seed, "Random seed")->capture_default_str();
  anon->footer(
      "Outputs: categories.csv username,category; regression_anonymity.csv term,beta,se,p_stars "
      "with 'other' as reference; ame_anonymity.csv level,ame,ci_low,ci_high.");

  GraphBuildArgs gb;
  auto* gbuild = app.add_subcommand("graph-build", "Build the mutual-mention graph");
  gbuild->add_option("--events", gb.events, "Mention CSV(s) from,to[,timestamp]")->required();
  gbuild->add_option("--out", gb.out, "Binary graph file")->required();
  gbuild->footer("Output: versioned binary adjacency file.");

  GraphDistanceArgs gd;
  auto* gdist = app.add_subcommand("graph-distance", "Degrees of separation for user pairs");
  gdist->add_option("--graph", gd.graph, "Graph file")->required()->check(CLI::ExistingFile);
  gdist->add_option("--pairs", gd.pairs, "CSV asker,recipient")->required();
  gdist->add_option("--out", gd.out, "Distance CSV")->required();
  gdist->add_option("--max-depth", gd.max_depth, "Longest path searched, in edges")
      ->capture_default_str();
  gdist->footer("Output: CSV asker,recipient,degree where degree is 0 for a direct mutual tie, "
                "'unreachable' beyond --max-depth, or 'self'.");

  DistanceArgs ds;
  auto* adist = app.add_subcommand("analyze-distance", "Intimacy by degree of separation");
  adist->add_option("--graph", ds.graph, "Graph file")->required()->check(CLI::ExistingFile);
  adist->add_option("--questions", ds.questions,
                    "CSV asker,recipient,score[,recipient_followers,recipient_verified]")
      ->required();
  adist->add_option("--out", ds.out, "Binned CSV")->required();
  adist->add_option("--standardize", ds.standardize, "all or none")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "none"}));
  adist->add_option("--bootstrap", ds.bootstrap, "Bootstrap resamples")->capture_default_str();
  adist->add_option("--seed", ds.seed, "Random seed")->capture_default_str();
  adist->add_option("--max-depth", ds.max_depth, "Longest path searched, in edges")
      ->capture_default_str();
  adist->add_option("--follower-limit", ds.follower_limit,
                    "Drop recipients with at least this many followers")
      ->capture_default_str();
  adist->add_flag("--keep-verified", ds.keep_verified, "Keep verified recipients");
  adist->footer("Output: CSV degree,mean,ci_low,ci_high,n with an 'unreachable' row last.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_default_threads(threads);
    if (*extract) run_extract(ex, extract);
    else if (*tuples) run_tuples(tu, tuples);
    else if (*serve) run_serve(sv);
    else if (*score) run_score(scr, score);
    else if (*rel) run_reliability(rl, rel);
    else if (*train) run_train(tr, train);
    else if (*predict) run_predict(pr, predict);
    else if (*evaluate) run_evaluate(ev, evaluate);
    else if (*markers) run_markers(mk, markers);
    else if (*dyads) run_dyads(dy, dyads);
    else if (*anon) run_anonymity(an, anon);
    else if (*gbuild) run_graph_build(gb, gbuild);
    else if (*gdist) run_graph_distance(gd, gdist);
    else if (*adist) run_distance(ds, adist);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
