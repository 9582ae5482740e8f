#include "intimacy/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <unordered_set>

#include "json.hpp"

#include "intimacy/common/error.hpp"
#include "intimacy/common/text.hpp"

namespace intimacy::corpus {

namespace {

bool is_marker(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_letter(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalpha(u) != 0;
}
bool is_alnum(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

std::string collapse_whitespace(std::string_view s) {
  return text::join(text::split_whitespace(s), " ");
}

// Start index of the maximal run of sentence markers at the end of `s`
// (s.size() when there is none).
std::size_t terminal_run_start(std::string_view s) {
  std::size_t i = s.size();
  while (i > 0 && is_marker(s[i - 1])) --i;
  return i;
}

bool has_word(std::string_view s) {
  return std::any_of(s.begin(), s.end(), is_alnum);
}

CleanOutcome reject(std::string_view text, RejectReason r) {
  return CleanOutcome{std::string(text), r};
}

// True if a sentence boundary occurs before the terminal marker run: a marker
// followed by whitespace and then a letter, unless the token it closes is a
// whitelisted abbreviation ("Mr.") or an initial.
bool has_internal_break(std::string_view s) {
  const std::size_t end = terminal_run_start(s);
  const auto& dots = default_abbreviation_dots();
  std::size_t i = 0;
  while (i < end) {
    if (!is_marker(s[i])) {
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end < end && is_marker(s[run_end])) ++run_end;
    std::size_t j = run_end;
    while (j < s.size() && is_space(s[j])) ++j;
    bool followed_by_letter = j > run_end && j < s.size() && is_letter(s[j]);
    if (followed_by_letter) {
      bool whitelisted = false;
      if (run_end - i == 1 && s[i] == '.') {
        std::size_t tok_start = i;
        while (tok_start > 0 && !is_space(s[tok_start - 1])) --tok_start;
        std::string token = text::to_lower(s.substr(tok_start, i + 1 - tok_start));
        bool initial = token.size() == 2 && std::isalpha(static_cast<unsigned char>(token[0]));
        whitelisted = initial || std::find(dots.begin(), dots.end(), token) != dots.end();
      }
      if (!whitelisted) return true;
    }
    i = run_end;
  }
  return false;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_emoji(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) ||  // pictographs, emoticons, flags
         (cp >= 0x2600 && cp <= 0x27BF) ||    // misc symbols, dingbats
         (cp >= 0x2B05 && cp <= 0x2B55) ||    // arrows and stars used as emoji
         (cp >= 0x231A && cp <= 0x23FF) ||    // watch, hourglass, media controls
         (cp >= 0xFE00 && cp <= 0xFE0F) ||    // variation selectors
         (cp >= 0xE0020 && cp <= 0xE007F) ||  // tag sequences
         cp == 0x200D || cp == 0x20E3;        // ZWJ, keycap
}

std::string json_string_value(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

std::string to_string(Domain d) {
  switch (d) {
    case Domain::kRedditPost: return "reddit_post";
    case Domain::kRedditComment: return "reddit_comment";
    case Domain::kTwitter: return "twitter";
    case Domain::kBook: return "book";
    case Domain::kMovie: return "movie";
  }
  return "unknown";
}

Domain parse_domain(std::string_view name) {
  for (Domain d : {Domain::kRedditPost, Domain::kRedditComment, Domain::kTwitter,
                   Domain::kBook, Domain::kMovie}) {
    if (to_string(d) == name) return d;
  }
  throw Error("invalid_domain", "unknown domain '" + std::string(name) + "'");
}

std::string to_string(RejectReason r) {
  switch (r) {
    case RejectReason::kNoQuestionMark: return "no_question_mark";
    case RejectReason::kMultiSentence: return "multi_sentence";
    case RejectReason::kTooShort: return "too_short";
    case RejectReason::kEmptyAfterCleaning: return "empty_after_cleaning";
    case RejectReason::kDuplicate: return "duplicate";
    case RejectReason::kSelfReply: return "self_reply";
    case RejectReason::kMultipleQuestionMarks: return "multiple_question_marks";
  }
  return "unknown";
}

// --- AbbreviationTable ------------------------------------------------------

AbbreviationTable::AbbreviationTable(std::vector<std::pair<std::string, std::string>> rows)
    : rows_(std::move(rows)) {
  for (const auto& [pattern, _] : rows_)
    if (pattern.empty()) throw Error("invalid_abbreviation", "empty pattern");
  sort_rows();
}

AbbreviationTable AbbreviationTable::defaults() {
  return AbbreviationTable(std::vector<std::pair<std::string, std::string>>{{"AITA", "Am I the Asshole"}});
}

AbbreviationTable AbbreviationTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open " + path);
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw Error("parse_error", path + ":" + std::to_string(lineno) +
                                     ": expected pattern<TAB>replacement");
    rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return AbbreviationTable(std::move(rows));
}

void AbbreviationTable::add(std::string pattern, std::string replacement) {
  if (pattern.empty()) throw Error("invalid_abbreviation", "empty pattern");
  rows_.emplace_back(std::move(pattern), std::move(replacement));
  sort_rows();
}

void AbbreviationTable::sort_rows() {
  std::stable_sort(rows_.begin(), rows_.end(), [](const auto& a, const auto& b) {
    return a.first.size() > b.first.size();
  });
}

const std::vector<std::string>& default_abbreviation_dots() {
  static const std::vector<std::string> dots = {
      "mr.", "mrs.", "ms.", "dr.", "st.", "jr.", "sr.", "prof.", "vs.", "etc.",
      "e.g.", "i.e.", "no.", "approx.", "u.s.", "u.k.", "a.m.", "p.m."};
  return dots;
}

// --- cleaning rules -----------------------------------------------------------

namespace rules {

CleanOutcome check_sentence_structure(std::string_view text) {
  std::string t = text::trim(text);
  if (!has_word(t)) return reject(t, RejectReason::kEmptyAfterCleaning);
  if (!is_marker(t.back())) return reject(t, RejectReason::kNoQuestionMark);
  if (has_internal_break(t)) return reject(t, RejectReason::kMultiSentence);
  return {t, std::nullopt};
}

CleanOutcome require_question_mark(std::string_view text) {
  std::size_t start = terminal_run_start(text);
  if (text.substr(start).find('?') == std::string_view::npos)
    return reject(text, RejectReason::kNoQuestionMark);
  return {std::string(text), std::nullopt};
}

CleanOutcome collapse_terminal_markers(std::string_view text) {
  std::size_t start = terminal_run_start(text);
  std::string_view run = text.substr(start);
  if (run.find('?') == std::string_view::npos) return {std::string(text), std::nullopt};
  return {std::string(text.substr(0, start)) + "?", std::nullopt};
}

const std::regex& meta_tag() {
  static const std::regex tag(
      R"(\[\s*(?:\d{1,3}\s*[A-Za-z]{1,2}|[A-Za-z]{1,2}\s*\d{1,3})\s*\])");
  return tag;
}

CleanOutcome strip_meta_tags(std::string_view text) {
  const std::regex& tag = meta_tag();
  std::string s(text);
  if (!std::regex_search(s, tag)) return {s, std::nullopt};
  std::string stripped = collapse_whitespace(std::regex_replace(s, tag, " "));
  // A tag glued to the following marker ("me[30M]?") leaves "me ?"; reattach.
  if (stripped.size() >= 2 && stripped.back() == '?' &&
      stripped[stripped.size() - 2] == ' ' && s.size() >= 2 && s[s.size() - 2] == ']') {
    stripped.erase(stripped.size() - 2, 1);
  }
  if (!has_word(stripped)) return reject(stripped, RejectReason::kEmptyAfterCleaning);
  return {stripped, std::nullopt};
}

CleanOutcome expand_abbreviations(std::string_view text, const AbbreviationTable& table) {
  std::string out;
  bool expanded = false;
  std::size_t i = 0;
  while (i < text.size()) {
    bool boundary_before = i == 0 || !is_alnum(text[i - 1]);
    bool matched = false;
    if (boundary_before) {
      for (const auto& [pattern, replacement] : table.rows()) {
        if (text.compare(i, pattern.size(), pattern) != 0) continue;
        std::size_t after = i + pattern.size();
        if (after < text.size() && is_alnum(text[after])) continue;
        out += replacement;
        i = after;
        matched = expanded = true;
        break;
      }
    }
    if (!matched) out.push_back(text[i++]);
  }
  if (expanded && out.size() >= 2 && out.back() == '?' && out[out.size() - 2] != ' ') {
    out.insert(out.size() - 1, " ");
  }
  return {out, std::nullopt};
}

CleanOutcome decode_html_entities(std::string_view text) {
  static const std::regex entity(R"(&(#[0-9]{1,7}|#[xX][0-9a-fA-F]{1,6}|[A-Za-z]{2,8});)");
  std::string cur(text);
  for (int pass = 0; pass < 4; ++pass) {
    std::string out;
    auto begin = std::sregex_iterator(cur.begin(), cur.end(), entity);
    std::size_t last = 0;
    bool changed = false;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      const auto& m = *it;
      std::string name = m[1].str();
      std::string repl;
      if (name[0] == '#') {
        char32_t cp = (name.size() > 1 && (name[1] == 'x' || name[1] == 'X'))
                          ? static_cast<char32_t>(std::stoul(name.substr(2), nullptr, 16))
                          : static_cast<char32_t>(std::stoul(name.substr(1)));
        if (cp == 0 || cp > 0x10FFFF) continue;
        append_utf8(repl, cp);
      } else if (name == "amp") {
        repl = "and";
      } else if (name == "lt") {
        repl = "<";
      } else if (name == "gt") {
        repl = ">";
      } else if (name == "quot") {
        repl = "\"";
      } else if (name == "apos") {
        repl = "'";
      } else if (name == "nbsp") {
        repl = " ";
      } else {
        continue;
      }
      out.append(cur, last, static_cast<std::size_t>(m.position()) - last);
      out += repl;
      last = static_cast<std::size_t>(m.position() + m.length());
      changed = true;
    }
    if (!changed) break;
    out.append(cur, last, std::string::npos);
    cur = std::move(out);
  }
  return {cur, std::nullopt};
}

CleanOutcome require_min_words(std::string_view text) {
  if (word_count(text) < 4) return reject(text, RejectReason::kTooShort);
  return {std::string(text), std::nullopt};
}

}  // namespace rules

CleanOutcome clean_text(std::string_view text, const AbbreviationTable& table) {
  CleanOutcome cur{collapse_whitespace(text), std::nullopt};
  if (cur.text.empty()) return reject(cur.text, RejectReason::kEmptyAfterCleaning);

  const std::function<CleanOutcome(std::string_view)> steps[] = {
      rules::check_sentence_structure,
      rules::require_question_mark,
      rules::collapse_terminal_markers,
      rules::strip_meta_tags,
      [&](std::string_view s) { return rules::expand_abbreviations(s, table); },
      rules::decode_html_entities,
      rules::require_min_words,
  };
  for (const auto& step : steps) {
    cur = step(cur.text);
    if (!cur.ok()) return cur;
  }
  return cur;
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  for (const auto& tok : text::split_whitespace(text))
    if (has_word(tok)) ++n;
  return n;
}

bool is_single_sentence(std::string_view text) {
  return !has_internal_break(text::trim(text));
}

bool is_valid_question(std::string_view text) {
  std::string t = text::trim(text);
  if (t.empty() || t.back() != '?') return false;
  if (t.size() - terminal_run_start(t) != 1) return false;
  if (std::regex_search(t, rules::meta_tag())) return false;
  return is_single_sentence(t) && word_count(t) >= 4;
}

// --- extraction ---------------------------------------------------------------

std::string strip_address_term(std::string_view title) {
  auto comma = title.find(',');
  if (comma == std::string_view::npos) return std::string(title);
  std::string head = text::to_lower(title.substr(0, comma));
  if (head.find("r/") == std::string::npos) return std::string(title);
  return text::trim(title.substr(comma + 1));
}

std::string remove_emoji(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    if (i + len > s.size()) len = 1;
    char32_t cp = 0;
    if (len == 1) {
      cp = c;
    } else {
      cp = c & (0xFF >> (len + 1));
      for (std::size_t k = 1; k < len; ++k)
        cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    if (!is_emoji(cp)) out.append(s.substr(i, len));
    i += len;
  }
  return out;
}

std::string normalize_tweet(std::string_view text,
                            const std::map<std::string, std::string>& mention_names) {
  static const std::regex url(R"((?:https?://|www\.)\S+)", std::regex::icase);
  static const std::regex mention(R"(@([A-Za-z0-9_]{1,15}))");
  std::string s = std::regex_replace(std::string(text), url, " ");

  std::string out;
  auto begin = std::sregex_iterator(s.begin(), s.end(), mention);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(s, last, static_cast<std::size_t>(m.position()) - last);
    auto name = mention_names.find(m[1].str());
    out += name != mention_names.end() ? name->second : m[1].str();
    last = static_cast<std::size_t>(m.position() + m.length());
  }
  out.append(s, last, std::string::npos);
  return collapse_whitespace(remove_emoji(out));
}

ExtractionResult extract_questions(const std::vector<RawItem>& items,
                                   const AbbreviationTable& table, const DomainRules& rules) {
  ExtractionResult result;
  std::unordered_set<std::string> seen_tweets;

  for (const auto& item : items) {
    auto reject_item = [&](RejectReason reason) {
      result.rejected.push_back({item, reason});
      result.all.push_back(Question{item.id, item.domain, item.text, item.metadata, reason});
    };

    std::string candidate = item.text;
    switch (item.domain) {
      case Domain::kRedditPost:
      case Domain::kRedditComment: {
        auto marks = std::count(candidate.begin(), candidate.end(), '?');
        if (item.domain == Domain::kRedditPost && marks > 1) {
          reject_item(RejectReason::kMultipleQuestionMarks);
          continue;
        }
        candidate = strip_address_term(candidate);
        break;
      }
      case Domain::kTwitter: {
        auto author = item.metadata.find("author_username");
        auto recipient = item.metadata.find("recipient_username");
        if (author != item.metadata.end() && recipient != item.metadata.end() &&
            !author->second.empty() &&
            text::to_lower(author->second) == text::to_lower(recipient->second)) {
          reject_item(RejectReason::kSelfReply);
          continue;
        }
        candidate = normalize_tweet(candidate, rules.mention_names);
        break;
      }
      case Domain::kBook:
      case Domain::kMovie:
        break;
    }

    CleanOutcome cleaned = clean_text(candidate, table);
    if (!cleaned.ok()) {
      reject_item(*cleaned.rejected);
      continue;
    }
    if (item.domain == Domain::kTwitter && rules.drop_duplicates &&
        !seen_tweets.insert(text::to_lower(cleaned.text)).second) {
      reject_item(RejectReason::kDuplicate);
      continue;
    }
    Question q{item.id, item.domain, cleaned.text, item.metadata, std::nullopt};
    result.accepted.push_back(q);
    result.all.push_back(std::move(q));
  }
  return result;
}

std::vector<RawItem> read_raw_items(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open " + path);
  std::vector<RawItem> items;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    auto where = path + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("parse_error", where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("domain") || !j.contains("text"))
      throw Error("parse_error", where + ": record needs id, domain and text");
    RawItem item;
    item.id = json_string_value(j["id"]);
    item.domain = parse_domain(j["domain"].get<std::string>());
    item.text = j["text"].get<std::string>();
    if (j.contains("metadata") && j["metadata"].is_object()) {
      for (const auto& [k, v] : j["metadata"].items()) item.metadata[k] = json_string_value(v);
    }
    if (!ids.insert(item.id).second)
      throw Error("duplicate_id", where + ": id '" + item.id + "' repeats");
    items.push_back(std::move(item));
  }
  return items;
}

std::string to_jsonl(const Question& q) {
  nlohmann::ordered_json j;
  j["id"] = q.id;
  j["domain"] = to_string(q.domain);
  j["text"] = q.text;
  j["metadata"] = nlohmann::ordered_json(q.metadata);
  j["rejected"] = q.rejected ? nlohmann::ordered_json(to_string(*q.rejected))
                             : nlohmann::ordered_json(nullptr);
  return j.dump() + "\n";
}

std::string to_jsonl(const Rejection& r) {
  return to_jsonl(Question{r.item.id, r.item.domain, r.item.text, r.item.metadata, r.reason});
}

std::map<std::string, std::string> load_mention_names(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open " + path);
  std::map<std::string, std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    std::string handle = line.substr(0, tab);
    if (!handle.empty() && handle[0] == '@') handle.erase(0, 1);
    names[handle] = line.substr(tab + 1);
  }
  return names;
}

}  // namespace intimacy::corpus
