#include "intimacy/analysis/identity.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

#include "intimacy/common/csv.hpp"
#include "intimacy/common/error.hpp"
#include "intimacy/common/text.hpp"

namespace intimacy::analysis {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

std::string alnum_only(std::string_view s) {
  std::string out;
  for (char c : s)
    if (is_alnum(c)) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

std::string strip_trailing_digits(std::string s) {
  while (!s.empty() && is_digit(s.back())) s.pop_back();
  return s;
}

// Lowercased segments with trailing digits removed; empty ones dropped.
std::vector<std::string> match_segments(std::string_view username) {
  std::vector<std::string> out;
  for (const auto& seg : username_segments(username)) {
    auto s = strip_trailing_digits(text::to_lower(seg));
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::string to_string(Gender g) { return g == Gender::kFemale ? "F" : "M"; }

std::optional<Gender> parse_gender(std::string_view s) {
  const auto l = text::to_lower(text::trim(s));
  if (l == "f" || l == "female") return Gender::kFemale;
  if (l == "m" || l == "male") return Gender::kMale;
  return std::nullopt;
}

// --- NameDatabase ---------------------------------------------------------------

NameDatabase NameDatabase::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path);
  csv::Reader reader(in);
  NameDatabase db;
  bool first = true;
  while (auto rec = reader.next()) {
    const auto where = path + ":" + std::to_string(reader.line());
    if (rec->size() < 2) throw Error("parse_error", where + ": expected name,gender,count");
    const auto gender = parse_gender((*rec)[1]);
    long long count = 1;
    bool count_ok = true;
    if (rec->size() >= 3) {
      const auto raw = text::trim((*rec)[2]);
      auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), count);
      count_ok = ec == std::errc() && end == raw.data() + raw.size() && count >= 0;
    }
    if (!gender || !count_ok) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw Error("parse_error", where + ": bad gender or count");
    }
    first = false;
    db.add((*rec)[0], *gender, count);
  }
  return db;
}

void NameDatabase::add(std::string_view name, Gender gender, long long count) {
  auto& e = entries_[text::to_lower(text::trim(name))];
  (gender == Gender::kFemale ? e.female : e.male) += count;
}

std::optional<Gender> NameDatabase::gender_of(std::string_view name) const {
  auto it = entries_.find(text::to_lower(name));
  if (it == entries_.end() || it->second.female == it->second.male) return std::nullopt;
  return it->second.female > it->second.male ? Gender::kFemale : Gender::kMale;
}

bool NameDatabase::contains(std::string_view name) const {
  return entries_.find(text::to_lower(name)) != entries_.end();
}

// --- gendered words ---------------------------------------------------------------

GenderedWords GenderedWords::defaults() {
  GenderedWords w;
  w.male = {"man", "he", "mr", "boy", "husband", "him", "uncle", "guy", "sir", "brother", "father"};
  w.female = {"woman", "she",  "mrs", "miss",   "girl",  "madam",
              "her",   "aunt", "wife", "sister", "mother"};
  return w;
}

std::optional<Gender> GenderedWords::lookup(std::string_view word) const {
  const auto w = text::to_lower(word);
  if (male.count(w)) return Gender::kMale;
  if (female.count(w)) return Gender::kFemale;
  return std::nullopt;
}

std::optional<Gender> NameListGenderClassifier::classify(std::string_view username) const {
  std::optional<Gender> found;
  for (const auto& seg : match_segments(username)) {
    auto g = names_.gender_of(seg);
    if (!g) g = words_.lookup(seg);
    if (!g) continue;
    if (found && *found != *g) return std::nullopt;
    found = g;
  }
  return found;
}

std::optional<Gender> infer_gender(std::string_view name, NameKind kind, const NameDatabase& names,
                                   const GenderedWords& words, const GenderClassifier* classifier) {
  if (kind == NameKind::kUsername) {
    if (classifier) return classifier->classify(name);
    return NameListGenderClassifier(names, words).classify(name);
  }
  const auto toks = text::tokenize(name);
  for (const auto& t : toks) {
    if (words.lookup(t)) continue;
    if (auto g = names.gender_of(t)) return g;
  }
  std::optional<Gender> found;
  for (const auto& t : toks) {
    auto g = words.lookup(t);
    if (!g) continue;
    if (found && *found != *g) return std::nullopt;
    found = g;
  }
  return found;
}

std::optional<std::string> extract_addressee(std::string_view question,
                                             const GenderedWords& words) {
  std::string q = text::trim(question);
  if (q.empty() || q.back() != '?') return std::nullopt;
  while (!q.empty() && q.back() == '?') q.pop_back();
  const auto comma = q.rfind(',');
  if (comma == std::string::npos) return std::nullopt;
  const std::string tail = text::trim(std::string_view(q).substr(comma + 1));
  const auto toks = text::split_whitespace(tail);
  if (toks.empty() || toks.size() > 2) return std::nullopt;
  for (const auto& tok : toks) {
    const auto bare = alnum_only(tok);
    if (bare.empty()) return std::nullopt;
    const bool capitalized = is_upper(tok.front());
    if (!capitalized && !words.lookup(bare)) return std::nullopt;
  }
  return tail;
}

// --- identity ----------------------------------------------------------------------

std::string to_string(IdentityCategory c) {
  switch (c) {
    case IdentityCategory::kAnonymous: return "anonymous";
    case IdentityCategory::kNameContaining: return "name_containing";
    case IdentityCategory::kDepersonalized: return "depersonalized";
    case IdentityCategory::kOther: return "other";
  }
  return "other";
}

IdentityLexicons IdentityLexicons::defaults() {
  IdentityLexicons l;
  l.terms = {
      // political
      "briebart", "rightwing", "imstillwithher", "im_still_with_her", "left_wing", "lockherup",
      "obama", "bernie_sanders", "maga", "leftie", "leftwing", "neocon", "liberal", "republicans",
      "republican", "libtard", "democrap", "democrats", "trump", "conservative", "im_with_her",
      "imwithher", "bernie", "right_wing", "democratic", "lock_her_up", "democrat", "clinton",
      // religion
      "allah", "lutheran", "atheist", "bible", "buddah", "jewish", "christ", "muslim", "islamic",
      "buddhism", "jesus", "shariah", "catholic", "buddhist", "quran", "torah", "buddha",
      "methododist", "christianity", "athiest", "athiesm", "judaism", "koran", "jew",
      // socioeconomic
      "mdphd", "phd", "dumb_hick", "ghetto_fabulous", "hillbilly", "boondocks", "hill_billy",
      "yokel", "yokels", "lawyer", "ghetto", "hillbillies", "hayseed", "hayseeds", "rednecks",
      "professor", "backwoods", "beer_drinkin", "ghettofabulous", "bumpkins", "prof", "dphil",
      "red_neck", "redneck", "beerdrinkin", "beerswillin", "bumpkin", "doctor", "dds", "bubbas"};
  return l;
}

IdentityLexicons IdentityLexicons::load(const std::vector<std::string>& paths) {
  IdentityLexicons l;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
      line = text::to_lower(text::trim(line));
      if (line.empty() || line[0] == '#') continue;
      l.terms.push_back(line);
    }
  }
  return l;
}

std::vector<std::string> username_segments(std::string_view username) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < username.size(); ++i) {
    const char c = username[i];
    if (!is_alnum(c)) {
      flush();
      continue;
    }
    if (is_upper(c) && i > 0 && is_lower(username[i - 1])) flush();
    cur.push_back(c);
  }
  flush();
  return out;
}

bool has_age_suffix(std::string_view username) {
  std::size_t start = username.size();
  while (start > 0 && is_digit(username[start - 1])) --start;
  const auto digits = username.substr(start);
  int value = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.size() == 4) return value >= 1950 && value <= 2005;
  if (digits.size() == 2) return value >= 50 && value <= 99;
  return false;
}

bool is_anonymous_username(std::string_view username) {
  const auto l = text::to_lower(username);
  if (l.find("anonymous") != std::string::npos || l.find("throwaway") != std::string::npos)
    return true;
  return l.find("anon") != std::string::npos && !l.empty() && is_digit(l.back());
}

namespace {

bool matches_identity_lexicon(std::string_view username, const IdentityLexicons& lexicons) {
  const auto flat = alnum_only(username);
  const auto segments = match_segments(username);
  for (const auto& term : lexicons.terms) {
    const auto t = alnum_only(term);
    if (t.empty()) continue;
    const auto letters = std::count_if(t.begin(), t.end(), [](char c) { return !is_digit(c); });
    if (letters < 4) {
      if (std::find(segments.begin(), segments.end(), t) != segments.end()) return true;
    } else if (flat.find(t) != std::string::npos) {
      return true;
    }
  }
  return false;
}

}  // namespace

IdentityCategory classify_identity(std::string_view username, const NameDatabase& names,
                                   const IdentityLexicons& lexicons,
                                   const GenderClassifier& gender) {
  if (is_anonymous_username(username)) return IdentityCategory::kAnonymous;

  const auto raw_segments = username_segments(username);
  if (raw_segments.size() >= 2) {
    for (const auto& seg : match_segments(username))
      if (names.contains(seg)) return IdentityCategory::kNameContaining;
  }

  if (!gender.classify(username) && !has_age_suffix(username) &&
      !matches_identity_lexicon(username, lexicons))
    return IdentityCategory::kDepersonalized;
  return IdentityCategory::kOther;
}

}  // namespace intimacy::analysis
