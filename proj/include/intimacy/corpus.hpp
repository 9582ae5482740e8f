#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace intimacy::corpus {

enum class Domain { kRedditPost, kRedditComment, kTwitter, kBook, kMovie };

std::string to_string(Domain d);
// Accepts the wire names: reddit_post, reddit_comment, twitter, book, movie.
Domain parse_domain(std::string_view name);

enum class RejectReason {
  kNoQuestionMark,
  kMultiSentence,
  kTooShort,
  kEmptyAfterCleaning,
  kDuplicate,
  kSelfReply,
  kMultipleQuestionMarks,
};

std::string to_string(RejectReason r);

using Metadata = std::map<std::string, std::string>;

struct RawItem {
  std::string id;
  Domain domain = Domain::kRedditPost;
  std::string text;
  Metadata metadata;
};

struct Question {
  std::string id;
  Domain domain = Domain::kRedditPost;
  std::string text;
  Metadata metadata;
  std::optional<RejectReason> rejected;
};

class AbbreviationTable {
 public:
  AbbreviationTable() = default;
  explicit AbbreviationTable(std::vector<std::pair<std::string, std::string>> rows);

  // The shipped default: AITA -> "Am I the Asshole".
  static AbbreviationTable defaults();
  // Two-column tab-separated file (pattern<TAB>replacement).
  static AbbreviationTable load(const std::string& path);

  void add(std::string pattern, std::string replacement);
  // Rows in application order (longest pattern first).
  const std::vector<std::pair<std::string, std::string>>& rows() const { return rows_; }

 private:
  void sort_rows();
  std::vector<std::pair<std::string, std::string>> rows_;
};

// Result of one cleaning step or of the whole pipeline.
struct CleanOutcome {
  std::string text;
  std::optional<RejectReason> rejected;

  bool ok() const { return !rejected.has_value(); }
};

// Tokens whose trailing dot does not end a sentence ("Mr.", "e.g.", ...).
const std::vector<std::string>& default_abbreviation_dots();

// The individual cleaning rules, in the order clean_text applies them.
namespace rules {
// Rejects text with no terminal marker or with a sentence break before the end.
CleanOutcome check_sentence_structure(std::string_view text);
// Rejects text whose terminal marker run lacks '?'.
CleanOutcome require_question_mark(std::string_view text);
// "this !!!!?" -> "this ?": the terminal marker run becomes a single '?'.
CleanOutcome collapse_terminal_markers(std::string_view text);
// Removes bracketed meta tags such as "[30M]" or "[F25]".
CleanOutcome strip_meta_tags(std::string_view text);
// Whole-token abbreviation expansion. When anything is expanded the final
// question mark is emitted as its own token ("... this ?").
CleanOutcome expand_abbreviations(std::string_view text, const AbbreviationTable& table);
// "&amp;" -> "and"; other common named and numeric entities to their characters.
CleanOutcome decode_html_entities(std::string_view text);
// Rejects questions with fewer than four words.
CleanOutcome require_min_words(std::string_view text);
}  // namespace rules

CleanOutcome clean_text(std::string_view text, const AbbreviationTable& table);

// Counts whitespace-delimited tokens that contain at least one letter or digit.
std::size_t word_count(std::string_view text);

bool is_single_sentence(std::string_view text);
bool is_valid_question(std::string_view text);

struct DomainRules {
  // Twitter handle (without '@') -> display name.
  std::map<std::string, std::string> mention_names;
  bool drop_duplicates = true;
};

struct Rejection {
  RawItem item;
  RejectReason reason;
};

struct ExtractionResult {
  // One record per input item, in input order; rejected records keep their raw text.
  std::vector<Question> all;
  std::vector<Question> accepted;
  std::vector<Rejection> rejected;
};

// Strips a leading community address such as "Members of r/AskScience, ".
std::string strip_address_term(std::string_view title);
// Mentions -> display names, emoji and URLs removed, whitespace normalized.
std::string normalize_tweet(std::string_view text,
                            const std::map<std::string, std::string>& mention_names);
std::string remove_emoji(std::string_view text);

// Per-item rejections never abort the batch; accepted and rejected together
// partition the input, each in input order.
ExtractionResult extract_questions(const std::vector<RawItem>& items,
                                   const AbbreviationTable& table, const DomainRules& rules);

// Line-delimited JSON records: {"id","domain","text","metadata":{...}}.
std::vector<RawItem> read_raw_items(const std::string& path);
std::string to_jsonl(const Question& q);
std::string to_jsonl(const Rejection& r);
// Two-column TSV: handle<TAB>display name.
std::map<std::string, std::string> load_mention_names(const std::string& path);

}  // namespace intimacy::corpus
