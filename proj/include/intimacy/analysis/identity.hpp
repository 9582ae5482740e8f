#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace intimacy::analysis {

enum class Gender { kFemale, kMale };
std::string to_string(Gender g);
std::optional<Gender> parse_gender(std::string_view s);  // "F"/"M"/"female"/"male"

// Given-name database, CSV rows of name,gender,count without a header (the
// SSA yobYYYY.txt layout). A name listed under both genders takes the gender
// with the larger count.
class NameDatabase {
 public:
  NameDatabase() = default;
  static NameDatabase load(const std::string& path);

  void add(std::string_view name, Gender gender, long long count);
  // Case-insensitive.
  std::optional<Gender> gender_of(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    long long female = 0;
    long long male = 0;
  };
  std::map<std::string, Entry, std::less<>> entries_;
};

// Gendered titles and roles, lowercase without dots ("mrs", "mother").
struct GenderedWords {
  std::set<std::string, std::less<>> male;
  std::set<std::string, std::less<>> female;

  static GenderedWords defaults();
  std::optional<Gender> lookup(std::string_view word) const;
};

// Username gender model. Implementations may abstain.
class GenderClassifier {
 public:
  virtual ~GenderClassifier() = default;
  virtual std::optional<Gender> classify(std::string_view username) const = 0;
};

// Fallback classifier: a username performs a gender when its segments name
// given names or gendered words of one gender only.
class NameListGenderClassifier : public GenderClassifier {
 public:
  NameListGenderClassifier(const NameDatabase& names, const GenderedWords& words)
      : names_(names), words_(words) {}
  std::optional<Gender> classify(std::string_view username) const override;

 private:
  const NameDatabase& names_;
  const GenderedWords& words_;
};

enum class NameKind { kCharacter, kUsername };

// Characters: first token found in the name database, else a gendered title
// or role; conflicting signals abstain. Usernames: the classifier.
std::optional<Gender> infer_gender(std::string_view name, NameKind kind, const NameDatabase& names,
                                   const GenderedWords& words,
                                   const GenderClassifier* classifier = nullptr);

// Text between the last comma and the terminal '?' when it is one or two
// tokens, each capitalized or a gendered word.
std::optional<std::string> extract_addressee(std::string_view question,
                                             const GenderedWords& words = GenderedWords::defaults());

enum class IdentityCategory { kAnonymous, kNameContaining, kDepersonalized, kOther };
std::string to_string(IdentityCategory c);

// Political, religious and socioeconomic term lists.
struct IdentityLexicons {
  std::vector<std::string> terms;  // lowercase

  static IdentityLexicons defaults();
  static IdentityLexicons load(const std::vector<std::string>& paths);
};

// Splits on '-', '_' and other non-alphanumerics, and at lower-to-upper case
// transitions ("SamIsCool" -> Sam, Is, Cool).
std::vector<std::string> username_segments(std::string_view username);

// Trailing digit run of exactly 4 digits in 1950-2005 or exactly 2 in 50-99.
bool has_age_suffix(std::string_view username);

bool is_anonymous_username(std::string_view username);

// Precedence Anonymous > NameContaining > Depersonalized > Other.
IdentityCategory classify_identity(std::string_view username, const NameDatabase& names,
                                   const IdentityLexicons& lexicons,
                                   const GenderClassifier& gender);

}  // namespace intimacy::analysis
