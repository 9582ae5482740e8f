#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace intimacy::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);
bool starts_with_ci(std::string_view s, std::string_view prefix);

// Lowercases ASCII and splits on runs of non-alphanumeric ASCII. Bytes >= 0x80
// are kept as word characters so UTF-8 words stay intact. This is the one
// tokenizer shared by n-gram features, LDA and lexicon matching.
std::vector<std::string> tokenize(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace intimacy::text
