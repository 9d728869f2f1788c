#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace recedit {

std::string to_lower(std::string_view s);

// Lowercase word tokenizer shared by every text-handling component
// (ingredient normalization, mention extraction, step modeling).
// Splits on whitespace, emits punctuation as single-character tokens,
// keeps '-', '\'' and '/' inside words so "all-purpose" and "1/2"
// stay single tokens.
std::vector<std::string> word_tokenize(std::string_view text);

// Inverse-ish of word_tokenize for display: space-joins tokens but
// attaches closing punctuation to the previous token.
std::string detokenize(const std::vector<std::string>& tokens);

// Digits, decimals and ASCII fractions: "2", "2.5", "1/2".
bool is_number_token(std::string_view tok);

std::string join_tokens(const std::vector<std::string>& tokens, char sep = ' ');

}  // namespace recedit
