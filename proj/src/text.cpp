#include "recedit/text.hpp"

#include <cctype>

namespace recedit {

namespace {

bool is_word_char(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '-' || c == '\'' || c == '/';
}

bool is_closing_punct(const std::string& tok) {
  if (tok.size() != 1) return false;
  switch (tok[0]) {
    case ',':
    case '.':
    case ';':
    case ':':
    case '!':
    case '?':
    case ')':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> word_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  };
  for (char raw : text) {
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (is_word_char(c)) {
      cur.push_back(c);
    } else {
      flush();
      tokens.push_back(std::string(1, c));
    }
  }
  flush();
  return tokens;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& tok : tokens) {
    if (!out.empty() && !is_closing_punct(tok)) out.push_back(' ');
    out += tok;
  }
  return out;
}

bool is_number_token(std::string_view tok) {
  if (tok.empty()) return false;
  bool has_digit = false;
  for (char c : tok) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      has_digit = true;
    } else if (c != '.' && c != '/') {
      return false;
    }
  }
  return has_digit;
}

std::string join_tokens(const std::vector<std::string>& tokens, char sep) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(sep);
    out += tokens[i];
  }
  return out;
}

}  // namespace recedit
