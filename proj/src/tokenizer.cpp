#include "recedit/tokenizer.hpp"

#include <array>

namespace recedit {

namespace {
constexpr std::array<const char*, 5> kSpecials = {
    WordVocab::kUnk, WordVocab::kBos, WordVocab::kEot, WordVocab::kStepSep, WordVocab::kComma,
};
}

WordVocab::WordVocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = static_cast<int>(i);
}

WordVocab WordVocab::build(const std::vector<std::vector<std::string>>& docs, int min_count) {
  std::map<std::string, int> counts;
  for (const auto& doc : docs) {
    for (const auto& tok : doc) counts[tok]++;
  }
  std::vector<std::string> tokens(kSpecials.begin(), kSpecials.end());
  for (const auto& [tok, count] : counts) {  // sorted by token
    if (count < min_count) continue;
    bool special = false;
    for (const char* s : kSpecials) special |= tok == s;
    if (!special) tokens.push_back(tok);
  }
  return WordVocab(std::move(tokens));
}

nlohmann::json WordVocab::to_json() const {
  return nlohmann::json{{"tokens", tokens_}};
}

WordVocab WordVocab::from_json(const nlohmann::json& j) {
  return WordVocab(j.at("tokens").get<std::vector<std::string>>());
}

}  // namespace recedit
