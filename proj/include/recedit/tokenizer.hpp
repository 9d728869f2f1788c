#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "recedit/text.hpp"

namespace recedit {

// Closed word vocabulary with an unknown token, shared between the step
// generator and any component that must agree with it on token ids.
// Ids: fixed specials first, then kept tokens in sorted order.
class WordVocab {
 public:
  static constexpr const char* kUnk = "<unk>";
  static constexpr const char* kBos = "<bos>";
  static constexpr const char* kEot = "<eot>";
  static constexpr const char* kStepSep = "<stepsep>";
  static constexpr const char* kComma = ",";

  WordVocab() = default;

  static WordVocab build(const std::vector<std::vector<std::string>>& docs, int min_count);

  int id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? unk_id() : it->second;
  }
  std::vector<int> ids(const std::vector<std::string>& tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id(t));
    return out;
  }
  const std::string& token(int id) const { return tokens_.at(static_cast<size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }

  int unk_id() const { return 0; }
  int bos_id() const { return 1; }
  int eot_id() const { return 2; }
  int stepsep_id() const { return 3; }
  int comma_id() const { return 4; }

  nlohmann::json to_json() const;
  static WordVocab from_json(const nlohmann::json& j);

 private:
  explicit WordVocab(std::vector<std::string> tokens);

  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
};

}  // namespace recedit
