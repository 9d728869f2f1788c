#include "recedit/action_tree.hpp"

#include <algorithm>
#include <fstream>

#include "recedit/rules.hpp"
#include "recedit/text.hpp"

namespace recedit::eval {

int ActionTree::add_node(std::string label, int parent, int first_step) {
  int id = static_cast<int>(nodes.size());
  nodes.push_back({std::move(label), {}, first_step});
  nodes[static_cast<size_t>(parent)].children.push_back(id);
  return id;
}

void ActionTree::order_children() {
  for (auto& node : nodes) {
    std::stable_sort(node.children.begin(), node.children.end(), [&](int a, int b) {
      const TreeNode& na = nodes[static_cast<size_t>(a)];
      const TreeNode& nb = nodes[static_cast<size_t>(b)];
      if (na.first_step != nb.first_step) return na.first_step < nb.first_step;
      return na.label < nb.label;
    });
  }
}

std::set<std::string> load_verb_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::set<std::string> verbs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tokens = word_tokenize(line);
    if (!tokens.empty()) verbs.insert(tokens.front());
  }
  return verbs;
}

ActionTree build_action_tree(const Recipe& recipe, const std::set<std::string>& verb_lexicon,
                             const IngredientVocab& vocab) {
  ActionTree tree;
  std::map<int, int> chain_tail;  // ingredient id -> current tail node
  int last_action = -1;

  for (size_t s = 0; s < recipe.steps_text.size(); ++s) {
    auto tokens = word_tokenize(recipe.steps_text[s]);

    std::vector<std::string> verbs;
    for (const auto& tok : tokens) {
      if (verb_lexicon.count(tok)) verbs.push_back(tok);
    }
    std::vector<int> mentioned;
    for (const rules::Mention& m : rules::extract_mentions(tokens, vocab)) {
      if (std::find(mentioned.begin(), mentioned.end(), m.ingredient_id) == mentioned.end()) {
        mentioned.push_back(m.ingredient_id);
      }
    }

    int step_idx = static_cast<int>(s);
    if (!mentioned.empty()) {
      for (int ingredient : mentioned) {
        auto it = chain_tail.find(ingredient);
        if (it == chain_tail.end()) {
          int root = tree.add_node(vocab.name(ingredient), 0, step_idx);
          it = chain_tail.emplace(ingredient, root).first;
        }
        int tail = it->second;
        for (const auto& verb : verbs) {
          tail = tree.add_node(verb, tail, step_idx);
        }
        it->second = tail;
        if (!verbs.empty()) last_action = tail;
      }
    } else if (!verbs.empty()) {
      // No ingredient in sight: continue from the most recent
      // intermediate product (or the super-root before any action).
      int tail = last_action >= 0 ? last_action : 0;
      for (const auto& verb : verbs) {
        tail = tree.add_node(verb, tail, step_idx);
      }
      last_action = tail;
    }
  }
  tree.order_children();
  return tree;
}

namespace {

// Postorder flattening with leftmost-leaf indices, 1-based as in the
// classic ordered-TED formulation.
struct FlatTree {
  std::vector<const std::string*> label;  // [1..n]
  std::vector<int> lml;                   // leftmost leaf descendant
  std::vector<int> keyroots;

  explicit FlatTree(const ActionTree& t) {
    label.push_back(nullptr);  // 1-based
    lml.push_back(0);
    post_order(t, 0);
    std::vector<bool> seen(lml.size(), false);
    for (int i = static_cast<int>(label.size()) - 1; i >= 1; --i) {
      if (!seen[static_cast<size_t>(lml[static_cast<size_t>(i)])]) {
        seen[static_cast<size_t>(lml[static_cast<size_t>(i)])] = true;
        keyroots.push_back(i);
      }
    }
    std::sort(keyroots.begin(), keyroots.end());
  }

  int size() const { return static_cast<int>(label.size()) - 1; }

 private:
  int post_order(const ActionTree& t, int node) {
    int first_leaf = -1;
    for (int child : t.nodes[static_cast<size_t>(node)].children) {
      int leaf = post_order(t, child);
      if (first_leaf < 0) first_leaf = leaf;
    }
    label.push_back(&t.nodes[static_cast<size_t>(node)].label);
    int index = static_cast<int>(label.size()) - 1;
    lml.push_back(first_leaf < 0 ? index : first_leaf);
    return lml.back();
  }
};

}  // namespace

int tree_edit_distance(const ActionTree& t1, const ActionTree& t2) {
  FlatTree a(t1);
  FlatTree b(t2);
  int n = a.size();
  int m = b.size();
  std::vector<std::vector<int>> td(static_cast<size_t>(n + 1),
                                   std::vector<int>(static_cast<size_t>(m + 1), 0));

  std::vector<std::vector<int>> fd(static_cast<size_t>(n + 2),
                                   std::vector<int>(static_cast<size_t>(m + 2), 0));
  for (int i : a.keyroots) {
    for (int j : b.keyroots) {
      int li = a.lml[static_cast<size_t>(i)];
      int lj = b.lml[static_cast<size_t>(j)];
      int rows = i - li + 2;
      int cols = j - lj + 2;
      fd[0][0] = 0;
      for (int x = 1; x < rows; ++x) fd[static_cast<size_t>(x)][0] = fd[static_cast<size_t>(x - 1)][0] + 1;
      for (int y = 1; y < cols; ++y) fd[0][static_cast<size_t>(y)] = fd[0][static_cast<size_t>(y - 1)] + 1;
      for (int x = 1; x < rows; ++x) {
        int node_a = x + li - 1;
        for (int y = 1; y < cols; ++y) {
          int node_b = y + lj - 1;
          int del = fd[static_cast<size_t>(x - 1)][static_cast<size_t>(y)] + 1;
          int ins = fd[static_cast<size_t>(x)][static_cast<size_t>(y - 1)] + 1;
          if (a.lml[static_cast<size_t>(node_a)] == li && b.lml[static_cast<size_t>(node_b)] == lj) {
            int relabel = *a.label[static_cast<size_t>(node_a)] == *b.label[static_cast<size_t>(node_b)] ? 0 : 1;
            int sub = fd[static_cast<size_t>(x - 1)][static_cast<size_t>(y - 1)] + relabel;
            fd[static_cast<size_t>(x)][static_cast<size_t>(y)] = std::min({del, ins, sub});
            td[static_cast<size_t>(node_a)][static_cast<size_t>(node_b)] =
                fd[static_cast<size_t>(x)][static_cast<size_t>(y)];
          } else {
            int xa = a.lml[static_cast<size_t>(node_a)] - li;
            int yb = b.lml[static_cast<size_t>(node_b)] - lj;
            int sub = fd[static_cast<size_t>(xa)][static_cast<size_t>(yb)] +
                      td[static_cast<size_t>(node_a)][static_cast<size_t>(node_b)];
            fd[static_cast<size_t>(x)][static_cast<size_t>(y)] = std::min({del, ins, sub});
          }
        }
      }
    }
  }
  return td[static_cast<size_t>(n)][static_cast<size_t>(m)];
}

double nted(const ActionTree& t1, const ActionTree& t2) {
  int denom = t1.size() + t2.size();
  if (denom == 0) return 0.0;
  return static_cast<double>(tree_edit_distance(t1, t2)) / static_cast<double>(denom);
}

}  // namespace recedit::eval
