#pragma once

#include <set>
#include <string>
#include <vector>

#include "recedit/corpus.hpp"

namespace recedit::eval {

// Ordered tree with a synthetic super-root at index 0. Ingredient roots
// hang off the super-root; action-verb nodes chain beneath them.
struct ActionTree {
  struct TreeNode {
    std::string label;
    std::vector<int> children;
    int first_step = 0;  // step index of first appearance; orders siblings
  };

  std::vector<TreeNode> nodes;  // nodes[0] = super-root

  ActionTree() { nodes.push_back({"<root>", {}, -1}); }

  int add_node(std::string label, int parent, int first_step);
  // Node count excluding the super-root.
  int size() const { return static_cast<int>(nodes.size()) - 1; }
  // Sorts every child list by (first_step, label).
  void order_children();
};

std::set<std::string> load_verb_lexicon(const std::string& path);

// One chain of that step's action verbs is attached beneath every
// ingredient the step mentions (ingredient roots are created on first
// mention). Verb-only steps extend the most recent action chain.
ActionTree build_action_tree(const Recipe& recipe, const std::set<std::string>& verb_lexicon,
                             const IngredientVocab& vocab);

// Ordered tree edit distance with unit insert/delete/relabel costs.
int tree_edit_distance(const ActionTree& t1, const ActionTree& t2);

// TED normalized by the two node counts (super-roots excluded); 0 for
// identical trees, 1 against an empty tree.
double nted(const ActionTree& t1, const ActionTree& t2);

}  // namespace recedit::eval
