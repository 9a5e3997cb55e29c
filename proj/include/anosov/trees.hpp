#pragma once

#include <functional>
#include <string>
#include <vector>

namespace anosov {

// Ordered rooted tree. Depending on context a node carries a sign (alpha),
// an integer label (p), and possibly the derivative mark. Unused fields keep
// their defaults; sibling order is significant unless stated otherwise.
struct TreeNode {
  int alpha = +1;  // +1 or -1
  int p = 0;
  bool deriv = false;
  std::vector<TreeNode> children;
};

int node_count(const TreeNode& t);

long long catalan(int n);  // exact; throws TooLarge past the int64 range

// Ordered rooted tree shapes with k nodes; |result| = catalan(k - 1).
// Memoized; the returned reference stays valid.
const std::vector<TreeNode>& tree_shapes(int k);

// Every sign assignment with the root sign pinned; 2^(k-1) trees.
std::vector<TreeNode> sign_assignments(const TreeNode& shape, int root_alpha);

// All signed k-node trees with the given root sign.
std::vector<TreeNode> signed_trees(int k, int root_alpha);

// One copy of t per node, each carrying the derivative mark there.
std::vector<TreeNode> derivative_marks(const TreeNode& t);

// Signed trees with one derivative mark; catalan(k-1) * 2^(k-1) * k of them.
std::vector<TreeNode> marked_trees(int k, int root_alpha);

// Injective serialization. with_labels selects whether the integer labels
// take part (shape, signs and the mark always do).
std::string tree_key(const TreeNode& t, bool with_labels);

// Sorts siblings recursively by key: the representative of the
// "equal up to sibling order" class.
TreeNode canonical(const TreeNode& t, bool with_labels);

// prod over nodes of (child count)!: how many sibling reorderings exist.
long long sibling_orderings(const TreeNode& t);

// Nodes are addressed by the child-index path from the root.
using NodePath = std::vector<int>;

std::vector<NodePath> preorder_paths(const TreeNode& t);
const TreeNode* node_at(const TreeNode& t, const NodePath& path);
TreeNode* node_at(TreeNode& t, const NodePath& path);

// Path to the unique marked node; throws ValidationError when the mark count
// is not exactly one.
NodePath marked_path(const TreeNode& t);

// Root-to-mark path, both ends included.
std::vector<NodePath> main_stem(const TreeNode& t);

// q(v): the sum of integer labels on the root-to-v path, v included.
long long accumulated_shift(const TreeNode& t, const NodePath& v);

// All cuts of t: subsets of the minus-signed stem nodes below the root
// (the marked node is eligible too when minus), each ordered shallow to
// deep. 2^s cuts when s nodes are eligible.
std::vector<std::vector<NodePath>> cuts_of(const TreeNode& t);

// An ordered tuple of marked factors.
using ProductTree = std::vector<TreeNode>;

// Splits t along a cut. Factor 0 keeps the original root; factor i >= 1 is
// the part of t below cut node i and above cut node i+1. Each severed edge
// leaves the derivative mark on the node that lost the child; the last
// factor keeps the original mark. Throws InvalidCut unless the cut is a
// shallow-to-deep list of distinct minus-signed non-root stem nodes.
ProductTree break_at(const TreeNode& t, const std::vector<NodePath>& cut);

std::string product_key(const ProductTree& p, bool with_labels);

// Inverse of break_at up to sibling order: factor i+1 becomes the last child
// of factor i's marked node, whose mark is erased.
TreeNode reassemble(const ProductTree& p);

// Ordered compositions of n into positive parts (2^(n-1) of them), memoized.
const std::vector<std::vector<int>>& compositions(int n);

// Integer-label ranges for the enumeration helpers below. A plus node always
// ranges over [0, bound] and an unrestricted minus node over [-bound, -1];
// a *restricted* minus node v is clipped to [-q(parent(v)), -1], which keeps
// the running shift q nonnegative along the affected paths.
enum class RestrictMode {
  none,
  all_minus,        // every minus node is restricted
  stem_minus_only,  // only minus nodes on the main stem are restricted
};

// Streams every admissible labeling of the signed (optionally marked) tree,
// in lexicographic label order. The callback receives a fully labeled copy.
void for_each_labeling(const TreeNode& t, int bound, RestrictMode mode,
                       const std::function<void(const TreeNode&)>& fn);

long long count_labelings(const TreeNode& t, int bound, RestrictMode mode);

// Every labeled marked k-node tree with the given root sign, full label
// ranges truncated at the bound. Memoized; the reference stays valid.
const std::vector<TreeNode>& labeled_marked_trees(int k, int root_alpha,
                                                  int bound);

// Every factor tuple with n nodes in total: a plus-rooted labeled marked
// factor followed by zero or more minus-rooted ones (all parts >= 1 node).
std::vector<ProductTree> product_tuples(int n, int bound);
long long product_tuple_count(int n, int bound);

}  // namespace anosov
