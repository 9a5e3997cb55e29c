#include "anosov/trees.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "anosov/errors.hpp"

namespace anosov {
namespace {

constexpr int kMaxNodes = 16;  // enumeration guard; counts explode beyond this

void check_size(int k) {
  if (k < 1) throw ValidationError("tree size must be >= 1");
  if (k > kMaxNodes) {
    std::ostringstream msg;
    msg << "tree enumeration for k = " << k << " exceeds the supported size "
        << kMaxNodes;
    throw TooLarge(msg.str());
  }
}

void check_alpha(int alpha) {
  if (alpha != 1 && alpha != -1) {
    throw ValidationError("sign must be +1 or -1");
  }
}

// Ordered forests with a given total node count.
const std::vector<std::vector<TreeNode>>& forests(int total);

std::vector<TreeNode> build_shapes(int k) {
  std::vector<TreeNode> out;
  for (const auto& f : forests(k - 1)) {
    TreeNode root;
    root.children = f;
    out.push_back(std::move(root));
  }
  return out;
}

const std::vector<std::vector<TreeNode>>& forests(int total) {
  static std::map<int, std::vector<std::vector<TreeNode>>> memo;
  auto it = memo.find(total);
  if (it != memo.end()) return it->second;

  std::vector<std::vector<TreeNode>> out;
  if (total == 0) {
    out.push_back({});
  } else {
    for (int first = 1; first <= total; ++first) {
      const auto& heads = tree_shapes(first);
      const auto& tails = forests(total - first);
      for (const auto& h : heads) {
        for (const auto& t : tails) {
          std::vector<TreeNode> f;
          f.reserve(1 + t.size());
          f.push_back(h);
          f.insert(f.end(), t.begin(), t.end());
          out.push_back(std::move(f));
        }
      }
    }
  }
  return memo.emplace(total, std::move(out)).first->second;
}

long long factorial(int n) {
  long long r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

void collect_paths(const TreeNode& t, NodePath& cur,
                   std::vector<NodePath>& out) {
  out.push_back(cur);
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    cur.push_back(static_cast<int>(i));
    collect_paths(t.children[i], cur, out);
    cur.pop_back();
  }
}

int count_marks(const TreeNode& t) {
  int n = t.deriv ? 1 : 0;
  for (const auto& c : t.children) n += count_marks(c);
  return n;
}

bool is_prefix(const NodePath& prefix, const NodePath& path) {
  if (prefix.size() > path.size()) return false;
  return std::equal(prefix.begin(), prefix.end(), path.begin());
}

}  // namespace

int node_count(const TreeNode& t) {
  int n = 1;
  for (const auto& c : t.children) n += node_count(c);
  return n;
}

long long catalan(int n) {
  if (n < 0) throw ValidationError("catalan index must be >= 0");
  if (n > 33) throw TooLarge("catalan number exceeds the exact int64 range");
  std::vector<long long> c(n + 1, 0);
  c[0] = 1;
  for (int i = 1; i <= n; ++i) {
    long long s = 0;
    for (int j = 0; j < i; ++j) s += c[j] * c[i - 1 - j];
    c[i] = s;
  }
  return c[n];
}

const std::vector<TreeNode>& tree_shapes(int k) {
  check_size(k);
  static std::map<int, std::vector<TreeNode>> memo;
  auto it = memo.find(k);
  if (it != memo.end()) return it->second;
  return memo.emplace(k, build_shapes(k)).first->second;
}

std::vector<TreeNode> sign_assignments(const TreeNode& shape, int root_alpha) {
  check_alpha(root_alpha);
  std::vector<TreeNode> out;
  TreeNode work = shape;
  work.alpha = root_alpha;

  // Free nodes are all but the root, in preorder.
  std::vector<NodePath> paths = preorder_paths(work);
  std::vector<TreeNode*> free_nodes;
  for (std::size_t i = 1; i < paths.size(); ++i) {
    free_nodes.push_back(node_at(work, paths[i]));
  }

  std::size_t variants = std::size_t{1} << free_nodes.size();
  out.reserve(variants);
  for (std::size_t mask = 0; mask < variants; ++mask) {
    for (std::size_t b = 0; b < free_nodes.size(); ++b) {
      free_nodes[b]->alpha = (mask >> b) & 1 ? -1 : +1;
    }
    out.push_back(work);
  }
  return out;
}

std::vector<TreeNode> signed_trees(int k, int root_alpha) {
  std::vector<TreeNode> out;
  for (const auto& s : tree_shapes(k)) {
    auto signs = sign_assignments(s, root_alpha);
    out.insert(out.end(), signs.begin(), signs.end());
  }
  return out;
}

std::vector<TreeNode> derivative_marks(const TreeNode& t) {
  std::vector<NodePath> paths = preorder_paths(t);
  std::vector<TreeNode> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    TreeNode copy = t;
    node_at(copy, p)->deriv = true;
    out.push_back(std::move(copy));
  }
  return out;
}

std::vector<TreeNode> marked_trees(int k, int root_alpha) {
  std::vector<TreeNode> out;
  for (const auto& s : signed_trees(k, root_alpha)) {
    auto marks = derivative_marks(s);
    out.insert(out.end(), marks.begin(), marks.end());
  }
  return out;
}

std::string tree_key(const TreeNode& t, bool with_labels) {
  std::ostringstream os;
  os << (t.alpha > 0 ? '+' : '-');
  if (t.deriv) os << 'D';
  if (with_labels) os << ':' << t.p;
  os << '(';
  for (const auto& c : t.children) os << tree_key(c, with_labels);
  os << ')';
  return os.str();
}

TreeNode canonical(const TreeNode& t, bool with_labels) {
  TreeNode out = t;
  for (auto& c : out.children) c = canonical(c, with_labels);
  std::sort(out.children.begin(), out.children.end(),
            [&](const TreeNode& a, const TreeNode& b) {
              return tree_key(a, with_labels) < tree_key(b, with_labels);
            });
  return out;
}

long long sibling_orderings(const TreeNode& t) {
  long long r = factorial(static_cast<int>(t.children.size()));
  for (const auto& c : t.children) r *= sibling_orderings(c);
  return r;
}

std::vector<NodePath> preorder_paths(const TreeNode& t) {
  std::vector<NodePath> out;
  NodePath cur;
  collect_paths(t, cur, out);
  return out;
}

const TreeNode* node_at(const TreeNode& t, const NodePath& path) {
  const TreeNode* n = &t;
  for (int i : path) {
    if (i < 0 || static_cast<std::size_t>(i) >= n->children.size()) {
      throw ValidationError("node path leaves the tree");
    }
    n = &n->children[i];
  }
  return n;
}

TreeNode* node_at(TreeNode& t, const NodePath& path) {
  return const_cast<TreeNode*>(node_at(static_cast<const TreeNode&>(t), path));
}

NodePath marked_path(const TreeNode& t) {
  if (count_marks(t) != 1) {
    throw ValidationError("tree must carry exactly one derivative mark");
  }
  for (const auto& p : preorder_paths(t)) {
    if (node_at(t, p)->deriv) return p;
  }
  throw ValidationError("unreachable: mark not found");
}

std::vector<NodePath> main_stem(const TreeNode& t) {
  NodePath end = marked_path(t);
  std::vector<NodePath> stem;
  for (std::size_t len = 0; len <= end.size(); ++len) {
    stem.emplace_back(end.begin(), end.begin() + len);
  }
  return stem;
}

long long accumulated_shift(const TreeNode& t, const NodePath& v) {
  long long q = t.p;
  const TreeNode* n = &t;
  for (int i : v) {
    if (i < 0 || static_cast<std::size_t>(i) >= n->children.size()) {
      throw ValidationError("node path leaves the tree");
    }
    n = &n->children[i];
    q += n->p;
  }
  return q;
}

std::vector<std::vector<NodePath>> cuts_of(const TreeNode& t) {
  std::vector<NodePath> stem = main_stem(t);
  std::vector<NodePath> eligible;
  for (std::size_t i = 1; i < stem.size(); ++i) {  // skip the root
    if (node_at(t, stem[i])->alpha < 0) eligible.push_back(stem[i]);
  }
  if (eligible.size() > 20) throw TooLarge("too many eligible cut nodes");

  std::vector<std::vector<NodePath>> cuts;
  std::size_t total = std::size_t{1} << eligible.size();
  cuts.reserve(total);
  for (std::size_t mask = 0; mask < total; ++mask) {
    std::vector<NodePath> cut;
    for (std::size_t b = 0; b < eligible.size(); ++b) {
      if ((mask >> b) & 1) cut.push_back(eligible[b]);
    }
    cuts.push_back(std::move(cut));  // eligible is shallow-to-deep already
  }
  return cuts;
}

ProductTree break_at(const TreeNode& t, const std::vector<NodePath>& cut) {
  NodePath mark = marked_path(t);

  for (std::size_t i = 0; i < cut.size(); ++i) {
    const NodePath& w = cut[i];
    if (w.empty()) throw InvalidCut("the root cannot be a cut node");
    if (!is_prefix(w, mark)) {
      throw InvalidCut("cut node is not on the main stem");
    }
    if (node_at(t, w)->alpha >= 0) {
      throw InvalidCut("cut node must be minus-signed");
    }
    if (i > 0 && cut[i - 1].size() >= w.size()) {
      throw InvalidCut("cut nodes must be ordered shallow to deep");
    }
  }

  ProductTree out;
  for (std::size_t i = 0; i <= cut.size(); ++i) {
    NodePath start = (i == 0) ? NodePath{} : cut[i - 1];
    TreeNode factor = *node_at(t, start);
    if (i < cut.size()) {
      // Sever the subtree that becomes the next factor; its parent keeps a
      // derivative mark as the scar.
      NodePath rel(cut[i].begin() + start.size(), cut[i].end());
      NodePath parent_rel(rel.begin(), rel.end() - 1);
      TreeNode* parent = node_at(factor, parent_rel);
      parent->children.erase(parent->children.begin() + rel.back());
      parent->deriv = true;
    }
    out.push_back(std::move(factor));
  }
  return out;
}

std::string product_key(const ProductTree& p, bool with_labels) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i > 0) os << '|';
    os << tree_key(p[i], with_labels);
  }
  os << ']';
  return os.str();
}

TreeNode reassemble(const ProductTree& p) {
  if (p.empty()) throw ValidationError("cannot reassemble an empty product");
  TreeNode acc = p.back();
  marked_path(acc);  // validates the mark count
  for (std::size_t i = p.size() - 1; i-- > 0;) {
    TreeNode f = p[i];
    TreeNode* scar = node_at(f, marked_path(f));
    scar->deriv = false;
    scar->children.push_back(std::move(acc));
    acc = std::move(f);
  }
  return acc;
}

const std::vector<std::vector<int>>& compositions(int n) {
  if (n < 0) throw ValidationError("compositions need n >= 0");
  if (n > 24) throw TooLarge("composition list too large to materialize");
  static std::map<int, std::vector<std::vector<int>>> memo;
  auto it = memo.find(n);
  if (it != memo.end()) return it->second;

  std::vector<std::vector<int>> out;
  if (n == 0) {
    out.push_back({});
  } else {
    for (int first = 1; first <= n; ++first) {
      for (const auto& rest : compositions(n - first)) {
        std::vector<int> c;
        c.reserve(1 + rest.size());
        c.push_back(first);
        c.insert(c.end(), rest.begin(), rest.end());
        out.push_back(std::move(c));
      }
    }
  }
  return memo.emplace(n, std::move(out)).first->second;
}

namespace {

// Collects the restricted nodes of `work` for the given mode. Pointers stay
// valid while the labeling recursion runs because only labels mutate.
std::set<const TreeNode*> restricted_nodes(const TreeNode& work,
                                           RestrictMode mode) {
  std::set<const TreeNode*> out;
  if (mode == RestrictMode::none) return out;

  std::vector<NodePath> candidates;
  if (mode == RestrictMode::all_minus) {
    candidates = preorder_paths(work);
  } else {
    candidates = main_stem(work);  // requires the mark; throws without one
  }
  for (const auto& p : candidates) {
    const TreeNode* n = node_at(work, p);
    if (n->alpha < 0) out.insert(n);
  }
  return out;
}

void label_range(const TreeNode* n, bool restricted, int bound,
                 long long q_parent, long long& lo, long long& hi) {
  if (n->alpha > 0) {
    lo = 0;
    hi = bound;
    return;
  }
  lo = -bound;
  hi = -1;
  if (restricted && -q_parent > lo) lo = -q_parent;
}

void walk_labels(TreeNode* n, long long q_parent, int bound,
                 const std::set<const TreeNode*>& restricted,
                 const std::function<void()>& done) {
  long long lo, hi;
  label_range(n, restricted.count(n) > 0, bound, q_parent, lo, hi);
  for (long long p = lo; p <= hi; ++p) {
    n->p = static_cast<int>(p);
    long long q = q_parent + p;
    // Recurse over the ordered children list, continuation style.
    std::function<void(std::size_t)> next = [&](std::size_t idx) {
      if (idx == n->children.size()) {
        done();
        return;
      }
      walk_labels(&n->children[idx], q, bound, restricted,
                  [&next, idx] { next(idx + 1); });
    };
    next(0);
  }
}

// Marks every node whose subtree contains a restricted node: only those
// counts depend on the accumulated shift, so everything else is memoizable
// under a single key.
bool collect_shift_dependent(const TreeNode* n,
                             const std::set<const TreeNode*>& restricted,
                             std::set<const TreeNode*>& out) {
  bool dependent = restricted.count(n) > 0;
  for (const auto& c : n->children) {
    if (collect_shift_dependent(&c, restricted, out)) dependent = true;
  }
  if (dependent) out.insert(n);
  return dependent;
}

long long count_walk(const TreeNode* n, long long q_parent, int bound,
                     const std::set<const TreeNode*>& restricted,
                     const std::set<const TreeNode*>& shift_dependent,
                     std::map<std::pair<const TreeNode*, long long>,
                              long long>& memo) {
  const long long memo_shift = shift_dependent.count(n) ? q_parent : 0;
  const auto key = std::make_pair(n, memo_shift);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;

  long long lo, hi;
  label_range(n, restricted.count(n) > 0, bound, q_parent, lo, hi);
  long long total = 0;
  for (long long p = lo; p <= hi; ++p) {
    long long prod = 1;
    for (const auto& c : n->children) {
      prod *= count_walk(&c, q_parent + p, bound, restricted, shift_dependent,
                         memo);
      if (prod == 0) break;
    }
    total += prod;
  }
  memo.emplace(key, total);
  return total;
}

}  // namespace

void for_each_labeling(const TreeNode& t, int bound, RestrictMode mode,
                       const std::function<void(const TreeNode&)>& fn) {
  if (bound < 0) throw ValidationError("label bound must be >= 0");
  TreeNode work = t;
  std::set<const TreeNode*> restricted = restricted_nodes(work, mode);
  walk_labels(&work, 0, bound, restricted, [&] { fn(work); });
}

long long count_labelings(const TreeNode& t, int bound, RestrictMode mode) {
  if (bound < 0) throw ValidationError("label bound must be >= 0");
  TreeNode work = t;
  std::set<const TreeNode*> restricted = restricted_nodes(work, mode);
  std::set<const TreeNode*> shift_dependent;
  collect_shift_dependent(&work, restricted, shift_dependent);
  std::map<std::pair<const TreeNode*, long long>, long long> memo;
  return count_walk(&work, 0, bound, restricted, shift_dependent, memo);
}

const std::vector<TreeNode>& labeled_marked_trees(int k, int root_alpha,
                                                  int bound) {
  check_size(k);
  check_alpha(root_alpha);
  static std::map<std::tuple<int, int, int>, std::vector<TreeNode>> memo;
  auto key = std::make_tuple(k, root_alpha, bound);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;

  std::vector<TreeNode> out;
  for (const auto& m : marked_trees(k, root_alpha)) {
    for_each_labeling(m, bound, RestrictMode::none,
                      [&](const TreeNode& lt) { out.push_back(lt); });
  }
  return memo.emplace(key, std::move(out)).first->second;
}

std::vector<ProductTree> product_tuples(int n, int bound) {
  check_size(n);
  std::vector<ProductTree> out;
  for (const auto& comp : compositions(n)) {
    // Build the cartesian product over factor pools, first factor plus-rooted.
    std::vector<const std::vector<TreeNode>*> pools;
    pools.reserve(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) {
      pools.push_back(&labeled_marked_trees(comp[i], i == 0 ? +1 : -1, bound));
    }
    ProductTree cur(comp.size());
    std::function<void(std::size_t)> rec = [&](std::size_t idx) {
      if (idx == pools.size()) {
        out.push_back(cur);
        return;
      }
      for (const auto& f : *pools[idx]) {
        cur[idx] = f;
        rec(idx + 1);
      }
    };
    rec(0);
  }
  return out;
}

long long product_tuple_count(int n, int bound) {
  check_size(n);
  long long total = 0;
  for (const auto& comp : compositions(n)) {
    long long prod = 1;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      long long pool = 0;
      for (const auto& m : marked_trees(comp[i], i == 0 ? +1 : -1)) {
        pool += count_labelings(m, bound, RestrictMode::none);
      }
      prod *= pool;
    }
    total += prod;
  }
  return total;
}

}  // namespace anosov
