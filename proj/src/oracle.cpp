#include <omp.h>

#include "qecsp/formula.hpp"

namespace qecsp {

namespace {

// Constraints are checked as soon as their last variable (in prefix order) is
// assigned, which prunes most of the tree on small instances.
class GameTree {
 public:
  explicit GameTree(const Formula& phi) : phi_(phi), order_(phi.prefix_order()) {
    std::vector<int> pos(phi.num_vars(), -1);
    for (std::size_t i = 0; i < order_.size(); ++i) pos[order_[i]] = static_cast<int>(i);
    checks_.resize(order_.size());
    const auto& cs = phi.constraints();
    for (std::size_t c = 0; c < cs.size(); ++c) {
      int last = -1;
      for (const auto& g : cs[c].guard) last = std::max(last, pos[g.var]);
      for (int v : cs[c].head) last = std::max(last, pos[v]);
      if (last < 0)
        ground_.push_back(static_cast<int>(c));
      else
        checks_[last].push_back(static_cast<int>(c));
    }
  }

  int depth() const { return static_cast<int>(order_.size()); }
  bool universal_at(int p) const { return phi_.is_universal(order_[p]); }
  int var_at(int p) const { return order_[p]; }

  bool ground_ok(Assignment& a) const {
    for (int c : ground_)
      if (!eval_extended_constraint(phi_, phi_.constraints()[c], a)) return false;
    return true;
  }

  bool checks_ok(int p, const Assignment& a) const {
    for (int c : checks_[p])
      if (!eval_extended_constraint(phi_, phi_.constraints()[c], a)) return false;
    return true;
  }

  bool eval(int p, Assignment& a) const {
    if (p == depth()) return true;
    const int v = order_[p];
    const bool forall = universal_at(p);
    for (int d = 0; d < phi_.domain(); ++d) {
      a[v] = d;
      bool child = checks_ok(p, a) && eval(p + 1, a);
      if (forall && !child) { a[v] = kUnbound; return false; }
      if (!forall && child) { a[v] = kUnbound; return true; }
    }
    a[v] = kUnbound;
    return forall;
  }

 private:
  const Formula& phi_;
  std::vector<int> order_;
  std::vector<std::vector<int>> checks_;
  std::vector<int> ground_;
};

}  // namespace

bool brute_force_truth_serial(const Formula& phi) {
  GameTree tree(phi);
  Assignment a(phi.num_vars(), kUnbound);
  if (!tree.ground_ok(a)) return false;
  return tree.eval(0, a);
}

bool brute_force_truth(const Formula& phi) {
  GameTree tree(phi);
  Assignment a0(phi.num_vars(), kUnbound);
  if (!tree.ground_ok(a0)) return false;
  const int d = phi.domain();
  const int n = tree.depth();
  // Split off enough top levels to give every thread several leaves.
  long want = 8L * omp_get_max_threads();
  int split = 0;
  long leaves = 1;
  while (split < n && leaves < want) {
    leaves *= d;
    ++split;
  }
  if (split == 0 || d == 1) return tree.eval(0, a0);

  std::vector<char> value(static_cast<std::size_t>(leaves));
#pragma omp parallel for schedule(dynamic)
  for (long leaf = 0; leaf < leaves; ++leaf) {
    Assignment a(phi.num_vars(), kUnbound);
    long rest = leaf;
    for (int p = split - 1; p >= 0; --p) {
      a[tree.var_at(p)] = static_cast<int>(rest % d);
      rest /= d;
    }
    bool ok = true;
    for (int p = 0; p < split && ok; ++p) ok = tree.checks_ok(p, a);
    value[leaf] = ok && tree.eval(split, a);
  }
  // Fold the split levels bottom-up with the quantifier of each level.
  for (int p = split - 1; p >= 0; --p) {
    const bool forall = tree.universal_at(p);
    std::vector<char> up(value.size() / d);
    for (std::size_t i = 0; i < up.size(); ++i) {
      bool acc = forall;
      for (int k = 0; k < d; ++k) {
        bool c = value[i * d + k];
        acc = forall ? (acc && c) : (acc || c);
      }
      up[i] = acc;
    }
    value.swap(up);
  }
  return value[0];
}

}  // namespace qecsp
