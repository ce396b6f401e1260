#include "qecsp/formula.hpp"

#include <algorithm>
#include <set>

namespace qecsp {

Formula Formula::make(std::shared_ptr<const ConstraintLanguage> language,
                      std::vector<std::string> names, std::vector<std::vector<int>> blocks,
                      std::vector<ExtendedConstraint> constraints, bool* appended_dummy) {
  if (!language) throw Error("formula without a language");
  Formula f;
  f.language_ = std::move(language);
  if (appended_dummy) *appended_dummy = false;
  if (blocks.empty()) blocks.emplace_back();
  if (blocks.size() % 2 == 0) {
    std::set<std::string> taken(names.begin(), names.end());
    std::string fresh = "_dummy";
    while (taken.count(fresh)) fresh += "_";
    names.push_back(fresh);
    blocks.push_back({static_cast<int>(names.size()) - 1});
    if (appended_dummy) *appended_dummy = true;
  }
  f.names_ = std::move(names);
  f.block_of_.assign(f.names_.size(), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b > 0 && blocks[b].empty()) throw Error("only the first existential block may be empty");
    for (int v : blocks[b]) {
      if (v < 0 || v >= static_cast<int>(f.names_.size())) throw Error("block lists unknown variable");
      if (f.block_of_[v] != -1) throw Error("variable " + f.names_[v] + " quantified twice");
      f.block_of_[v] = static_cast<int>(b);
      if (b % 2 == 0) f.existential_order_.push_back(v);
    }
  }
  f.blocks_ = std::move(blocks);

  const int d = f.language_->domain_size();
  const int nrel = static_cast<int>(f.language_->relations().size());
  for (auto& c : constraints) {
    if (c.relation < 0 || c.relation >= nrel) throw Error("constraint references unknown relation");
    const Relation& r = f.language_->at(c.relation);
    if (static_cast<int>(c.head.size()) != r.arity())
      throw Error("arity mismatch in head of " + r.name());
    for (int v : c.head) {
      if (v < 0 || v >= f.num_vars() || !f.is_existential(v))
        throw Error("head of " + r.name() + " uses a non-existential variable");
    }
    for (const auto& g : c.guard) {
      if (g.var < 0 || g.var >= f.num_vars() || !f.is_universal(g.var))
        throw Error("guard of " + r.name() + " uses a non-universal variable");
      if (g.value < 0 || g.value >= d) throw Error("guard value out of range");
    }
    std::sort(c.guard.begin(), c.guard.end());
    c.guard.erase(std::unique(c.guard.begin(), c.guard.end()), c.guard.end());
  }
  f.constraints_ = std::move(constraints);
  return f;
}

int Formula::nonempty_blocks() const {
  int n = 0;
  for (const auto& b : blocks_) n += b.empty() ? 0 : 1;
  return n;
}

const std::vector<int>& Formula::first_universal_block() const {
  static const std::vector<int> kNone;
  return blocks_.size() > 1 ? blocks_[1] : kNone;
}

std::vector<int> Formula::prefix_order() const {
  std::vector<int> out;
  for (const auto& b : blocks_) out.insert(out.end(), b.begin(), b.end());
  return out;
}

int prefix_size(const Formula& phi) {
  int n = 0;
  for (const auto& b : phi.blocks()) n += static_cast<int>(b.size());
  return n;
}

bool eval_extended_constraint(const Formula& phi, const ExtendedConstraint& ec,
                              const Assignment& a) {
  auto value = [&](int v) {
    if (v < 0 || v >= static_cast<int>(a.size()) || a[v] == kUnbound)
      throw Error("unbound variable " + (v >= 0 && v < phi.num_vars() ? phi.names()[v] : "?"));
    return a[v];
  };
  bool violated = false;
  for (const auto& g : ec.guard)
    if (value(g.var) != g.value) violated = true;
  Tuple t;
  t.reserve(ec.head.size());
  for (int v : ec.head) t.push_back(value(v));
  if (violated) return true;
  return phi.language().at(ec.relation).contains(t);
}

Formula instantiate_universals(const Formula& phi, const Assignment& g) {
  if (phi.existential_blocks() < 2) throw Error("cannot instantiate a single-block formula");
  const auto& y1 = phi.blocks()[1];
  for (int y : y1)
    if (y >= static_cast<int>(g.size()) || g[y] == kUnbound)
      throw Error("assignment does not bind universal " + phi.names()[y]);

  Formula out;
  out.language_ = phi.language_;
  out.names_ = phi.names_;
  std::vector<int> merged = phi.blocks()[0];
  merged.insert(merged.end(), phi.blocks()[2].begin(), phi.blocks()[2].end());
  out.blocks_.push_back(std::move(merged));
  for (std::size_t b = 3; b < phi.blocks().size(); ++b) out.blocks_.push_back(phi.blocks()[b]);
  out.block_of_.assign(out.names_.size(), -1);
  for (std::size_t b = 0; b < out.blocks_.size(); ++b)
    for (int v : out.blocks_[b]) out.block_of_[v] = static_cast<int>(b);
  out.existential_order_ = phi.existential_order_;

  for (const auto& c : phi.constraints()) {
    bool dead = false;
    ExtendedConstraint kept{{}, c.relation, c.head};
    for (const auto& atom : c.guard) {
      if (phi.block_of(atom.var) == 1) {
        if (g[atom.var] != atom.value) dead = true;
      } else {
        kept.guard.push_back(atom);
      }
    }
    if (!dead) out.constraints_.push_back(std::move(kept));
  }
  return out;
}

std::vector<int> universals_before(const Formula& phi, int x) {
  std::vector<int> out;
  int bx = phi.block_of(x);
  for (int b = 1; b < bx; b += 2)
    out.insert(out.end(), phi.blocks()[b].begin(), phi.blocks()[b].end());
  return out;
}

bool check_winning_strategy(const Formula& phi, const Strategy& s) {
  const int d = phi.domain();
  std::vector<int> univ;
  for (std::size_t b = 1; b < phi.blocks().size(); b += 2)
    univ.insert(univ.end(), phi.blocks()[b].begin(), phi.blocks()[b].end());

  std::vector<std::vector<int>> deps(phi.num_vars());
  for (int x : phi.existential_order()) {
    deps[x] = universals_before(phi, x);
    std::size_t want = 1;
    for (std::size_t i = 0; i < deps[x].size(); ++i) want *= d;
    if (x >= static_cast<int>(s.table.size()) || s.table[x].size() != want)
      throw Error("strategy has no complete table for " + phi.names()[x]);
  }

  Assignment a(phi.num_vars(), kUnbound);
  Tuple tau(univ.size(), 0);
  do {
    for (std::size_t i = 0; i < univ.size(); ++i) a[univ[i]] = tau[i];
    for (int x : phi.existential_order()) {
      std::size_t idx = 0;
      for (int y : deps[x]) idx = idx * d + a[y];
      a[x] = s.table[x][idx];
    }
    for (const auto& c : phi.constraints())
      if (!eval_extended_constraint(phi, c, a)) return false;
  } while (next_tuple(tau, d));
  return true;
}

std::vector<int> prefix_vars(const Formula& phi, int k) {
  const auto& order = phi.existential_order();
  if (k < 0 || k > static_cast<int>(order.size())) throw Error("prefix length out of range");
  return {order.begin(), order.begin() + k};
}

}  // namespace qecsp
