#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qecsp/relation.hpp"

namespace qecsp {

// Variable ids index Formula::names(). Unbound entries hold kUnbound.
constexpr int kUnbound = -1;
using Assignment = std::vector<int>;

struct GuardAtom {
  int var;
  int value;
  bool operator==(const GuardAtom&) const = default;
  auto operator<=>(const GuardAtom&) const = default;
};

// (y1 = d1) & ... & (ym = dm) => R(x1, ..., xk)
struct ExtendedConstraint {
  std::vector<GuardAtom> guard;
  int relation = 0;
  std::vector<int> head;
  bool operator==(const ExtendedConstraint&) const = default;
};

enum class Quantifier { Exists, Forall };

// Prefix X1 Y1 X2 ... Xt, stored as blocks[0] = X1, blocks[1] = Y1, ...
// Only X1 may be empty and the last block is existential. Variables that are
// in the table but in no block (universals removed by instantiation) may not
// occur in constraints.
class Formula {
 public:
  Formula() = default;

  // Validates and normalizes: a trailing universal block gets a fresh dummy
  // existential appended, duplicate guard atoms are dropped and atoms are
  // sorted by variable id.
  static Formula make(std::shared_ptr<const ConstraintLanguage> language,
                      std::vector<std::string> names,
                      std::vector<std::vector<int>> blocks,
                      std::vector<ExtendedConstraint> constraints,
                      bool* appended_dummy = nullptr);

  const ConstraintLanguage& language() const { return *language_; }
  const std::shared_ptr<const ConstraintLanguage>& language_ptr() const { return language_; }
  int domain() const { return language_->domain_size(); }

  const std::vector<std::string>& names() const { return names_; }
  int num_vars() const { return static_cast<int>(names_.size()); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  const std::vector<ExtendedConstraint>& constraints() const { return constraints_; }

  int existential_blocks() const { return static_cast<int>(blocks_.size() + 1) / 2; }
  // Number of blocks that are nonempty.
  int nonempty_blocks() const;
  const std::vector<int>& first_block() const { return blocks_.front(); }
  // Y1, empty for single-block formulas.
  const std::vector<int>& first_universal_block() const;

  // -1 for variables outside the prefix.
  int block_of(int var) const { return block_of_[var]; }
  bool is_existential(int var) const { return block_of_[var] >= 0 && block_of_[var] % 2 == 0; }
  bool is_universal(int var) const { return block_of_[var] >= 0 && block_of_[var] % 2 == 1; }

  // Existential variables in the order <=^phi (block order, declaration order within).
  const std::vector<int>& existential_order() const { return existential_order_; }
  // All prefix variables, block by block.
  std::vector<int> prefix_order() const;

 private:
  std::shared_ptr<const ConstraintLanguage> language_;
  std::vector<std::string> names_;
  std::vector<std::vector<int>> blocks_;
  std::vector<ExtendedConstraint> constraints_;
  std::vector<int> block_of_;
  std::vector<int> existential_order_;

  friend Formula instantiate_universals(const Formula&, const Assignment&);
};

// Per existential variable x, a table over assignments to the universals that
// precede x. The table index is the big-endian mixed-radix encoding of those
// universals in prefix order.
struct Strategy {
  std::vector<std::vector<int>> table;  // indexed by variable id
};

bool eval_extended_constraint(const Formula& phi, const ExtendedConstraint& ec,
                              const Assignment& a);

// phi[g]: drops Y1, merges X1 and X2, deletes constraints whose Y1 guard atoms
// contradict g and strips the matched ones.
Formula instantiate_universals(const Formula& phi, const Assignment& g);

bool check_winning_strategy(const Formula& phi, const Strategy& s);

std::vector<int> prefix_vars(const Formula& phi, int k);

// Universal variables preceding x in the prefix.
std::vector<int> universals_before(const Formula& phi, int x);

// Game-tree evaluation. The serial version is the reference; brute_force_truth
// splits the top of the tree across OpenMP threads.
bool brute_force_truth_serial(const Formula& phi);
bool brute_force_truth(const Formula& phi);

// Total variables in the prefix (what the oracle enumerates).
int prefix_size(const Formula& phi);

}  // namespace qecsp
