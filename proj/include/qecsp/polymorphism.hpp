#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qecsp/relation.hpp"

namespace qecsp {

// Total operation D^arity -> D; table indexed by tuple_index of the arguments.
struct Operation {
  std::string name;
  int domain = 1;
  int arity = 1;
  std::vector<int> table;

  int operator()(const int* args) const { return table[tuple_index(args, arity, domain)]; }
  int operator()(std::initializer_list<int> args) const { return (*this)(args.begin()); }

  static Operation from(std::string name, int domain, int arity,
                        const std::function<int(const int*)>& fn);
  bool operator==(const Operation& o) const {
    return domain == o.domain && arity == o.arity && table == o.table;
  }
};

// Subsets of D are bitmasks: bit v set iff v is in the subset.
using Subset = unsigned;

inline Subset full_subset(int domain) { return (Subset{1} << domain) - 1; }

// Map from nonempty subsets of D to D; table[mask] for mask in 1..2^|D|-1.
struct SetFunction {
  std::string name;
  int domain = 1;
  std::vector<int> table;  // table[0] unused

  int operator()(Subset s) const { return table.at(s); }
  static SetFunction from(std::string name, int domain, const std::function<int(Subset)>& fn);
  bool operator==(const SetFunction& o) const { return domain == o.domain && table == o.table; }
};

struct OperationClass {
  bool idempotent = false;
  bool semilattice = false;
  bool majority = false;
  bool near_unanimity = false;
  int nu_arity = 0;
  bool maltsev = false;
};

struct CoherenceReport {
  std::vector<Subset> coherent_sets;  // ascending mask order
  bool hard = false;
  std::optional<std::pair<Subset, Subset>> witness_pair;
};

bool preserves(const Operation& op, const Relation& r);
bool is_polymorphism(const Operation& op, const ConstraintLanguage& gamma);

// Universe element i stands for the subset with mask i + 1.
RelationalStructure power_structure(const RelationalStructure& b);

// f_i(x1..xi) = f({x1..xi}).
Operation derived_operation(const SetFunction& f, int i);

bool is_set_function_polymorphism(const SetFunction& f, const ConstraintLanguage& gamma);

OperationClass recognize_operation_class(const Operation& op);

SetFunction semilattice_to_set_function(const Operation& op);

bool is_coherent(const SetFunction& f, Subset c);
CoherenceReport classify_set_function(const SetFunction& f);

// Named operations: min, max, and, or, majority, minority, xor3 (alias of
// minority), affine (x - y + z mod |D|). nullopt for unknown names or names
// that make no sense for the domain.
std::optional<Operation> builtin_operation(const std::string& name, int domain);
// Named set functions: min, max.
std::optional<SetFunction> builtin_set_function(const std::string& name, int domain);

// Searches used by automatic scheme selection. Set functions are searched
// exhaustively for |D| <= 3; the NU3 and Mal'tsev searches are complete over
// {0,1} and only try the builtin majority and affine operations beyond it.
std::optional<SetFunction> find_set_function_polymorphism(const ConstraintLanguage& gamma);
std::optional<Operation> find_nu3_polymorphism(const ConstraintLanguage& gamma);
std::optional<Operation> find_maltsev_polymorphism(const ConstraintLanguage& gamma);

}  // namespace qecsp
