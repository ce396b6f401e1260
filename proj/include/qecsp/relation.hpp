#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qecsp {

using Tuple = std::vector<int>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Finite relation over {0..domain-1}. Tuples are kept sorted and unique; a
// dense bit table backs membership when domain^arity is small enough.
class Relation {
 public:
  Relation() = default;
  Relation(std::string name, int domain, int arity, std::vector<Tuple> tuples);

  const std::string& name() const { return name_; }
  int domain() const { return domain_; }
  int arity() const { return arity_; }
  const std::vector<Tuple>& tuples() const { return tuples_; }
  std::size_t size() const { return tuples_.size(); }
  bool empty() const { return tuples_.empty(); }

  bool contains(const Tuple& t) const { return contains(t.data()); }
  bool contains(const int* t) const;

  // Every tuple of D^arity, in lexicographic order.
  static Relation full(std::string name, int domain, int arity);

  bool operator==(const Relation& o) const {
    return domain_ == o.domain_ && arity_ == o.arity_ && tuples_ == o.tuples_;
  }

 private:
  std::string name_;
  int domain_ = 1;
  int arity_ = 0;
  std::vector<Tuple> tuples_;
  bool dense_ = false;
  std::vector<std::uint64_t> bits_;
};

// Lexicographic enumeration of D^n: advances t in place, false after the last.
bool next_tuple(Tuple& t, int domain);

// Index of t in the lexicographic order of D^n.
std::uint64_t tuple_index(const int* t, int n, int domain);

class ConstraintLanguage {
 public:
  ConstraintLanguage() = default;
  explicit ConstraintLanguage(int domain_size) : domain_(domain_size) {
    if (domain_size < 1) throw Error("domain size must be at least 1");
  }

  int domain_size() const { return domain_; }
  const std::vector<Relation>& relations() const { return relations_; }
  const Relation& at(int idx) const { return relations_.at(idx); }

  // Returns the index of the added relation. Names must be unique.
  int add(Relation r);
  // -1 when absent.
  int find(const std::string& name) const;

 private:
  int domain_ = 1;
  std::vector<Relation> relations_;
  std::map<std::string, int> by_name_;
};

// A relational structure; a constraint language read as B^Gamma.
struct RelationalStructure {
  int universe_size = 1;
  std::vector<Relation> relations;
};

RelationalStructure structure_of(const ConstraintLanguage& gamma);

}  // namespace qecsp
