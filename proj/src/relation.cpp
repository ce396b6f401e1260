#include "qecsp/relation.hpp"

#include <algorithm>

namespace qecsp {

namespace {
constexpr std::uint64_t kDenseLimit = 1u << 20;

std::uint64_t power(int base, int exp, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    r *= static_cast<std::uint64_t>(base);
    if (r > cap) return cap + 1;
  }
  return r;
}
}  // namespace

bool next_tuple(Tuple& t, int domain) {
  for (int i = static_cast<int>(t.size()) - 1; i >= 0; --i) {
    if (++t[i] < domain) return true;
    t[i] = 0;
  }
  return false;
}

std::uint64_t tuple_index(const int* t, int n, int domain) {
  std::uint64_t idx = 0;
  for (int i = 0; i < n; ++i) idx = idx * domain + t[i];
  return idx;
}

Relation::Relation(std::string name, int domain, int arity, std::vector<Tuple> tuples)
    : name_(std::move(name)), domain_(domain), arity_(arity), tuples_(std::move(tuples)) {
  if (domain < 1) throw Error("relation " + name_ + ": domain size must be at least 1");
  if (arity < 0) throw Error("relation " + name_ + ": negative arity");
  for (const auto& t : tuples_) {
    if (static_cast<int>(t.size()) != arity)
      throw Error("relation " + name_ + ": tuple length differs from arity");
    for (int v : t)
      if (v < 0 || v >= domain) throw Error("relation " + name_ + ": value out of range");
  }
  std::sort(tuples_.begin(), tuples_.end());
  tuples_.erase(std::unique(tuples_.begin(), tuples_.end()), tuples_.end());
  std::uint64_t space = power(domain, arity, kDenseLimit);
  if (space <= kDenseLimit) {
    dense_ = true;
    bits_.assign((space + 63) / 64, 0);
    for (const auto& t : tuples_) {
      std::uint64_t i = tuple_index(t.data(), arity_, domain_);
      bits_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
  }
}

bool Relation::contains(const int* t) const {
  if (dense_) {
    std::uint64_t i = tuple_index(t, arity_, domain_);
    return (bits_[i >> 6] >> (i & 63)) & 1;
  }
  Tuple key(t, t + arity_);
  return std::binary_search(tuples_.begin(), tuples_.end(), key);
}

Relation Relation::full(std::string name, int domain, int arity) {
  std::vector<Tuple> all;
  Tuple t(arity, 0);
  do {
    all.push_back(t);
  } while (next_tuple(t, domain));
  return Relation(std::move(name), domain, arity, std::move(all));
}

int ConstraintLanguage::add(Relation r) {
  if (r.domain() != domain_)
    throw Error("relation " + r.name() + " is over a different domain size");
  if (by_name_.count(r.name())) throw Error("duplicate relation name " + r.name());
  int idx = static_cast<int>(relations_.size());
  by_name_[r.name()] = idx;
  relations_.push_back(std::move(r));
  return idx;
}

int ConstraintLanguage::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

RelationalStructure structure_of(const ConstraintLanguage& gamma) {
  return RelationalStructure{gamma.domain_size(), gamma.relations()};
}

}  // namespace qecsp
