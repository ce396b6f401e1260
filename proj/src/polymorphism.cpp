#include "qecsp/polymorphism.hpp"

#include <algorithm>
#include <bit>
#include <set>

namespace qecsp {

Operation Operation::from(std::string name, int domain, int arity,
                          const std::function<int(const int*)>& fn) {
  Operation op{std::move(name), domain, arity, {}};
  Tuple t(arity, 0);
  do {
    int v = fn(t.data());
    if (v < 0 || v >= domain) throw Error("operation " + op.name + " leaves the domain");
    op.table.push_back(v);
  } while (next_tuple(t, domain));
  return op;
}

SetFunction SetFunction::from(std::string name, int domain, const std::function<int(Subset)>& fn) {
  SetFunction f{std::move(name), domain, std::vector<int>(full_subset(domain) + 1, 0)};
  for (Subset s = 1; s <= full_subset(domain); ++s) {
    int v = fn(s);
    if (v < 0 || v >= domain) throw Error("set function " + f.name + " leaves the domain");
    f.table[s] = v;
  }
  return f;
}

bool preserves(const Operation& op, const Relation& r) {
  if (op.domain != r.domain()) throw Error("operation and relation domains differ");
  const auto& ts = r.tuples();
  if (ts.empty() || r.arity() == 0) return true;
  const int m = op.arity;
  const int k = r.arity();
  std::vector<std::size_t> pick(m, 0);
  std::vector<int> args(m), image(k);
  while (true) {
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < m; ++i) args[i] = ts[pick[i]][j];
      image[j] = op(args.data());
    }
    if (!r.contains(image.data())) return false;
    int i = m - 1;
    while (i >= 0 && ++pick[i] == ts.size()) pick[i--] = 0;
    if (i < 0) return true;
  }
}

bool is_polymorphism(const Operation& op, const ConstraintLanguage& gamma) {
  if (op.domain != gamma.domain_size()) throw Error("operation and language domains differ");
  for (const auto& r : gamma.relations())
    if (!preserves(op, r)) return false;
  return true;
}

namespace {

// All coordinatewise-union tuples (S_1..S_k) over nonempty S of R, as masks.
std::set<std::vector<Subset>> projection_tuples(const Relation& r) {
  std::set<std::vector<Subset>> out;
  std::vector<std::vector<Subset>> frontier;
  for (const auto& t : r.tuples()) {
    std::vector<Subset> s(r.arity());
    for (int j = 0; j < r.arity(); ++j) s[j] = Subset{1} << t[j];
    if (out.insert(s).second) frontier.push_back(s);
  }
  std::vector<std::vector<Subset>> singles(frontier);
  // Unions of singletons generate every S; grow by one tuple at a time.
  while (!frontier.empty()) {
    std::vector<std::vector<Subset>> next;
    for (const auto& s : frontier) {
      for (const auto& one : singles) {
        std::vector<Subset> u(s.size());
        for (std::size_t j = 0; j < s.size(); ++j) u[j] = s[j] | one[j];
        if (out.insert(u).second) next.push_back(std::move(u));
      }
    }
    frontier.swap(next);
  }
  return out;
}

}  // namespace

RelationalStructure power_structure(const RelationalStructure& b) {
  RelationalStructure out;
  out.universe_size = static_cast<int>(full_subset(b.universe_size));
  for (const auto& r : b.relations) {
    std::vector<Tuple> tuples;
    for (const auto& s : projection_tuples(r)) {
      Tuple t(s.size());
      for (std::size_t j = 0; j < s.size(); ++j) t[j] = static_cast<int>(s[j]) - 1;
      tuples.push_back(std::move(t));
    }
    out.relations.emplace_back(r.name(), out.universe_size, r.arity(), std::move(tuples));
  }
  return out;
}

Operation derived_operation(const SetFunction& f, int i) {
  return Operation::from(f.name + "_" + std::to_string(i), f.domain, i, [&](const int* a) {
    Subset s = 0;
    for (int j = 0; j < i; ++j) s |= Subset{1} << a[j];
    return f(s);
  });
}

bool is_set_function_polymorphism(const SetFunction& f, const ConstraintLanguage& gamma) {
  if (f.domain != gamma.domain_size()) throw Error("set function and language domains differ");
  for (const auto& r : gamma.relations()) {
    if (r.empty()) continue;
    Tuple image(r.arity());
    for (const auto& s : projection_tuples(r)) {
      for (int j = 0; j < r.arity(); ++j) image[j] = f(s[j]);
      if (!r.contains(image)) return false;
    }
  }
  return true;
}

OperationClass recognize_operation_class(const Operation& op) {
  OperationClass c;
  const int d = op.domain;
  const int m = op.arity;
  std::vector<int> args(m);

  c.idempotent = true;
  for (int a = 0; a < d; ++a) {
    std::fill(args.begin(), args.end(), a);
    if (op(args.data()) != a) c.idempotent = false;
  }

  if (m == 2 && c.idempotent) {
    bool ok = true;
    for (int a = 0; a < d && ok; ++a)
      for (int b = 0; b < d && ok; ++b) {
        if (op({a, b}) != op({b, a})) ok = false;
        for (int e = 0; e < d && ok; ++e)
          if (op({op({a, b}), e}) != op({a, op({b, e})})) ok = false;
      }
    c.semilattice = ok;
  }

  if (m >= 3) {
    bool ok = true;
    for (int a = 0; a < d && ok; ++a)
      for (int b = 0; b < d && ok; ++b)
        for (int pos = 0; pos < m && ok; ++pos) {
          std::fill(args.begin(), args.end(), b);
          args[pos] = a;
          if (op(args.data()) != b) ok = false;
        }
    c.near_unanimity = ok;
    c.nu_arity = ok ? m : 0;
    c.majority = ok && m == 3;
  }

  if (m == 3) {
    bool ok = true;
    for (int a = 0; a < d && ok; ++a)
      for (int b = 0; b < d && ok; ++b)
        if (op({a, b, b}) != a || op({b, b, a}) != a) ok = false;
    c.maltsev = ok;
  }
  return c;
}

SetFunction semilattice_to_set_function(const Operation& op) {
  if (!recognize_operation_class(op).semilattice)
    throw Error("operation " + op.name + " is not a semilattice operation");
  return SetFunction::from(op.name, op.domain, [&](Subset s) {
    int acc = std::countr_zero(s);
    for (int v = acc + 1; v < op.domain; ++v)
      if (s >> v & 1) acc = op({acc, v});
    return acc;
  });
}

bool is_coherent(const SetFunction& f, Subset c) {
  if (c == 0) return false;
  for (Subset a = 1; a <= full_subset(f.domain); ++a)
    if ((c >> f(a) & 1) && (a & ~c) != 0) return false;
  return true;
}

CoherenceReport classify_set_function(const SetFunction& f) {
  for (int v = 0; v < f.domain; ++v)
    if (f(Subset{1} << v) != v) throw Error("set function " + f.name + " is not idempotent");
  CoherenceReport rep;
  for (Subset c = 1; c <= full_subset(f.domain); ++c)
    if (is_coherent(f, c)) rep.coherent_sets.push_back(c);
  for (std::size_t i = 0; i < rep.coherent_sets.size() && !rep.hard; ++i)
    for (std::size_t j = i + 1; j < rep.coherent_sets.size(); ++j)
      if ((rep.coherent_sets[i] & rep.coherent_sets[j]) == 0) {
        rep.hard = true;
        rep.witness_pair = {rep.coherent_sets[i], rep.coherent_sets[j]};
        break;
      }
  return rep;
}

std::optional<Operation> builtin_operation(const std::string& name, int d) {
  auto bin = [&](auto fn) {
    return Operation::from(name, d, 2, [fn](const int* a) { return fn(a[0], a[1]); });
  };
  if (name == "min") return bin([](int a, int b) { return std::min(a, b); });
  if (name == "max") return bin([](int a, int b) { return std::max(a, b); });
  if (d == 2 && name == "and") return bin([](int a, int b) { return a & b; });
  if (d == 2 && name == "or") return bin([](int a, int b) { return a | b; });
  if (name == "majority") {
    // Returns the repeated value when there is one, else the first argument.
    return Operation::from(name, d, 3, [](const int* a) {
      if (a[1] == a[2]) return a[1];
      return a[0];
    });
  }
  if (d == 2 && (name == "minority" || name == "xor3"))
    return Operation::from(name, d, 3, [](const int* a) { return a[0] ^ a[1] ^ a[2]; });
  if (name == "affine")
    return Operation::from(name, d, 3, [d](const int* a) { return ((a[0] - a[1] + a[2]) % d + d) % d; });
  return std::nullopt;
}

std::optional<SetFunction> builtin_set_function(const std::string& name, int d) {
  if (name == "min") return SetFunction::from(name, d, [](Subset s) { return std::countr_zero(s); });
  if (name == "max")
    return SetFunction::from(name, d, [](Subset s) { return 31 - std::countl_zero(s); });
  return std::nullopt;
}

namespace {

bool preserves_all(const Operation& op, const ConstraintLanguage& gamma) {
  for (const auto& r : gamma.relations())
    if (!preserves(op, r)) return false;
  return true;
}

// Staged search: the singleton values first (checked as a unary operation),
// then the values on each larger subset size, checking f_i as soon as every
// subset of size <= i is fixed.
bool extend_set_function(SetFunction& f, const std::vector<std::vector<Subset>>& by_size,
                         std::size_t level, std::size_t idx, const ConstraintLanguage& gamma) {
  if (level == by_size.size()) return true;
  const auto& layer = by_size[level];
  if (idx == layer.size()) {
    int i = static_cast<int>(level) + 1;
    if (!preserves_all(derived_operation(f, i), gamma)) return false;
    return extend_set_function(f, by_size, level + 1, 0, gamma);
  }
  for (int v = 0; v < f.domain; ++v) {
    f.table[layer[idx]] = v;
    if (extend_set_function(f, by_size, level, idx + 1, gamma)) return true;
  }
  return false;
}

}  // namespace

std::optional<SetFunction> find_set_function_polymorphism(const ConstraintLanguage& gamma) {
  const int d = gamma.domain_size();
  if (d > 3) return std::nullopt;
  std::vector<std::vector<Subset>> by_size(d);
  for (Subset s = 1; s <= full_subset(d); ++s) by_size[std::popcount(s) - 1].push_back(s);
  SetFunction f{"found", d, std::vector<int>(full_subset(d) + 1, 0)};
  if (!extend_set_function(f, by_size, 0, 0, gamma)) return std::nullopt;
  return f;
}

std::optional<Operation> find_nu3_polymorphism(const ConstraintLanguage& gamma) {
  if (gamma.domain_size() != 2) {
    // Larger domains: only the builtin dual discriminator is tried.
    auto m = builtin_operation("majority", gamma.domain_size());
    if (m && preserves_all(*m, gamma)) return m;
    return std::nullopt;
  }
  // Over {0,1} every ternary tuple has a repeated value, so majority is the
  // only ternary near-unanimity operation.
  auto m = builtin_operation("majority", 2);
  if (preserves_all(*m, gamma)) return m;
  return std::nullopt;
}

std::optional<Operation> find_maltsev_polymorphism(const ConstraintLanguage& gamma) {
  if (gamma.domain_size() != 2) {
    // Larger domains: only x - y + z over Z_d is tried.
    auto m = builtin_operation("affine", gamma.domain_size());
    if (m && preserves_all(*m, gamma)) return m;
    return std::nullopt;
  }
  // The identities fix every entry except f(0,1,0) and f(1,0,1). The affine
  // choice goes first; the other three follow in lexicographic order.
  const int choices[4][2] = {{1, 0}, {0, 0}, {0, 1}, {1, 1}};
  for (const auto& ch : choices) {
    Operation op = Operation::from("maltsev", 2, 3, [&](const int* a) {
      if (a[1] == a[2]) return a[0];
      if (a[0] == a[1]) return a[2];
      return a[0] == 0 ? ch[0] : ch[1];
    });
    if (preserves_all(op, gamma)) {
      if (ch[0] == 1 && ch[1] == 0) op.name = "xor3";
      return op;
    }
  }
  return std::nullopt;
}

}  // namespace qecsp
