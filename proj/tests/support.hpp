// Shared helpers for the unit tests and the acceptance runner.
#pragma once

#include <algorithm>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "qecsp/formula.hpp"
#include "qecsp/io.hpp"
#include "qecsp/polymorphism.hpp"
#include "qecsp/proof.hpp"
#include "qecsp/reductions.hpp"
#include "qecsp/scheme.hpp"

namespace qtest {

using namespace qecsp;

inline Formula parse(const std::string& text) { return parse_instance(text).formula; }

// Closure of a tuple set under an operation of any arity, by fixpoint.
inline std::vector<Tuple> close_under(const Operation& op, std::vector<Tuple> ts) {
  std::set<Tuple> all(ts.begin(), ts.end());
  if (all.empty()) return {};
  const int n = static_cast<int>(ts.front().size());
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<Tuple> cur(all.begin(), all.end());
    std::vector<int> pick(op.arity, 0);
    const int m = static_cast<int>(cur.size());
    std::vector<int> args(op.arity);
    while (true) {
      Tuple img(n);
      for (int j = 0; j < n; ++j) {
        for (int a = 0; a < op.arity; ++a) args[a] = cur[pick[a]][j];
        img[j] = op(args.data());
      }
      if (all.insert(img).second) grew = true;
      int p = op.arity - 1;
      while (p >= 0 && ++pick[p] == m) pick[p--] = 0;
      if (p < 0) break;
    }
  }
  return {all.begin(), all.end()};
}

// Random relation of the given arity closed under op (when op is given) and
// optionally containing the constant tuple (c,...,c).
inline Relation random_relation(std::mt19937& rng, const std::string& name, int domain, int arity,
                                const Operation* op, int constant = -1) {
  std::vector<Tuple> ts;
  Tuple t(arity, 0);
  std::bernoulli_distribution keep(arity <= 1 ? 0.5 : 0.3);
  do {
    if (keep(rng)) ts.push_back(t);
  } while (next_tuple(t, domain));
  if (constant >= 0) ts.push_back(Tuple(arity, constant));
  if (ts.empty() && arity > 0) {
    Tuple u(arity);
    for (auto& x : u) x = static_cast<int>(rng() % domain);
    ts.push_back(u);
  }
  if (op && !ts.empty()) ts = close_under(*op, ts);
  return Relation(name, domain, arity, ts);
}

inline std::shared_ptr<ConstraintLanguage> random_language(std::mt19937& rng, int domain, const Operation* op,
                                                           int constant = -1, int relations = 3) {
  auto lang = std::make_shared<ConstraintLanguage>(domain);
  for (int i = 0; i < relations; ++i) {
    int arity = 1 + static_cast<int>(rng() % 3);
    lang->add(random_relation(rng, "R" + std::to_string(i), domain, arity, op, constant));
  }
  return lang;
}

// Random formula with at most max_vars prefix variables and either one or two
// existential blocks (so at most three quantifier blocks).
inline Formula random_formula(std::mt19937& rng, std::shared_ptr<const ConstraintLanguage> lang,
                              int max_vars = 6, int max_constraints = 6) {
  const int n = 2 + static_cast<int>(rng() % (max_vars - 1));
  const bool two_blocks = n >= 3 && rng() % 4 != 0;
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
  std::vector<std::vector<int>> blocks;
  if (!two_blocks) {
    blocks.push_back({});
    for (int i = 0; i < n; ++i) blocks[0].push_back(i);
  } else {
    // |X1| in [0, n-2], |Y1| >= 1, |X2| >= 1
    int x1 = static_cast<int>(rng() % (n - 1));
    int y1 = 1 + static_cast<int>(rng() % (n - x1 - 1));
    blocks.assign(3, {});
    for (int i = 0; i < n; ++i) blocks[i < x1 ? 0 : i < x1 + y1 ? 1 : 2].push_back(i);
  }
  std::vector<int> ex, un;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (int v : blocks[b]) (b % 2 ? un : ex).push_back(v);
  std::vector<ExtendedConstraint> cons;
  const int m = 1 + static_cast<int>(rng() % max_constraints);
  const int nrel = static_cast<int>(lang->relations().size());
  for (int i = 0; i < m; ++i) {
    ExtendedConstraint ec;
    ec.relation = static_cast<int>(rng() % nrel);
    for (int a = 0; a < lang->at(ec.relation).arity(); ++a) ec.head.push_back(ex[rng() % ex.size()]);
    for (int y : un)
      if (rng() % 2) ec.guard.push_back({y, static_cast<int>(rng() % lang->domain_size())});
    cons.push_back(std::move(ec));
  }
  return Formula::make(lang, names, blocks, cons);
}

inline Cnf random_cnf(std::mt19937& rng, int vars, int clauses, int width) {
  Cnf cnf{vars, {}};
  for (int i = 0; i < clauses; ++i) {
    Clause c;
    for (int j = 0; j < width; ++j) c.push_back({static_cast<int>(rng() % vars), rng() % 2 == 0});
    cnf.clauses.push_back(c);
  }
  return cnf;
}

// Fixes X1 to the given values through unary relations on a copied language.
inline Formula pin_first_block(const Formula& phi, const std::vector<int>& values) {
  auto lang = std::make_shared<ConstraintLanguage>(phi.language());
  auto cons = phi.constraints();
  const auto& x1 = phi.first_block();
  for (std::size_t i = 0; i < x1.size(); ++i) {
    int r = lang->add(Relation("_pin" + std::to_string(i), phi.domain(), 1, {{values[i]}}));
    cons.push_back({{}, r, {x1[i]}});
  }
  return Formula::make(lang, phi.names(), phi.blocks(), cons);
}

enum class SchemeKind { kConstant, kSetFunction, kNu, kMaltsev };
inline const char* kind_name(SchemeKind k) {
  switch (k) {
    case SchemeKind::kConstant: return "constant";
    case SchemeKind::kSetFunction: return "set-function";
    case SchemeKind::kNu: return "near-unanimity";
    case SchemeKind::kMaltsev: return "Mal'tsev";
  }
  return "?";
}

struct SchemedInstance {
  Formula phi;
  std::unique_ptr<Scheme> scheme;
};

// Random formula over a language built to admit the given kind of scheme.
inline SchemedInstance random_schemed_instance(std::mt19937& rng, SchemeKind kind, int max_vars = 6) {
  const int d = 2 + static_cast<int>(rng() % 2);
  std::unique_ptr<Scheme> scheme;
  std::shared_ptr<ConstraintLanguage> lang;
  switch (kind) {
    case SchemeKind::kConstant: {
      const int c = static_cast<int>(rng() % d);
      lang = random_language(rng, d, nullptr, c);
      scheme = std::make_unique<ConstantScheme>(d, c);
      break;
    }
    case SchemeKind::kSetFunction: {
      auto op = *builtin_operation(rng() % 2 ? "min" : "max", d);
      lang = random_language(rng, d, &op);
      scheme = std::make_unique<PowersetScheme>(semilattice_to_set_function(op));
      break;
    }
    case SchemeKind::kNu: {
      auto op = *builtin_operation("majority", d);
      lang = random_language(rng, d, &op);
      scheme = std::make_unique<NuScheme>(op);
      break;
    }
    case SchemeKind::kMaltsev: {
      auto op = *builtin_operation(d == 2 ? "xor3" : "affine", d);
      lang = random_language(rng, d, &op);
      scheme = std::make_unique<MaltsevScheme>(op);
      break;
    }
  }
  return {random_formula(rng, lang, max_vars), std::move(scheme)};
}

// p_t from the proof-size recurrence: p_1 = 2m - 1, p_t = m(p_{t-1} + 1) + (m - 1).
inline long long proof_size_bound(int t, long long m) {
  long long p = 2 * m - 1;
  for (int i = 2; i <= t; ++i) p = m * (p + 1) + (m - 1);
  return p;
}

// Random quantified CNF whose clauses fit the mode. Prefixes have one to
// three blocks and may start with a universal block.
inline QuantifiedCnf random_qcnf(std::mt19937& rng, ClauseMode mode, int max_vars = 6, int max_clauses = 5) {
  const int n = 2 + static_cast<int>(rng() % (max_vars - 1));
  QuantifiedCnf q;
  for (int i = 0; i < n; ++i) q.names.push_back("q" + std::to_string(i + 1));
  const int nblocks = std::min(n, 1 + static_cast<int>(rng() % 3));
  Quantifier kind = rng() % 3 == 0 ? Quantifier::Forall : Quantifier::Exists;
  std::vector<int> cuts;
  for (int b = 1; b < nblocks; ++b) cuts.push_back(1 + static_cast<int>(rng() % (n - 1)));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(n);
  int from = 0;
  for (int cut : cuts) {
    QBlock b{kind, {}};
    for (int v = from; v < cut; ++v) b.vars.push_back(v);
    q.blocks.push_back(b);
    from = cut;
    kind = kind == Quantifier::Exists ? Quantifier::Forall : Quantifier::Exists;
  }
  std::vector<bool> universal(n, false);
  for (const auto& b : q.blocks)
    if (b.q == Quantifier::Forall)
      for (int v : b.vars) universal[v] = true;
  const int m = 1 + static_cast<int>(rng() % max_clauses);
  for (int i = 0; i < m; ++i) {
    Clause c;
    const int width = 1 + static_cast<int>(rng() % 4);
    int existential = 0, positive = 0;
    for (int j = 0; j < width; ++j) {
      Literal l{static_cast<int>(rng() % n), rng() % 2 == 0};
      if (!universal[l.var]) {
        if (mode == ClauseMode::TwoSat && existential == 2) continue;
        if (mode == ClauseMode::Horn && l.positive && positive == 1) l.positive = false;
        ++existential;
        positive += l.positive;
      }
      c.push_back(l);
    }
    q.clauses.push_back(c);
  }
  return q;
}

inline int nonempty_blocks(const std::vector<std::vector<int>>& blocks) {
  int k = 0;
  for (const auto& b : blocks) k += !b.empty();
  return k;
}

// Standard-model formula over a random language extended by the constant
// relations C0..C(d-1); arguments range over every prefix variable.
inline StandardFormula random_standard(std::mt19937& rng, int domain, int max_vars = 6) {
  auto lang = random_language(rng, domain, nullptr);
  for (int v = 0; v < domain; ++v) lang->add(Relation("C" + std::to_string(v), domain, 1, {{v}}));
  StandardFormula phi;
  phi.language = lang;
  const int n = 2 + static_cast<int>(rng() % (max_vars - 1));
  for (int i = 0; i < n; ++i) phi.names.push_back("s" + std::to_string(i));
  if (n < 3 || rng() % 4 == 0) {
    phi.blocks.push_back({});
    for (int i = 0; i < n; ++i) phi.blocks[0].push_back(i);
  } else {
    int x1 = static_cast<int>(rng() % (n - 1));
    int y1 = 1 + static_cast<int>(rng() % (n - x1 - 1));
    phi.blocks.assign(3, {});
    for (int i = 0; i < n; ++i) phi.blocks[i < x1 ? 0 : i < x1 + y1 ? 1 : 2].push_back(i);
  }
  const int m = 1 + static_cast<int>(rng() % 5);
  const int nrel = static_cast<int>(lang->relations().size());
  for (int i = 0; i < m; ++i) {
    StandardConstraint c{static_cast<int>(rng() % nrel), {}};
    for (int a = 0; a < lang->at(c.relation).arity(); ++a) c.args.push_back(static_cast<int>(rng() % n));
    phi.constraints.push_back(c);
  }
  return phi;
}

// B over d values and B' over d + 1, where the extra value is a copy of e:
// inclusion B -> B' and the fold B' -> B are homomorphisms.
struct HomPair {
  std::shared_ptr<ConstraintLanguage> small, large;
  std::vector<int> include, fold;
};

inline HomPair random_hom_pair(std::mt19937& rng, int d) {
  HomPair p;
  p.small = random_language(rng, d, nullptr);
  p.large = std::make_shared<ConstraintLanguage>(d + 1);
  const int e = static_cast<int>(rng() % d);
  for (const auto& r : p.small->relations()) {
    std::set<Tuple> ts(r.tuples().begin(), r.tuples().end());
    for (const auto& t : r.tuples()) {
      Tuple u = t;
      for (auto& x : u)
        if (x == e && rng() % 2) x = d;
      ts.insert(u);
    }
    p.large->add(Relation(r.name(), d + 1, r.arity(), {ts.begin(), ts.end()}));
  }
  for (int v = 0; v < d; ++v) p.include.push_back(v);
  p.fold = p.include;
  p.fold.push_back(e);
  return p;
}

// One byte substituted, inserted or deleted; never the identity.
inline std::string mutate(std::mt19937& rng, const std::string& text) {
  static const std::string alphabet = "0123456789 ,=()!.;\nPNMKRxyvdstepRconclude";
  while (true) {
    std::string m = text;
    const std::size_t pos = rng() % (m.size() + 1);
    const char c = alphabet[rng() % alphabet.size()];
    switch (rng() % 3) {
      case 0:
        if (pos == m.size()) continue;
        m[pos] = c;
        break;
      case 1:
        m.insert(m.begin() + pos, c);
        break;
      default:
        if (pos == m.size()) continue;
        m.erase(pos, 1);
    }
    if (m != text) return m;
  }
}

}  // namespace qtest
