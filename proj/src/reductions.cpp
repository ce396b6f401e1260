#include "qecsp/reductions.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <set>

namespace qecsp {

namespace {

// Game evaluation over a fixed variable order; check(depth, values) tests the
// constraints whose last variable sits at that depth.
bool game(const std::vector<bool>& forall, int domain,
          const std::function<bool(int, const std::vector<int>&)>& check) {
  const int n = static_cast<int>(forall.size());
  std::vector<int> vals(n, 0);
  std::function<bool(int)> rec = [&](int depth) -> bool {
    if (depth == n) return true;
    for (int v = 0; v < domain; ++v) {
      vals[depth] = v;
      bool ok = check(depth, vals) && rec(depth + 1);
      if (forall[depth] && !ok) return false;
      if (!forall[depth] && ok) return true;
    }
    return forall[depth];
  };
  return rec(0);
}

std::string unique_name(const std::string& base, std::set<std::string>& taken) {
  std::string s = base;
  while (taken.count(s)) s = "_" + s;
  taken.insert(s);
  return s;
}

// Formula layout (X1, Y1, X2, ...) from prefix blocks; merges neighbours with
// the same quantifier and drops empty blocks.
std::vector<std::vector<int>> layout(const std::vector<QBlock>& blocks) {
  std::vector<std::vector<int>> out{{}};
  for (const auto& b : blocks) {
    if (b.vars.empty()) continue;
    bool exist = b.q == Quantifier::Exists;
    bool last_exist = out.size() % 2 == 1;
    if (exist != last_exist) out.emplace_back();
    out.back().insert(out.back().end(), b.vars.begin(), b.vars.end());
  }
  return out;
}

int find_by_content(const ConstraintLanguage& gamma, int arity, const std::vector<Tuple>& tuples) {
  for (std::size_t i = 0; i < gamma.relations().size(); ++i) {
    const auto& r = gamma.relations()[i];
    if (r.arity() == arity && r.tuples() == tuples) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

bool cnf_satisfiable(const Cnf& cnf) {
  if (cnf.num_vars > 24) throw Error("too many variables for enumeration");
  for (std::uint32_t m = 0; m < (1u << cnf.num_vars); ++m) {
    bool all = true;
    for (const auto& c : cnf.clauses) {
      bool sat = false;
      for (const auto& l : c)
        if (((m >> l.var) & 1) == static_cast<unsigned>(l.positive)) sat = true;
      if (!sat) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

bool qcnf_truth(const QuantifiedCnf& q) {
  std::vector<int> order;
  std::vector<bool> forall;
  for (const auto& b : q.blocks)
    for (int v : b.vars) {
      order.push_back(v);
      forall.push_back(b.q == Quantifier::Forall);
    }
  std::vector<int> pos(q.names.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  std::vector<std::vector<const Clause*>> at(order.size() + 1);
  for (const auto& c : q.clauses) {
    int last = -1;
    for (const auto& l : c) {
      if (pos.at(l.var) < 0) throw Error("clause variable outside the prefix");
      last = std::max(last, pos[l.var]);
    }
    if (last < 0) {
      if (c.empty()) return false;
    } else {
      at[last].push_back(&c);
    }
  }
  return game(forall, 2, [&](int depth, const std::vector<int>& vals) {
    for (const Clause* c : at[depth]) {
      bool sat = false;
      for (const auto& l : *c)
        if (vals[pos[l.var]] == static_cast<int>(l.positive)) sat = true;
      if (!sat) return false;
    }
    return true;
  });
}

// ---------------------------------------------------------------------------

int truncation(ConstraintLanguage& gamma, int relation, const std::vector<int>& fixed_positions,
               const std::vector<int>& values) {
  if (fixed_positions.empty()) return relation;
  const Relation& r = gamma.at(relation);
  std::vector<int> fixed_value(r.arity(), -1);
  for (std::size_t i = 0; i < fixed_positions.size(); ++i) {
    int p = fixed_positions[i];
    // A repeated position with two values leaves nothing.
    if (fixed_value[p] >= 0 && fixed_value[p] != values[i]) fixed_value[p] = -2;
    else if (fixed_value[p] != -2) fixed_value[p] = values[i];
  }
  std::string name = r.name() + "@";
  for (int p = 0; p < r.arity(); ++p) {
    if (p) name += '.';
    name += fixed_value[p] >= 0 ? std::to_string(fixed_value[p]) : fixed_value[p] == -2 ? "n" : "x";
  }
  std::vector<Tuple> tuples;
  for (const auto& t : r.tuples()) {
    bool keep = true;
    Tuple u;
    for (int p = 0; p < r.arity() && keep; ++p) {
      if (fixed_value[p] == -1) u.push_back(t[p]);
      else if (t[p] != fixed_value[p]) keep = false;
    }
    if (keep) tuples.push_back(std::move(u));
  }
  const int arity = static_cast<int>(std::count(fixed_value.begin(), fixed_value.end(), -1));
  Relation out(name, gamma.domain_size(), arity, std::move(tuples));
  int existing = gamma.find(name);
  if (existing >= 0) {
    if (!(gamma.at(existing) == out)) throw Error("relation name " + name + " is already taken");
    return existing;
  }
  return gamma.add(std::move(out));
}

std::vector<ExtendedConstraint> constraint_to_extended(ConstraintLanguage& gamma, int relation,
                                                       const std::vector<int>& args,
                                                       const std::vector<bool>& universal) {
  if (static_cast<int>(args.size()) != gamma.at(relation).arity()) throw Error("arity mismatch");
  std::vector<int> upos;
  std::vector<int> head;
  for (std::size_t p = 0; p < args.size(); ++p) {
    if (universal.at(args[p])) upos.push_back(static_cast<int>(p));
    else head.push_back(args[p]);
  }
  std::vector<ExtendedConstraint> out;
  Tuple vals(upos.size(), 0);
  do {
    ExtendedConstraint ec;
    for (std::size_t i = 0; i < upos.size(); ++i) ec.guard.push_back({args[upos[i]], vals[i]});
    ec.relation = truncation(gamma, relation, upos, vals);
    ec.head = head;
    out.push_back(std::move(ec));
  } while (next_tuple(vals, gamma.domain_size()));
  return out;
}

bool standard_truth(const StandardFormula& phi) {
  std::vector<int> order;
  std::vector<bool> forall;
  for (std::size_t b = 0; b < phi.blocks.size(); ++b)
    for (int v : phi.blocks[b]) {
      order.push_back(v);
      forall.push_back(b % 2 == 1);
    }
  std::vector<int> pos(phi.names.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  std::vector<std::vector<const StandardConstraint*>> at(order.size() + 1);
  for (const auto& c : phi.constraints) {
    int last = -1;
    for (int v : c.args) last = std::max(last, pos.at(v));
    if (last < 0) {
      if (phi.language->at(c.relation).empty()) return false;
    } else {
      at[last].push_back(&c);
    }
  }
  Tuple buf;
  return game(forall, phi.language->domain_size(), [&](int depth, const std::vector<int>& vals) {
    for (const auto* c : at[depth]) {
      buf.clear();
      for (int v : c->args) buf.push_back(vals[pos[v]]);
      if (!phi.language->at(c->relation).contains(buf)) return false;
    }
    return true;
  });
}

Formula standard_to_existential(const StandardFormula& phi) {
  const auto& gamma = *phi.language;
  const int d = gamma.domain_size();
  std::vector<int> constant(d);
  for (int v = 0; v < d; ++v) {
    constant[v] = find_by_content(gamma, 1, {Tuple{v}});
    if (constant[v] < 0) throw Error("language lacks the constant relation for " + std::to_string(v));
  }
  std::vector<std::string> names = phi.names;
  std::set<std::string> taken(names.begin(), names.end());
  auto blocks = phi.blocks;
  std::vector<bool> universal(names.size(), false);
  for (std::size_t b = 1; b < blocks.size(); b += 2)
    for (int v : blocks[b]) universal[v] = true;
  // The first nonempty existential block, so no block becomes nonempty.
  std::size_t target = blocks[0].empty() && blocks.size() > 2 ? 2 : 0;
  std::vector<int> pin(d);
  std::vector<ExtendedConstraint> cons;
  for (int v = 0; v < d; ++v) {
    pin[v] = static_cast<int>(names.size());
    names.push_back(unique_name("v" + std::to_string(v), taken));
    blocks[target].push_back(pin[v]);
    cons.push_back({{}, constant[v], {pin[v]}});
  }
  for (const auto& c : phi.constraints) {
    std::vector<int> us;
    for (int v : c.args)
      if (universal[v] && std::find(us.begin(), us.end(), v) == us.end()) us.push_back(v);
    Tuple vals(us.size(), 0);
    do {
      ExtendedConstraint ec;
      ec.relation = c.relation;
      for (std::size_t i = 0; i < us.size(); ++i) ec.guard.push_back({us[i], vals[i]});
      for (int v : c.args) {
        if (!universal[v]) {
          ec.head.push_back(v);
        } else {
          auto i = std::find(us.begin(), us.end(), v) - us.begin();
          ec.head.push_back(pin[vals[i]]);
        }
      }
      cons.push_back(std::move(ec));
    } while (next_tuple(vals, d));
  }
  return Formula::make(phi.language, std::move(names), std::move(blocks), std::move(cons));
}

// ---------------------------------------------------------------------------

bool is_homomorphism(const ConstraintLanguage& from, const ConstraintLanguage& to,
                     const std::vector<int>& map) {
  if (static_cast<int>(map.size()) != from.domain_size()) return false;
  for (int v : map)
    if (v < 0 || v >= to.domain_size()) return false;
  for (const auto& r : from.relations()) {
    int j = to.find(r.name());
    if (j < 0 || to.at(j).arity() != r.arity()) return false;
    Tuple img(r.arity());
    for (const auto& t : r.tuples()) {
      for (int p = 0; p < r.arity(); ++p) img[p] = map[t[p]];
      if (!to.at(j).contains(img)) return false;
    }
  }
  return true;
}

Formula hom_equiv_transfer(const Formula& phi, std::shared_ptr<const ConstraintLanguage> target,
                           const std::vector<int>& h, const std::vector<int>& h_back) {
  const auto& src = phi.language();
  if (!is_homomorphism(src, *target, h)) throw Error("h is not a homomorphism");
  if (!is_homomorphism(*target, src, h_back)) throw Error("h' is not a homomorphism");
  const int b = src.domain_size();
  const int b2 = target->domain_size();
  if (b2 < 2) throw Error("target universe has one element; decide such instances directly");

  std::vector<int> rel(src.relations().size());
  for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = target->find(src.at(static_cast<int>(i)).name());

  int s = 1;
  if (b2 < b) {
    long long p = b2;
    while (p < b) {
      p *= b2;
      ++s;
    }
  }
  // New ids: every old variable keeps one slot, universals get s slots when split.
  std::vector<std::string> names;
  std::vector<std::vector<int>> ids(phi.num_vars());
  for (int v = 0; v < phi.num_vars(); ++v) {
    if (s > 1 && phi.is_universal(v)) {
      for (int i = 0; i < s; ++i) {
        ids[v].push_back(static_cast<int>(names.size()));
        names.push_back(phi.names()[v] + "." + std::to_string(i));
      }
    } else {
      ids[v].push_back(static_cast<int>(names.size()));
      names.push_back(phi.names()[v]);
    }
  }
  std::vector<std::vector<int>> blocks;
  for (const auto& blk : phi.blocks()) {
    blocks.emplace_back();
    for (int v : blk) blocks.back().insert(blocks.back().end(), ids[v].begin(), ids[v].end());
  }
  std::vector<ExtendedConstraint> cons;
  for (const auto& c : phi.constraints()) {
    ExtendedConstraint ec;
    ec.relation = rel[c.relation];
    for (int v : c.head) ec.head.push_back(ids[v][0]);
    for (const auto& g : c.guard) {
      if (s == 1) {
        ec.guard.push_back({ids[g.var][0], g.value});
      } else {
        int val = g.value;
        for (int i = s - 1; i >= 0; --i) {
          ec.guard.push_back({ids[g.var][i], val % b2});
          val /= b2;
        }
      }
    }
    cons.push_back(std::move(ec));
  }
  return Formula::make(std::move(target), std::move(names), std::move(blocks), std::move(cons));
}

// ---------------------------------------------------------------------------

Formula nae_normalize(const Formula& phi) {
  const auto& gamma = phi.language();
  if (gamma.domain_size() != 2) throw Error("NAE normalization needs the boolean domain");
  std::vector<Tuple> nae_tuples;
  Tuple t(3, 0);
  do {
    if (!(t[0] == t[1] && t[1] == t[2])) nae_tuples.push_back(t);
  } while (next_tuple(t, 2));
  int nae = find_by_content(gamma, 3, nae_tuples);
  int zero = find_by_content(gamma, 1, {Tuple{0}});
  int one = find_by_content(gamma, 1, {Tuple{1}});

  auto lang = std::make_shared<ConstraintLanguage>(2);
  lang->add(Relation(nae >= 0 ? gamma.at(nae).name() : "NAE", 2, 3, nae_tuples));

  std::vector<std::string> names = phi.names();
  std::set<std::string> taken(names.begin(), names.end());
  auto blocks = phi.blocks();
  const int c = static_cast<int>(names.size());
  names.push_back(unique_name("c", taken));
  const int c2 = static_cast<int>(names.size());
  names.push_back(unique_name("c'", taken));
  // c and c' must precede every universal, or the flip argument breaks; X2
  // is still fine when X1 is empty since nothing existential precedes Y1.
  std::size_t target = blocks[0].empty() && blocks.size() > 2 ? 2 : 0;
  blocks[target].push_back(c);
  blocks[target].push_back(c2);

  std::vector<ExtendedConstraint> cons{{{}, 0, {c, c, c2}}};
  for (const auto& ec : phi.constraints()) {
    ExtendedConstraint out{ec.guard, 0, {}};
    if (ec.relation == nae) {
      out.head = ec.head;
    } else if (ec.relation == zero) {
      out.head = {ec.head[0], ec.head[0], c};
    } else if (ec.relation == one) {
      out.head = {ec.head[0], ec.head[0], c2};
    } else {
      throw Error("head relation " + gamma.at(ec.relation).name() + " is not NAE or a constant");
    }
    cons.push_back(std::move(out));
  }
  return Formula::make(std::move(lang), std::move(names), std::move(blocks), std::move(cons));
}

// ---------------------------------------------------------------------------

CriticalFamily critical_family_eq_const(int n, int a, int b, int domain) {
  if (n < 2) throw Error("critical family needs n >= 2");
  if (a == b || a < 0 || b < 0 || a >= domain || b >= domain) throw Error("a and b must be distinct domain values");
  auto lang = std::make_shared<ConstraintLanguage>(domain);
  std::vector<Tuple> eq;
  for (int v = 0; v < domain; ++v) eq.push_back({v, v});
  int e = lang->add(Relation("EQ", domain, 2, eq));
  int ra = lang->add(Relation("R" + std::to_string(a), domain, 1, {{a}}));
  int rb = lang->add(Relation("R" + std::to_string(b), domain, 1, {{b}}));
  CriticalFamily fam;
  fam.num_vars = n;
  fam.sets.push_back({{e, {0, 1}}, {ra, {0}}});
  for (int i = 1; i + 1 < n; ++i) fam.sets.push_back({{e, {i, i + 1}}});
  fam.sets.push_back({{rb, {n - 1}}});
  fam.language = std::move(lang);
  return fam;
}

bool csp_satisfiable(const CriticalFamily& fam, const std::vector<int>& sets_used) {
  const int d = fam.language->domain_size();
  Tuple t(fam.num_vars, 0), buf;
  do {
    bool ok = true;
    for (int s : sets_used)
      for (const auto& a : fam.sets.at(s)) {
        buf.clear();
        for (int v : a.vars) buf.push_back(t[v]);
        if (!fam.language->at(a.relation).contains(buf)) ok = false;
      }
    if (ok) return true;
  } while (next_tuple(t, d));
  return false;
}

Formula critical_hardness_instance(const Cnf& cnf_in) {
  Cnf cnf = cnf_in;
  if (cnf.num_vars < 1) throw Error("CNF needs at least one variable");
  if (cnf.clauses.empty()) throw Error("CNF needs at least one clause");
  if (cnf.clauses.size() == 1) cnf.clauses.push_back(cnf.clauses[0]);
  const int n = static_cast<int>(cnf.clauses.size());
  auto fam = critical_family_eq_const(n, 0, 1);

  std::vector<std::string> names;
  std::vector<int> ys, xs;
  for (int v = 0; v < cnf.num_vars; ++v) {
    ys.push_back(static_cast<int>(names.size()));
    names.push_back("y" + std::to_string(v + 1));
  }
  for (int i = 0; i < n; ++i) {
    xs.push_back(static_cast<int>(names.size()));
    names.push_back("v" + std::to_string(i + 1));
  }
  std::vector<ExtendedConstraint> cons;
  for (int i = 0; i < n; ++i)
    for (const auto& atom : fam.sets[i])
      for (const auto& lit : cnf.clauses[i]) {
        ExtendedConstraint ec;
        ec.guard = {{ys.at(lit.var), lit.positive ? 1 : 0}};
        ec.relation = atom.relation;
        for (int v : atom.vars) ec.head.push_back(xs[v]);
        cons.push_back(std::move(ec));
      }
  return Formula::make(fam.language, std::move(names), {{}, ys, xs}, std::move(cons));
}

// ---------------------------------------------------------------------------

std::shared_ptr<const ConstraintLanguage> twosat_language() {
  auto lang = std::make_shared<ConstraintLanguage>(2);
  auto minus = [](std::string name, Tuple a) {
    std::vector<Tuple> ts;
    Tuple t(a.size(), 0);
    do {
      if (t != a) ts.push_back(t);
    } while (next_tuple(t, 2));
    return Relation(std::move(name), 2, static_cast<int>(a.size()), ts);
  };
  lang->add(minus("R_0", {0}));
  lang->add(minus("R_1", {1}));
  lang->add(minus("R_00", {0, 0}));
  lang->add(minus("R_01", {0, 1}));
  lang->add(minus("R_11", {1, 1}));
  return lang;
}

std::shared_ptr<const ConstraintLanguage> horn_language() {
  auto lang = std::make_shared<ConstraintLanguage>(2);
  std::vector<Tuple> h;
  Tuple t(3, 0);
  do {
    if (t != Tuple{1, 1, 0}) h.push_back(t);
  } while (next_tuple(t, 2));
  lang->add(Relation("H", 2, 3, h));
  lang->add(Relation("R0", 2, 1, {{0}}));
  lang->add(Relation("R1", 2, 1, {{1}}));
  return lang;
}

bool clause_fits(const Clause& c, ClauseMode mode, const std::vector<bool>& universal) {
  int ex = 0, pos = 0;
  for (const auto& l : c) {
    if (universal.at(l.var)) continue;
    ++ex;
    if (l.positive) ++pos;
  }
  return mode == ClauseMode::TwoSat ? ex <= 2 : pos <= 1;
}

std::vector<ExtendedConstraint> extended_clause_encode(const Clause& c, ClauseMode mode,
                                                       const std::vector<bool>& universal,
                                                       std::vector<std::string>& names,
                                                       std::vector<int>& fresh, HornPins& pins) {
  if (!clause_fits(c, mode, universal))
    throw Error(mode == ClauseMode::TwoSat ? "clause has more than two existential literals"
                                           : "clause has more than one positive existential literal");
  std::set<std::string> taken(names.begin(), names.end());
  auto new_var = [&](const std::string& base) {
    int id = static_cast<int>(names.size());
    names.push_back(unique_name(base, taken));
    fresh.push_back(id);
    return id;
  };
  // A universal literal is false at the value it forbids; that is the guard.
  std::vector<GuardAtom> guard;
  std::vector<Literal> ex;
  for (const auto& l : c) {
    if (universal.at(l.var)) guard.push_back({l.var, l.positive ? 0 : 1});
    else ex.push_back(l);
  }
  std::vector<ExtendedConstraint> out;

  if (mode == ClauseMode::TwoSat) {
    // Relation indices in twosat_language(): R_0, R_1, R_00, R_01, R_11.
    if (ex.empty()) {
      int v = new_var("_f");
      out.push_back({guard, 0, {v}});
      out.push_back({guard, 1, {v}});
    } else if (ex.size() == 1) {
      out.push_back({guard, ex[0].positive ? 0 : 1, {ex[0].var}});
    } else {
      int a0 = ex[0].positive ? 0 : 1, a1 = ex[1].positive ? 0 : 1;
      if (a0 == 1 && a1 == 0) {
        std::swap(ex[0], ex[1]);
        std::swap(a0, a1);
      }
      int rel = a0 == 0 ? (a1 == 0 ? 2 : 3) : 4;
      out.push_back({guard, rel, {ex[0].var, ex[1].var}});
    }
    return out;
  }

  // Horn: relation indices H = 0, R0 = 1, R1 = 2.
  std::vector<int> neg;
  int p = -1;
  for (const auto& l : ex) {
    if (l.positive) p = l.var;
    else neg.push_back(l.var);
  }
  auto one = [&] {
    if (pins.one < 0) {
      pins.one = new_var("_one");
      out.push_back({{}, 2, {pins.one}});
    }
    return pins.one;
  };
  auto zero = [&] {
    if (pins.zero < 0) {
      pins.zero = new_var("_zero");
      out.push_back({{}, 1, {pins.zero}});
    }
    return pins.zero;
  };
  const std::size_t r = neg.size();
  if (ex.empty()) {
    int v = new_var("_f");
    out.push_back({guard, 1, {v}});
    out.push_back({guard, 2, {v}});
  } else if (r == 0) {
    out.push_back({guard, 2, {p}});
  } else if (r == 1 && p >= 0) {
    int v = one();
    out.push_back({guard, 0, {v, neg[0], p}});
  } else if (r == 1) {
    out.push_back({guard, 1, {neg[0]}});
  } else {
    int end = p >= 0 ? p : zero();
    int cur = neg[0];
    for (std::size_t i = 1; i < r; ++i) {
      int next = i + 1 == r ? end : new_var("_h");
      out.push_back({guard, 0, {cur, neg[i], next}});
      cur = next;
    }
  }
  return out;
}

Formula encode_qcnf(const QuantifiedCnf& q, ClauseMode mode) {
  auto blocks = layout(q.blocks);
  std::vector<bool> universal(q.names.size(), false);
  for (std::size_t b = 1; b < blocks.size(); b += 2)
    for (int v : blocks[b]) universal[v] = true;
  std::vector<std::string> names = q.names;
  std::vector<int> fresh;
  HornPins pins;
  std::vector<ExtendedConstraint> cons;
  for (std::size_t i = 0; i < q.clauses.size(); ++i) {
    try {
      auto part = extended_clause_encode(q.clauses[i], mode, universal, names, fresh, pins);
      universal.resize(names.size(), false);
      cons.insert(cons.end(), part.begin(), part.end());
    } catch (const Error& e) {
      throw Error("clause " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (!fresh.empty()) {
    if (blocks.size() % 2 == 0) blocks.emplace_back();
    blocks.back().insert(blocks.back().end(), fresh.begin(), fresh.end());
  }
  auto lang = mode == ClauseMode::TwoSat ? twosat_language() : horn_language();
  return Formula::make(std::move(lang), std::move(names), std::move(blocks), std::move(cons));
}

// ---------------------------------------------------------------------------

CoherentChoice default_coherent_choice(const SetFunction& f) {
  auto rep = classify_set_function(f);
  if (!rep.hard) throw Error("set function " + f.name + " is easy");
  CoherentChoice ch;
  ch.c0 = rep.witness_pair->first;
  ch.c1 = rep.witness_pair->second;
  for (Subset s : rep.coherent_sets)
    if (s != full_subset(f.domain)) {
      ch.c = s;
      break;
    }
  if (ch.c == 0) throw Error("no coherent set other than the whole domain");
  ch.ct = std::countr_zero(ch.c);
  return ch;
}

QuantifiedCnf normalize_horn_width(const QuantifiedCnf& q) {
  QuantifiedCnf out = q;
  out.clauses.clear();
  std::vector<bool> universal(q.names.size(), false);
  for (const auto& b : q.blocks)
    if (b.q == Quantifier::Forall)
      for (int v : b.vars) universal[v] = true;
  std::set<std::string> taken(q.names.begin(), q.names.end());
  std::vector<int> fresh;
  for (const auto& c : q.clauses) {
    Clause uni;
    std::vector<int> neg;
    std::optional<Literal> pos;
    for (const auto& l : c) {
      if (universal[l.var]) uni.push_back(l);
      else if (l.positive) pos = l;
      else neg.push_back(l.var);
    }
    std::size_t width = neg.size() + (pos ? 1 : 0);
    if (width <= 3) {
      out.clauses.push_back(c);
      continue;
    }
    // (n1 & n2 -> v1), (v1 & n3 -> v2), ..., (v & nr -> p), each keeping the
    // universal literals.
    int cur = neg[0];
    for (std::size_t i = 1; i < neg.size(); ++i) {
      Clause piece = uni;
      piece.push_back({cur, false});
      piece.push_back({neg[i], false});
      if (i + 1 < neg.size()) {
        int v = static_cast<int>(out.names.size());
        out.names.push_back(unique_name("_w", taken));
        fresh.push_back(v);
        piece.push_back({v, true});
        cur = v;
      } else if (pos) {
        piece.push_back(*pos);
      }
      out.clauses.push_back(std::move(piece));
    }
  }
  if (!fresh.empty()) {
    if (out.blocks.empty() || out.blocks.back().q != Quantifier::Exists)
      out.blocks.push_back({Quantifier::Exists, {}});
    auto& last = out.blocks.back().vars;
    last.insert(last.end(), fresh.begin(), fresh.end());
  }
  return out;
}

Formula horn_to_setfunction(const QuantifiedCnf& q, const SetFunction& f) {
  return horn_to_setfunction(q, f, default_coherent_choice(f));
}

Formula horn_to_setfunction(const QuantifiedCnf& q_in, const SetFunction& f, const CoherentChoice& ch) {
  if (!is_coherent(f, ch.c0) || !is_coherent(f, ch.c1) || (ch.c0 & ch.c1) != 0)
    throw Error("C0 and C1 must be disjoint coherent sets");
  if (!is_coherent(f, ch.c) || ch.c == full_subset(f.domain) || !(ch.c >> ch.ct & 1))
    throw Error("C must be a proper coherent set containing c_t");
  QuantifiedCnf q = normalize_horn_width(q_in);
  auto blocks = layout(q.blocks);
  std::vector<bool> universal(q.names.size(), false);
  for (std::size_t b = 1; b < blocks.size(); b += 2)
    for (int v : blocks[b]) universal[v] = true;
  for (const auto& c : q.clauses)
    if (!clause_fits(c, ClauseMode::Horn, universal)) throw Error("input is not an extended Horn formula");

  const int d = f.domain;
  auto lang = std::make_shared<ConstraintLanguage>(d);
  std::vector<ExtendedConstraint> cons;
  for (std::size_t i = 0; i < q.clauses.size(); ++i) {
    const auto& c = q.clauses[i];
    // Distinct variables, universal ones first.
    std::vector<int> vars;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& l : c)
        if (universal[l.var] == (pass == 0) && std::find(vars.begin(), vars.end(), l.var) == vars.end())
          vars.push_back(l.var);
    auto holds = [&](const Literal& l, int v) {
      if (universal[l.var]) return !((l.positive ? ch.c0 : ch.c1) >> v & 1);
      return l.positive ? v == ch.ct : !(ch.c >> v & 1);
    };
    std::vector<Tuple> tuples;
    Tuple t(vars.size(), 0);
    do {
      bool sat = false;
      for (const auto& l : c) {
        auto p = std::find(vars.begin(), vars.end(), l.var) - vars.begin();
        if (holds(l, t[p])) sat = true;
      }
      if (sat) tuples.push_back(t);
    } while (next_tuple(t, d));
    int rel = lang->add(Relation("M" + std::to_string(i + 1), d, static_cast<int>(vars.size()), tuples));
    auto part = constraint_to_extended(*lang, rel, vars, universal);
    cons.insert(cons.end(), part.begin(), part.end());
  }
  return Formula::make(std::move(lang), q.names, std::move(blocks), std::move(cons));
}

// ---------------------------------------------------------------------------

QuantifiedCnf pi2_gadget_clauses(const Cnf& cnf, int outer) {
  const int n = cnf.num_vars - outer;
  if (outer < 0 || n < 1) throw Error("gadget needs at least one inner variable");
  for (const auto& c : cnf.clauses)
    if (c.size() > 3) throw Error("gadget clauses have at most three literals");
  QuantifiedCnf q;
  for (int v = 0; v < cnf.num_vars; ++v)
    q.names.push_back(v < outer ? "w" + std::to_string(v + 1) : "y" + std::to_string(v - outer + 1));
  auto y = [&](int i) { return outer + i - 1; };  // 1-based
  auto x = [&](int i, int b) { return cnf.num_vars + 2 * (i - 1) + b; };
  for (int i = 1; i <= n; ++i) {
    q.names.push_back("x" + std::to_string(i) + "_0");
    q.names.push_back("x" + std::to_string(i) + "_1");
  }
  const int dv = static_cast<int>(q.names.size());
  q.names.push_back("d");

  if (outer > 0) {
    QBlock w{Quantifier::Forall, {}};
    for (int v = 0; v < outer; ++v) w.vars.push_back(v);
    q.blocks.push_back(std::move(w));
  }
  for (int i = 1; i <= n; ++i) {
    q.blocks.push_back({Quantifier::Exists, {x(i, 0), x(i, 1)}});
    q.blocks.push_back({Quantifier::Forall, {y(i)}});
  }
  q.blocks.push_back({Quantifier::Exists, {dv}});

  q.clauses.push_back({{x(1, 0), false}, {x(1, 1), false}});
  for (int i = 1; i < n; ++i) {
    q.clauses.push_back({{y(i), false}, {x(i + 1, 0), false}, {x(i + 1, 1), false}, {x(i, 1), true}});
    q.clauses.push_back({{y(i), true}, {x(i + 1, 0), false}, {x(i + 1, 1), false}, {x(i, 0), true}});
  }
  q.clauses.push_back({{y(n), false}, {dv, false}, {x(n, 1), true}});
  q.clauses.push_back({{y(n), true}, {dv, false}, {x(n, 0), true}});
  for (const auto& c : cnf.clauses) {
    Clause k = c;
    k.push_back({dv, true});
    q.clauses.push_back(std::move(k));
  }
  return q;
}

Formula pi2_gadget(const Cnf& cnf, int outer) {
  return encode_qcnf(pi2_gadget_clauses(cnf, outer), ClauseMode::Horn);
}

}  // namespace qecsp
