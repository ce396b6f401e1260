#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>

#include "support.hpp"

using namespace qecsp;
using qtest::parse;

namespace {

SetFunction witness_set_function() {
  return SetFunction::from("w", 3, [](Subset s) {
    if (s == 1) return 0;
    if (s == 2) return 1;
    return 2;
  });
}

// Whether every extended constraint holds under a full assignment.
bool holds_all(const ConstraintLanguage& gamma, const std::vector<ExtendedConstraint>& cs, const Tuple& a) {
  for (const auto& ec : cs) {
    bool active = true;
    for (const auto& g : ec.guard) active = active && a[g.var] == g.value;
    if (!active) continue;
    Tuple t;
    for (int v : ec.head) t.push_back(a[v]);
    if (!gamma.at(ec.relation).contains(t)) return false;
  }
  return true;
}

std::string heads(const Formula& phi) {
  std::string s;
  for (const auto& ec : phi.constraints()) {
    s += "[";
    for (const auto& g : ec.guard) s += phi.names()[g.var] + "=" + std::to_string(g.value) + ";";
    s += "]" + phi.language().at(ec.relation).name() + "(";
    for (int v : ec.head) s += phi.names()[v] + ",";
    s += ") ";
  }
  return s;
}

std::vector<bool> universal_mask(const QuantifiedCnf& q) {
  std::vector<bool> u(q.names.size(), false);
  for (const auto& b : q.blocks)
    if (b.q == Quantifier::Forall)
      for (int v : b.vars) u[v] = true;
  return u;
}

Relation nae_relation() {
  std::vector<Tuple> ts;
  Tuple t(3, 0);
  do {
    if (!(t[0] == t[1] && t[1] == t[2])) ts.push_back(t);
  } while (next_tuple(t, 2));
  return Relation("NAE", 2, 3, ts);
}

}  // namespace

TEST_CASE("constraint_to_extended on a mixed clause") {
  // not y1 or y4 or not x1 or not x2, as R_(1,0,1,1)(y1, y4, x1, x2)
  ConstraintLanguage gamma(2);
  std::vector<Tuple> ts;
  Tuple t(4, 0);
  do {
    if (t != Tuple{1, 0, 1, 1}) ts.push_back(t);
  } while (next_tuple(t, 2));
  int r = gamma.add(Relation("R_1011", 2, 4, ts));
  auto out = constraint_to_extended(gamma, r, {0, 1, 2, 3}, {true, true, false, false});
  REQUIRE(out.size() == 4);
  int nontrivial = 0;
  for (const auto& ec : out) {
    const auto& head = gamma.at(ec.relation);
    CHECK(ec.head == std::vector<int>{2, 3});
    if (head.size() == 4) continue;
    ++nontrivial;
    CHECK(ec.guard == std::vector<GuardAtom>{{0, 1}, {1, 0}});
    CHECK(head.tuples() == std::vector<Tuple>{{0, 0}, {0, 1}, {1, 0}});
  }
  CHECK(nontrivial == 1);

  auto plain = constraint_to_extended(gamma, r, {0, 1, 2, 3}, {false, false, false, false});
  REQUIRE(plain.size() == 1);
  CHECK(plain[0].guard.empty());
  CHECK(plain[0].relation == r);

  ConstraintLanguage g3(3);
  int full = g3.add(Relation::full("T", 3, 2));
  auto vac = constraint_to_extended(g3, full, {0, 1}, {true, true});
  CHECK(vac.size() == 9);
  for (const auto& ec : vac) {
    CHECK(ec.head.empty());
    CHECK(g3.at(ec.relation).size() == 1);
  }
}

TEST_CASE("property: constraint_to_extended is equivalent and emits |D|^j constraints") {
  std::mt19937 rng(61);
  for (int iter = 0; iter < 300; ++iter) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const int k = 1 + static_cast<int>(rng() % 4);
    const int n = k + static_cast<int>(rng() % 3);
    ConstraintLanguage gamma(d);
    int r = gamma.add(qtest::random_relation(rng, "R", d, k, nullptr));
    std::vector<int> args;
    for (int i = 0; i < k; ++i) args.push_back(static_cast<int>(rng() % n));
    std::vector<bool> universal(n);
    int j = 0;
    for (int v = 0; v < n; ++v) universal[v] = rng() % 2;
    for (int v : args) j += universal[v];
    auto out = constraint_to_extended(gamma, r, args, universal);
    long long expect = 1;
    for (int i = 0; i < j; ++i) expect *= d;
    CHECK(static_cast<long long>(out.size()) == expect);
    Tuple a(n, 0), buf;
    do {
      buf.clear();
      for (int v : args) buf.push_back(a[v]);
      CHECK(holds_all(gamma, out, a) == gamma.at(r).contains(buf));
    } while (next_tuple(a, d));
  }
}

TEST_CASE("standard_to_existential pins constants") {
  auto lang = std::make_shared<ConstraintLanguage>(2);
  lang->add(Relation("R", 2, 2, {{0, 1}, {1, 0}}));
  lang->add(Relation("ZERO", 2, 1, {{0}}));
  lang->add(Relation("ONE", 2, 1, {{1}}));
  StandardFormula phi{lang, {"y", "x"}, {{}, {0}, {1}}, {{0, {0, 1}}}};
  Formula out = standard_to_existential(phi);
  CHECK(out.names() == std::vector<std::string>{"y", "x", "v0", "v1"});
  CHECK(out.blocks() == std::vector<std::vector<int>>{{}, {0}, {1, 2, 3}});
  CHECK(heads(out) == "[]ZERO(v0,) []ONE(v1,) [y=0;]R(v0,x,) [y=1;]R(v1,x,) ");
  CHECK(standard_truth(phi));
  CHECK(brute_force_truth(out));

  StandardFormula plain{lang, {"a", "b"}, {{0, 1}}, {{0, {0, 1}}}};
  Formula po = standard_to_existential(plain);
  CHECK(heads(po) == "[]ZERO(v0,) []ONE(v1,) []R(a,b,) ");

  auto partial = std::make_shared<ConstraintLanguage>(2);
  partial->add(Relation("R", 2, 2, {{0, 1}, {1, 0}}));
  partial->add(Relation("ONE", 2, 1, {{1}}));
  CHECK_THROWS_AS(standard_to_existential(StandardFormula{partial, {"y", "x"}, {{}, {0}, {1}}, {{0, {0, 1}}}}),
                  Error);
}

TEST_CASE("property: standard_to_existential preserves truth and block count") {
  std::mt19937 rng(62);
  int trues = 0;
  for (int iter = 0; iter < 300; ++iter) {
    auto phi = qtest::random_standard(rng, 2 + static_cast<int>(rng() % 2));
    Formula out = standard_to_existential(phi);
    const bool t = standard_truth(phi);
    trues += t;
    CHECK(brute_force_truth(out) == t);
    CHECK(out.nonempty_blocks() <= qtest::nonempty_blocks(phi.blocks));
  }
  CHECK(trues > 20);
  CHECK(trues < 280);
}

TEST_CASE("hom_equiv_transfer examples") {
  Formula phi = parse(
      "domain 2\nrelation R 2 {(0,1) (1,0)}\nrelation Z 1 {(0)}\nforall y\nexists x\n"
      "constraint [y=1] Z(x)\nconstraint [y=0] R(x, x)\n");
  auto same = phi.language_ptr();
  Formula id = hom_equiv_transfer(phi, same, {0, 1}, {0, 1});
  CHECK(serialize_instance(id) == serialize_instance(phi));

  // The non-homomorphism direction is rejected.
  CHECK_THROWS_AS(hom_equiv_transfer(phi, same, {1, 1}, {0, 1}), Error);

  // Three values onto two: the universal splits into two digits.
  Formula big = parse("domain 3\nrelation Z 1 {(0)}\nforall y\nexists x\nconstraint [y=2] Z(x)\n");
  auto two = std::make_shared<ConstraintLanguage>(2);
  two->add(Relation("Z", 2, 1, {{0}}));
  Formula split = hom_equiv_transfer(big, two, {0, 0, 0}, {0, 0});
  CHECK(split.names() == std::vector<std::string>{"y.0", "y.1", "x"});
  CHECK(heads(split) == "[y.0=1;y.1=0;]Z(x,) ");
  CHECK(brute_force_truth(split) == brute_force_truth(big));

  auto lone = std::make_shared<ConstraintLanguage>(1);
  lone->add(Relation("Z", 1, 1, {{0}}));
  CHECK_THROWS_AS(hom_equiv_transfer(big, lone, {0, 0, 0}, {0}), Error);
}

TEST_CASE("property: hom_equiv_transfer preserves truth in both directions") {
  std::mt19937 rng(63);
  int trues = 0, total = 0;
  for (int iter = 0; iter < 300; ++iter) {
    const int d = 2 + static_cast<int>(rng() % 2);
    auto p = qtest::random_hom_pair(rng, d);
    REQUIRE(is_homomorphism(*p.small, *p.large, p.include));
    REQUIRE(is_homomorphism(*p.large, *p.small, p.fold));
    Formula up = qtest::random_formula(rng, p.small, 5);
    Formula moved_up = hom_equiv_transfer(up, p.large, p.include, p.fold);
    Formula down = qtest::random_formula(rng, p.large, 5);
    Formula moved_down = hom_equiv_transfer(down, p.small, p.fold, p.include);
    const bool tu = brute_force_truth(up), td = brute_force_truth(down);
    CHECK(brute_force_truth(moved_up) == tu);
    CHECK(brute_force_truth(moved_down) == td);
    CHECK(moved_up.nonempty_blocks() <= up.nonempty_blocks());
    CHECK(moved_down.nonempty_blocks() <= down.nonempty_blocks());
    trues += tu + td;
    total += 2;
  }
  CHECK(trues > total / 10);
  CHECK(trues < total * 9 / 10);
}

TEST_CASE("nae_normalize examples") {
  const std::string lang = "domain 2\nrelation NAE 3 {(0,0,1) (0,1,0) (0,1,1) (1,0,0) (1,0,1) (1,1,0)}\n"
                           "relation F 1 {(0)}\nrelation T 1 {(1)}\n";
  Formula one = parse(lang + "exists x\nconstraint [] T(x)\n");
  Formula n1 = nae_normalize(one);
  CHECK(heads(n1) == "[]NAE(c,c,c',) []NAE(x,x,c',) ");
  CHECK(n1.language().relations().size() == 1);
  CHECK(brute_force_truth(n1));

  Formula both = parse(lang + "exists x\nconstraint [] F(x)\nconstraint [] T(x)\n");
  CHECK_FALSE(brute_force_truth(both));
  CHECK_FALSE(brute_force_truth(nae_normalize(both)));

  Formula only = parse(lang + "exists a b\nconstraint [] NAE(a, b, b)\n");
  CHECK(heads(nae_normalize(only)) == "[]NAE(c,c,c',) []NAE(a,b,b,) ");

  Formula other = parse("domain 2\nrelation EQ 2 {(0,0) (1,1)}\nexists a b\nconstraint [] EQ(a, b)\n");
  CHECK_THROWS_AS(nae_normalize(other), Error);
}

TEST_CASE("property: nae_normalize preserves truth") {
  std::mt19937 rng(64);
  auto lang = std::make_shared<ConstraintLanguage>(2);
  lang->add(nae_relation());
  lang->add(Relation("F", 2, 1, {{0}}));
  lang->add(Relation("T", 2, 1, {{1}}));
  int trues = 0;
  for (int iter = 0; iter < 300; ++iter) {
    Formula phi = qtest::random_formula(rng, lang, 6, 5);
    Formula out = nae_normalize(phi);
    const bool t = brute_force_truth(phi);
    trues += t;
    INFO(serialize_instance(phi));
    CHECK(brute_force_truth(out) == t);
    CHECK(out.nonempty_blocks() <= phi.nonempty_blocks());
  }
  CHECK(trues > 20);
  CHECK(trues < 280);
}

TEST_CASE("critical family structure") {
  auto f2 = critical_family_eq_const(2, 0, 1);
  const auto& l = *f2.language;
  const int eq = l.find("EQ"), r0 = l.find("R0"), r1 = l.find("R1");
  REQUIRE(f2.sets.size() == 2);
  REQUIRE(f2.sets[0].size() == 2);
  CHECK(f2.sets[0][0].relation == eq);
  CHECK(f2.sets[0][0].vars == std::vector<int>{0, 1});
  CHECK(f2.sets[0][1].relation == r0);
  CHECK(f2.sets[0][1].vars == std::vector<int>{0});
  REQUIRE(f2.sets[1].size() == 1);
  CHECK(f2.sets[1][0].relation == r1);
  CHECK(f2.sets[1][0].vars == std::vector<int>{1});

  auto f3 = critical_family_eq_const(3, 0, 1);
  REQUIRE(f3.sets.size() == 3);
  REQUIRE(f3.sets[1].size() == 1);
  CHECK(f3.sets[1][0].vars == std::vector<int>{1, 2});
  CHECK(f3.sets[2][0].vars == std::vector<int>{2});

  CHECK_THROWS_AS(critical_family_eq_const(1, 0, 1), Error);
  CHECK_THROWS_AS(critical_family_eq_const(3, 1, 1), Error);
}

TEST_CASE("property: critical families are unsatisfiable and every leave-one-out is satisfiable") {
  for (int d = 2; d <= 3; ++d)
    for (int n = 2; n <= 6; ++n) {
      auto fam = critical_family_eq_const(n, 0, d - 1, d);
      std::vector<int> all;
      for (int i = 0; i < n; ++i) all.push_back(i);
      CHECK_FALSE(csp_satisfiable(fam, all));
      for (int skip = 0; skip < n; ++skip) {
        std::vector<int> rest;
        for (int i = 0; i < n; ++i)
          if (i != skip) rest.push_back(i);
        CHECK(csp_satisfiable(fam, rest));
      }
    }
}

TEST_CASE("property: the criticality reduction decides unsatisfiability") {
  // All CNFs of one to three 3-clauses over up to three variables, sampled.
  std::mt19937 rng(65);
  int sats = 0;
  for (int iter = 0; iter < 300; ++iter) {
    Cnf cnf = qtest::random_cnf(rng, 1 + static_cast<int>(rng() % 3), 1 + static_cast<int>(rng() % 3), 3);
    Formula phi = critical_hardness_instance(cnf);
    const bool sat = cnf_satisfiable(cnf);
    sats += sat;
    CHECK(brute_force_truth(phi) == !sat);
    CHECK(phi.nonempty_blocks() <= 2);
  }
  CHECK(sats > 0);
  CHECK(sats < 300);
  Cnf unsat{1, {{{0, true}, {0, true}, {0, true}}, {{0, false}, {0, false}, {0, false}}}};
  CHECK(brute_force_truth(critical_hardness_instance(unsat)));
  Cnf single{2, {{{0, true}, {1, false}, {0, true}}}};
  CHECK_FALSE(brute_force_truth(critical_hardness_instance(single)));
}

TEST_CASE("extended 2-SAT clause encoding") {
  // x1 or y2 or not x3 or not y5 or y8; ids x1=0 y2=1 x3=2 y5=3 y8=4
  std::vector<std::string> names{"x1", "y2", "x3", "y5", "y8"};
  std::vector<bool> universal{false, true, false, true, true};
  Clause c{{0, true}, {1, true}, {2, false}, {3, false}, {4, true}};
  std::vector<int> fresh;
  HornPins pins;
  auto out = extended_clause_encode(c, ClauseMode::TwoSat, universal, names, fresh, pins);
  REQUIRE(out.size() == 1);
  CHECK(out[0].guard == std::vector<GuardAtom>{{1, 0}, {3, 1}, {4, 0}});
  CHECK(twosat_language()->at(out[0].relation).name() == "R_01");
  CHECK(out[0].head == std::vector<int>{0, 2});
  CHECK(fresh.empty());

  Clause three{{0, true}, {2, false}, {2, true}};
  CHECK_FALSE(clause_fits(three, ClauseMode::TwoSat, universal));
  CHECK_THROWS_AS(extended_clause_encode(three, ClauseMode::TwoSat, universal, names, fresh, pins), Error);
}

TEST_CASE("extended Horn clause encoding") {
  auto gh = horn_language();
  // x1 or not x2 or y1 or not y2 or not x3 or not x4
  std::vector<std::string> names{"x1", "x2", "y1", "y2", "x3", "x4"};
  std::vector<bool> universal{false, false, true, true, false, false};
  Clause c{{0, true}, {1, false}, {2, true}, {3, false}, {4, false}, {5, false}};
  std::vector<int> fresh;
  HornPins pins;
  auto out = extended_clause_encode(c, ClauseMode::Horn, universal, names, fresh, pins);
  REQUIRE(fresh.size() == 1);
  const int v = fresh[0];
  const std::vector<GuardAtom> g{{2, 0}, {3, 1}};
  REQUIRE(out.size() == 2);
  CHECK(out[0] == ExtendedConstraint{g, gh->find("H"), {1, 4, v}});
  CHECK(out[1] == ExtendedConstraint{g, gh->find("H"), {v, 5, 0}});

  // not y1 or not x1 or x2
  std::vector<std::string> n2{"y1", "x1", "x2"};
  std::vector<bool> u2{true, false, false};
  std::vector<int> f2;
  HornPins p2;
  auto o2 = extended_clause_encode({{0, false}, {1, false}, {2, true}}, ClauseMode::Horn, u2, n2, f2, p2);
  REQUIRE(f2.size() == 1);
  REQUIRE(o2.size() == 2);
  CHECK(o2[0] == ExtendedConstraint{{}, gh->find("R1"), {f2[0]}});
  CHECK(o2[1] == ExtendedConstraint{{{0, 1}}, gh->find("H"), {f2[0], 1, 2}});
  CHECK(p2.one == f2[0]);

  CHECK_THROWS_AS(extended_clause_encode({{1, true}, {2, true}}, ClauseMode::Horn, u2, n2, f2, p2), Error);
}

TEST_CASE("property: encode_qcnf preserves truth in both modes") {
  std::mt19937 rng(66);
  for (auto mode : {ClauseMode::TwoSat, ClauseMode::Horn}) {
    int trues = 0;
    for (int iter = 0; iter < 300; ++iter) {
      auto q = qtest::random_qcnf(rng, mode);
      auto u = universal_mask(q);
      for (const auto& c : q.clauses) REQUIRE(clause_fits(c, mode, u));
      Formula phi = encode_qcnf(q, mode);
      const bool t = qcnf_truth(q);
      trues += t;
      CHECK(brute_force_truth(phi) == t);
    }
    CHECK(trues > 20);
    CHECK(trues < 280);
  }
}

TEST_CASE("horn_to_setfunction on a single clause") {
  auto f = witness_set_function();
  REQUIRE(classify_set_function(f).hard);
  QuantifiedCnf q{{"y", "x"}, {{Quantifier::Forall, {0}}, {Quantifier::Exists, {1}}}, {{{0, false}, {1, true}}}};
  Formula phi = horn_to_setfunction(q, f, CoherentChoice{0b001, 0b010, 0b010, 1});
  const auto& lang = phi.language();
  int m = lang.find("M1");
  REQUIRE(m >= 0);
  std::vector<Tuple> expect;
  for (int b = 0; b < 3; ++b)
    for (int v = 0; v < 3; ++v)
      if (b != 1 || v == 1) expect.push_back({b, v});
  CHECK(lang.at(m).tuples() == expect);
  CHECK(is_set_function_polymorphism(f, lang));
  REQUIRE(phi.constraints().size() == 3);
  for (const auto& ec : phi.constraints()) {
    REQUIRE(ec.guard.size() == 1);
    CHECK(lang.at(ec.relation).size() == (ec.guard[0].value == 1 ? 1u : 3u));
  }
  CHECK(brute_force_truth(phi) == qcnf_truth(q));

  CHECK_THROWS_AS(horn_to_setfunction(q, f, CoherentChoice{0b001, 0b011, 0b010, 1}), Error);
  CHECK_THROWS_AS(horn_to_setfunction(q, *builtin_set_function("min", 2)), Error);
  QuantifiedCnf notHorn{{"a", "b"}, {{Quantifier::Exists, {0, 1}}}, {{{0, true}, {1, true}}}};
  CHECK_THROWS_AS(horn_to_setfunction(notHorn, f), Error);
}

TEST_CASE("property: horn_to_setfunction is f-invariant and preserves truth") {
  std::mt19937 rng(67);
  std::vector<SetFunction> hard{witness_set_function()};
  while (hard.size() < 4) {
    auto g = SetFunction::from("g", 3, [&](Subset s) {
      return (s & (s - 1)) == 0 ? std::countr_zero(s) : static_cast<int>(rng() % 3);
    });
    if (!classify_set_function(g).hard) continue;
    try {
      default_coherent_choice(g);
    } catch (const Error&) {
      continue;
    }
    hard.push_back(g);
  }
  int trues = 0;
  for (int iter = 0; iter < 300; ++iter) {
    const auto& f = hard[iter % hard.size()];
    auto q = qtest::random_qcnf(rng, ClauseMode::Horn, 5, 4);
    Formula phi = horn_to_setfunction(q, f);
    CHECK(is_set_function_polymorphism(f, phi.language()));
    const bool t = qcnf_truth(q);
    trues += t;
    CHECK(brute_force_truth(phi) == t);
    CHECK(phi.nonempty_blocks() <= encode_qcnf(q, ClauseMode::Horn).nonempty_blocks());
  }
  CHECK(trues > 20);
  CHECK(trues < 280);
}

TEST_CASE("normalize_horn_width keeps truth and bounds width") {
  std::mt19937 rng(68);
  for (int iter = 0; iter < 100; ++iter) {
    auto q = qtest::random_qcnf(rng, ClauseMode::Horn, 6, 4);
    auto n = normalize_horn_width(q);
    auto u = universal_mask(n);
    for (const auto& c : n.clauses) {
      int ex = 0;
      for (const auto& l : c) ex += !u[l.var];
      CHECK(ex <= 3);
      CHECK(clause_fits(c, ClauseMode::Horn, u));
    }
    CHECK(qcnf_truth(n) == qcnf_truth(q));
  }
}

TEST_CASE("Horn gadget for CNF satisfiability") {
  Cnf one{1, {{{0, true}}}};
  auto q = pi2_gadget_clauses(one);
  // y1 = 0, x1_0 = 1, x1_1 = 2, d = 3
  CHECK(q.names == std::vector<std::string>{"y1", "x1_0", "x1_1", "d"});
  std::vector<Clause> expect{{{1, false}, {2, false}},
                             {{0, false}, {3, false}, {2, true}},
                             {{0, true}, {3, false}, {1, true}},
                             {{0, true}, {3, true}}};
  CHECK(q.clauses == expect);
  CHECK(qcnf_truth(q));
  CHECK(brute_force_truth(pi2_gadget(one)));

  Cnf contra{1, {{{0, true}}, {{0, false}}}};
  CHECK_FALSE(brute_force_truth(pi2_gadget(contra)));

  CHECK_THROWS_AS(pi2_gadget(Cnf{4, {{{0, true}, {1, true}, {2, true}, {3, true}}}}), Error);
}

TEST_CASE("property: the Horn gadget tracks satisfiability") {
  std::mt19937 rng(69);
  int sats = 0;
  for (int iter = 0; iter < 200; ++iter) {
    Cnf cnf = qtest::random_cnf(rng, 1 + static_cast<int>(rng() % 3), 1 + static_cast<int>(rng() % 4),
                                1 + static_cast<int>(rng() % 3));
    auto q = pi2_gadget_clauses(cnf);
    auto u = universal_mask(q);
    for (const auto& c : q.clauses) CHECK(clause_fits(c, ClauseMode::Horn, u));
    const bool sat = cnf_satisfiable(cnf);
    sats += sat;
    CHECK(brute_force_truth(pi2_gadget(cnf)) == sat);
  }
  CHECK(sats > 0);
  CHECK(sats < 200);

  // With outer universals the gadget decides forall w exists y.
  for (int iter = 0; iter < 60; ++iter) {
    Cnf cnf = qtest::random_cnf(rng, 3, 1 + static_cast<int>(rng() % 3), 2);
    QuantifiedCnf direct{{"w", "a", "b"}, {{Quantifier::Forall, {0}}, {Quantifier::Exists, {1, 2}}}, cnf.clauses};
    CHECK(brute_force_truth(pi2_gadget(cnf, 1)) == qcnf_truth(direct));
  }
}
