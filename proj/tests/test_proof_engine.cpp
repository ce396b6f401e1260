#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace qecsp;
using qtest::parse;

namespace {

PowersetScheme min_scheme(int d = 2) { return PowersetScheme(*builtin_set_function("min", d)); }

const char* kHornTrue = R"(domain 2
relation H 3 {(0,0,0) (0,0,1) (0,1,0) (0,1,1) (1,0,0) (1,0,1) (1,1,1)}
relation R0 1 {(0)}
relation R1 1 {(1)}
forall y
exists x z
constraint [y=1] R1(x)
constraint [y=0] R0(x)
constraint [] H(x, x, z)
)";

const char* kFalseTwoBlock = R"(domain 2
relation R0 1 {(0)}
relation R1 1 {(1)}
relation EQ 2 {(0,0) (1,1)}
exists a
forall y
exists b
constraint [] EQ(a, b)
constraint [y=0] R0(b)
constraint [y=1] R1(b)
)";

Verdict solve_min(const Formula& phi) { return solve(phi, min_scheme(phi.domain())); }

}  // namespace

TEST_CASE("derive_minimal on a single block is one inference") {
  Formula phi = parse("domain 2\nrelation R0 1 {(0)}\nrelation R1 1 {(1)}\nexists x\nconstraint [] R0(x)\nconstraint [] R1(x)\n");
  auto s = min_scheme();
  auto d = derive_minimal(phi, s.top(), s);
  CHECK(s.encode(d.fingerprint) == "P! 1");
  CHECK(d.chain.size() == 1);
}

TEST_CASE("derive_minimal stabilises on a true formula") {
  Formula phi = parse(kHornTrue);
  auto s = min_scheme();
  auto d = derive_minimal(phi, s.top(), s);
  CHECK_FALSE(s.is_empty(d.fingerprint));
  CHECK(arity_of(d.fingerprint) == 0);
  CHECK(brute_force_truth(phi));
}

TEST_CASE("derive_minimal empties the gadget of an unsatisfiable CNF") {
  Cnf cnf{1, {{{0, true}}, {{0, false}}}};
  Formula phi = pi2_gadget(cnf);
  CHECK_FALSE(brute_force_truth(phi));
  auto s = min_scheme();
  CHECK(s.is_empty(derive_minimal(phi, s.top(), s).fingerprint));
}

TEST_CASE("solve examples") {
  Formula one = parse("domain 2\nrelation R1 1 {(1)}\nexists x\nconstraint [] R1(x)\n");
  auto v = solve(one, ConstantScheme(2, 1));
  CHECK(v.truth);
  CHECK(v.first_block == std::vector<int>{1});
  CHECK_FALSE(v.proof.has_value());

  // The hardness instance of a satisfiable CNF is false, of an unsatisfiable one true.
  Cnf sat{3, {{{0, true}, {1, true}, {2, true}}, {{0, false}, {1, true}, {2, false}}, {{0, true}, {1, false}, {2, true}}}};
  Formula hs = critical_hardness_instance(sat);
  auto vs = solve_min(hs);
  CHECK_FALSE(vs.truth);
  REQUIRE(vs.proof.has_value());
  CHECK(verify_proof(hs, *vs.proof).accepted);

  Cnf unsat{1, {{{0, true}}, {{0, false}}}};
  Formula hu = critical_hardness_instance(unsat);
  CHECK(brute_force_truth(hu));
  CHECK(solve_min(hu).truth);

  ConstraintLanguage neq(2);
  neq.add(Relation("NEQ", 2, 2, {{0, 1}, {1, 0}}));
  Formula bad = parse("domain 2\nrelation NEQ 2 {(0,1) (1,0)}\nexists x y\nconstraint [] NEQ(x, y)\n");
  CHECK_THROWS_AS(solve_min(bad), Error);
}

TEST_CASE("proof text round trip and verification") {
  Formula phi = parse(kFalseTwoBlock);
  auto v = solve_min(phi);
  REQUIRE_FALSE(v.truth);
  REQUIRE(v.proof.has_value());
  const std::string text = write_proof(phi, *v.proof);
  CHECK(text.rfind("proof v1 scheme=setfn:0.1.0 formula=" + formula_digest(phi) + "\n", 0) == 0);
  CHECK(write_proof(phi, parse_proof(phi, text)) == text);
  CHECK(verify_proof(phi, text).accepted);
  CHECK(text.find("step 1 R1 ctx=y=0 in=") != std::string::npos);
  CHECK(text.find(" R3 g=y=0 sub=") != std::string::npos);
}

TEST_CASE("tampered proofs are rejected") {
  Formula phi = parse(kFalseTwoBlock);
  auto s = min_scheme();
  const std::string text = write_proof(phi, *solve_min(phi).proof);

  // One fingerprint byte flipped.
  std::string fp = text;
  auto at = fp.find("fp 2 P 2 1 1");
  REQUIRE(at != std::string::npos);
  fp[at + 11] = '3';
  CHECK(verify_proof(phi, fp).reason == "step 1: inference output differs");
  CHECK(verify_proof(phi, text + "\n").reason == "proof text is not in canonical form");

  // A different formula.
  Formula other = parse(std::string(kFalseTwoBlock) + "constraint [] EQ(b, b)\n");
  auto r = verify_proof(other, text);
  CHECK_FALSE(r.accepted);
  CHECK(r.reason == "formula digest mismatch");

  std::string scheme = text;
  scheme.replace(scheme.find("setfn:0.1.0"), 11, "bogus:1");
  CHECK(verify_proof(phi, scheme).reason.find("undeclared scheme") == 0);

  std::string forward = text;
  forward.replace(forward.find("sub=1"), 5, "sub=9");
  CHECK_FALSE(verify_proof(phi, forward).accepted);

  // A proof that concludes with a nonempty fingerprint, for a true formula.
  Formula t = parse("domain 2\nrelation R1 1 {(1)}\nexists x\nconstraint [] R1(x)\n");
  Proof p;
  p.scheme_id = s.id();
  p.formula_digest = formula_digest(t);
  p.fingerprints = {{1, s.encode(s.top())}, {2, s.encode(s.infer(s.top(), single_block_csp(t)))}};
  ProofStep st;
  st.id = 1;
  st.in = 1;
  st.out = 2;
  p.steps = {st};
  p.conclusion = 1;
  auto nr = verify_proof(t, p);
  CHECK_FALSE(nr.accepted);
  CHECK(nr.reason == "conclusion fingerprint is not empty");

  CHECK_FALSE(verify_proof(phi, "").accepted);
  CHECK_FALSE(verify_proof(phi, "proof v1\n").accepted);
}

TEST_CASE("any well-formed step DAG is accepted") {
  Formula phi = parse(kFalseTwoBlock);
  Proof p = *solve_min(phi).proof;
  // An unused extra inference step ahead of the chain.
  ProofStep extra = p.steps.front();
  extra.id = 100;
  p.steps.insert(p.steps.begin(), extra);
  CHECK(verify_proof(phi, p).accepted);
}

TEST_CASE("property: solve agrees with the oracle and certificates check out") {
  std::mt19937 rng(51);
  const qtest::SchemeKind kinds[] = {qtest::SchemeKind::kConstant, qtest::SchemeKind::kSetFunction,
                                     qtest::SchemeKind::kNu, qtest::SchemeKind::kMaltsev};
  int falses = 0, trues = 0;
  for (int iter = 0; iter < 400; ++iter) {
    auto kind = kinds[iter % 4];
    auto inst = qtest::random_schemed_instance(rng, kind);
    const Formula& phi = inst.phi;
    const Scheme& s = *inst.scheme;
    INFO(qtest::kind_name(kind) << "\n" << serialize_instance(phi));
    const bool truth = brute_force_truth(phi);
    Verdict v = solve(phi, s);
    REQUIRE(v.truth == truth);
    if (!truth) {
      ++falses;
      REQUIRE(v.proof.has_value());
      const std::string text = write_proof(phi, *v.proof);
      CHECK(verify_proof(phi, text).accepted);
      int n = static_cast<int>(phi.existential_order().size());
      long long m = s.chain_bound(n) + 1;
      CHECK(static_cast<long long>(v.proof->steps.size()) <= qtest::proof_size_bound(phi.existential_blocks(), m));
    } else {
      ++trues;
      REQUIRE(v.first_block.size() == phi.first_block().size());
      CHECK(brute_force_truth(qtest::pin_first_block(phi, v.first_block)));
    }
  }
  CHECK(falses > 50);
  CHECK(trues > 50);
}

TEST_CASE("property: the top-level derivation chain strictly decreases") {
  std::mt19937 rng(52);
  for (int iter = 0; iter < 200; ++iter) {
    auto inst = qtest::random_schemed_instance(rng, static_cast<qtest::SchemeKind>(iter % 4));
    const Scheme& s = *inst.scheme;
    auto d = derive_minimal(inst.phi, s.top(), s);
    REQUIRE_FALSE(d.chain.empty());
    for (std::size_t i = 1; i < d.chain.size(); ++i) {
      CHECK(s.leq(d.chain[i], d.chain[i - 1]));
      CHECK_FALSE(s.leq(d.chain[i - 1], d.chain[i]));
    }
    CHECK(static_cast<long long>(d.chain.size()) <= s.chain_bound(static_cast<int>(inst.phi.first_block().size())) + 1);
    CHECK(s.equiv(d.chain.back(), d.fingerprint));
  }
}

TEST_CASE("property: mutated proofs are rejected") {
  std::mt19937 rng(53);
  int mutations = 0;
  for (int iter = 0; iter < 400 && mutations < 600; ++iter) {
    auto inst = qtest::random_schemed_instance(rng, static_cast<qtest::SchemeKind>(iter % 4));
    auto v = solve(inst.phi, *inst.scheme);
    if (v.truth) continue;
    const std::string text = write_proof(inst.phi, *v.proof);
    for (int k = 0; k < 20; ++k, ++mutations) {
      std::string m = qtest::mutate(rng, text);
      INFO(text << "---\n" << m);
      CHECK_FALSE(verify_proof(inst.phi, m).accepted);
    }
  }
  CHECK(mutations >= 600);
}
