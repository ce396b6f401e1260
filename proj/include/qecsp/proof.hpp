#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qecsp/formula.hpp"
#include "qecsp/scheme.hpp"

namespace qecsp {

// Total assignment to one universal block, sorted by variable id.
using BlockAssignment = std::vector<GuardAtom>;

// Conjunction of a single-block formula, over positions in existential order.
Csp single_block_csp(const Formula& phi);

// Instantiates the first universal block; g must bind exactly Y1, sorted.
Formula instantiate_block(const Formula& phi, const BlockAssignment& g);

struct ProofStep {
  enum class Rule { R1, R2, R3 };
  int id = 0;
  Rule rule = Rule::R1;
  std::vector<BlockAssignment> ctx;  // R1
  int in = 0;                        // R1: fingerprint id
  int out = 0;                       // R1, R3: fingerprint id
  int a = 0, b = 0;                  // R2: step ids
  BlockAssignment g;                 // R3
  int sub = 0;                       // R3: step id
};

struct Proof {
  std::string scheme_id;
  std::string formula_digest;
  std::vector<std::pair<int, std::string>> fingerprints;  // id, encoding
  std::vector<ProofStep> steps;
  int conclusion = 0;
};

// Text form. Assignments are written with the formula's variable names.
std::string write_proof(const Formula& phi, const Proof& p);
// Throws Error on malformed text or unknown variable names.
Proof parse_proof(const Formula& phi, const std::string& text);

struct VerifyResult {
  bool accepted = false;
  std::string reason;  // empty when accepted
};

VerifyResult verify_proof(const Formula& phi, const Proof& p);
VerifyResult verify_proof(const Formula& phi, const std::string& text);

// Result of saturating one level; chain lists the fingerprints adopted at
// the top level in order (each strictly below the previous one after the
// first).
struct Derivation {
  Fingerprint fingerprint;
  std::vector<Fingerprint> chain;
};

// start must be over a prefix of X1 (arity at most |X1|).
Derivation derive_minimal(const Formula& phi, const Fingerprint& start, const Scheme& scheme);

struct Verdict {
  bool truth = false;
  std::optional<Proof> proof;          // when false
  std::optional<Fingerprint> stable;   // when true
  std::vector<int> first_block;        // when true: values for X1 in order
  int proof_steps = 0;                 // derivation steps recorded
};

// Throws when the scheme does not support the formula's language.
Verdict solve(const Formula& phi, const Scheme& scheme);

}  // namespace qecsp
