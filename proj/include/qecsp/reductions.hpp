#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qecsp/formula.hpp"
#include "qecsp/polymorphism.hpp"

namespace qecsp {

// ---------------------------------------------------------------------------
// Clause inputs

struct Literal {
  int var;
  bool positive;
  bool operator==(const Literal&) const = default;
};

using Clause = std::vector<Literal>;

struct Cnf {
  int num_vars = 0;
  std::vector<Clause> clauses;
};

bool cnf_satisfiable(const Cnf& cnf);

struct QBlock {
  Quantifier q;
  std::vector<int> vars;
};

// Quantified CNF over boolean variables 0..names.size()-1. Blocks in prefix
// order; every variable occurs in exactly one block.
struct QuantifiedCnf {
  std::vector<std::string> names;
  std::vector<QBlock> blocks;
  std::vector<Clause> clauses;
};

// Direct game evaluation of the clauses, independent of the constraint model.
bool qcnf_truth(const QuantifiedCnf& q);

// ---------------------------------------------------------------------------
// Mixed constraints and the standard model

// Truncation R@d1.d2... : fixes the listed positions (in order) to the values
// and keeps the rest. Added to gamma unless a relation of that name exists.
int truncation(ConstraintLanguage& gamma, int relation, const std::vector<int>& fixed_positions,
               const std::vector<int>& values);

// R(args) where some arguments are universal: one extended constraint per
// assignment of the universal positions, guarded by that assignment, with the
// truncated relation on the existential positions. Always |D|^j constraints
// for j universal positions.
std::vector<ExtendedConstraint> constraint_to_extended(ConstraintLanguage& gamma, int relation,
                                                       const std::vector<int>& args,
                                                       const std::vector<bool>& universal);

struct StandardConstraint {
  int relation;
  std::vector<int> args;
};

// A formula in the standard model: constraints may mention universal
// variables directly. Blocks use the Formula layout X1, Y1, X2, ...
struct StandardFormula {
  std::shared_ptr<const ConstraintLanguage> language;
  std::vector<std::string> names;
  std::vector<std::vector<int>> blocks;
  std::vector<StandardConstraint> constraints;
};

bool standard_truth(const StandardFormula& phi);

// Pins one fresh variable per domain value with the constant relations of the
// language (found by content) and substitutes them for universal arguments.
Formula standard_to_existential(const StandardFormula& phi);

// ---------------------------------------------------------------------------
// Homomorphic equivalence

// map sends values of from's domain to to's; relations matched by name.
bool is_homomorphism(const ConstraintLanguage& from, const ConstraintLanguage& to,
                     const std::vector<int>& map);

// Moves phi to the target structure. Universal variables keep an injective
// coding when the target is at least as large, and are otherwise split into
// s variables named "<y>.0", "<y>.1", ... holding the big-endian base-|B'|
// digits of the original value.
Formula hom_equiv_transfer(const Formula& phi, std::shared_ptr<const ConstraintLanguage> target,
                           const std::vector<int>& h, const std::vector<int>& h_back);

// ---------------------------------------------------------------------------
// Boolean NAE normalization

// Heads over NAE and the two constant relations (found by content) become
// NAE heads only, using fresh c, c' with NAE(c,c,c').
Formula nae_normalize(const Formula& phi);

// ---------------------------------------------------------------------------
// Criticality

struct FamilyAtom {
  int relation;           // index into CriticalFamily::language
  std::vector<int> vars;  // 0-based v1..vn
};

struct CriticalFamily {
  std::shared_ptr<const ConstraintLanguage> language;
  int num_vars = 0;
  std::vector<std::vector<FamilyAtom>> sets;
};

// Sets {=(v1,v2), R_a(v1)}, {=(v2,v3)}, ..., {R_b(vn)} over the given domain.
CriticalFamily critical_family_eq_const(int n, int a, int b, int domain = 2);

bool csp_satisfiable(const CriticalFamily& fam, const std::vector<int>& sets_used);

// forall Y exists X over the family with one set per clause; values 0 and 1
// stand for false and true. False iff cnf is satisfiable. One-clause inputs
// are padded by repeating the clause.
Formula critical_hardness_instance(const Cnf& cnf);

// ---------------------------------------------------------------------------
// Extended 2-SAT and Horn clause encodings

enum class ClauseMode { TwoSat, Horn };

// Gamma_2 = {R_0, R_1, R_00, R_01, R_11} where R_a is {0,1}^k minus a.
std::shared_ptr<const ConstraintLanguage> twosat_language();
// Gamma_H = {H, R0, R1}, H = {0,1}^3 minus (1,1,0).
std::shared_ptr<const ConstraintLanguage> horn_language();

// Whether the clause fits the mode: at most two existential literals for
// 2-SAT, at most one positive existential literal for Horn.
bool clause_fits(const Clause& c, ClauseMode mode, const std::vector<bool>& universal);

// Clause to extended constraints over the mode's language. Fresh existential
// variables are appended to names and reported in fresh; Horn encodings share
// one variable pinned to 1 and one pinned to 0 through pins (-1 when not yet
// created).
struct HornPins {
  int one = -1;
  int zero = -1;
};
std::vector<ExtendedConstraint> extended_clause_encode(const Clause& c, ClauseMode mode,
                                                       const std::vector<bool>& universal,
                                                       std::vector<std::string>& names,
                                                       std::vector<int>& fresh, HornPins& pins);

// Whole-formula encoder; fresh variables join the last existential block.
Formula encode_qcnf(const QuantifiedCnf& q, ClauseMode mode);

// ---------------------------------------------------------------------------
// Hard set functions

struct CoherentChoice {
  Subset c0 = 0;
  Subset c1 = 0;
  Subset c = 0;
  int ct = 0;
};

// First disjoint coherent pair in mask order, first coherent set other than
// D, and its least element. Throws when f is easy or no such set exists.
CoherentChoice default_coherent_choice(const SetFunction& f);

// Splits Horn clauses with more than three existential literals.
QuantifiedCnf normalize_horn_width(const QuantifiedCnf& q);

Formula horn_to_setfunction(const QuantifiedCnf& q, const SetFunction& f);
Formula horn_to_setfunction(const QuantifiedCnf& q, const SetFunction& f, const CoherentChoice& choice);

// ---------------------------------------------------------------------------
// Horn gadget for CNF satisfiability

// The first `outer` variables of cnf are universal (w) and the rest are the
// y variables of the gadget. Clause level, before encoding.
QuantifiedCnf pi2_gadget_clauses(const Cnf& cnf, int outer = 0);
Formula pi2_gadget(const Cnf& cnf, int outer = 0);

}  // namespace qecsp
