#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qecsp/polymorphism.hpp"
#include "qecsp/relation.hpp"

namespace qecsp {

// ---------------------------------------------------------------------------
// Fingerprints

struct ConstantFp {
  int arity = 0;
  bool empty = false;
  bool operator==(const ConstantFp&) const = default;
};

// bottom, or one nonempty mask per coordinate.
struct PowersetFp {
  int arity = 0;
  bool bottom = false;
  std::vector<Subset> masks;
  bool operator==(const PowersetFp&) const = default;
};

// One relation per scope {i1 < ... < im}, 1 <= m <= k, scopes in
// lexicographic order (see nu_scopes). Non-bottom fingerprints have no empty
// slot.
struct NuFp {
  int arity = 0;
  int k = 3;
  bool bottom = false;
  std::vector<std::vector<Tuple>> slots;
  bool operator==(const NuFp&) const = default;
};

// Generating set whose closure under the Mal'tsev operation is the relation.
// Tuples sorted and unique; empty vector means the empty relation.
struct MaltsevFp {
  int arity = 0;
  std::vector<Tuple> tuples;
  bool operator==(const MaltsevFp&) const = default;
};

using Fingerprint = std::variant<ConstantFp, PowersetFp, NuFp, MaltsevFp>;

int arity_of(const Fingerprint& f);

// A conjunction of constraints over variables 0..n-1.
struct CspAtom {
  const Relation* relation;
  std::vector<int> vars;
};

struct Csp {
  int domain = 1;
  int num_vars = 0;
  std::vector<CspAtom> atoms;
};

// All solutions of the CSP, lexicographic. Exponential; tests and
// desk-scale inference only.
std::vector<Tuple> csp_solutions(const Csp& c);

// ---------------------------------------------------------------------------
// Scheme contract

class Scheme {
 public:
  virtual ~Scheme() = default;

  // Self-describing id, e.g. "constant:1" or "setfn:0.1.0"; see make_scheme.
  virtual std::string id() const = 0;
  int domain() const { return domain_; }

  virtual Fingerprint top() const = 0;
  virtual Fingerprint project(const Fingerprint& f, int k) const = 0;
  virtual bool leq(const Fingerprint& a, const Fingerprint& b) const = 0;
  bool equiv(const Fingerprint& a, const Fingerprint& b) const { return leq(a, b) && leq(b, a); }
  virtual bool is_empty(const Fingerprint& f) const = 0;
  // f applies to variables 0..arity(f)-1 of c.
  virtual Fingerprint infer(const Fingerprint& f, const Csp& c) const = 0;
  virtual int cons(const Fingerprint& f) const = 0;
  // Maximum number of strict decreases in a chain of arity-n fingerprints.
  virtual long long chain_bound(int n) const = 0;
  virtual std::string encode(const Fingerprint& f) const = 0;
  // Throws on malformed or non-canonical text.
  virtual Fingerprint decode(const std::string& text) const = 0;
  // Exponential; tests only.
  virtual std::vector<Tuple> relation_of(const Fingerprint& f) const = 0;

  // Whether every relation of gamma is compatible with this scheme.
  virtual bool supports(const ConstraintLanguage& gamma, std::string* why) const = 0;

  // Assignment x_i -> cons(project(f, i)) for i = 1..arity.
  std::vector<int> construct(const Fingerprint& f) const;

 protected:
  explicit Scheme(int domain) : domain_(domain) {}
  int domain_;
};

class ConstantScheme : public Scheme {
 public:
  ConstantScheme(int domain, int d);
  int value() const { return d_; }
  std::string id() const override;
  Fingerprint top() const override;
  Fingerprint project(const Fingerprint& f, int k) const override;
  bool leq(const Fingerprint& a, const Fingerprint& b) const override;
  bool is_empty(const Fingerprint& f) const override;
  Fingerprint infer(const Fingerprint& f, const Csp& c) const override;
  int cons(const Fingerprint& f) const override;
  long long chain_bound(int n) const override;
  std::string encode(const Fingerprint& f) const override;
  Fingerprint decode(const std::string& text) const override;
  std::vector<Tuple> relation_of(const Fingerprint& f) const override;
  bool supports(const ConstraintLanguage& gamma, std::string* why) const override;

 private:
  int d_;
};

// Powerset collection with arc consistency; construction through a set function.
class PowersetScheme : public Scheme {
 public:
  explicit PowersetScheme(SetFunction f);
  const SetFunction& set_function() const { return f_; }
  std::string id() const override;
  Fingerprint top() const override;
  Fingerprint project(const Fingerprint& f, int k) const override;
  bool leq(const Fingerprint& a, const Fingerprint& b) const override;
  bool is_empty(const Fingerprint& f) const override;
  Fingerprint infer(const Fingerprint& f, const Csp& c) const override;
  int cons(const Fingerprint& f) const override;
  long long chain_bound(int n) const override;
  std::string encode(const Fingerprint& f) const override;
  Fingerprint decode(const std::string& text) const override;
  std::vector<Tuple> relation_of(const Fingerprint& f) const override;
  bool supports(const ConstraintLanguage& gamma, std::string* why) const override;

 private:
  SetFunction f_;
};

// Scopes of size 1..k over n variables, lexicographic.
std::vector<std::vector<int>> nu_scopes(int n, int k);

class NuScheme : public Scheme {
 public:
  explicit NuScheme(Operation op);
  const Operation& operation() const { return op_; }
  int k() const { return op_.arity; }
  std::string id() const override;
  Fingerprint top() const override;
  Fingerprint project(const Fingerprint& f, int k) const override;
  bool leq(const Fingerprint& a, const Fingerprint& b) const override;
  bool is_empty(const Fingerprint& f) const override;
  Fingerprint infer(const Fingerprint& f, const Csp& c) const override;
  int cons(const Fingerprint& f) const override;
  long long chain_bound(int n) const override;
  std::string encode(const Fingerprint& f) const override;
  Fingerprint decode(const std::string& text) const override;
  std::vector<Tuple> relation_of(const Fingerprint& f) const override;
  bool supports(const ConstraintLanguage& gamma, std::string* why) const override;

  // Fingerprint holding the given relation's projections, for tests.
  NuFp from_relation(int n, const std::vector<Tuple>& r) const;

 private:
  Operation op_;
};

struct SignatureElement {
  int index;  // 1-based coordinate
  int a;
  int b;
  auto operator<=>(const SignatureElement&) const = default;
};

// Closure under a Mal'tsev operation. The serial version is the reference.
std::vector<Tuple> maltsev_closure_serial(const std::vector<Tuple>& f, const Operation& op);
std::vector<Tuple> maltsev_closure(const std::vector<Tuple>& f, const Operation& op);
std::vector<SignatureElement> signature_of(const std::vector<Tuple>& r);
// r must be closed under op; throws otherwise.
MaltsevFp compact_representation(const std::vector<Tuple>& r, int arity, const Operation& op);

class MaltsevScheme : public Scheme {
 public:
  explicit MaltsevScheme(Operation op);
  const Operation& operation() const { return op_; }
  std::string id() const override;
  Fingerprint top() const override;
  Fingerprint project(const Fingerprint& f, int k) const override;
  bool leq(const Fingerprint& a, const Fingerprint& b) const override;
  bool is_empty(const Fingerprint& f) const override;
  Fingerprint infer(const Fingerprint& f, const Csp& c) const override;
  int cons(const Fingerprint& f) const override;
  long long chain_bound(int n) const override;
  std::string encode(const Fingerprint& f) const override;
  Fingerprint decode(const std::string& text) const override;
  std::vector<Tuple> relation_of(const Fingerprint& f) const override;
  bool supports(const ConstraintLanguage& gamma, std::string* why) const override;

 private:
  Operation op_;
};

// Rebuilds a scheme from its id over the given domain; throws on bad ids.
std::unique_ptr<Scheme> make_scheme(const std::string& id, int domain);

struct SchemeChoice {
  std::unique_ptr<Scheme> scheme;  // null when nothing applies
  std::string reason;
};

// Priority: hint, set function (|D| <= 3), ternary NU (|D| = 2),
// Mal'tsev (|D| = 2), constant (d-valid), none.
SchemeChoice scheme_for_language(const ConstraintLanguage& gamma,
                                 std::unique_ptr<Scheme> hint = nullptr);

}  // namespace qecsp
