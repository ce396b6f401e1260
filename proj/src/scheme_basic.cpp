#include <algorithm>

#include "qecsp/scheme.hpp"
#include "scheme_text.hpp"

namespace qecsp {

// ---------------------------------------------------------------------------
// Constant collection: top_n holds only (d, ..., d), bottom_n nothing.

ConstantScheme::ConstantScheme(int domain, int d) : Scheme(domain), d_(d) {
  if (d < 0 || d >= domain) throw Error("constant scheme value out of range");
}

std::string ConstantScheme::id() const { return "constant:" + std::to_string(d_); }

Fingerprint ConstantScheme::top() const { return ConstantFp{0, false}; }

Fingerprint ConstantScheme::project(const Fingerprint& f, int k) const {
  const auto& c = std::get<ConstantFp>(f);
  if (k < 0 || k > c.arity) throw Error("projection out of range");
  return ConstantFp{k, c.empty};
}

bool ConstantScheme::leq(const Fingerprint& a, const Fingerprint& b) const {
  const auto& x = std::get<ConstantFp>(a);
  const auto& y = std::get<ConstantFp>(b);
  return x.arity == y.arity && (x.empty || !y.empty);
}

bool ConstantScheme::is_empty(const Fingerprint& f) const { return std::get<ConstantFp>(f).empty; }

Fingerprint ConstantScheme::infer(const Fingerprint& f, const Csp& c) const {
  const auto& x = std::get<ConstantFp>(f);
  bool empty = x.empty;
  for (const auto& a : c.atoms) {
    const Relation& r = *a.relation;
    if (r.empty()) {
      empty = true;
      continue;
    }
    Tuple all(r.arity(), d_);
    if (!r.contains(all))
      throw Error("relation " + r.name() + " is neither empty nor " + std::to_string(d_) + "-valid");
  }
  return ConstantFp{c.num_vars, empty};
}

int ConstantScheme::cons(const Fingerprint& f) const {
  if (std::get<ConstantFp>(f).empty) throw Error("construction on an empty fingerprint");
  return d_;
}

long long ConstantScheme::chain_bound(int) const { return 1; }

std::string ConstantScheme::encode(const Fingerprint& f) const {
  const auto& c = std::get<ConstantFp>(f);
  return "K " + std::to_string(c.arity) + (c.empty ? " 0" : " 1");
}

Fingerprint ConstantScheme::decode(const std::string& s) const {
  auto w = text::split_ws(s);
  if (w.size() != 3 || w[0] != "K" || (w[2] != "0" && w[2] != "1"))
    throw Error("bad constant fingerprint '" + s + "'");
  Fingerprint f = ConstantFp{text::parse_int(w[1]), w[2] == "0"};
  if (encode(f) != s) throw Error("non-canonical fingerprint '" + s + "'");
  return f;
}

std::vector<Tuple> ConstantScheme::relation_of(const Fingerprint& f) const {
  const auto& c = std::get<ConstantFp>(f);
  if (c.empty) return {};
  return {Tuple(c.arity, d_)};
}

bool ConstantScheme::supports(const ConstraintLanguage& gamma, std::string* why) const {
  if (gamma.domain_size() != domain_) {
    if (why) *why = "domain size differs";
    return false;
  }
  for (const auto& r : gamma.relations()) {
    if (r.empty()) continue;
    if (!r.contains(Tuple(r.arity(), d_))) {
      if (why) *why = "relation " + r.name() + " is not " + std::to_string(d_) + "-valid";
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Powerset collection with arc consistency.

PowersetScheme::PowersetScheme(SetFunction f) : Scheme(f.domain), f_(std::move(f)) {}

std::string PowersetScheme::id() const { return "setfn:" + table_str(f_.table, 1); }

Fingerprint PowersetScheme::top() const { return PowersetFp{0, false, {}}; }

Fingerprint PowersetScheme::project(const Fingerprint& f, int k) const {
  const auto& p = std::get<PowersetFp>(f);
  if (k < 0 || k > p.arity) throw Error("projection out of range");
  if (p.bottom) return PowersetFp{k, true, {}};
  return PowersetFp{k, false, {p.masks.begin(), p.masks.begin() + k}};
}

bool PowersetScheme::leq(const Fingerprint& a, const Fingerprint& b) const {
  const auto& x = std::get<PowersetFp>(a);
  const auto& y = std::get<PowersetFp>(b);
  if (x.arity != y.arity) return false;
  if (x.bottom) return true;
  if (y.bottom) return false;
  for (int i = 0; i < x.arity; ++i)
    if (x.masks[i] & ~y.masks[i]) return false;
  return true;
}

bool PowersetScheme::is_empty(const Fingerprint& f) const { return std::get<PowersetFp>(f).bottom; }

Fingerprint PowersetScheme::infer(const Fingerprint& f, const Csp& c) const {
  const auto& in = std::get<PowersetFp>(f);
  const int n = c.num_vars;
  if (in.arity > n) throw Error("fingerprint wider than the constraint set");
  if (in.bottom) return PowersetFp{n, true, {}};
  std::vector<Subset> dom(n, full_subset(domain_));
  for (int i = 0; i < in.arity; ++i) dom[i] = in.masks[i];

  // Revise every constraint in input order until nothing changes; each
  // revision narrows the variables of one constraint, ascending.
  std::vector<Subset> support(n);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& a : c.atoms) {
      const Relation& r = *a.relation;
      for (int v : a.vars) support[v] = 0;
      bool any = false;
      for (const auto& t : r.tuples()) {
        bool fits = true;
        for (std::size_t j = 0; j < a.vars.size() && fits; ++j) {
          int v = a.vars[j];
          if (!(dom[v] >> t[j] & 1)) fits = false;
          // repeated variables must agree
          for (std::size_t i = 0; i < j && fits; ++i)
            if (a.vars[i] == v && t[i] != t[j]) fits = false;
        }
        if (!fits) continue;
        any = true;
        for (std::size_t j = 0; j < a.vars.size(); ++j) support[a.vars[j]] |= Subset{1} << t[j];
      }
      if (!any) return PowersetFp{n, true, {}};
      std::vector<int> vars(a.vars);
      std::sort(vars.begin(), vars.end());
      for (int v : vars) {
        Subset narrowed = dom[v] & support[v];
        if (narrowed != dom[v]) {
          dom[v] = narrowed;
          changed = true;
        }
      }
    }
  }
  return PowersetFp{n, false, dom};
}

int PowersetScheme::cons(const Fingerprint& f) const {
  const auto& p = std::get<PowersetFp>(f);
  if (p.bottom) throw Error("construction on an empty fingerprint");
  if (p.arity == 0) throw Error("construction needs arity at least 1");
  return f_(p.masks.back());
}

long long PowersetScheme::chain_bound(int n) const { return n == 0 ? 1 : 1LL * n * domain_; }

std::string PowersetScheme::encode(const Fingerprint& f) const {
  const auto& p = std::get<PowersetFp>(f);
  if (p.bottom) return "P! " + std::to_string(p.arity);
  std::string s = "P " + std::to_string(p.arity);
  for (Subset m : p.masks) s += " " + std::to_string(m);
  return s;
}

Fingerprint PowersetScheme::decode(const std::string& s) const {
  auto w = text::split_ws(s);
  if (w.size() < 2) throw Error("bad powerset fingerprint '" + s + "'");
  PowersetFp p;
  p.arity = text::parse_int(w[1]);
  if (w[0] == "P!") {
    if (w.size() != 2) throw Error("bad powerset fingerprint '" + s + "'");
    p.bottom = true;
  } else if (w[0] == "P") {
    if (static_cast<int>(w.size()) != 2 + p.arity) throw Error("powerset fingerprint arity mismatch");
    for (int i = 0; i < p.arity; ++i) {
      int m = text::parse_int(w[2 + i]);
      if (m <= 0 || static_cast<Subset>(m) > full_subset(domain_))
        throw Error("powerset mask out of range in '" + s + "'");
      p.masks.push_back(static_cast<Subset>(m));
    }
  } else {
    throw Error("bad powerset fingerprint '" + s + "'");
  }
  if (encode(p) != s) throw Error("non-canonical fingerprint '" + s + "'");
  return p;
}

std::vector<Tuple> PowersetScheme::relation_of(const Fingerprint& f) const {
  const auto& p = std::get<PowersetFp>(f);
  if (p.bottom) return {};
  std::vector<Tuple> out;
  Tuple t(p.arity, 0);
  do {
    bool in = true;
    for (int i = 0; i < p.arity; ++i)
      if (!(p.masks[i] >> t[i] & 1)) in = false;
    if (in) out.push_back(t);
  } while (next_tuple(t, domain_));
  return out;
}

bool PowersetScheme::supports(const ConstraintLanguage& gamma, std::string* why) const {
  if (gamma.domain_size() != domain_) {
    if (why) *why = "domain size differs";
    return false;
  }
  if (!is_set_function_polymorphism(f_, gamma)) {
    if (why) *why = "set function is not a polymorphism of the language";
    return false;
  }
  return true;
}

}  // namespace qecsp
