#include <sstream>

#include "qecsp/scheme.hpp"
#include "scheme_text.hpp"

namespace qecsp {

int arity_of(const Fingerprint& f) {
  return std::visit([](const auto& x) { return x.arity; }, f);
}

std::vector<Tuple> csp_solutions(const Csp& c) {
  const int n = c.num_vars;
  std::vector<std::vector<const CspAtom*>> at(n);
  for (const auto& a : c.atoms) {
    int last = -1;
    for (int v : a.vars) last = std::max(last, v);
    if (last < 0) {
      if (a.relation->empty()) return {};
    } else {
      at[last].push_back(&a);
    }
  }
  std::vector<Tuple> out;
  Tuple t(n, 0);
  Tuple buf;
  auto ok = [&](int p) {
    for (const CspAtom* a : at[p]) {
      buf.clear();
      for (int v : a->vars) buf.push_back(t[v]);
      if (!a->relation->contains(buf)) return false;
    }
    return true;
  };
  // Iterative backtracking over positions 0..n-1.
  int p = 0;
  if (n == 0) return {Tuple{}};
  t[0] = -1;
  while (p >= 0) {
    if (++t[p] >= c.domain) {
      --p;
      continue;
    }
    if (!ok(p)) continue;
    if (p == n - 1) {
      out.push_back(t);
    } else {
      ++p;
      t[p] = -1;
    }
  }
  return out;
}

std::vector<int> Scheme::construct(const Fingerprint& f) const {
  std::vector<int> out;
  for (int i = 1; i <= arity_of(f); ++i) out.push_back(cons(project(f, i)));
  return out;
}

namespace text {

std::string tuple_str(const Tuple& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(t[i]);
  }
  return s + ")";
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

int parse_int(const std::string& s) {
  if (s.empty() || s.size() > 9) throw Error("bad integer '" + s + "'");
  for (char ch : s)
    if (ch < '0' || ch > '9') throw Error("bad integer '" + s + "'");
  return std::stoi(s);
}

Tuple parse_tuple(const std::string& s, int arity, int domain) {
  if (s.size() < 2 || s.front() != '(' || s.back() != ')') throw Error("bad tuple '" + s + "'");
  Tuple t;
  std::string body = s.substr(1, s.size() - 2);
  if (!body.empty()) {
    std::size_t start = 0;
    while (true) {
      std::size_t comma = body.find(',', start);
      t.push_back(parse_int(body.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (static_cast<int>(t.size()) != arity) throw Error("tuple '" + s + "' has wrong length");
  for (int v : t)
    if (v >= domain) throw Error("tuple '" + s + "' leaves the domain");
  return t;
}

}  // namespace text

namespace {

std::vector<int> parse_table(const std::string& s) {
  std::vector<int> out;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = s.find('.', start);
    out.push_back(text::parse_int(s.substr(start, dot - start)));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return out;
}

}  // namespace

std::string table_str(const std::vector<int>& v, std::size_t from) {
  std::string s;
  for (std::size_t i = from; i < v.size(); ++i) {
    if (i > from) s += '.';
    s += std::to_string(v[i]);
  }
  return s;
}

std::unique_ptr<Scheme> make_scheme(const std::string& id, int domain) {
  auto colon = id.find(':');
  if (colon == std::string::npos) throw Error("bad scheme id '" + id + "'");
  std::string kind = id.substr(0, colon);
  std::string rest = id.substr(colon + 1);
  if (kind == "constant") {
    return std::make_unique<ConstantScheme>(domain, text::parse_int(rest));
  }
  if (kind == "setfn") {
    auto vals = parse_table(rest);
    if (vals.size() != full_subset(domain)) throw Error("set function table has wrong size");
    SetFunction f{"setfn", domain, {0}};
    f.table.insert(f.table.end(), vals.begin(), vals.end());
    for (int v : vals)
      if (v >= domain) throw Error("set function table leaves the domain");
    return std::make_unique<PowersetScheme>(std::move(f));
  }
  auto make_op = [&](int arity, const std::string& tab) {
    auto vals = parse_table(tab);
    std::size_t want = 1;
    for (int i = 0; i < arity; ++i) want *= domain;
    if (vals.size() != want) throw Error("operation table has wrong size");
    for (int v : vals)
      if (v >= domain) throw Error("operation table leaves the domain");
    return Operation{kind, domain, arity, vals};
  };
  if (kind == "nu") {
    auto c2 = rest.find(':');
    if (c2 == std::string::npos) throw Error("bad nu scheme id");
    int k = text::parse_int(rest.substr(0, c2));
    if (k < 3 || k > 8) throw Error("nu arity out of range");
    return std::make_unique<NuScheme>(make_op(k, rest.substr(c2 + 1)));
  }
  if (kind == "maltsev") return std::make_unique<MaltsevScheme>(make_op(3, rest));
  throw Error("unknown scheme kind '" + kind + "'");
}

SchemeChoice scheme_for_language(const ConstraintLanguage& gamma, std::unique_ptr<Scheme> hint) {
  SchemeChoice out;
  if (hint) {
    out.reason = "hint";
    out.scheme = std::move(hint);
    return out;
  }
  const int d = gamma.domain_size();
  if (auto f = find_set_function_polymorphism(gamma)) {
    out.scheme = std::make_unique<PowersetScheme>(*f);
    out.reason = "set-function polymorphism";
    return out;
  }
  if (auto m = find_nu3_polymorphism(gamma)) {
    out.scheme = std::make_unique<NuScheme>(*m);
    out.reason = "near-unanimity polymorphism";
    return out;
  }
  if (auto m = find_maltsev_polymorphism(gamma)) {
    out.scheme = std::make_unique<MaltsevScheme>(*m);
    out.reason = "Mal'tsev polymorphism";
    return out;
  }
  for (int v = 0; v < d; ++v) {
    ConstantScheme c(d, v);
    if (c.supports(gamma, nullptr)) {
      out.scheme = std::make_unique<ConstantScheme>(d, v);
      out.reason = "constant-valid language";
      return out;
    }
  }
  out.reason = "no scheme";
  return out;
}

}  // namespace qecsp
