#include <algorithm>
#include <map>

#include "qecsp/scheme.hpp"
#include "scheme_text.hpp"

namespace qecsp {

std::vector<std::vector<int>> nu_scopes(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  // Depth-first over increasing sequences yields lexicographic order.
  auto rec = [&](auto&& self, int from) -> void {
    for (int v = from; v < n; ++v) {
      cur.push_back(v);
      out.push_back(cur);
      if (static_cast<int>(cur.size()) < k) self(self, v + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

namespace {

std::size_t ipow(int b, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

void decode_index(std::size_t idx, int len, int d, int* out) {
  for (int i = len - 1; i >= 0; --i) {
    out[i] = static_cast<int>(idx % d);
    idx /= d;
  }
}

// Dense working form of an NU fingerprint: one alive-bit per tuple per scope.
struct Network {
  int n = 0;
  int k = 3;
  int d = 2;
  std::vector<std::vector<int>> scopes;
  std::map<std::vector<int>, int> index;
  std::vector<std::vector<char>> alive;

  Network(int n_, int k_, int d_) : n(n_), k(k_), d(d_), scopes(nu_scopes(n_, k_)) {
    for (std::size_t i = 0; i < scopes.size(); ++i) {
      index.emplace(scopes[i], static_cast<int>(i));
      alive.emplace_back(ipow(d, static_cast<int>(scopes[i].size())), 1);
    }
  }

  int scope_index(const std::vector<int>& s) const { return index.at(s); }

  // Keeps only tuples of scope s whose image is in allowed (dense, same size).
  void restrict(int s, const std::vector<char>& allowed) {
    auto& a = alive[s];
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] && allowed[i];
  }

  // Constraint on distinct sorted variables vars with the given tuples;
  // restricts every scope inside vars to the constraint's projection.
  void add_constraint(const std::vector<int>& vars, const std::vector<Tuple>& tuples) {
    const int m = static_cast<int>(vars.size());
    std::vector<int> pos;
    auto rec = [&](auto&& self, int from) -> void {
      for (int p = from; p < m; ++p) {
        pos.push_back(p);
        std::vector<int> scope;
        for (int q : pos) scope.push_back(vars[q]);
        const int len = static_cast<int>(pos.size());
        std::vector<char> allowed(ipow(d, len), 0);
        Tuple t(len);
        for (const auto& full : tuples) {
          for (int i = 0; i < len; ++i) t[i] = full[pos[i]];
          allowed[tuple_index(t.data(), len, d)] = 1;
        }
        restrict(scope_index(scope), allowed);
        if (len < k) self(self, p + 1);
        pos.pop_back();
      }
    };
    rec(rec, 0);
  }

  // Prunes to strong k-consistency. Returns false when some scope empties.
  bool propagate() {
    const int ns = static_cast<int>(scopes.size());
    // sub[s][p]: scope s without its p-th variable (-1 for singletons).
    std::vector<std::vector<int>> sub(ns);
    // ext[s]: (scope s with v inserted, insertion position) for each v not in s.
    std::vector<std::vector<std::pair<int, int>>> ext(ns);
    for (int s = 0; s < ns; ++s) {
      const auto& sc = scopes[s];
      if (sc.size() > 1) {
        for (std::size_t p = 0; p < sc.size(); ++p) {
          std::vector<int> r(sc);
          r.erase(r.begin() + p);
          sub[s].push_back(scope_index(r));
        }
      }
      if (static_cast<int>(sc.size()) < k) {
        for (int v = 0; v < n; ++v) {
          if (std::find(sc.begin(), sc.end(), v) != sc.end()) continue;
          std::vector<int> r(sc);
          auto it = std::lower_bound(r.begin(), r.end(), v);
          int at = static_cast<int>(it - r.begin());
          r.insert(it, v);
          ext[s].emplace_back(scope_index(r), at);
        }
      }
    }

    std::vector<int> t(k + 1), u(k + 1);
    bool changed = true;
    while (changed) {
      changed = false;
      for (int s = 0; s < ns; ++s) {
        const int len = static_cast<int>(scopes[s].size());
        auto& a = alive[s];
        bool any = false;
        for (std::size_t idx = 0; idx < a.size(); ++idx) {
          if (!a[idx]) continue;
          decode_index(idx, len, d, t.data());
          bool ok = true;
          for (int p = 0; p < static_cast<int>(sub[s].size()) && ok; ++p) {
            int w = 0;
            for (int i = 0; i < len; ++i)
              if (i != p) u[w++] = t[i];
            if (!alive[sub[s][p]][tuple_index(u.data(), len - 1, d)]) ok = false;
          }
          for (std::size_t e = 0; e < ext[s].size() && ok; ++e) {
            auto [target, at] = ext[s][e];
            for (int i = 0, w = 0; i < len; ++i, ++w) {
              if (w == at) ++w;
              u[w] = t[i];
            }
            bool found = false;
            for (int v = 0; v < d && !found; ++v) {
              u[at] = v;
              if (alive[target][tuple_index(u.data(), len + 1, d)]) found = true;
            }
            if (!found) ok = false;
          }
          if (ok) {
            any = true;
          } else {
            a[idx] = 0;
            changed = true;
          }
        }
        if (!any) return false;
      }
    }
    return true;
  }

  NuFp to_fp() const {
    NuFp f{n, k, false, {}};
    for (std::size_t s = 0; s < scopes.size(); ++s) {
      const int len = static_cast<int>(scopes[s].size());
      std::vector<Tuple> rel;
      for (std::size_t idx = 0; idx < alive[s].size(); ++idx) {
        if (!alive[s][idx]) continue;
        Tuple t(len);
        decode_index(idx, len, d, t.data());
        rel.push_back(std::move(t));
      }
      f.slots.push_back(std::move(rel));
    }
    return f;
  }
};

NuFp nu_bottom(int n, int k) { return NuFp{n, k, true, {}}; }

}  // namespace

NuScheme::NuScheme(Operation op) : Scheme(op.domain), op_(std::move(op)) {
  auto c = recognize_operation_class(op_);
  if (!c.near_unanimity || op_.arity < 3) throw Error("operation " + op_.name + " is not a near-unanimity operation");
}

std::string NuScheme::id() const { return "nu:" + std::to_string(op_.arity) + ":" + table_str(op_.table); }

Fingerprint NuScheme::top() const { return NuFp{0, k(), false, {}}; }

Fingerprint NuScheme::project(const Fingerprint& f, int m) const {
  const auto& x = std::get<NuFp>(f);
  if (m < 0 || m > x.arity) throw Error("projection out of range");
  if (x.bottom) return nu_bottom(m, x.k);
  // Scopes inside the first m variables keep their relative order.
  auto all = nu_scopes(x.arity, x.k);
  NuFp out{m, x.k, false, {}};
  for (std::size_t s = 0; s < all.size(); ++s)
    if (all[s].back() < m) out.slots.push_back(x.slots[s]);
  return out;
}

bool NuScheme::leq(const Fingerprint& a, const Fingerprint& b) const {
  const auto& x = std::get<NuFp>(a);
  const auto& y = std::get<NuFp>(b);
  if (x.arity != y.arity || x.k != y.k) return false;
  if (x.bottom) return true;
  if (y.bottom) return false;
  for (std::size_t s = 0; s < x.slots.size(); ++s)
    if (!std::includes(y.slots[s].begin(), y.slots[s].end(), x.slots[s].begin(), x.slots[s].end()))
      return false;
  return true;
}

bool NuScheme::is_empty(const Fingerprint& f) const { return std::get<NuFp>(f).bottom; }

Fingerprint NuScheme::infer(const Fingerprint& f, const Csp& c) const {
  const auto& in = std::get<NuFp>(f);
  const int n = c.num_vars;
  if (in.arity > n) throw Error("fingerprint wider than the constraint set");
  if (in.k != k()) throw Error("fingerprint has the wrong near-unanimity arity");
  if (in.bottom) return nu_bottom(n, k());

  Network net(n, k(), domain_);
  auto in_scopes = nu_scopes(in.arity, in.k);
  for (std::size_t s = 0; s < in_scopes.size(); ++s) {
    const int len = static_cast<int>(in_scopes[s].size());
    std::vector<char> allowed(ipow(domain_, len), 0);
    for (const auto& t : in.slots[s]) allowed[tuple_index(t.data(), len, domain_)] = 1;
    net.restrict(net.scope_index(in_scopes[s]), allowed);
  }

  for (const auto& a : c.atoms) {
    std::vector<int> vars(a.vars);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    // Re-express the constraint over its distinct variables.
    std::vector<Tuple> tuples;
    for (const auto& t : a.relation->tuples()) {
      Tuple img(vars.size(), -1);
      bool ok = true;
      for (std::size_t j = 0; j < a.vars.size() && ok; ++j) {
        auto p = std::lower_bound(vars.begin(), vars.end(), a.vars[j]) - vars.begin();
        if (img[p] >= 0 && img[p] != t[j]) ok = false;
        img[p] = t[j];
      }
      if (ok) tuples.push_back(std::move(img));
    }
    if (tuples.empty()) return nu_bottom(n, k());
    if (!vars.empty()) net.add_constraint(vars, tuples);
  }
  if (n == 0) return NuFp{0, k(), false, {}};
  if (!net.propagate()) return nu_bottom(n, k());
  return net.to_fp();
}

int NuScheme::cons(const Fingerprint& f) const {
  const auto& x = std::get<NuFp>(f);
  if (x.bottom) throw Error("construction on an empty fingerprint");
  if (x.arity == 0) throw Error("construction needs arity at least 1");
  // Greedy smallest extension, coordinate by coordinate; the value for the
  // last coordinate equals Cons of the full fingerprint.
  auto scopes = nu_scopes(x.arity, x.k);
  std::vector<std::vector<int>> ending(x.arity);
  for (std::size_t s = 0; s < scopes.size(); ++s) ending[scopes[s].back()].push_back(static_cast<int>(s));
  Tuple a(x.arity, 0);
  Tuple t;
  for (int i = 0; i < x.arity; ++i) {
    bool found = false;
    for (int v = 0; v < domain_ && !found; ++v) {
      a[i] = v;
      bool ok = true;
      for (int s : ending[i]) {
        t.clear();
        for (int var : scopes[s]) t.push_back(a[var]);
        if (!std::binary_search(x.slots[s].begin(), x.slots[s].end(), t)) {
          ok = false;
          break;
        }
      }
      found = ok;
    }
    if (!found) throw Error("near-unanimity fingerprint admits no extension at coordinate " + std::to_string(i + 1));
  }
  return a.back();
}

long long NuScheme::chain_bound(int n) const {
  long long scopes = 0, binom = 1;
  for (int m = 1; m <= k(); ++m) {
    binom = binom * (n - m + 1) / m;
    scopes += binom;
  }
  long long per = 1;
  for (int i = 0; i < k(); ++i) per *= domain_;
  return std::max(1LL, scopes * per);
}

std::string NuScheme::encode(const Fingerprint& f) const {
  const auto& x = std::get<NuFp>(f);
  std::string head = std::to_string(x.arity) + " " + std::to_string(x.k);
  if (x.bottom) return "N! " + head;
  std::string s = "N " + head;
  for (const auto& slot : x.slots) {
    s += " {";
    for (std::size_t i = 0; i < slot.size(); ++i) {
      if (i) s += ' ';
      s += text::tuple_str(slot[i]);
    }
    s += '}';
  }
  return s;
}

Fingerprint NuScheme::decode(const std::string& s) const {
  auto bad = [&](const std::string& why) { return Error("bad near-unanimity fingerprint (" + why + ")"); };
  auto w = text::split_ws(s);
  if (w.size() < 3) throw bad("short header");
  NuFp f;
  f.arity = text::parse_int(w[1]);
  f.k = text::parse_int(w[2]);
  if (f.k != k()) throw bad("wrong arity k");
  if (f.arity > 64) throw bad("arity too large");
  if (w[0] == "N!") {
    f.bottom = true;
    if (w.size() != 3) throw bad("trailing text");
  } else if (w[0] == "N") {
    auto scopes = nu_scopes(f.arity, f.k);
    // Body after the third token: "{...} {...} ...".
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
      pos = s.find_first_not_of(' ', pos);
      pos = s.find(' ', pos);
    }
    std::string body = pos == std::string::npos ? "" : s.substr(pos);
    std::size_t at = 0;
    for (const auto& scope : scopes) {
      if (body.compare(at, 2, " {") != 0) throw bad("expected slot");
      at += 2;
      std::size_t close = body.find('}', at);
      if (close == std::string::npos) throw bad("unterminated slot");
      std::vector<Tuple> slot;
      for (const auto& tok : text::split_ws(body.substr(at, close - at)))
        slot.push_back(text::parse_tuple(tok, static_cast<int>(scope.size()), domain_));
      std::sort(slot.begin(), slot.end());
      slot.erase(std::unique(slot.begin(), slot.end()), slot.end());
      if (slot.empty()) throw bad("empty slot");
      f.slots.push_back(std::move(slot));
      at = close + 1;
    }
    if (at != body.size()) throw bad("trailing text");
  } else {
    throw bad("unknown tag");
  }
  if (encode(f) != s) throw Error("non-canonical fingerprint '" + s + "'");
  return f;
}

std::vector<Tuple> NuScheme::relation_of(const Fingerprint& f) const {
  const auto& x = std::get<NuFp>(f);
  if (x.bottom) return {};
  auto scopes = nu_scopes(x.arity, x.k);
  std::vector<Tuple> out;
  Tuple t(x.arity, 0), u;
  do {
    bool in = true;
    for (std::size_t s = 0; s < scopes.size() && in; ++s) {
      u.clear();
      for (int v : scopes[s]) u.push_back(t[v]);
      in = std::binary_search(x.slots[s].begin(), x.slots[s].end(), u);
    }
    if (in) out.push_back(t);
  } while (next_tuple(t, domain_));
  return out;
}

bool NuScheme::supports(const ConstraintLanguage& gamma, std::string* why) const {
  if (gamma.domain_size() != domain_) {
    if (why) *why = "domain size differs";
    return false;
  }
  for (const auto& r : gamma.relations()) {
    if (!preserves(op_, r)) {
      if (why) *why = "relation " + r.name() + " is not preserved by " + op_.name;
      return false;
    }
  }
  return true;
}

NuFp NuScheme::from_relation(int n, const std::vector<Tuple>& r) const {
  if (r.empty()) return nu_bottom(n, k());
  auto scopes = nu_scopes(n, k());
  NuFp f{n, k(), false, {}};
  for (const auto& sc : scopes) {
    std::vector<Tuple> slot;
    for (const auto& t : r) {
      Tuple u;
      for (int v : sc) u.push_back(t[v]);
      slot.push_back(std::move(u));
    }
    std::sort(slot.begin(), slot.end());
    slot.erase(std::unique(slot.begin(), slot.end()), slot.end());
    f.slots.push_back(std::move(slot));
  }
  return f;
}

}  // namespace qecsp
