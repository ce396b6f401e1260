#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_set>

#include <omp.h>

#include "qecsp/scheme.hpp"
#include "scheme_text.hpp"

namespace qecsp {

namespace {

std::vector<Tuple> sorted_unique(std::vector<Tuple> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Tuples coded base d, first coordinate most significant.
struct Coded {
  int domain;
  std::size_t arity;
  std::vector<std::uint64_t> code;
  std::vector<Tuple> tuples;

  std::uint64_t encode(const Tuple& t) const {
    std::uint64_t c = 0;
    for (int v : t) c = c * domain + v;
    return c;
  }
  void push(const Tuple& t) {
    code.push_back(encode(t));
    tuples.push_back(t);
  }
};

std::uint64_t image(const Operation& op, const Tuple& a, const Tuple& b, const Tuple& c, int d) {
  std::uint64_t code = 0;
  int args[3];
  for (std::size_t j = 0; j < a.size(); ++j) {
    args[0] = a[j];
    args[1] = b[j];
    args[2] = c[j];
    code = code * d + op(args);
  }
  return code;
}

Tuple decode_code(std::uint64_t code, int d, std::size_t n) {
  Tuple t(n);
  for (std::size_t j = n; j-- > 0;) {
    t[j] = static_cast<int>(code % d);
    code /= d;
  }
  return t;
}

bool prime(int d) {
  if (d < 2) return false;
  for (int p = 2; p * p <= d; ++p)
    if (d % p == 0) return false;
  return true;
}

// x - y + z over Z_d with d prime; its closed relations are exactly the cosets
// of subspaces of Z_d^n.
bool is_affine(const Operation& op) {
  const int d = op.domain;
  if (op.arity != 3 || !prime(d)) return false;
  std::size_t i = 0;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z)
        if (op.table[i++] != ((x - y + z) % d + d) % d) return false;
  return true;
}

int inverse_mod(int a, int d) {
  int r = 1;
  for (int e = 0; e < d - 2; ++e) r = r * a % d;
  return r;
}

std::vector<Tuple> coset_closure(const std::vector<Tuple>& f, int d) {
  const Tuple& base = f.front();
  const std::size_t n = base.size();
  std::vector<Tuple> rows;
  std::vector<std::size_t> pivots;
  for (std::size_t i = 1; i < f.size(); ++i) {
    Tuple v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = ((f[i][j] - base[j]) % d + d) % d;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const int c = v[pivots[r]];
      if (c)
        for (std::size_t j = 0; j < n; ++j) v[j] = ((v[j] - c * rows[r][j]) % d + d) % d;
    }
    std::size_t p = 0;
    while (p < n && v[p] == 0) ++p;
    if (p == n) continue;
    const int inv = inverse_mod(v[p], d);
    for (auto& x : v) x = x * inv % d;
    // Keep the rows fully reduced so later reductions never reintroduce a pivot.
    for (auto& row : rows) {
      const int c = row[p];
      if (c)
        for (std::size_t j = 0; j < n; ++j) row[j] = ((row[j] - c * v[j]) % d + d) % d;
    }
    rows.push_back(std::move(v));
    pivots.push_back(p);
  }
  std::vector<Tuple> out;
  std::vector<int> coef(rows.size(), 0);
  do {
    Tuple t = base;
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (coef[r])
        for (std::size_t j = 0; j < n; ++j) t[j] = (t[j] + coef[r] * rows[r][j]) % d;
    out.push_back(std::move(t));
  } while (next_tuple(coef, d));
  return sorted_unique(std::move(out));
}

void check_codable(int d, std::size_t n) {
  long double size = 1;
  for (std::size_t i = 0; i < n; ++i) size *= d;
  if (size > 1e18L) throw Error("relation too wide for closure");
}

}  // namespace

// Semi-naive: each round only combines triples that use at least one tuple
// found in the previous round. Generic in the operation; the reference.
std::vector<Tuple> maltsev_closure_serial(const std::vector<Tuple>& f, const Operation& op) {
  std::vector<Tuple> start = sorted_unique(f);
  if (start.empty() || start.front().empty()) return start;
  const int d = op.domain;
  const std::size_t n = start.front().size();
  check_codable(d, n);
  Coded all{d, n, {}, {}};
  for (const auto& t : start) all.push(t);
  std::unordered_set<std::uint64_t> seen(all.code.begin(), all.code.end());
  std::size_t fresh_from = 0;
  while (fresh_from < all.tuples.size()) {
    const std::size_t size = all.tuples.size();
    std::vector<std::uint64_t> found;
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = 0; j < size; ++j)
        for (std::size_t l = 0; l < size; ++l) {
          if (i < fresh_from && j < fresh_from && l < fresh_from) continue;
          std::uint64_t c = image(op, all.tuples[i], all.tuples[j], all.tuples[l], d);
          if (seen.insert(c).second) found.push_back(c);
        }
    fresh_from = size;
    for (auto c : found) all.push(decode_code(c, d, n));
  }
  return sorted_unique(std::move(all.tuples));
}

std::vector<Tuple> maltsev_closure(const std::vector<Tuple>& f, const Operation& op) {
  std::vector<Tuple> start = sorted_unique(f);
  if (start.empty() || start.front().empty()) return start;
  if (is_affine(op)) return coset_closure(start, op.domain);
  const int d = op.domain;
  const std::size_t n = start.front().size();
  check_codable(d, n);
  Coded all{d, n, {}, {}};
  for (const auto& t : start) all.push(t);
  std::unordered_set<std::uint64_t> seen(all.code.begin(), all.code.end());
  std::size_t fresh_from = 0;
  while (fresh_from < all.tuples.size()) {
    const long long size = static_cast<long long>(all.tuples.size());
    std::vector<std::vector<std::uint64_t>> per_thread(omp_get_max_threads());
    // seen is only read inside the parallel region.
#pragma omp parallel
    {
      auto& mine = per_thread[omp_get_thread_num()];
#pragma omp for schedule(dynamic, 4)
      for (long long i = 0; i < size; ++i)
        for (long long j = 0; j < size; ++j)
          for (long long l = 0; l < size; ++l) {
            if (static_cast<std::size_t>(std::max({i, j, l})) < fresh_from) continue;
            std::uint64_t c = image(op, all.tuples[i], all.tuples[j], all.tuples[l], d);
            if (!seen.count(c)) mine.push_back(c);
          }
    }
    std::vector<std::uint64_t> found;
    for (auto& v : per_thread) found.insert(found.end(), v.begin(), v.end());
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    fresh_from = all.tuples.size();
    for (auto c : found) {
      seen.insert(c);
      all.push(decode_code(c, d, n));
    }
  }
  return sorted_unique(std::move(all.tuples));
}

std::vector<SignatureElement> signature_of(const std::vector<Tuple>& r_in) {
  std::vector<Tuple> r = sorted_unique(r_in);
  std::set<SignatureElement> sig;
  if (r.empty()) return {};
  const int n = static_cast<int>(r.front().size());
  for (int i = 0; i < n; ++i) {
    // Tuples sharing the first i coordinates are contiguous in sorted order.
    std::size_t g = 0;
    while (g < r.size()) {
      std::size_t h = g;
      std::set<int> vals;
      while (h < r.size() && std::equal(r[g].begin(), r[g].begin() + i, r[h].begin())) vals.insert(r[h++][i]);
      for (int a : vals)
        for (int b : vals) sig.insert({i + 1, a, b});
      g = h;
    }
  }
  return {sig.begin(), sig.end()};
}

namespace {

// One witness pair per signature element: the lexicographically smallest
// (t, t') with equal (i-1)-prefixes, t_i = a, t'_i = b.
std::vector<Tuple> witnesses(const std::vector<Tuple>& r, int arity) {
  if (r.empty()) return {};
  if (arity == 0) return r;
  std::set<Tuple> out;
  for (int i = 0; i < arity; ++i) {
    std::size_t g = 0;
    std::set<std::pair<int, int>> done;
    while (g < r.size()) {
      std::size_t h = g;
      while (h < r.size() && std::equal(r[g].begin(), r[g].begin() + i, r[h].begin())) ++h;
      // Within a group the first tuple with a given value at i is the
      // smallest; groups come in ascending prefix order.
      std::map<int, std::size_t> firsts;
      for (std::size_t p = g; p < h; ++p) firsts.emplace(r[p][i], p);
      for (auto [a, pa] : firsts)
        for (auto [b, pb] : firsts)
          if (done.insert({a, b}).second) {
            out.insert(r[pa]);
            out.insert(r[pb]);
          }
      g = h;
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace

MaltsevFp compact_representation(const std::vector<Tuple>& r_in, int arity, const Operation& op) {
  std::vector<Tuple> r = sorted_unique(r_in);
  for (const auto& t : r)
    if (static_cast<int>(t.size()) != arity) throw Error("tuple of the wrong arity");
  MaltsevFp f{arity, witnesses(r, arity)};
  if (maltsev_closure(f.tuples, op) != r) throw Error("relation is not closed under " + op.name);
  return f;
}

MaltsevScheme::MaltsevScheme(Operation op) : Scheme(op.domain), op_(std::move(op)) {
  if (op_.arity != 3 || !recognize_operation_class(op_).maltsev)
    throw Error("operation " + op_.name + " is not a Mal'tsev operation");
}

std::string MaltsevScheme::id() const { return "maltsev:" + table_str(op_.table); }

Fingerprint MaltsevScheme::top() const { return MaltsevFp{0, {Tuple{}}}; }

Fingerprint MaltsevScheme::project(const Fingerprint& f, int k) const {
  const auto& x = std::get<MaltsevFp>(f);
  if (k < 0 || k > x.arity) throw Error("projection out of range");
  std::vector<Tuple> pr;
  for (const auto& t : x.tuples) pr.emplace_back(t.begin(), t.begin() + k);
  // Projection commutes with closure, so this is the closure of pr_k.
  return compact_representation(maltsev_closure(pr, op_), k, op_);
}

bool MaltsevScheme::leq(const Fingerprint& a, const Fingerprint& b) const {
  const auto& x = std::get<MaltsevFp>(a);
  const auto& y = std::get<MaltsevFp>(b);
  if (x.arity != y.arity) return false;
  if (x.tuples.empty()) return true;
  auto cy = maltsev_closure(y.tuples, op_);
  return std::includes(cy.begin(), cy.end(), x.tuples.begin(), x.tuples.end());
}

bool MaltsevScheme::is_empty(const Fingerprint& f) const { return std::get<MaltsevFp>(f).tuples.empty(); }

Fingerprint MaltsevScheme::infer(const Fingerprint& f, const Csp& c) const {
  const auto& in = std::get<MaltsevFp>(f);
  const int n = c.num_vars;
  if (in.arity > n) throw Error("fingerprint wider than the constraint set");
  Relation prefix("F", domain_, in.arity, maltsev_closure(in.tuples, op_));
  Csp full = c;
  std::vector<int> vars(in.arity);
  for (int i = 0; i < in.arity; ++i) vars[i] = i;
  full.atoms.push_back({&prefix, vars});
  return compact_representation(csp_solutions(full), n, op_);
}

int MaltsevScheme::cons(const Fingerprint& f) const {
  const auto& x = std::get<MaltsevFp>(f);
  if (x.tuples.empty()) throw Error("construction on an empty fingerprint");
  if (x.arity == 0) throw Error("construction needs arity at least 1");
  // Greedy smallest extension of every prefix gives the lexicographic minimum.
  return maltsev_closure(x.tuples, op_).front().back();
}

long long MaltsevScheme::chain_bound(int n) const { return 1LL * n * domain_ * domain_ + 1; }

std::string MaltsevScheme::encode(const Fingerprint& f) const {
  const auto& x = std::get<MaltsevFp>(f);
  std::string s = "M " + std::to_string(x.arity);
  for (const auto& t : x.tuples) s += " " + text::tuple_str(t);
  return s;
}

Fingerprint MaltsevScheme::decode(const std::string& s) const {
  auto w = text::split_ws(s);
  if (w.size() < 2 || w[0] != "M") throw Error("bad Mal'tsev fingerprint '" + s + "'");
  MaltsevFp f;
  f.arity = text::parse_int(w[1]);
  for (std::size_t i = 2; i < w.size(); ++i) f.tuples.push_back(text::parse_tuple(w[i], f.arity, domain_));
  std::size_t bound = f.arity == 0 ? 1 : 2ull * f.arity * domain_ * domain_;
  if (f.tuples.size() > bound) throw Error("Mal'tsev fingerprint exceeds the size bound");
  if (encode(f) != s || !std::is_sorted(f.tuples.begin(), f.tuples.end()) ||
      std::adjacent_find(f.tuples.begin(), f.tuples.end()) != f.tuples.end())
    throw Error("non-canonical fingerprint '" + s + "'");
  return f;
}

std::vector<Tuple> MaltsevScheme::relation_of(const Fingerprint& f) const {
  return maltsev_closure(std::get<MaltsevFp>(f).tuples, op_);
}

bool MaltsevScheme::supports(const ConstraintLanguage& gamma, std::string* why) const {
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

}  // namespace qecsp
