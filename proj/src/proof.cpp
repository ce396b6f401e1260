#include "qecsp/proof.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "qecsp/io.hpp"
#include "scheme_text.hpp"

namespace qecsp {

Csp single_block_csp(const Formula& phi) {
  if (phi.existential_blocks() != 1) throw Error("formula has more than one existential block");
  Csp c;
  c.domain = phi.domain();
  const auto& order = phi.existential_order();
  c.num_vars = static_cast<int>(order.size());
  std::vector<int> pos(phi.num_vars(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  for (const auto& ec : phi.constraints()) {
    if (!ec.guard.empty()) throw Error("guarded constraint in a single-block formula");
    CspAtom a{&phi.language().at(ec.relation), {}};
    for (int v : ec.head) a.vars.push_back(pos[v]);
    c.atoms.push_back(std::move(a));
  }
  return c;
}

Formula instantiate_block(const Formula& phi, const BlockAssignment& g) {
  if (phi.existential_blocks() < 2) throw Error("no universal block to instantiate");
  const auto& y1 = phi.first_universal_block();
  std::vector<int> want(y1);
  std::sort(want.begin(), want.end());
  if (g.size() != want.size()) throw Error("assignment does not cover the first universal block");
  Assignment a(phi.num_vars(), kUnbound);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i].var != want[i]) throw Error("assignment does not match the first universal block");
    if (g[i].value < 0 || g[i].value >= phi.domain()) throw Error("assignment value out of range");
    a[g[i].var] = g[i].value;
  }
  return instantiate_universals(phi, a);
}

// ---------------------------------------------------------------------------
// Text form

namespace {

std::string assignment_str(const Formula& phi, const BlockAssignment& g) {
  std::string s;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) s += ',';
    s += phi.names()[g[i].var] + "=" + std::to_string(g[i].value);
  }
  return s;
}

BlockAssignment parse_assignment(const std::map<std::string, int>& ids, const std::string& s) {
  BlockAssignment g;
  if (s.empty()) return g;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = s.find(',', start);
    std::string item = s.substr(start, comma - start);
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("bad assignment item '" + item + "'");
    auto it = ids.find(item.substr(0, eq));
    if (it == ids.end()) throw Error("unknown variable '" + item.substr(0, eq) + "'");
    g.push_back({it->second, text::parse_int(item.substr(eq + 1))});
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return g;
}

// "key=value" with the expected key.
std::string field(const std::string& tok, const std::string& key) {
  if (tok.compare(0, key.size() + 1, key + "=") != 0) throw Error("expected '" + key + "=' in '" + tok + "'");
  return tok.substr(key.size() + 1);
}

}  // namespace

std::string write_proof(const Formula& phi, const Proof& p) {
  std::ostringstream out;
  out << "proof v1 scheme=" << p.scheme_id << " formula=" << p.formula_digest << "\n";
  for (const auto& [id, enc] : p.fingerprints) out << "fp " << id << " " << enc << "\n";
  for (const auto& s : p.steps) {
    out << "step " << s.id << " ";
    switch (s.rule) {
      case ProofStep::Rule::R1: {
        out << "R1 ctx=";
        for (std::size_t i = 0; i < s.ctx.size(); ++i) out << (i ? ";" : "") << assignment_str(phi, s.ctx[i]);
        out << " in=" << s.in << " out=" << s.out;
        break;
      }
      case ProofStep::Rule::R2:
        out << "R2 a=" << s.a << " b=" << s.b;
        break;
      case ProofStep::Rule::R3:
        out << "R3 g=" << assignment_str(phi, s.g) << " sub=" << s.sub << " out=" << s.out;
        break;
    }
    out << "\n";
  }
  out << "conclude " << p.conclusion << "\n";
  return out.str();
}

Proof parse_proof(const Formula& phi, const std::string& text_in) {
  std::map<std::string, int> ids;
  for (int v = 0; v < phi.num_vars(); ++v) ids.emplace(phi.names()[v], v);

  Proof p;
  std::istringstream in(text_in);
  std::string line;
  int lineno = 0;
  bool header = false, concluded = false;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      auto w = text::split_ws(line);
      if (w.empty()) continue;
      if (concluded) throw Error("text after conclusion");
      if (!header) {
        if (w.size() != 4 || w[0] != "proof" || w[1] != "v1") throw Error("bad header");
        p.scheme_id = field(w[2], "scheme");
        p.formula_digest = field(w[3], "formula");
        header = true;
      } else if (w[0] == "fp") {
        if (w.size() < 3) throw Error("bad fingerprint line");
        // The encoding is everything after the id, verbatim.
        std::size_t at = line.find(w[1], line.find("fp") + 2) + w[1].size() + 1;
        p.fingerprints.emplace_back(text::parse_int(w[1]), line.substr(at));
      } else if (w[0] == "step") {
        if (w.size() < 3) throw Error("bad step line");
        ProofStep s;
        s.id = text::parse_int(w[1]);
        if (w[2] == "R1") {
          // An empty context may leave "ctx=" as its own token.
          if (w.size() != 6) throw Error("bad R1 step");
          s.rule = ProofStep::Rule::R1;
          std::string ctx = field(w[3], "ctx");
          if (!ctx.empty()) {
            std::size_t start = 0;
            while (true) {
              std::size_t semi = ctx.find(';', start);
              s.ctx.push_back(parse_assignment(ids, ctx.substr(start, semi - start)));
              if (semi == std::string::npos) break;
              start = semi + 1;
            }
          }
          s.in = text::parse_int(field(w[4], "in"));
          s.out = text::parse_int(field(w[5], "out"));
        } else if (w[2] == "R2") {
          if (w.size() != 5) throw Error("bad R2 step");
          s.rule = ProofStep::Rule::R2;
          s.a = text::parse_int(field(w[3], "a"));
          s.b = text::parse_int(field(w[4], "b"));
        } else if (w[2] == "R3") {
          if (w.size() != 6) throw Error("bad R3 step");
          s.rule = ProofStep::Rule::R3;
          s.g = parse_assignment(ids, field(w[3], "g"));
          s.sub = text::parse_int(field(w[4], "sub"));
          s.out = text::parse_int(field(w[5], "out"));
        } else {
          throw Error("unknown rule '" + w[2] + "'");
        }
        p.steps.push_back(std::move(s));
      } else if (w[0] == "conclude") {
        if (w.size() != 2) throw Error("bad conclusion");
        p.conclusion = text::parse_int(w[1]);
        concluded = true;
      } else {
        throw Error("unknown line kind '" + w[0] + "'");
      }
    } catch (const Error& e) {
      throw Error("proof line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!header) throw Error("missing proof header");
  if (!concluded) throw Error("missing conclusion");
  return p;
}

// ---------------------------------------------------------------------------
// Verifier

namespace {

struct Judgement {
  std::vector<BlockAssignment> ctx;
  std::string in;
  std::string out;
};

std::string ctx_key(const std::vector<BlockAssignment>& ctx) {
  std::string k;
  for (const auto& g : ctx) {
    for (const auto& a : g) k += std::to_string(a.var) + "=" + std::to_string(a.value) + ",";
    k += ";";
  }
  return k;
}

class Verifier {
 public:
  Verifier(const Formula& phi, const Proof& p) : phi_(phi), p_(p) {}

  VerifyResult run() {
    try {
      check();
    } catch (const Error& e) {
      return {false, e.what()};
    }
    return {true, ""};
  }

 private:
  [[noreturn]] static void reject(const std::string& why) { throw Error(why); }

  const Formula& formula_for(const std::vector<BlockAssignment>& ctx) {
    std::string key = ctx_key(ctx);
    auto it = formulas_.find(key);
    if (it != formulas_.end()) return it->second;
    Formula f = phi_;
    for (const auto& g : ctx) f = instantiate_block(f, g);
    return formulas_.emplace(key, std::move(f)).first->second;
  }

  const std::string& fp_text(int id) {
    auto it = fps_.find(id);
    if (it == fps_.end()) reject("unknown fingerprint id " + std::to_string(id));
    return it->second.first;
  }
  const Fingerprint& fp(int id) {
    fp_text(id);
    return fps_.at(id).second;
  }

  const Judgement& step(int id, int before) {
    auto it = steps_.find(id);
    if (it == steps_.end() || id_order_.at(id) >= before)
      reject("step " + std::to_string(before) + " refers to unknown or later step " + std::to_string(id));
    return it->second;
  }

  void check() {
    if (p_.formula_digest != formula_digest(phi_)) reject("formula digest mismatch");
    std::unique_ptr<Scheme> scheme;
    try {
      scheme = make_scheme(p_.scheme_id, phi_.domain());
    } catch (const Error& e) {
      reject(std::string("undeclared scheme: ") + e.what());
    }
    if (scheme->id() != p_.scheme_id) reject("non-canonical scheme id " + p_.scheme_id);
    std::string why;
    if (!scheme->supports(phi_.language(), &why)) reject("scheme does not support the language: " + why);
    const Scheme& s = *scheme;

    for (const auto& [id, enc] : p_.fingerprints) {
      if (fps_.count(id)) reject("duplicate fingerprint id " + std::to_string(id));
      Fingerprint f;
      try {
        f = s.decode(enc);
      } catch (const Error& e) {
        reject("fingerprint " + std::to_string(id) + ": " + e.what());
      }
      fps_.emplace(id, std::make_pair(enc, std::move(f)));
    }

    int order = 0;
    for (const auto& st : p_.steps) {
      if (steps_.count(st.id)) reject("duplicate step id " + std::to_string(st.id));
      Judgement j;
      const std::string at = "step " + std::to_string(st.id) + ": ";
      switch (st.rule) {
        case ProofStep::Rule::R1: {
          j.ctx = st.ctx;
          const Formula* f;
          try {
            f = &formula_for(st.ctx);
          } catch (const Error& e) {
            reject(at + "bad context: " + e.what());
          }
          if (f->existential_blocks() != 1) reject(at + "rule 1 needs a single existential block");
          const Fingerprint& in = fp(st.in);
          if (arity_of(in) > static_cast<int>(f->existential_order().size()))
            reject(at + "input fingerprint is too wide");
          Fingerprint out = s.infer(in, single_block_csp(*f));
          if (s.encode(out) != fp_text(st.out)) reject(at + "inference output differs");
          j.in = fp_text(st.in);
          j.out = fp_text(st.out);
          break;
        }
        case ProofStep::Rule::R2: {
          const Judgement& a = step(st.a, order);
          const Judgement& b = step(st.b, order);
          if (a.ctx != b.ctx) reject(at + "rule 2 premises have different formulas");
          if (a.out != b.in) reject(at + "rule 2 premises do not chain");
          j.ctx = a.ctx;
          j.in = a.in;
          j.out = b.out;
          break;
        }
        case ProofStep::Rule::R3: {
          const Judgement& sub = step(st.sub, order);
          if (sub.ctx.empty() || sub.ctx.back() != st.g) reject(at + "sub-derivation is not over phi[g]");
          j.ctx.assign(sub.ctx.begin(), sub.ctx.end() - 1);
          const Formula* f;
          try {
            f = &formula_for(j.ctx);
          } catch (const Error& e) {
            reject(at + "bad context: " + e.what());
          }
          const int n1 = static_cast<int>(f->first_block().size());
          if (arity_of(fps_.at(id_of(sub.in)).second) > n1) reject(at + "sub-derivation starts beyond the first block");
          const Fingerprint& sub_out = fps_.at(id_of(sub.out)).second;
          if (arity_of(sub_out) < n1) reject(at + "sub-derivation does not cover the first block");
          if (s.encode(s.project(sub_out, n1)) != fp_text(st.out)) reject(at + "projection differs");
          j.in = sub.in;
          j.out = fp_text(st.out);
          break;
        }
      }
      id_order_[st.id] = order++;
      steps_.emplace(st.id, std::move(j));
    }

    if (p_.steps.empty() || p_.conclusion != p_.steps.back().id) reject("conclusion is not the final step");
    const Judgement& c = step(p_.conclusion, order);
    if (!c.ctx.empty()) reject("conclusion is not about the whole formula");
    if (c.in != s.encode(s.top())) reject("conclusion does not start from the top fingerprint");
    if (!s.is_empty(fps_.at(id_of(c.out)).second)) reject("conclusion fingerprint is not empty");
  }

  // Some fingerprint id with the given encoding (encodings were checked on entry).
  int id_of(const std::string& enc) {
    for (const auto& [id, e] : fps_)
      if (e.first == enc) return id;
    reject("unknown fingerprint");
  }

  const Formula& phi_;
  const Proof& p_;
  std::map<int, std::pair<std::string, Fingerprint>> fps_;
  std::map<int, Judgement> steps_;
  std::map<int, int> id_order_;
  std::map<std::string, Formula> formulas_;
};

}  // namespace

VerifyResult verify_proof(const Formula& phi, const Proof& p) { return Verifier(phi, p).run(); }

VerifyResult verify_proof(const Formula& phi, const std::string& text_in) {
  Proof p;
  try {
    p = parse_proof(phi, text_in);
  } catch (const Error& e) {
    return {false, e.what()};
  }
  // Certificates are machine-written; any other spelling is refused.
  if (write_proof(phi, p) != text_in) return {false, "proof text is not in canonical form"};
  return verify_proof(phi, p);
}

// ---------------------------------------------------------------------------
// Solver

namespace {

class Builder {
 public:
  explicit Builder(const Scheme& s) : s_(s) {}

  int fp(const Fingerprint& f) {
    std::string enc = s_.encode(f);
    auto it = ids_.find(enc);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(proof.fingerprints.size()) + 1;
    proof.fingerprints.emplace_back(id, enc);
    ids_.emplace(enc, id);
    return id;
  }

  int add(ProofStep st) {
    st.id = static_cast<int>(proof.steps.size()) + 1;
    proof.steps.push_back(std::move(st));
    return proof.steps.back().id;
  }

  std::pair<std::size_t, std::size_t> mark() const { return {proof.steps.size(), proof.fingerprints.size()}; }

  void rollback(std::pair<std::size_t, std::size_t> m) {
    proof.steps.resize(m.first);
    while (proof.fingerprints.size() > m.second) {
      ids_.erase(proof.fingerprints.back().second);
      proof.fingerprints.pop_back();
    }
  }

  Proof proof;

 private:
  const Scheme& s_;
  std::map<std::string, int> ids_;
};

struct Level {
  Fingerprint out;
  int step = 0;
};

// Constraint indices that survive instantiation with g; equal keys give
// equal phi[g].
std::vector<int> kept_key(const Formula& phi, const Assignment& g) {
  std::vector<int> key;
  for (std::size_t i = 0; i < phi.constraints().size(); ++i) {
    bool dead = false;
    for (const auto& atom : phi.constraints()[i].guard)
      if (phi.block_of(atom.var) == 1 && g[atom.var] != atom.value) dead = true;
    if (!dead) key.push_back(static_cast<int>(i));
  }
  return key;
}

class Saturator {
 public:
  Saturator(const Scheme& s, Builder* b) : s_(s), b_(b) {}

  std::vector<Fingerprint> top_chain;

  Level derive(const Formula& phi, std::vector<BlockAssignment>& ctx, const Fingerprint& start) {
    if (phi.existential_blocks() == 1) {
      Level r{s_.infer(start, single_block_csp(phi)), 0};
      if (b_) {
        ProofStep st;
        st.rule = ProofStep::Rule::R1;
        st.ctx = ctx;
        st.in = b_->fp(start);
        st.out = b_->fp(r.out);
        r.step = b_->add(std::move(st));
      }
      return r;
    }

    const int n1 = static_cast<int>(phi.first_block().size());
    std::vector<int> ys(phi.first_universal_block());
    std::sort(ys.begin(), ys.end());
    const int d = phi.domain();
    const bool top = ctx.empty();

    std::optional<Level> cur;
    bool again = true;
    while (again) {
      again = false;
      std::set<std::vector<int>> tried;
      Tuple vals(ys.size(), 0);
      do {
        Assignment g(phi.num_vars(), kUnbound);
        BlockAssignment ga;
        for (std::size_t i = 0; i < ys.size(); ++i) {
          g[ys[i]] = vals[i];
          ga.push_back({ys[i], vals[i]});
        }
        if (cur && !tried.insert(kept_key(phi, g)).second) continue;

        auto m = b_ ? b_->mark() : std::make_pair(std::size_t{0}, std::size_t{0});
        ctx.push_back(ga);
        Level sub = derive(instantiate_universals(phi, g), ctx, cur ? cur->out : start);
        ctx.pop_back();
        Fingerprint cand = s_.project(sub.out, n1);

        if (!cur || !s_.leq(cur->out, cand)) {
          Level next{cand, 0};
          if (b_) {
            ProofStep st;
            st.rule = ProofStep::Rule::R3;
            st.g = ga;
            st.sub = sub.step;
            st.out = b_->fp(cand);
            next.step = b_->add(std::move(st));
            if (cur) {
              ProofStep glue;
              glue.rule = ProofStep::Rule::R2;
              glue.a = cur->step;
              glue.b = next.step;
              next.step = b_->add(std::move(glue));
            }
          }
          cur = std::move(next);
          if (top) top_chain.push_back(cur->out);
          again = !s_.is_empty(cur->out);
          break;
        }
        if (b_) b_->rollback(m);
      } while (next_tuple(vals, d));
    }
    return *cur;
  }

 private:
  const Scheme& s_;
  Builder* b_;
};

}  // namespace

Derivation derive_minimal(const Formula& phi, const Fingerprint& start, const Scheme& scheme) {
  if (arity_of(start) > static_cast<int>(phi.first_block().size()))
    throw Error("start fingerprint is wider than the first block");
  Saturator sat(scheme, nullptr);
  std::vector<BlockAssignment> ctx;
  Level r = sat.derive(phi, ctx, start);
  Derivation out{r.out, std::move(sat.top_chain)};
  if (phi.existential_blocks() == 1) out.chain.push_back(r.out);
  return out;
}

Verdict solve(const Formula& phi, const Scheme& scheme) {
  std::string why;
  if (!scheme.supports(phi.language(), &why))
    throw Error("scheme " + scheme.id() + " does not support the language: " + why);
  Builder b(scheme);
  Saturator sat(scheme, &b);
  std::vector<BlockAssignment> ctx;
  Level r = sat.derive(phi, ctx, scheme.top());

  Verdict v;
  v.proof_steps = static_cast<int>(b.proof.steps.size());
  if (scheme.is_empty(r.out)) {
    v.truth = false;
    b.proof.scheme_id = scheme.id();
    b.proof.formula_digest = formula_digest(phi);
    b.proof.conclusion = r.step;
    v.proof = std::move(b.proof);
  } else {
    v.truth = true;
    v.first_block = scheme.construct(r.out);
    v.stable = std::move(r.out);
  }
  return v;
}

}  // namespace qecsp
