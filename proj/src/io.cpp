#include "qecsp/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

namespace qecsp {

ParseError::ParseError(int line, int column, const std::string& msg)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@' || c == '.' || c == '\'';
}

struct Token {
  enum Kind { Ident, Int, Punct, End } kind;
  std::string text;
  int column;
};

class Lexer {
 public:
  Lexer(const std::string& line, int lineno) : lineno_(lineno) {
    std::size_t i = 0;
    while (i < line.size()) {
      char c = line[i];
      if (c == '#') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      const int col = static_cast<int>(i) + 1;
      if (ident_start(c)) {
        std::size_t j = i;
        while (j < line.size() && ident_char(line[j])) ++j;
        toks_.push_back({Token::Ident, line.substr(i, j - i), col});
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
        toks_.push_back({Token::Int, line.substr(i, j - i), col});
        i = j;
      } else if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
        toks_.push_back({Token::Punct, "->", col});
        i += 2;
      } else if (std::string("{}()[],=:|").find(c) != std::string::npos) {
        toks_.push_back({Token::Punct, std::string(1, c), col});
        ++i;
      } else {
        throw ParseError(lineno, col, std::string("unexpected character '") + c + "'");
      }
    }
    toks_.push_back({Token::End, "", static_cast<int>(line.size()) + 1});
  }

  bool empty() const { return toks_.size() == 1; }
  const Token& peek() const { return toks_[pos_]; }
  bool at_end() const { return peek().kind == Token::End; }
  Token next() {
    Token t = toks_[pos_];
    if (t.kind != Token::End) ++pos_;
    return t;
  }
  bool accept(const std::string& punct) {
    if (peek().kind == Token::Punct && peek().text == punct) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(const std::string& punct) {
    if (!accept(punct)) fail(peek(), "expected '" + punct + "'");
  }
  std::string ident(const char* what) {
    if (peek().kind != Token::Ident) fail(peek(), std::string("expected ") + what);
    return next().text;
  }
  int integer(const char* what) {
    if (peek().kind != Token::Int) fail(peek(), std::string("expected ") + what);
    Token t = next();
    if (t.text.size() > 9) fail(t, "number too large");
    return std::stoi(t.text);
  }
  void expect_end() {
    if (!at_end()) fail(peek(), "unexpected '" + peek().text + "'");
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(lineno_, t.column, msg); }
  int lineno() const { return lineno_; }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int lineno_;
};

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

// Values after "op <name> <arity> :", in lexicographic argument order.
Operation parse_op_line(Lexer& lx, int domain) {
  Token at = lx.peek();
  std::string name = lx.ident("operation name");
  int arity = lx.integer("arity");
  if (arity < 1 || arity > 8) lx.fail(at, "operation arity must be between 1 and 8");
  lx.expect(":");
  std::vector<int> table;
  while (!lx.at_end()) {
    if (lx.accept("|") || lx.accept(",")) continue;
    Token t = lx.peek();
    int v = lx.integer("table value");
    if (v >= domain) lx.fail(t, "value " + std::to_string(v) + " outside the domain");
    table.push_back(v);
  }
  std::size_t want = 1;
  for (int i = 0; i < arity; ++i) want *= domain;
  if (table.size() != want)
    lx.fail(at, "operation " + name + " needs " + std::to_string(want) + " table entries, got " +
                    std::to_string(table.size()));
  return Operation{name, domain, arity, table};
}

SetFunction parse_setfn_line(Lexer& lx, int domain) {
  Token at = lx.peek();
  std::string name = lx.ident("set function name");
  lx.expect(":");
  const Subset full = full_subset(domain);
  std::vector<int> table(full + 1, -1);
  while (!lx.at_end()) {
    Token t = lx.peek();
    int mask = lx.integer("mask");
    if (mask < 1 || static_cast<Subset>(mask) > full) lx.fail(t, "mask out of range");
    lx.expect("->");
    Token tv = lx.peek();
    int v = lx.integer("value");
    if (v >= domain) lx.fail(tv, "value outside the domain");
    if (table[mask] >= 0) lx.fail(t, "mask given twice");
    table[mask] = v;
  }
  for (Subset m = 1; m <= full; ++m)
    if (table[m] < 0) lx.fail(at, "set function " + name + " has no value for mask " + std::to_string(m));
  table[0] = 0;
  return SetFunction{name, domain, table};
}

std::string tuple_text(const Tuple& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(t[i]);
  }
  return s + ")";
}

}  // namespace

Instance parse_instance(const std::string& text) {
  Instance inst;
  std::shared_ptr<ConstraintLanguage> lang;
  std::map<std::string, int> var_id;
  std::vector<std::string> names;
  std::vector<int> quant;  // per var: 0 exists, 1 forall
  std::vector<std::vector<int>> blocks{{}};
  std::vector<ExtendedConstraint> cons;
  const auto lines = lines_of(text);
  int lineno = 0;

  auto var_ref = [&](Lexer& lx) {
    Token t = lx.peek();
    std::string v = lx.ident("variable");
    auto it = var_id.find(v);
    if (it == var_id.end()) lx.fail(t, "undeclared variable " + v);
    return std::pair{it->second, t};
  };
  auto rel_ref = [&](Lexer& lx) {
    Token t = lx.peek();
    std::string r = lx.ident("relation name");
    int idx = lang->find(r);
    if (idx < 0) lx.fail(t, "undeclared relation " + r);
    return std::pair{idx, t};
  };

  for (const auto& line : lines) {
    ++lineno;
    Lexer lx(line, lineno);
    if (lx.empty()) continue;
    Token kw = lx.peek();
    std::string word = lx.ident("keyword");
    if (word != "domain" && !lang) lx.fail(kw, "the domain must be declared first");

    if (word == "domain") {
      if (lang) lx.fail(kw, "domain declared twice");
      Token t = lx.peek();
      int k = lx.integer("domain size");
      if (k < 1 || k > 16) lx.fail(t, "domain size must be between 1 and 16");
      lang = std::make_shared<ConstraintLanguage>(k);
      lx.expect_end();
    } else if (word == "relation") {
      Token nt = lx.peek();
      std::string name = lx.ident("relation name");
      if (lang->find(name) >= 0) lx.fail(nt, "relation " + name + " declared twice");
      int arity = lx.integer("arity");
      lx.expect("{");
      std::vector<Tuple> tuples;
      while (!lx.accept("}")) {
        lx.accept(",");
        Token tt = lx.peek();
        lx.expect("(");
        Tuple tup;
        while (!lx.accept(")")) {
          if (!tup.empty()) lx.expect(",");
          Token vt = lx.peek();
          int v = lx.integer("value");
          if (v >= lang->domain_size()) lx.fail(vt, "value " + std::to_string(v) + " outside the domain");
          tup.push_back(v);
        }
        if (static_cast<int>(tup.size()) != arity)
          lx.fail(tt, "tuple of arity " + std::to_string(tup.size()) + " in relation of arity " +
                          std::to_string(arity));
        tuples.push_back(std::move(tup));
      }
      lx.expect_end();
      lang->add(Relation(name, lang->domain_size(), arity, std::move(tuples)));
    } else if (word == "exists" || word == "forall") {
      const bool universal = word == "forall";
      if (lx.at_end()) lx.fail(lx.peek(), "empty quantifier block");
      const bool last_universal = blocks.size() % 2 == 0;
      if (universal != last_universal) blocks.emplace_back();
      while (!lx.at_end()) {
        Token t = lx.peek();
        std::string v = lx.ident("variable");
        if (var_id.count(v)) lx.fail(t, "variable " + v + " declared twice");
        var_id[v] = static_cast<int>(names.size());
        blocks.back().push_back(static_cast<int>(names.size()));
        names.push_back(v);
        quant.push_back(universal ? 1 : 0);
      }
    } else if (word == "constraint") {
      ExtendedConstraint ec;
      if (lx.accept("[")) {
        while (!lx.accept("]")) {
          if (!ec.guard.empty()) lx.expect(",");
          auto [v, t] = var_ref(lx);
          if (!quant[v]) lx.fail(t, "guard on existential variable " + names[v]);
          lx.expect("=");
          Token vt = lx.peek();
          int d = lx.integer("value");
          if (d >= lang->domain_size()) lx.fail(vt, "value outside the domain");
          ec.guard.push_back({v, d});
        }
      }
      auto [rel, rt] = rel_ref(lx);
      ec.relation = rel;
      lx.expect("(");
      while (!lx.accept(")")) {
        if (!ec.head.empty()) lx.expect(",");
        auto [v, t] = var_ref(lx);
        if (quant[v]) lx.fail(t, "head on universal variable " + names[v]);
        ec.head.push_back(v);
      }
      lx.expect_end();
      if (static_cast<int>(ec.head.size()) != lang->at(rel).arity())
        lx.fail(rt, "relation " + lang->at(rel).name() + " has arity " + std::to_string(lang->at(rel).arity()));
      cons.push_back(std::move(ec));
    } else if (word == "standard") {
      auto [rel, rt] = rel_ref(lx);
      std::vector<int> args;
      lx.expect("(");
      while (!lx.accept(")")) {
        if (!args.empty()) lx.expect(",");
        args.push_back(var_ref(lx).first);
      }
      lx.expect_end();
      if (static_cast<int>(args.size()) != lang->at(rel).arity())
        lx.fail(rt, "relation " + lang->at(rel).name() + " has arity " + std::to_string(lang->at(rel).arity()));
      std::vector<bool> universal(quant.begin(), quant.end());
      try {
        auto part = constraint_to_extended(*lang, rel, args, universal);
        cons.insert(cons.end(), part.begin(), part.end());
      } catch (const Error& e) {
        lx.fail(rt, e.what());
      }
    } else if (word == "op") {
      inst.operations.push_back(parse_op_line(lx, lang->domain_size()));
    } else if (word == "setfn") {
      inst.set_functions.push_back(parse_setfn_line(lx, lang->domain_size()));
    } else {
      lx.fail(kw, "unknown keyword " + word);
    }
  }
  if (!lang) throw ParseError(std::max(lineno, 1), 1, "no domain declaration");
  bool dummy = false;
  try {
    inst.formula = Formula::make(lang, names, blocks, cons, &dummy);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::max(lineno, 1), 1, e.what());
  }
  if (dummy) inst.warnings.push_back("prefix ends with a universal block; appended a dummy existential variable");
  return inst;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Instance load_instance(const std::string& path) {
  try {
    return parse_instance(read_file(path));
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

OperationFile parse_operations(const std::string& text, int default_domain) {
  OperationFile out;
  int domain = default_domain;
  int lineno = 0;
  for (const auto& line : lines_of(text)) {
    ++lineno;
    Lexer lx(line, lineno);
    if (lx.empty()) continue;
    Token kw = lx.peek();
    std::string word = lx.ident("keyword");
    if (word == "domain") {
      Token t = lx.peek();
      domain = lx.integer("domain size");
      if (domain != default_domain)
        lx.fail(t, "domain " + std::to_string(domain) + " differs from the instance domain " +
                       std::to_string(default_domain));
      lx.expect_end();
    } else if (word == "op") {
      out.operations.push_back(parse_op_line(lx, domain));
    } else if (word == "setfn") {
      out.set_functions.push_back(parse_setfn_line(lx, domain));
    } else {
      lx.fail(kw, "expected op or setfn");
    }
  }
  return out;
}

std::string serialize_instance(const Formula& phi) {
  std::ostringstream out;
  const auto& gamma = phi.language();
  out << "domain " << gamma.domain_size() << "\n";
  for (const auto& r : gamma.relations()) {
    out << "relation " << r.name() << " " << r.arity() << " {";
    for (std::size_t i = 0; i < r.tuples().size(); ++i) out << (i ? " " : "") << tuple_text(r.tuples()[i]);
    out << "}\n";
  }
  for (std::size_t b = 0; b < phi.blocks().size(); ++b) {
    if (phi.blocks()[b].empty()) continue;
    out << (b % 2 ? "forall" : "exists");
    for (int v : phi.blocks()[b]) out << " " << phi.names()[v];
    out << "\n";
  }
  for (const auto& ec : phi.constraints()) {
    out << "constraint [";
    for (std::size_t i = 0; i < ec.guard.size(); ++i)
      out << (i ? ", " : "") << phi.names()[ec.guard[i].var] << "=" << ec.guard[i].value;
    out << "] " << gamma.at(ec.relation).name() << "(";
    for (std::size_t i = 0; i < ec.head.size(); ++i) out << (i ? ", " : "") << phi.names()[ec.head[i]];
    out << ")\n";
  }
  return out.str();
}

std::string serialize_operation(const Operation& op) {
  std::string s = "op " + op.name + " " + std::to_string(op.arity) + " :";
  for (int v : op.table) s += " " + std::to_string(v);
  return s;
}

std::string serialize_set_function(const SetFunction& f) {
  std::string s = "setfn " + f.name + " :";
  for (Subset m = 1; m <= full_subset(f.domain); ++m) s += " " + std::to_string(m) + "->" + std::to_string(f(m));
  return s;
}

std::string formula_digest(const Formula& phi) {
  const std::string text = serialize_instance(phi);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr)) throw Error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct DimacsBody {
  int num_vars = -1;
  std::vector<std::pair<char, std::vector<int>>> prefix;
  std::vector<Clause> clauses;
};

DimacsBody parse_dimacs(const std::string& text, bool quantified) {
  DimacsBody body;
  Clause cur;
  int lineno = 0;
  for (const auto& line : lines_of(text)) {
    ++lineno;
    std::istringstream in(line);
    std::string first;
    if (!(in >> first) || first[0] == 'c' || first[0] == '%') continue;
    if (first == "p") {
      std::string fmt;
      int nc = 0;
      if (!(in >> fmt >> body.num_vars >> nc) || fmt != "cnf" || body.num_vars < 0)
        throw ParseError(lineno, 1, "malformed problem line");
      continue;
    }
    if (body.num_vars < 0) throw ParseError(lineno, 1, "clause before the problem line");
    auto read_lits = [&](std::istringstream& s, std::vector<int>& out, const std::string* head) {
      std::vector<std::string> words;
      if (head) words.push_back(*head);
      std::string w;
      while (s >> w) words.push_back(w);
      for (const auto& x : words) {
        int v = 0;
        try {
          std::size_t used = 0;
          v = std::stoi(x, &used);
          if (used != x.size()) throw std::invalid_argument(x);
        } catch (const std::exception&) {
          throw ParseError(lineno, 1, "bad literal '" + x + "'");
        }
        if (std::abs(v) > body.num_vars) throw ParseError(lineno, 1, "variable " + x + " out of range");
        out.push_back(v);
      }
    };
    if (quantified && (first == "a" || first == "e")) {
      std::vector<int> vars;
      read_lits(in, vars, nullptr);
      if (vars.empty() || vars.back() != 0) throw ParseError(lineno, 1, "quantifier line must end with 0");
      vars.pop_back();
      body.prefix.push_back({first[0], vars});
      continue;
    }
    std::vector<int> lits;
    read_lits(in, lits, &first);
    for (int l : lits) {
      if (l == 0) {
        body.clauses.push_back(cur);
        cur.clear();
      } else {
        cur.push_back({std::abs(l) - 1, l > 0});
      }
    }
  }
  if (body.num_vars < 0) throw ParseError(std::max(lineno, 1), 1, "missing problem line");
  if (!cur.empty()) body.clauses.push_back(cur);
  return body;
}

}  // namespace

Cnf parse_cnf(const std::string& text) {
  auto body = parse_dimacs(text, false);
  return Cnf{body.num_vars, body.clauses};
}

QuantifiedCnf parse_qcnf(const std::string& text) {
  auto body = parse_dimacs(text, true);
  QuantifiedCnf q;
  for (int v = 1; v <= body.num_vars; ++v) q.names.push_back("v" + std::to_string(v));
  std::vector<bool> bound(body.num_vars, false);
  for (auto& [kind, vars] : body.prefix)
    for (int& v : vars) {
      if (v <= 0 || bound[v - 1]) throw Error("variable " + std::to_string(v) + " quantified twice");
      bound[--v] = true;
    }
  QBlock free_block{Quantifier::Exists, {}};
  for (int v = 0; v < body.num_vars; ++v)
    if (!bound[v]) free_block.vars.push_back(v);
  if (!free_block.vars.empty()) q.blocks.push_back(free_block);
  for (auto& [kind, vars] : body.prefix)
    q.blocks.push_back({kind == 'a' ? Quantifier::Forall : Quantifier::Exists, vars});
  q.clauses = body.clauses;
  return q;
}

}  // namespace qecsp
