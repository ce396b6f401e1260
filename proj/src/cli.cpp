#include "qecsp/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "qecsp/proof.hpp"

namespace qecsp {

namespace fs = std::filesystem;

namespace {

std::optional<OperationFile> operations_from_file(const std::string& path, int domain) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return std::nullopt;
  return parse_operations(read_file(path), domain);
}

std::optional<SetFunction> lookup_set_function(const std::string& name, const Instance& inst, int d) {
  for (const auto& f : inst.set_functions)
    if (f.name == name) return f;
  if (auto f = builtin_set_function(name, d)) return f;
  if (auto file = operations_from_file(name, d)) {
    if (file->set_functions.empty()) throw Error(name + " declares no set function");
    return file->set_functions.front();
  }
  return std::nullopt;
}

std::optional<Operation> lookup_operation(const std::string& name, const Instance& inst, int d) {
  for (const auto& op : inst.operations)
    if (op.name == name) return op;
  if (auto op = builtin_operation(name, d)) return op;
  if (auto file = operations_from_file(name, d)) {
    if (file->operations.empty()) throw Error(name + " declares no operation");
    return file->operations.front();
  }
  return std::nullopt;
}

std::string join_assignment(const Formula& phi, const std::vector<int>& vals) {
  std::string s;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i) s += ' ';
    s += phi.names()[phi.first_block()[i]] + "=" + std::to_string(vals[i]);
  }
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") out << text;
  else write_text(path, text);
}

Cnf random_cnf(int vars, int clauses, int width, unsigned seed) {
  std::mt19937 rng(seed);
  Cnf cnf{vars, {}};
  for (int i = 0; i < clauses; ++i) {
    std::vector<int> pool(vars);
    for (int v = 0; v < vars; ++v) pool[v] = v;
    std::shuffle(pool.begin(), pool.end(), rng);
    Clause c;
    for (int j = 0; j < std::min(width, vars); ++j) c.push_back({pool[j], (rng() & 1) != 0});
    cnf.clauses.push_back(std::move(c));
  }
  return cnf;
}

struct SolveOptions {
  std::string instance;
  std::string scheme = "auto";
  std::string proof;
  bool oracle = false;
};

int run_solve(const SolveOptions& o, std::ostream& out, std::ostream& err) {
  Instance inst = load_instance(o.instance);
  for (const auto& w : inst.warnings) err << "warning: " << w << "\n";
  const Formula& phi = inst.formula;
  auto choice = resolve_scheme(o.scheme, inst);
  if (!choice.scheme) throw Error("no fingerprint scheme applies to this language");

  auto t0 = std::chrono::steady_clock::now();
  Verdict v = solve(phi, *choice.scheme);
  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  out << "verdict: " << (v.truth ? "true" : "false") << "\n";
  out << "scheme: " << choice.scheme->id() << " (" << choice.reason << ")\n";
  out << "millis: " << static_cast<long long>(ms) << "\n";
  out << "proof_steps: " << v.proof_steps << "\n";
  if (v.truth && !v.first_block.empty()) out << "first_block: " << join_assignment(phi, v.first_block) << "\n";
  if (v.proof) {
    std::string text = write_proof(phi, *v.proof);
    out << "proof_bytes: " << text.size() << "\n";
    if (!o.proof.empty()) write_text(o.proof, text);
  }
  if (o.oracle) {
    const int n = prefix_size(phi);
    if (n > oracle_limit()) {
      out << "oracle: skipped (" << n << " variables > limit " << oracle_limit() << ")\n";
    } else {
      bool truth = brute_force_truth(phi);
      out << "oracle: " << (truth ? "true" : "false") << "\n";
      if (truth != v.truth) {
        err << "error: solver and oracle disagree\n";
        return kExitOracleMismatch;
      }
    }
  }
  return v.truth ? kExitTrue : kExitFalse;
}

int run_verify(const std::string& instance, const std::string& proof, std::ostream& out) {
  Instance inst = load_instance(instance);
  VerifyResult r;
  try {
    r = verify_proof(inst.formula, read_file(proof));
  } catch (const Error& e) {
    r = {false, e.what()};
  }
  if (r.accepted) {
    out << "accepted\n";
    return kExitTrue;
  }
  out << "rejected: " << r.reason << "\n";
  return kExitError;
}

struct BenchRow {
  std::string id;
  int n_vars = 0;
  int n_blocks = 0;
  std::string verdict = "error";
  long long millis = 0;
  int proof_steps = 0;
  std::string oracle;
};

int run_bench(const std::string& dir, bool oracle, const std::string& path, std::ostream& out,
              std::ostream& err) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".qe") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<BenchRow> rows(files.size());
  std::vector<std::string> errors(files.size());
  const long long count = static_cast<long long>(files.size());
  // Rows are stored by index, so completion order does not matter.
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    BenchRow& row = rows[i];
    row.id = files[i].stem().string();
    try {
      Instance inst = load_instance(files[i].string());
      const Formula& phi = inst.formula;
      row.n_vars = prefix_size(phi);
      row.n_blocks = phi.nonempty_blocks();
      auto choice = resolve_scheme("auto", inst);
      if (!choice.scheme) throw Error("no fingerprint scheme applies");
      auto t0 = std::chrono::steady_clock::now();
      Verdict v = solve(phi, *choice.scheme);
      row.millis = static_cast<long long>(
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      row.verdict = v.truth ? "true" : "false";
      row.proof_steps = v.proof_steps;
      if (oracle)
        row.oracle = row.n_vars > oracle_limit() ? "skipped" : brute_force_truth(phi) ? "true" : "false";
    } catch (const std::exception& e) {
      row.verdict = "error";
      errors[i] = e.what();
    }
  }
  std::ostringstream csv;
  csv << "id,n_vars,n_blocks,verdict,millis,proof_steps" << (oracle ? ",oracle" : "") << "\n";
  int failed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv << r.id << "," << r.n_vars << "," << r.n_blocks << "," << r.verdict << "," << r.millis << ","
        << r.proof_steps;
    if (oracle) csv << "," << (r.verdict == "error" ? "" : r.oracle);
    csv << "\n";
    if (r.verdict == "error") {
      ++failed;
      err << r.id << ": " << errors[i] << "\n";
    }
  }
  emit(csv.str(), path, out);
  return !rows.empty() && failed == static_cast<int>(rows.size()) ? kExitError : kExitTrue;
}

}  // namespace

int oracle_limit() {
  if (const char* s = std::getenv("QECSP_ORACLE_LIMIT")) {
    try {
      return std::stoi(s);
    } catch (const std::exception&) {
      throw Error("QECSP_ORACLE_LIMIT is not a number");
    }
  }
  return 14;
}

SchemeChoice resolve_scheme(const std::string& request, const Instance& inst) {
  const auto& gamma = inst.formula.language();
  const int d = gamma.domain_size();
  if (request == "auto") return scheme_for_language(gamma);
  auto colon = request.find(':');
  if (colon == std::string::npos) throw Error("bad --scheme value '" + request + "'");
  const std::string kind = request.substr(0, colon);
  const std::string rest = request.substr(colon + 1);
  SchemeChoice out;
  out.reason = "requested";
  if (kind == "setfn") {
    if (auto f = lookup_set_function(rest, inst, d)) out.scheme = std::make_unique<PowersetScheme>(*f);
  } else if (kind == "nu") {
    if (auto op = lookup_operation(rest, inst, d)) out.scheme = std::make_unique<NuScheme>(*op);
  } else if (kind == "maltsev") {
    if (auto op = lookup_operation(rest, inst, d)) out.scheme = std::make_unique<MaltsevScheme>(*op);
  }
  if (!out.scheme) out.scheme = make_scheme(request, d);
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solver, refuter and proof checker for existentially restricted QCSP"};
  app.require_subcommand(1);

  SolveOptions so;
  auto* solve_cmd = app.add_subcommand("solve", "decide an instance; writes a proof of falsity on request");
  solve_cmd->add_option("instance", so.instance, "instance file (.qe)")->required();
  solve_cmd->add_option("--scheme", so.scheme, "auto|constant:<d>|setfn:<f>|nu:<op>|maltsev:<op>");
  solve_cmd->add_option("--proof", so.proof, "where to write the proof when false");
  solve_cmd->add_flag("--oracle", so.oracle, "cross-check with the brute-force oracle");

  std::string v_inst, v_proof;
  auto* verify_cmd = app.add_subcommand("verify", "check a proof of falsity");
  verify_cmd->add_option("instance", v_inst)->required();
  verify_cmd->add_option("proof", v_proof)->required();

  auto* gen = app.add_subcommand("gen", "generate instances through the reductions");
  gen->require_subcommand(1);
  std::string g_out, g_cnf, g_qcnf, g_setfn;
  int g_n = 0, g_outer = 0, g_vars = 3, g_clauses = 3, g_domain = 0;
  unsigned g_seed = 1;
  auto out_opt = [&](CLI::App* c) { c->add_option("-o,--output", g_out, "output file (default stdout)"); };

  auto* g_critical = gen->add_subcommand("critical", "EQ/constant critical family and its hardness instance");
  g_critical->add_option("--n", g_n, "family size (clauses of a random 3-CNF)");
  g_critical->add_option("--cnf", g_cnf, "DIMACS input instead of a random CNF");
  g_critical->add_option("--vars", g_vars, "variables of the random CNF");
  g_critical->add_option("--seed", g_seed);
  out_opt(g_critical);

  auto* g_pi2 = gen->add_subcommand("pi2", "extended Horn gadget for a CNF");
  g_pi2->add_option("--cnf", g_cnf, "DIMACS input");
  g_pi2->add_option("--outer", g_outer, "leading variables to quantify universally outside");
  g_pi2->add_option("--vars", g_vars);
  g_pi2->add_option("--clauses", g_clauses);
  g_pi2->add_option("--seed", g_seed);
  out_opt(g_pi2);

  auto* g_h2s = gen->add_subcommand("horn2setfn", "extended Horn formula to a hard set-function language");
  g_h2s->add_option("--qdimacs,--qecnf", g_qcnf, "quantified clause input")->required();
  g_h2s->add_option("--setfn", g_setfn, "set function: builtin name, file or inline table")->required();
  g_h2s->add_option("--domain", g_domain, "domain for builtin or inline set functions");
  out_opt(g_h2s);

  auto* g_2sat = gen->add_subcommand("2sat", "quantified 2-CNF to the 2-SAT language");
  g_2sat->add_option("--qdimacs,--qecnf", g_qcnf)->required();
  out_opt(g_2sat);
  auto* g_horn = gen->add_subcommand("horn", "quantified Horn CNF to the Horn language");
  g_horn->add_option("--qdimacs,--qecnf", g_qcnf)->required();
  out_opt(g_horn);

  std::string b_dir, b_out;
  bool b_oracle = false;
  auto* bench = app.add_subcommand("bench", "solve every .qe file in a directory, CSV report");
  bench->add_option("dir", b_dir)->required()->check(CLI::ExistingDirectory);
  bench->add_flag("--oracle", b_oracle, "add an oracle column");
  bench->add_option("-o,--output", b_out);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitTrue : kExitError;
  }

  try {
    if (*solve_cmd) return run_solve(so, out, err);
    if (*verify_cmd) return run_verify(v_inst, v_proof, out);
    if (*bench) return run_bench(b_dir, b_oracle, b_out, out, err);

    std::string text;
    if (*g_critical) {
      Cnf cnf = !g_cnf.empty() ? parse_cnf(read_file(g_cnf)) : random_cnf(g_vars, std::max(g_n, 2), 3, g_seed);
      Formula phi = critical_hardness_instance(cnf);
      auto fam = critical_family_eq_const(std::max<int>(2, static_cast<int>(cnf.clauses.size())), 0, 1);
      std::ostringstream s;
      for (std::size_t i = 0; i < fam.sets.size(); ++i) {
        s << "# set " << i + 1 << ":";
        for (const auto& a : fam.sets[i]) {
          s << " " << fam.language->at(a.relation).name() << "(";
          for (std::size_t j = 0; j < a.vars.size(); ++j) s << (j ? "," : "") << "v" << a.vars[j] + 1;
          s << ")";
        }
        s << "\n";
      }
      text = s.str() + serialize_instance(phi);
    } else if (*g_pi2) {
      Cnf cnf = !g_cnf.empty() ? parse_cnf(read_file(g_cnf)) : random_cnf(g_vars, g_clauses, 3, g_seed);
      text = serialize_instance(pi2_gadget(cnf, g_outer));
    } else if (*g_h2s) {
      QuantifiedCnf q = parse_qcnf(read_file(g_qcnf));
      std::optional<SetFunction> f;
      int d = g_domain;
      if (auto file = operations_from_file(g_setfn, d > 0 ? d : 2)) {
        if (file->set_functions.empty()) throw Error(g_setfn + " declares no set function");
        f = file->set_functions.front();
      } else {
        if (d <= 0) throw Error("--domain is needed for builtin or inline set functions");
        f = builtin_set_function(g_setfn, d);
        if (!f) {
          auto s = make_scheme("setfn:" + g_setfn, d);
          f = static_cast<const PowersetScheme&>(*s).set_function();
          f->name = "f";
        }
      }
      text = serialize_instance(horn_to_setfunction(q, *f)) + serialize_set_function(*f) + "\n";
    } else if (*g_2sat) {
      text = serialize_instance(encode_qcnf(parse_qcnf(read_file(g_qcnf)), ClauseMode::TwoSat));
    } else if (*g_horn) {
      text = serialize_instance(encode_qcnf(parse_qcnf(read_file(g_qcnf)), ClauseMode::Horn));
    }
    emit(text, g_out, out);
    return kExitTrue;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace qecsp
