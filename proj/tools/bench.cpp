// Serial reference against the OpenMP kernels: the game-tree oracle and the
// Mal'tsev closure. Prints one CSV row per workload and fails on any
// disagreement between the two versions.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

#include <CLI11.hpp>

#include "qecsp/formula.hpp"
#include "qecsp/polymorphism.hpp"
#include "qecsp/scheme.hpp"

using namespace qecsp;

namespace {

template <class F>
double millis(F&& f, int reps) {
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
}

// forall y1..yu exists x1..xe with loose binary constraints, plus an empty
// head guarded by every universal at 1: the last universal branch fails only
// after the whole existential subtree is searched.
Formula wide_instance(std::mt19937& rng, int u, int e) {
  auto lang = std::make_shared<ConstraintLanguage>(2);
  lang->add(Relation("NAND", 2, 2, {{0, 0}, {0, 1}, {1, 0}}));
  lang->add(Relation("OR", 2, 2, {{0, 1}, {1, 0}, {1, 1}}));
  int none = lang->add(Relation("NONE", 2, 2, {}));
  std::vector<std::string> names;
  std::vector<std::vector<int>> blocks{{}, {}, {}};
  for (int i = 0; i < u; ++i) {
    names.push_back("y" + std::to_string(i));
    blocks[1].push_back(i);
  }
  for (int i = 0; i < e; ++i) {
    names.push_back("x" + std::to_string(i));
    blocks[2].push_back(u + i);
  }
  std::vector<ExtendedConstraint> cons;
  for (int i = 0; i + 1 < e; ++i) {
    ExtendedConstraint c{{}, static_cast<int>(rng() % 2), {u + i, u + i + 1}};
    c.guard.push_back({static_cast<int>(rng() % u), static_cast<int>(rng() % 2)});
    cons.push_back(c);
  }
  ExtendedConstraint last{{}, none, {u + e - 2, u + e - 1}};
  for (int i = 0; i < u; ++i) last.guard.push_back({i, 1});
  cons.push_back(last);
  return Formula::make(lang, names, blocks, cons);
}

// Mal'tsev operation on {0,1,2} that is not affine: x when y = z, z when
// x = y, x otherwise.
Operation projection_maltsev() {
  return Operation::from("pm", 3, 3, [](const int* a) {
    if (a[1] == a[2]) return a[0];
    if (a[0] == a[1]) return a[2];
    return a[0];
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel timings"};
  int reps = 3, max_vars = 20, max_arity = 6;
  unsigned seed = 7;
  app.add_option("--reps", reps, "repetitions per measurement")->check(CLI::PositiveNumber);
  app.add_option("--max-vars", max_vars, "largest oracle instance")->check(CLI::Range(4, 30));
  app.add_option("--max-arity", max_arity, "largest closure arity")->check(CLI::Range(3, 8));
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  std::mt19937 rng(seed);
  bool ok = true;
  std::printf("kernel,size,threads,serial_ms,parallel_ms,speedup\n");
  for (int n = 8; n <= max_vars; n += 4) {
    Formula phi = wide_instance(rng, n / 4, n - n / 4);
    bool a = false, b = false;
    double s = millis([&] { a = brute_force_truth_serial(phi); }, reps);
    double p = millis([&] { b = brute_force_truth(phi); }, reps);
    ok = ok && a == b;
    std::printf("oracle,%d,%d,%.3f,%.3f,%.2f\n", n, omp_get_max_threads(), s, p, p > 0 ? s / p : 0.0);
  }
  const Operation affine = *builtin_operation("affine", 3);
  const Operation pm = projection_maltsev();
  for (int n = 3; n <= max_arity; ++n) {
    for (const Operation* op : {&affine, &pm}) {
      std::vector<Tuple> seedset;
      for (int i = 0; i < n + 1; ++i) {
        Tuple t(n);
        for (auto& x : t) x = static_cast<int>(rng() % 3);
        seedset.push_back(t);
      }
      std::vector<Tuple> a, b;
      double s = millis([&] { a = maltsev_closure_serial(seedset, *op); }, reps);
      double p = millis([&] { b = maltsev_closure(seedset, *op); }, reps);
      ok = ok && a == b;
      std::printf("closure_%s,%d/%zu,%d,%.3f,%.3f,%.2f\n", op->name.c_str(), n, a.size(), omp_get_max_threads(), s,
                  p, p > 0 ? s / p : 0.0);
    }
  }
  if (!ok) std::fprintf(stderr, "serial and parallel kernels disagree\n");
  return ok ? 0 : 1;
}
