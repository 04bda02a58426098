#include <benchmark/benchmark.h>

#include "opda/eval.hpp"
#include "opda/machine_io.hpp"
#include "opda/ppda.hpp"
#include "opda/transforms.hpp"
#include "opda/zoo.hpp"

using namespace opda;

namespace {

MachineSpec load(const std::string& rel) {
  return parse_machine_file(zoo::machine_dir() / rel);
}

void BM_SimulateDyck2(benchmark::State& state) {
  MachineSpec m = load("zoo/dyck2.m");
  Word w;
  for (int i = 0; i < state.range(0) / 2; ++i) {
    w.push_back(dyck_open(1 + i % 2));
  }
  for (int i = state.range(0) / 2; i-- > 0;) {
    w.push_back(dyck_close(1 + i % 2));
  }
  RunBounds b = RunBounds::for_input_length(w.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(accepts(m, w, b));
  }
}
BENCHMARK(BM_SimulateDyck2)->Arg(16)->Arg(64)->Arg(256);

void BM_DecideDup2(benchmark::State& state) {
  ExprPtr e = zoo::construction_expr("dup2");
  Word w;
  Symbol zero = intern_symbol("0"), one = intern_symbol("1");
  for (int r = 0; r < 2; ++r) {
    for (int i = 0; i < state.range(0) / 2; ++i) {
      w.push_back(i % 2 ? one : zero);
    }
  }
  for (auto _ : state) {
    Evaluator ev;
    benchmark::DoNotOptimize(ev.member(e, w));
  }
}
BENCHMARK(BM_DecideDup2)->Arg(8)->Arg(16);

void BM_DyckifyRoundTrip(benchmark::State& state) {
  MachineSpec m = load("samples/evenpal.m");
  for (auto _ : state) {
    DyckifyResult d = dyckify(m);
    MachineSpec back = absorb_dpda_oracle(d.reducer,
                                          dyck_recognizer(d.dyck_width));
    benchmark::DoNotOptimize(back.transitions.size());
  }
}
BENCHMARK(BM_DyckifyRoundTrip);

void BM_Equal6Probability(benchmark::State& state) {
  static const MachineSpec m = equal6_machine(5);
  Word w = equal6_word({7, 7, 7, 7, 7, 7});
  RunBounds b = RunBounds::for_input_length(w.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_acceptance_probability(m, w, b).accept);
  }
}
BENCHMARK(BM_Equal6Probability);

void BM_TableDyck1(benchmark::State& state) {
  ExprPtr e = dyck_expr(1);
  for (auto _ : state) {
    Evaluator ev;
    benchmark::DoNotOptimize(ev.table(e, state.range(0)).size());
  }
}
BENCHMARK(BM_TableDyck1)->Arg(6)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
