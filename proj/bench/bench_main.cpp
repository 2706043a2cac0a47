// Serial versus OpenMP timings for the per-example kernels.
// Usage: htrace_bench [examples] [annotators] [repeats]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <omp.h>

#include "htrace/heuristics.hpp"
#include "htrace/overlap.hpp"
#include "synthetic.hpp"

namespace {

template <typename Fn>
double best_of(int repeats, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::cout << name << ": serial " << serial_ms << " ms, parallel " << parallel_ms << " ms, speedup "
            << serial_ms / parallel_ms << "x\n";
}

}  // namespace

int main(int argc, char** argv) {
  const int examples = argc > 1 ? std::atoi(argv[1]) : 5000;
  const int annotators = argc > 2 ? std::atoi(argv[2]) : 100;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

  auto corpus = htrace::testing::synthetic_corpus_sized(examples, annotators, 42);
  std::istringstream vectors(htrace::testing::synthetic_embeddings(50, 42));
  auto table = htrace::overlap::parse_embeddings(vectors);
  std::cout << examples << " examples, " << annotators << " annotators, " << omp_get_max_threads()
            << " OpenMP threads\n";

  std::size_t sink = 0;
  const double fs = best_of(repeats, [&] { sink += htrace::heuristics::featurize_corpus_serial(corpus).rows.size(); });
  const double fp = best_of(repeats, [&] { sink += htrace::heuristics::featurize_corpus(corpus).rows.size(); });
  report("featurize", fs, fp);

  const double es = best_of(repeats, [&] {
    sink += htrace::overlap::extract_instances(corpus, table, htrace::Execution::serial).rows.size();
  });
  const double ep = best_of(repeats, [&] {
    sink += htrace::overlap::extract_instances(corpus, table, htrace::Execution::parallel).rows.size();
  });
  report("overlap features", es, ep);
  return sink == 0;
}
