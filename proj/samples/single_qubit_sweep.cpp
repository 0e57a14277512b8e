// T-sweep of the single-qubit problem at 1, 2, 4 and 8 free parameters,
// printed as CSV next to the linear baseline.
//
//   single_qubit_sweep [max_T]

#include <cstdlib>
#include <iostream>
#include <string>

#include "aqaoa/harness.hpp"

int main(int argc, char** argv) {
  aqaoa::ExperimentConfig config;
  config.problem = "single-qubit";
  config.parameter_counts = {1, 2, 4, 8};
  const int max_t = argc > 1 ? std::atoi(argv[1]) : 10;
  for (int t = 1; t <= max_t; ++t) config.times.push_back(t);
  config.optimizer.restarts = 2;

  try {
    const auto record = aqaoa::run_sweep(config);
    aqaoa::write_csv(record, std::cout);
  } catch (const aqaoa::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
