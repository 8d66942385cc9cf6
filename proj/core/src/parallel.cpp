#include "diffreg/parallel.hpp"

#include <omp.h>

namespace diffreg {

void set_thread_count(int threads) {
  if (threads < 1) threads = omp_get_num_procs();
  omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace diffreg
