#include "csic/parallel.hpp"

#include <Eigen/Core>

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csic {

namespace {
std::atomic<bool> g_serial{false};
}

void set_serial(bool serial) {
  g_serial = serial;
#ifdef _OPENMP
  Eigen::setNbThreads(serial ? 1 : omp_get_max_threads());
#endif
}

bool is_serial() { return g_serial; }

}  // namespace csic
