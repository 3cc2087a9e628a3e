#include "lerwlab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace lerwlab {

int default_thread_count() {
  if (const char* env = std::getenv("LERW_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

}  // namespace lerwlab
