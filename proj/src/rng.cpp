#include "lerwlab/rng.hpp"

namespace lerwlab {

std::uint64_t hash_stream_name(const char* s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* p = s; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ULL;
  }
  return detail::splitmix64(h);
}

}  // namespace lerwlab
