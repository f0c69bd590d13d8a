#pragma once
#include <cstdint>
#include <string_view>

namespace scalent {

// Counter-based RNG: each (master seed, operation tag, cell index) names an
// independent stream, so results do not depend on execution order or thread
// scheduling. splitmix64 finalizer as the bijective mixer.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  Rng(uint64_t master, std::string_view tag, uint64_t cell = 0) {
    uint64_t k = mix64(master);
    for (unsigned char c : tag) k = mix64(k ^ (uint64_t)c);
    key_ = mix64(k ^ mix64(cell ^ 0xa5a5a5a5a5a5a5a5ull));
  }
  uint64_t u64() { return mix64(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }
  // uniform in [0,1)
  double uniform() { return (u64() >> 11) * 0x1.0p-53; }
  // uniform integer in [0, n)
  uint64_t below(uint64_t n) {
    // rejection-free modulo is fine at our scales; keep it unbiased anyway
    uint64_t lim = ~uint64_t(0) - ~uint64_t(0) % n;
    uint64_t v;
    do { v = u64(); } while (v >= lim);
    return v % n;
  }

 private:
  uint64_t key_;
  uint64_t ctr_ = 0;
};

}  // namespace scalent
