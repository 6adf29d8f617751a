#include "ucv/rng.hpp"

namespace ucv {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

uint64_t stream_id(uint64_t a, uint64_t b) {
  return splitmix64(a * 0x9E3779B97F4A7C15ULL + splitmix64(b));
}

RngStream::RngStream(uint64_t seed, uint64_t sid) {
  engine_.seed(splitmix64(splitmix64(seed) ^ splitmix64(sid + 1)));
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() {
  return std::generate_canonical<double, 53>(engine_);
}

uint64_t RngStream::uniform_int(uint64_t bound) {
  return std::uniform_int_distribution<uint64_t>(0, bound - 1)(engine_);
}

}  // namespace ucv
