#pragma once

#include <cstdint>
#include <random>

namespace ucv {

uint64_t splitmix64(uint64_t x);

// Deterministic stream keyed by (seed, stream id). Every Monte Carlo
// replication gets its own stream, so parallel and serial sweeps draw
// identical numbers regardless of worker count.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream_id);

  double normal();                       // N(0, 1)
  double uniform();                      // [0, 1)
  uint64_t uniform_int(uint64_t bound);  // {0, …, bound-1}

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Compose two ids into one stream key.
uint64_t stream_id(uint64_t a, uint64_t b);

}  // namespace ucv
