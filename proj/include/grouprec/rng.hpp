#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace grouprec {

// Single seeded generator per run. Distribution objects are constructed per
// call so every draw is a pure function of the engine state; this keeps
// checkpointed runs bit-reproducible (std::normal_distribution caches a
// spare variate that would otherwise have to be serialized too).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    return d(engine_);
  }

  double gaussian(double mean, double stddev) {
    std::normal_distribution<double> d(mean, stddev);
    return d(engine_);
  }

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    std::uniform_int_distribution<std::uint64_t> d(0, bound - 1);
    return d(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void deserialize(const std::string& state) {
    std::istringstream is(state);
    is >> engine_;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace grouprec
