#pragma once

#include <cstdint>

namespace focusfl {

/// Purpose tags that separate independent random streams drawn from one seed.
enum class StreamTag : std::uint64_t {
  cluster_centers = 1,
  agent_means = 2,
  train_data = 3,
  test_data = 4,
  init_models = 5,
  outlier_direction = 6,
  unseen_agent = 7,
  minibatch = 8,
  eval_data = 9,
};

/// Counter-based random stream keyed by (seed, tag, index).
///
/// Every draw is a pure function of the key and a running counter, so streams
/// for different agents can be consumed in any order or on any thread without
/// changing what each one produces. Normals use Box-Muller on this stream
/// rather than a platform sampler so values match across standard libraries.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_zero();
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Uniform index in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace focusfl
