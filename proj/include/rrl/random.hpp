/*
 Copyright 2026 The rrl Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <cstdint>
#include <random>

#include "rrl/linalg.hpp"

namespace rrl {

/// Seedable Gaussian source. Child streams are derived from the parent seed
/// with a SplitMix64 mix, so a single master seed fixes every draw of a trial.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream keyed by `stream_id`; does not advance this stream.
  Rng substream(std::uint64_t stream_id) const;

  double normal();
  Vector normal(Eigen::Index n);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id);

/// Separate streams for process noise w_t and policy excitation e_t.
struct NoiseStreams {
  Rng process;
  Rng excitation;

  static NoiseStreams from_seed(std::uint64_t seed);
};

}  // namespace rrl
