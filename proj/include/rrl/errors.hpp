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

#include <stdexcept>
#include <string>

namespace rrl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A covariance matrix has an eigenvalue below the PSD clamping tolerance.
class InvalidCovariance : public Error {
 public:
  using Error::Error;
};

/// The regressor Gram matrix is numerically singular (insufficient excitation).
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// The conic solver stalled or could not certify its answer.
class NumericalTrouble : public Error {
 public:
  using Error::Error;
};

/// Robust synthesis SDP is infeasible: the uncertainty region is too large.
class NoRobustlyStabilizingPolicy : public Error {
 public:
  using Error::Error;
};

/// A fixed policy does not satisfy the robust Lyapunov LMI over the region.
class PolicyNotRobustlyStabilizing : public Error {
 public:
  using Error::Error;
};

class MultiplierSelectionFailed : public Error {
 public:
  MultiplierSelectionFailed(int epoch, const std::string& what)
      : Error("multiplier selection failed at look-ahead epoch " +
              std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Infeasible receding-horizon program for one epoch.
class PlanInfeasible : public Error {
 public:
  using Error::Error;
};

class NotStabilizable : public Error {
 public:
  using Error::Error;
};

/// Configuration parse or validation failure. `what()` names the field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rrl
