/*
 * Copyright 2026 The recbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace recbench {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file content.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Missing, empty or inconsistent dataset.
class DataError : public Error {
 public:
  using Error::Error;
};

// The evaluation protocol cannot be satisfied (e.g. not enough negatives).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Negative sampling is impossible (the user consumed the whole catalog).
class SamplingError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrainingDivergedError : public NumericalError {
 public:
  TrainingDivergedError(int epoch, double learning_rate)
      : NumericalError("training diverged (non-finite loss) at epoch " +
                       std::to_string(epoch) + " with learning rate " +
                       std::to_string(learning_rate)),
        epoch_(epoch),
        learning_rate_(learning_rate) {}
  int epoch() const { return epoch_; }
  double learning_rate() const { return learning_rate_; }

 private:
  int epoch_;
  double learning_rate_;
};

}  // namespace recbench
