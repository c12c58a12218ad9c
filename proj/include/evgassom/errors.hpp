// Copyright 2026 The evgassom authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace evgassom {

enum class errc {
  bad_magic,
  truncated_record,
  non_monotone_timestamp,
  out_of_range_coordinate,
  length_not_multiple_of_5,
  checksum_mismatch,
  patch_larger_than_sensor,
  invalid_argument,
  timestamp_regression,
  not_perfect_square,
  h_exceeds_d,
  rank_deficient,
  numerical_underflow,
  geometry_mismatch,
  bank_shape_mismatch,
  chain_mismatch,
  empty_program,
  length_mismatch,
  empty_training_set,
  too_few_samples,
  wrong_layer_shape,
  bad_config,
  io_error,
};

const char* errc_name(errc code) noexcept;

// Library-wide exception. Parser errors additionally carry the byte offset
// of the offending input.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}
  Error(errc code, const std::string& message, std::uint64_t byte_offset)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message +
                           " (byte offset " + std::to_string(byte_offset) + ")"),
        code_(code),
        has_offset_(true),
        offset_(byte_offset) {}

  errc code() const noexcept { return code_; }
  bool has_offset() const noexcept { return has_offset_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  errc code_;
  bool has_offset_ = false;
  std::uint64_t offset_ = 0;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

[[noreturn]] inline void fail_at(errc code, const std::string& message,
                                 std::uint64_t byte_offset) {
  throw Error(code, message, byte_offset);
}

}  // namespace evgassom
