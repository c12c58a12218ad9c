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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evgassom/errors.hpp"

namespace evgassom {

struct SensorGeometry {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint16_t num_types = 0;  // P

  friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

// One sensor spike: pixel location, event type, microsecond timestamp.
struct Event {
  std::uint64_t t = 0;  // microseconds
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint16_t p = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

// Immutable validated event sequence. Construction checks that every event
// is inside the sensor geometry and that timestamps never decrease; a stream
// that exists is always well formed.
class EventStream {
 public:
  EventStream() = default;
  EventStream(SensorGeometry geometry, std::vector<Event> events);

  const SensorGeometry& geometry() const noexcept { return geometry_; }
  const std::vector<Event>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }

  friend bool operator==(const EventStream&, const EventStream&) = default;

 private:
  SensorGeometry geometry_;
  std::vector<Event> events_;
};

// Native container "EVS1". Header: magic 'E','V','S','1', then width,
// height, num_types as u16 LE (10 bytes). Each record is 14 bytes:
// t (u64 LE, microseconds), x, y, p (u16 LE each).
inline constexpr std::size_t kNativeHeaderSize = 10;
inline constexpr std::size_t kNativeRecordSize = 14;

EventStream parse_native(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_native(const EventStream& stream);

// Adapter for the published event-based MNIST binary layout: 5 bytes per
// event; byte 0 = x, byte 1 = y, byte 2 bit 7 = polarity (1 = on), the
// remaining 23 bits (big-endian) the timestamp in microseconds. Polarity
// maps to type 1 (on) / 0 (off).
EventStream parse_nmnist(std::span<const std::uint8_t> bytes,
                         SensorGeometry geometry);

// Debug text format, one "t,x,y,p" record per line.
EventStream read_csv(std::istream& in, SensorGeometry geometry);
void write_csv(std::ostream& out, const EventStream& stream);

// File helpers. load_stream dispatches on extension: ".evs" native,
// ".bin" event-based MNIST (needs geometry), ".csv" debug text (needs
// geometry).
EventStream load_stream(const std::string& path);
EventStream load_stream(const std::string& path, SensorGeometry geometry);
void save_stream(const std::string& path, const EventStream& stream);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace evgassom
