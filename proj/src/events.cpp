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

#include "evgassom/events.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace evgassom {

namespace {

constexpr std::uint8_t kMagic[4] = {0x45, 0x56, 0x53, 0x31};  // "EVS1"

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint64_t read_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    v >>= 8;
  }
}

void check_geometry(const SensorGeometry& g) {
  if (g.width < 1 || g.height < 1 || g.num_types < 1) {
    fail(errc::invalid_argument, "sensor geometry fields must all be >= 1");
  }
}

}  // namespace

EventStream::EventStream(SensorGeometry geometry, std::vector<Event> events)
    : geometry_(geometry), events_(std::move(events)) {
  check_geometry(geometry_);
  std::uint64_t prev_t = 0;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (e.x >= geometry_.width || e.y >= geometry_.height) {
      fail(errc::out_of_range_coordinate,
           "event " + std::to_string(i) + " at (" + std::to_string(e.x) + "," +
               std::to_string(e.y) + ") outside sensor");
    }
    if (e.p >= geometry_.num_types) {
      fail(errc::out_of_range_coordinate,
           "event " + std::to_string(i) + " type " + std::to_string(e.p) +
               " >= num_types " + std::to_string(geometry_.num_types));
    }
    if (i > 0 && e.t < prev_t) {
      fail(errc::non_monotone_timestamp,
           "event " + std::to_string(i) + " timestamp decreases");
    }
    prev_t = e.t;
  }
}

EventStream parse_native(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || bytes[0] != kMagic[0] || bytes[1] != kMagic[1] ||
      bytes[2] != kMagic[2] || bytes[3] != kMagic[3]) {
    fail_at(errc::bad_magic, "expected EVS1 magic", 0);
  }
  if (bytes.size() < kNativeHeaderSize) {
    fail_at(errc::truncated_record, "header cut short", bytes.size());
  }
  SensorGeometry geo;
  geo.width = read_u16(bytes.data() + 4);
  geo.height = read_u16(bytes.data() + 6);
  geo.num_types = read_u16(bytes.data() + 8);
  check_geometry(geo);

  const std::size_t body = bytes.size() - kNativeHeaderSize;
  if (body % kNativeRecordSize != 0) {
    fail_at(errc::truncated_record,
            "event payload is not a whole number of 14-byte records",
            kNativeHeaderSize + (body / kNativeRecordSize) * kNativeRecordSize);
  }
  const std::size_t n = body / kNativeRecordSize;
  std::vector<Event> events;
  events.reserve(n);
  std::uint64_t prev_t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t off = kNativeHeaderSize + i * kNativeRecordSize;
    const std::uint8_t* rec = bytes.data() + off;
    Event e;
    e.t = read_u64(rec);
    e.x = read_u16(rec + 8);
    e.y = read_u16(rec + 10);
    e.p = read_u16(rec + 12);
    if (e.x >= geo.width || e.y >= geo.height || e.p >= geo.num_types) {
      fail_at(errc::out_of_range_coordinate,
              "record " + std::to_string(i) + " outside geometry", off);
    }
    if (i > 0 && e.t < prev_t) {
      fail_at(errc::non_monotone_timestamp,
              "record " + std::to_string(i) + " timestamp decreases", off);
    }
    prev_t = e.t;
    events.push_back(e);
  }
  return EventStream(geo, std::move(events));
}

std::vector<std::uint8_t> encode_native(const EventStream& stream) {
  std::vector<std::uint8_t> out;
  out.reserve(kNativeHeaderSize + stream.size() * kNativeRecordSize);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u16(out, stream.geometry().width);
  put_u16(out, stream.geometry().height);
  put_u16(out, stream.geometry().num_types);
  for (const Event& e : stream.events()) {
    put_u64(out, e.t);
    put_u16(out, e.x);
    put_u16(out, e.y);
    put_u16(out, e.p);
  }
  return out;
}

EventStream parse_nmnist(std::span<const std::uint8_t> bytes,
                         SensorGeometry geometry) {
  check_geometry(geometry);
  if (bytes.size() % 5 != 0) {
    fail_at(errc::length_not_multiple_of_5,
            "payload of " + std::to_string(bytes.size()) + " bytes",
            (bytes.size() / 5) * 5);
  }
  std::vector<Event> events;
  events.reserve(bytes.size() / 5);
  for (std::size_t off = 0; off < bytes.size(); off += 5) {
    const std::uint8_t* rec = bytes.data() + off;
    Event e;
    e.x = rec[0];
    e.y = rec[1];
    e.p = (rec[2] & 0x80) ? 1 : 0;
    e.t = (static_cast<std::uint32_t>(rec[2] & 0x7F) << 16) |
          (static_cast<std::uint32_t>(rec[3]) << 8) | rec[4];
    if (e.x >= geometry.width || e.y >= geometry.height) {
      fail_at(errc::out_of_range_coordinate,
              "record " + std::to_string(off / 5) + " outside geometry", off);
    }
    events.push_back(e);
  }
  return EventStream(geometry, std::move(events));
}

EventStream read_csv(std::istream& in, SensorGeometry geometry) {
  std::vector<Event> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Event e;
    char c1 = 0, c2 = 0, c3 = 0;
    unsigned long long t = 0, x = 0, y = 0, p = 0;
    std::istringstream ls(line);
    if (!(ls >> t >> c1 >> x >> c2 >> y >> c3 >> p) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
      fail(errc::bad_config, "malformed csv event at line " +
                                 std::to_string(lineno) + ": '" + line + "'");
    }
    e.t = t;
    e.x = static_cast<std::uint16_t>(x);
    e.y = static_cast<std::uint16_t>(y);
    e.p = static_cast<std::uint16_t>(p);
    events.push_back(e);
  }
  return EventStream(geometry, std::move(events));
}

void write_csv(std::ostream& out, const EventStream& stream) {
  for (const Event& e : stream.events()) {
    out << e.t << ',' << e.x << ',' << e.y << ',' << e.p << '\n';
  }
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) fail(errc::io_error, "read failed for " + path);
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(errc::io_error, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(errc::io_error, "write failed for " + path);
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

EventStream load_stream(const std::string& path) {
  if (ends_with(path, ".csv") || ends_with(path, ".bin")) {
    fail(errc::invalid_argument,
         path + " needs an explicit sensor geometry to load");
  }
  return parse_native(read_file(path));
}

EventStream load_stream(const std::string& path, SensorGeometry geometry) {
  if (ends_with(path, ".csv")) {
    std::ifstream in(path);
    if (!in) fail(errc::io_error, "cannot open " + path);
    return read_csv(in, geometry);
  }
  if (ends_with(path, ".bin")) {
    return parse_nmnist(read_file(path), geometry);
  }
  return parse_native(read_file(path));
}

void save_stream(const std::string& path, const EventStream& stream) {
  if (ends_with(path, ".csv")) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(errc::io_error, "cannot open " + path + " for writing");
    write_csv(out, stream);
    if (!out) fail(errc::io_error, "write failed for " + path);
    return;
  }
  write_file(path, encode_native(stream));
}

const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::bad_magic: return "BadMagic";
    case errc::truncated_record: return "TruncatedRecord";
    case errc::non_monotone_timestamp: return "NonMonotoneTimestamp";
    case errc::out_of_range_coordinate: return "OutOfRangeCoordinate";
    case errc::length_not_multiple_of_5: return "LengthNotMultipleOf5";
    case errc::checksum_mismatch: return "ChecksumMismatch";
    case errc::patch_larger_than_sensor: return "PatchLargerThanSensor";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::timestamp_regression: return "TimestampRegression";
    case errc::not_perfect_square: return "NotPerfectSquare";
    case errc::h_exceeds_d: return "HExceedsD";
    case errc::rank_deficient: return "RankDeficient";
    case errc::numerical_underflow: return "NumericalUnderflow";
    case errc::geometry_mismatch: return "GeometryMismatch";
    case errc::bank_shape_mismatch: return "BankShapeMismatch";
    case errc::chain_mismatch: return "ChainMismatch";
    case errc::empty_program: return "EmptyProgram";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::empty_training_set: return "EmptyTrainingSet";
    case errc::too_few_samples: return "TooFewSamples";
    case errc::wrong_layer_shape: return "WrongLayerShape";
    case errc::bad_config: return "BadConfig";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace evgassom
