#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

namespace corrgen {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr float kInfF = std::numeric_limits<float>::infinity();

// ---------------------------------------------------------------- errors

enum class ErrorCode {
  MissingFile,
  ParseError,
  DimensionMismatch,
  WeightsNotNormalized,
  RegressorNotNormalized,
  KinematicCycle,
  InvalidArgument,
  OutOfRange,
  UndistortDivergence,
  MissingResource,
  DuplicateId,
  IdMismatch,
  EmptyInput,
  UnknownChart,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::MissingFile: return "missing_file";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::WeightsNotNormalized: return "weights_not_normalized";
    case ErrorCode::RegressorNotNormalized: return "regressor_not_normalized";
    case ErrorCode::KinematicCycle: return "kinematic_cycle";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::UndistortDivergence: return "undistort_divergence";
    case ErrorCode::MissingResource: return "missing_resource";
    case ErrorCode::DuplicateId: return "duplicate_id";
    case ErrorCode::IdMismatch: return "id_mismatch";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::UnknownChart: return "unknown_chart";
    case ErrorCode::IoError: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool cond, ErrorCode code, const std::string& message) {
  if (!cond) fail(code, message);
}

// ---------------------------------------------------------------- logging

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

inline LogLevel& log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("CORRGEN_LOG");
    if (!env) return LogLevel::Warn;
    std::string s(env);
    if (s == "debug") return LogLevel::Debug;
    if (s == "info") return LogLevel::Info;
    if (s == "warn") return LogLevel::Warn;
    if (s == "error") return LogLevel::Error;
    if (s == "off") return LogLevel::Off;
    return LogLevel::Warn;
  }();
  return level;
}

inline std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Line-delimited JSON log record on stderr.
inline void log_event(LogLevel level, const std::string& event,
                      const std::vector<std::pair<std::string, std::string>>& fields = {}) {
  if (level < log_level()) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::string line = "{\"level\":\"";
  line += names[static_cast<int>(level)];
  line += "\",\"event\":\"" + json_escape(event) + "\"";
  for (const auto& [k, v] : fields)
    line += ",\"" + json_escape(k) + "\":\"" + json_escape(v) + "\"";
  line += "}\n";
  std::lock_guard<std::mutex> lock(log_mutex());
  std::fputs(line.c_str(), stderr);
}

// ---------------------------------------------------------------- rng

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return splitmix64(seed ^ splitmix64(value));
}

inline std::uint64_t hash_tag(std::uint64_t seed, const char* tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (const char* p = tag; *p; ++p) h = (h ^ static_cast<unsigned char>(*p)) * 0x100000001b3ull;
  return hash_combine(seed, h);
}

// Deterministic RNG. All value mappings are fixed here rather than taken
// from std distributions, whose outputs are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  int uniform_int(int n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do { x = next_u64(); } while (x >= limit);
    return static_cast<int>(x % bound);
  }

  bool coin() { return (next_u64() & 1ull) != 0; }

  // Box-Muller, no rejection.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Independent stream keyed on this rng's seed; does not consume state.
  Rng derive(const char* tag) const { return Rng(hash_tag(seed_, tag)); }
  Rng derive(const char* tag, std::uint64_t index) const {
    return Rng(hash_combine(hash_tag(seed_, tag), index));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

// Partial Fisher-Yates: first k entries of a deterministic permutation of 0..n-1.
inline std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  const int m = std::min(n, k);
  for (int i = 0; i < m; ++i) {
    const int j = i + rng.uniform_int(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  return idx;
}

// ---------------------------------------------------------------- file io

namespace fs = std::filesystem;

inline std::vector<std::uint8_t> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::MissingFile, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> data(static_cast<size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(data.data()), size);
  require(in.good(), ErrorCode::IoError, "short read on " + path.string());
  return data;
}

inline std::string read_text_file(const fs::path& path) {
  auto bytes = read_binary_file(path);
  return std::string(bytes.begin(), bytes.end());
}

inline void write_binary_file(const fs::path& path, const void* data, size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
  require(out.good(), ErrorCode::IoError, "short write on " + path.string());
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  write_binary_file(path, text.data(), text.size());
}

// Write to a temp name, then rename. Readers never see a partial file.
inline void write_file_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_text_file(tmp, text);
  fs::rename(tmp, path);
}

// Raw little-endian float32 array files (*.f32).
inline std::vector<float> read_f32_array(const fs::path& path, size_t expected_count) {
  auto bytes = read_binary_file(path);
  require(bytes.size() == expected_count * 4, ErrorCode::DimensionMismatch,
          path.string() + ": expected " + std::to_string(expected_count * 4) +
              " bytes, got " + std::to_string(bytes.size()));
  std::vector<float> out(expected_count);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

inline void write_f32_array(const fs::path& path, const float* data, size_t count) {
  write_binary_file(path, data, count * 4);
}

inline std::uint32_t crc32_bytes(const void* data, size_t size) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(size)));
}

inline std::uint32_t crc32_file(const fs::path& path) {
  auto bytes = read_binary_file(path);
  return crc32_bytes(bytes.data(), bytes.size());
}

// ---------------------------------------------------------------- numbers

// All floats in text interchange files are written at 6 significant digits.
inline std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline double round6(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_g6(v).c_str(), nullptr);
}

inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }
inline float clamp01f(float v) { return std::min(1.0f, std::max(0.0f, v)); }

}  // namespace corrgen
