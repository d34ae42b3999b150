#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>

namespace ccm {

// Error taxonomy shared by the library and the CLI. The CLI maps kinds to
// exit codes: input/schema problems -> 2, recipe/dataset incompatibility -> 3,
// runtime failures -> 4.
enum class ErrorKind {
  Schema,          // missing/mismatched columns or features
  Mapping,         // unparseable values (labels, numbers, timestamps)
  EmptyDataset,    // nothing survived ingestion
  DegenerateSplit, // a split side ended up empty
  Parameter,       // argument outside its documented range
  InsufficientData,
  Metric,          // invalid metric input (length mismatch, empty)
  Config,          // recipe/dataset incompatibility, bad config file
  Numerical,       // iteration failed to converge
  Degenerate,      // degenerate clustering (persistent empty cluster)
  Assignment,      // unseen categorical value at assignment time
  AlignmentOrder,  // occupant-order mismatch between matrices
  Io,              // file not readable/writable
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

// --- logging -----------------------------------------------------------

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("COHORT_LOG");
    if (!env) return LogLevel::Info;
    std::string v(env);
    if (v == "error") return LogLevel::Error;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

inline std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

inline void log(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::lock_guard<std::mutex> lock(log_mutex());
  const char* tag = level == LogLevel::Error ? "error"
                    : level == LogLevel::Info ? "info"
                                              : "debug";
  std::cerr << "[ccm:" << tag << "] " << message << "\n";
}

inline void log_info(const std::string& m) { log(LogLevel::Info, m); }
inline void log_debug(const std::string& m) { log(LogLevel::Debug, m); }
inline void log_warn(const std::string& m) { log(LogLevel::Error, "warning: " + m); }

// --- seeding -----------------------------------------------------------

// splitmix64; used to derive independent sub-seeds so that parallel work
// never shares RNG state.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix_seed(base ^ mix_seed(stream));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b) {
  return derive_seed(derive_seed(base, a), b);
}

inline std::uint64_t hash_string(const std::string& s) {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ccm
