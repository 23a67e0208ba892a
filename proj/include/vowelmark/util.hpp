#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vowelmark {

// Thrown for bad user input (missing files, malformed manifests, dimension
// mismatches at the API boundary). The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a computation cannot proceed on otherwise valid input
// (unvoiceable recording, too few cycles, degenerate class). Exit code 2.
class ComputeError : public std::runtime_error {
 public:
  explicit ComputeError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Logging. Level comes from set_log_level() or the VOWELMARK_LOG environment
// variable (error|warn|info|debug).

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();
void log_init_from_env();

void log_error(const std::string& msg);
void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

// ---------------------------------------------------------------------------
// Deterministic RNG. splitmix64 underneath; all shuffles and draws in the
// project go through this class so results are identical across platforms
// and standard-library versions. Sub-streams are derived from (seed, stream)
// pairs, so repetition r of a CV run uses Rng::sub(seed, r).

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng sub(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double next_unit();

  // Uniform integer in [0, n), unbiased (rejection sampling).
  std::uint64_t next_below(std::uint64_t n);

  // Standard normal (Box-Muller, cached pair).
  double next_gauss();

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_gauss_ = false;
  double cached_gauss_ = 0.0;
};

// ---------------------------------------------------------------------------
// Minimal fork/join helper: runs fn(i) for i in [0, n) on up to `threads`
// worker threads. Exceptions are captured and rethrown on the caller.
// Work is distributed by index so any per-index output stays deterministic.

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Small text helpers shared by the CSV readers/writers.

std::string trim_ws(const std::string& s);
std::vector<std::string> split_csv_line(const std::string& line);

// Shortest round-trip decimal for a double ("NaN" for missing values).
std::string format_double(double v);
double parse_double(const std::string& s);  // accepts NaN spellings and empty

}  // namespace vowelmark
