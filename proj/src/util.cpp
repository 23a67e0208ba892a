#include "vowelmark/util.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace vowelmark {

namespace {
std::atomic<int> g_log_level{static_cast<int>(LogLevel::Warn)};
std::mutex g_log_mutex;

void log_at(LogLevel lvl, const char* tag, const std::string& msg) {
  if (static_cast<int>(lvl) > g_log_level.load(std::memory_order_relaxed)) return;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}
}  // namespace

void set_log_level(LogLevel level) { g_log_level.store(static_cast<int>(level)); }
LogLevel log_level() { return static_cast<LogLevel>(g_log_level.load()); }

void log_init_from_env() {
  const char* env = std::getenv("VOWELMARK_LOG");
  if (!env) return;
  std::string v(env);
  if (v == "error") set_log_level(LogLevel::Error);
  else if (v == "warn") set_log_level(LogLevel::Warn);
  else if (v == "info") set_log_level(LogLevel::Info);
  else if (v == "debug") set_log_level(LogLevel::Debug);
  else log_at(LogLevel::Error, "error", "unknown VOWELMARK_LOG level '" + v + "'");
}

void log_error(const std::string& msg) { log_at(LogLevel::Error, "error", msg); }
void log_warn(const std::string& msg) { log_at(LogLevel::Warn, "warn", msg); }
void log_info(const std::string& msg) { log_at(LogLevel::Info, "info", msg); }
void log_debug(const std::string& msg) { log_at(LogLevel::Debug, "debug", msg); }

// ---------------------------------------------------------------------------

namespace {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace

Rng Rng::sub(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  std::uint64_t t = stream ^ 0xA5A5A5A55A5A5A5Aull;
  std::uint64_t b = splitmix64(t);
  std::uint64_t mixed = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
  return Rng(mixed);
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

double Rng::next_gauss() {
  if (has_gauss_) {
    has_gauss_ = false;
    return cached_gauss_;
  }
  double u1, u2;
  do {
    u1 = next_unit();
  } while (u1 <= 0.0);
  u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * M_PI * u2;
  cached_gauss_ = r * std::sin(th);
  has_gauss_ = true;
  return r * std::cos(th);
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  int nworkers = threads;
  if (nworkers <= 0) nworkers = static_cast<int>(std::thread::hardware_concurrency());
  if (nworkers < 1) nworkers = 1;
  nworkers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(nworkers), n));

  if (nworkers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nworkers));
  for (int t = 0; t < nworkers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------

std::string trim_ws(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim_ws(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim_ws(cur));
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  // %.17g round-trips; trim to the shortest representation that still does.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = std::strtod(buf, nullptr);
    if (back == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  std::string t = trim_ws(s);
  if (t.empty() || t == "NaN" || t == "nan" || t == "NA") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str()) throw InputError("not a number: '" + s + "'");
  return v;
}

}  // namespace vowelmark
