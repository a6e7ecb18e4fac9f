#include "sharpcq/config.hpp"

#include <atomic>
#include <cstdlib>

#include "sharpcq/errors.hpp"

namespace sharpcq {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Auto: return "auto";
    case Mode::Structural: return "structural";
    case Mode::Hybrid: return "hybrid";
    case Mode::Oracle: return "oracle";
  }
  return "auto";
}

Mode parse_mode(const std::string& text) {
  if (text == "auto") return Mode::Auto;
  if (text == "structural") return Mode::Structural;
  if (text == "hybrid") return Mode::Hybrid;
  if (text == "oracle") return Mode::Oracle;
  throw Error("unknown mode '" + text + "' (expected auto, structural, hybrid or oracle)");
}

namespace {

#ifdef NDEBUG
std::atomic<bool> g_paranoid{false};
#else
std::atomic<bool> g_paranoid{true};
#endif

std::size_t threads_from_env() {
  const char* env = std::getenv("SHARPCQ_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  unsigned long n = std::strtoul(env, &end, 10);
  if (end == env || n == 0) return 1;
  return static_cast<std::size_t>(n);
}

std::atomic<std::size_t> g_threads{threads_from_env()};

}  // namespace

bool paranoid() { return g_paranoid.load(); }
void set_paranoid(bool on) { g_paranoid.store(on); }

std::size_t thread_limit() { return g_threads.load(); }
void set_thread_limit(std::size_t n) { g_threads.store(n == 0 ? 1 : n); }

}  // namespace sharpcq
