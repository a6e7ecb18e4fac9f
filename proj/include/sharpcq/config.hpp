#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace sharpcq {

enum class Mode { Auto, Structural, Hybrid, Oracle };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);  // throws Error

struct RunConfig {
  std::size_t kmax = 3;
  std::size_t bmax = 16;
  std::size_t cores_to_try = 8;
  std::size_t max_promoted = 12;  // cap on |S̄ \ free| for the hybrid search
  std::uint64_t state_cap = 100'000'000;
  std::uint64_t seed = 1;
  Mode mode = Mode::Auto;
  bool json = false;
};

// Process-wide switches. Paranoid mode cross-checks consistency-based
// decisions against direct homomorphism search; it defaults to on in builds
// without NDEBUG.
bool paranoid();
void set_paranoid(bool on);

// Worker-thread cap, initialised from SHARPCQ_THREADS (default 1).
std::size_t thread_limit();
void set_thread_limit(std::size_t n);

}  // namespace sharpcq
