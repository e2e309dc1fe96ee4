#include "klpath/parallel.hpp"

#include <cstdlib>
#include <string>

namespace klpath {

namespace {

unsigned initial_thread_count() {
  if (const char* env = std::getenv("KLPATH_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> setting{initial_thread_count()};
  return setting;
}

}  // namespace

unsigned default_thread_count() { return thread_setting().load(); }

void set_default_thread_count(unsigned threads) {
  thread_setting().store(threads == 0 ? initial_thread_count() : threads);
}

}  // namespace klpath
