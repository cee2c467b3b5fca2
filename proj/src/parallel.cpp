#include "mink/parallel.hpp"

#include <atomic>

namespace mink {

namespace {
std::atomic<int> g_threads{0};
}

int default_threads() {
    const int t = g_threads.load();
    if (t > 0) return t;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

void set_default_threads(int n) { g_threads.store(n > 0 ? n : 0); }

}  // namespace mink
