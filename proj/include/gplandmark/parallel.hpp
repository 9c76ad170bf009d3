#pragma once

#include <charconv>
#include <cstdlib>
#include <string_view>
#include <thread>

#include <Eigen/Core>

namespace gplandmark {

/// Thread budget: hardware concurrency, capped by GPLANDMARK_THREADS when set and valid.
inline int effective_threads() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("GPLANDMARK_THREADS")) {
        std::string_view s(env);
        int cap = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (ec == std::errc{} && ptr == s.data() + s.size() && cap >= 1)
            return cap < hw ? cap : hw;
    }
    return hw;
}

/// Apply the thread budget to Eigen's internal parallelism. Results do not depend on it.
inline void apply_thread_cap() { Eigen::setNbThreads(effective_threads()); }

} // namespace gplandmark
