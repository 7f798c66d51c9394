#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>
#include <vector>

#include "dsm/core/error.hpp"

namespace dsm {

/// Bounded exponential backoff. `max_attempts` counts the first call.
struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  std::chrono::milliseconds max_delay{60'000};
  bool honor_retry_after = true;

  [[nodiscard]] std::chrono::milliseconds backoff(int failed_attempts) const {
    const double raw =
        static_cast<double>(base_delay.count()) * std::pow(factor, failed_attempts - 1);
    const double capped = std::min(raw, static_cast<double>(max_delay.count()));
    return std::chrono::milliseconds(static_cast<long long>(capped));
  }
};

struct RetryTelemetry {
  int attempts = 0;
  int retries = 0;
  std::vector<std::chrono::milliseconds> delays;
};

/// Timeouts, transport failures, 429 and 5xx are worth retrying; other 4xx
/// and logic errors are not.
inline bool is_transient(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Timeout:
    case ErrorCode::NetworkError:
    case ErrorCode::RateLimited:
      return true;
    case ErrorCode::BackendError:
      return e.http_status() == 0 || e.http_status() >= 500;
    default:
      return false;
  }
}

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void real_sleep(std::chrono::milliseconds d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

/// Runs `fn` until it succeeds, a non-transient Error is thrown, or the
/// attempt budget is spent; the last Error is rethrown in the latter cases.
template <class Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn, RetryTelemetry* telemetry = nullptr,
                const Sleeper& sleep = real_sleep) -> decltype(fn()) {
  const int budget = std::max(1, policy.max_attempts);
  for (int attempt = 1;; ++attempt) {
    if (telemetry != nullptr) telemetry->attempts = attempt;
    try {
      return fn();
    } catch (const Error& e) {
      if (!is_transient(e) || attempt >= budget) throw;
      auto delay = policy.backoff(attempt);
      if (policy.honor_retry_after && e.retry_after()) {
        delay = std::min(std::max(delay, *e.retry_after()), policy.max_delay);
      }
      if (telemetry != nullptr) {
        telemetry->retries = attempt;
        telemetry->delays.push_back(delay);
      }
      sleep(delay);
    }
  }
}

}  // namespace dsm
