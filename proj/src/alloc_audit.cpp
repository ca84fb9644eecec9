// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/alloc_audit.hpp"

#include <algorithm>

namespace unlearn::audit {

Counters& counters() noexcept {
  thread_local Counters c;
  return c;
}

PeakScope::PeakScope() noexcept
    : baseline_(counters().live),
      saved_peak_(counters().peak),
      saved_largest_(counters().largest) {
  counters().peak = baseline_;
  counters().largest = 0;
}

PeakScope::~PeakScope() {
  auto& c = counters();
  c.peak = std::max(saved_peak_, c.peak);
  c.largest = std::max(saved_largest_, c.largest);
}

std::size_t PeakScope::peak_floats() const noexcept {
  const auto peak = counters().peak;
  return peak > baseline_ ? peak - baseline_ : 0;
}

std::size_t PeakScope::largest_allocation() const noexcept {
  return counters().largest;
}

}  // namespace unlearn::audit
