// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <new>
#include <vector>

namespace unlearn::audit {

// Per-thread accounting of live real-valued buffer storage, in floats
// (doubles). Every buffer that participates in parameter-space arithmetic is
// a `Reals`, so the counters see all of it.
struct Counters {
  std::size_t live = 0;
  std::size_t peak = 0;
  std::size_t largest = 0;  // largest single allocation
};

Counters& counters() noexcept;

template <class T>
struct CountingAllocator {
  using value_type = T;

  CountingAllocator() noexcept = default;
  template <class U>
  CountingAllocator(const CountingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    auto& c = counters();
    c.live += n;
    if (c.live > c.peak) c.peak = c.live;
    if (n > c.largest) c.largest = n;
    return static_cast<T*>(::operator new(n * sizeof(T)));
  }

  void deallocate(T* p, std::size_t n) noexcept {
    auto& c = counters();
    c.live = c.live >= n ? c.live - n : 0;
    ::operator delete(p);
  }

  template <class U>
  bool operator==(const CountingAllocator<U>&) const noexcept {
    return true;
  }
};

/// Measures the high-water mark of Reals storage allocated after construction.
/// Scopes nest: the enclosing scope still sees the inner peak.
class PeakScope {
 public:
  PeakScope() noexcept;
  ~PeakScope();
  PeakScope(const PeakScope&) = delete;
  PeakScope& operator=(const PeakScope&) = delete;

  std::size_t peak_floats() const noexcept;
  std::size_t largest_allocation() const noexcept;

 private:
  std::size_t baseline_;
  std::size_t saved_peak_;
  std::size_t saved_largest_;
};

}  // namespace unlearn::audit

namespace unlearn {

/// Real-valued buffer whose storage is tracked by the allocation audit.
using Reals = std::vector<double, audit::CountingAllocator<double>>;

}  // namespace unlearn
