// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "unlearn/alloc_audit.hpp"

namespace unlearn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);

struct Segment {
  std::string name;
  std::size_t offset = 0;
  Shape shape;

  std::size_t size() const { return shape_size(shape); }
  bool operator==(const Segment&) const = default;
};

/// Ordered, contiguous, non-overlapping named segments of a flat vector.
class Layout {
 public:
  /// Builds contiguous segments in the given order. Throws NameCollision on a
  /// repeated name.
  static std::shared_ptr<const Layout> make(
      const std::vector<std::pair<std::string, Shape>>& segments);

  /// Rebuilds a layout from explicit (name, offset, shape) entries, checking
  /// that they tile [0, p) in order.
  static std::shared_ptr<const Layout> from_segments(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t size() const { return size_; }
  const Segment* find(const std::string& name) const;

  bool operator==(const Layout& other) const { return segments_ == other.segments_; }

 private:
  explicit Layout(std::vector<Segment> segments);

  std::vector<Segment> segments_;
  std::size_t size_ = 0;
};

using LayoutPtr = std::shared_ptr<const Layout>;

bool same_layout(const LayoutPtr& a, const LayoutPtr& b);

/// An array with a name and a shape, the unit that flatten/unflatten work in.
struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<double> values;

  bool operator==(const NamedArray&) const = default;
};

/// Flat real vector paired with its segment layout. Houses model parameters,
/// deltas, gradients and right-hand sides alike.
class ParameterVector {
 public:
  ParameterVector();
  ParameterVector(LayoutPtr layout, Reals values);

  static ParameterVector zeros(LayoutPtr layout);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  const Layout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }

  std::span<const double> segment(const std::string& name) const;

 private:
  LayoutPtr layout_;
  Reals values_;
};

ParameterVector flatten(const std::vector<NamedArray>& segments);
std::vector<NamedArray> unflatten(const ParameterVector& vector);

/// Returns a*x + y. Throws LayoutMismatch when layouts differ.
ParameterVector axpy(double a, const ParameterVector& x, const ParameterVector& y);

void require_same_layout(const ParameterVector& a, const ParameterVector& b);

// Dense BLAS-1 helpers over spans; sequential left-to-right order.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy_into(double a, std::span<const double> x, std::span<double> y);
void scale_into(double a, std::span<double> x);
bool all_finite(std::span<const double> a);

}  // namespace unlearn
