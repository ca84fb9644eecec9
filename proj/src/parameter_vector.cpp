// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/parameter_vector.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "unlearn/errors.hpp"

namespace unlearn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Layout::Layout(std::vector<Segment> segments) : segments_(std::move(segments)) {
  for (const auto& s : segments_) size_ += s.size();
}

std::shared_ptr<const Layout> Layout::make(
    const std::vector<std::pair<std::string, Shape>>& segments) {
  std::vector<Segment> out;
  out.reserve(segments.size());
  std::set<std::string> seen;
  std::size_t offset = 0;
  for (const auto& [name, shape] : segments) {
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::NameCollision, fmt::format("duplicate segment name '{}'", name));
    }
    out.push_back(Segment{name, offset, shape});
    offset += shape_size(shape);
  }
  return std::shared_ptr<const Layout>(new Layout(std::move(out)));
}

std::shared_ptr<const Layout> Layout::from_segments(std::vector<Segment> segments) {
  std::set<std::string> seen;
  std::size_t offset = 0;
  for (const auto& s : segments) {
    if (!seen.insert(s.name).second) {
      throw Error(ErrorCode::NameCollision, fmt::format("duplicate segment name '{}'", s.name));
    }
    if (s.offset != offset) {
      throw Error(ErrorCode::LayoutMismatch,
                  fmt::format("segment '{}' at offset {} but expected {}", s.name, s.offset,
                              offset));
    }
    offset += s.size();
  }
  return std::shared_ptr<const Layout>(new Layout(std::move(segments)));
}

const Segment* Layout::find(const std::string& name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

bool same_layout(const LayoutPtr& a, const LayoutPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

ParameterVector::ParameterVector() : layout_(Layout::make({})) {}

ParameterVector::ParameterVector(LayoutPtr layout, Reals values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (!layout_ || layout_->size() != values_.size()) {
    throw Error(ErrorCode::LayoutMismatch,
                fmt::format("layout covers {} values but {} were given",
                            layout_ ? layout_->size() : 0, values_.size()));
  }
}

ParameterVector ParameterVector::zeros(LayoutPtr layout) {
  Reals v(layout->size(), 0.0);
  return ParameterVector(std::move(layout), std::move(v));
}

std::span<const double> ParameterVector::segment(const std::string& name) const {
  const auto* s = layout_->find(name);
  if (s == nullptr) {
    throw Error(ErrorCode::LayoutMismatch, fmt::format("no segment named '{}'", name));
  }
  return std::span<const double>(values_).subspan(s->offset, s->size());
}

ParameterVector flatten(const std::vector<NamedArray>& segments) {
  if (segments.empty()) {
    throw Error(ErrorCode::LayoutMismatch, "flatten needs at least one segment");
  }
  std::vector<std::pair<std::string, Shape>> spec;
  Reals values;
  for (const auto& s : segments) {
    if (shape_size(s.shape) != s.values.size()) {
      throw Error(ErrorCode::LayoutMismatch,
                  fmt::format("segment '{}' has {} values for shape of size {}", s.name,
                              s.values.size(), shape_size(s.shape)));
    }
    spec.emplace_back(s.name, s.shape);
    values.insert(values.end(), s.values.begin(), s.values.end());
  }
  return ParameterVector(Layout::make(spec), std::move(values));
}

std::vector<NamedArray> unflatten(const ParameterVector& vector) {
  std::vector<NamedArray> out;
  const auto values = vector.values();
  for (const auto& s : vector.layout().segments()) {
    auto part = values.subspan(s.offset, s.size());
    out.push_back(NamedArray{s.name, s.shape, std::vector<double>(part.begin(), part.end())});
  }
  return out;
}

void require_same_layout(const ParameterVector& a, const ParameterVector& b) {
  if (!same_layout(a.layout_ptr(), b.layout_ptr())) {
    throw Error(ErrorCode::LayoutMismatch,
                fmt::format("layouts differ ({} vs {} values)", a.size(), b.size()));
  }
}

ParameterVector axpy(double a, const ParameterVector& x, const ParameterVector& y) {
  require_same_layout(x, y);
  Reals out(y.values().begin(), y.values().end());
  if (a != 0.0) axpy_into(a, x.values(), out);
  return ParameterVector(y.layout_ptr(), std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy_into(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void scale_into(double a, std::span<double> x) {
  for (auto& v : x) v *= a;
}

bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace unlearn
