// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/tasks.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "unlearn/errors.hpp"

namespace unlearn {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const Instance& lookup(const Dataset& data, InstanceId id) {
  const auto* z = data.find(id);
  if (z == nullptr) throw Error(ErrorCode::UnknownInstance, fmt::format("no instance with id {}", id));
  return *z;
}

}  // namespace

std::string_view task_name(TaskKind task) {
  switch (task) {
    case TaskKind::IR: return "IR";
    case TaskKind::QM: return "QM";
    case TaskKind::RC: return "RC";
  }
  return "IR";
}

TaskKind task_from_name(std::string_view name) {
  if (name == "IR") return TaskKind::IR;
  // "IM" is an alias some write for query modification.
  if (name == "QM" || name == "IM") return TaskKind::QM;
  if (name == "RC") return TaskKind::RC;
  throw Error(ErrorCode::ConfigError, fmt::format("unknown task '{}'", name));
}

TaskKind task_of(const UnlearnRequest& req) {
  return std::visit(Overloaded{[](const InstanceRemoval&) { return TaskKind::IR; },
                               [](const QueryModification&) { return TaskKind::QM; },
                               [](const ResponseCorrection&) { return TaskKind::RC; }},
                    req);
}

std::size_t request_size(const UnlearnRequest& req) {
  return std::visit(Overloaded{[](const InstanceRemoval& r) { return r.target_ids.size(); },
                               [](const auto& r) { return r.edits.size(); }},
                    req);
}

std::vector<InstanceId> request_ids(const UnlearnRequest& req) {
  std::vector<InstanceId> ids = std::visit(
      Overloaded{[](const InstanceRemoval& r) { return r.target_ids; },
                 [](const auto& r) {
                   std::vector<InstanceId> out;
                   for (const auto& e : r.edits) out.push_back(e.id);
                   return out;
                 }},
      req);
  std::sort(ids.begin(), ids.end());
  return ids;
}

UnlearnRequest canonicalize(const UnlearnRequest& req) {
  return std::visit(
      Overloaded{[](InstanceRemoval r) -> UnlearnRequest {
                   std::sort(r.target_ids.begin(), r.target_ids.end());
                   return r;
                 },
                 [](auto r) -> UnlearnRequest {
                   std::stable_sort(r.edits.begin(), r.edits.end(),
                                    [](const auto& a, const auto& b) { return a.id < b.id; });
                   return r;
                 }},
      req);
}

void validate_request(const UnlearnRequest& req, const Dataset& data) {
  const auto ids = request_ids(req);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    lookup(data, ids[i]);
    if (i > 0 && ids[i] == ids[i - 1]) {
      throw Error(ErrorCode::EditInvalid, fmt::format("id {} appears twice in the request", ids[i]));
    }
  }
  if (ids.size() >= data.n()) {
    throw Error(ErrorCode::RequestTooLarge,
                fmt::format("request touches {} of {} instances", ids.size(), data.n()));
  }
  std::visit(Overloaded{[](const InstanceRemoval&) {},
                        [&](const QueryModification& r) {
                          for (const auto& e : r.edits) {
                            if (e.new_features.size() != data.d()) {
                              throw Error(ErrorCode::EditInvalid,
                                          fmt::format("edit of {} has {} features, expected {}",
                                                      e.id, e.new_features.size(), data.d()));
                            }
                          }
                        },
                        [&](const ResponseCorrection& r) {
                          for (const auto& e : r.edits) {
                            if (!label_matches(data.label_spec(), e.new_label)) {
                              throw Error(ErrorCode::EditInvalid,
                                          fmt::format("edit of {} has label {} of the wrong kind",
                                                      e.id, label_to_string(e.new_label)));
                            }
                          }
                        }},
             req);
}

Dataset apply_request(const Dataset& data, const UnlearnRequest& req) {
  validate_request(req, data);
  std::vector<Instance> out;
  out.reserve(data.n());
  std::visit(Overloaded{[&](const InstanceRemoval& r) {
                          std::set<InstanceId> drop(r.target_ids.begin(), r.target_ids.end());
                          for (const auto& z : data.instances()) {
                            if (!drop.contains(z.id)) out.push_back(z);
                          }
                        },
                        [&](const QueryModification& r) {
                          std::unordered_map<InstanceId, const QueryEdit*> edits;
                          for (const auto& e : r.edits) edits.emplace(e.id, &e);
                          for (const auto& z : data.instances()) {
                            out.push_back(z);
                            if (auto it = edits.find(z.id); it != edits.end()) {
                              out.back().features = it->second->new_features;
                            }
                          }
                        },
                        [&](const ResponseCorrection& r) {
                          std::unordered_map<InstanceId, const ResponseEdit*> edits;
                          for (const auto& e : r.edits) edits.emplace(e.id, &e);
                          for (const auto& z : data.instances()) {
                            out.push_back(z);
                            if (auto it = edits.find(z.id); it != edits.end()) {
                              out.back().label = it->second->new_label;
                            }
                          }
                        }},
             req);
  return data.with_instances(std::move(out));
}

BVector build_b(const DiffModel& model, const TrainedModel& trained, const Dataset& data,
                const UnlearnRequest& req, bool force) {
  if (!trained.converged && !force) {
    throw Error(ErrorCode::NotAtOptimum,
                fmt::format("model is not at a stationary point (grad norm {:.3e}); pass force to "
                            "override",
                            trained.final_grad_norm));
  }
  validate_request(req, data);
  model.check_params(trained.adapter);

  const auto theta = trained.adapter.values();
  const double w = 1.0 / static_cast<double>(data.n());
  auto b = ParameterVector::zeros(model.layout());
  auto acc = b.mutable_values();

  // G(original) - G(edited) is formed per edit before scaling, so an edit
  // that changes nothing contributes exactly zero.
  Reals g_orig(model.num_params());
  Reals g_edit(model.num_params());
  auto add_difference = [&](const Instance& original, const Instance& edited) {
    std::fill(g_orig.begin(), g_orig.end(), 0.0);
    std::fill(g_edit.begin(), g_edit.end(), 0.0);
    model.check_instance(edited);
    model.accumulate_grad(original, theta, 1.0, g_orig);
    model.accumulate_grad(edited, theta, 1.0, g_edit);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * (g_orig[i] - g_edit[i]);
  };

  // Ascending id order keeps the accumulation order independent of how the
  // request was written.
  const auto canonical = canonicalize(req);
  std::visit(Overloaded{[&](const InstanceRemoval& r) {
                          for (auto id : r.target_ids) {
                            std::fill(g_orig.begin(), g_orig.end(), 0.0);
                            model.accumulate_grad(lookup(data, id), theta, 1.0, g_orig);
                            axpy_into(w, g_orig, acc);
                          }
                        },
                        [&](const QueryModification& r) {
                          for (const auto& e : r.edits) {
                            const auto& z = lookup(data, e.id);
                            Instance edited = z;
                            edited.features = e.new_features;
                            add_difference(z, edited);
                          }
                        },
                        [&](const ResponseCorrection& r) {
                          for (const auto& e : r.edits) {
                            const auto& z = lookup(data, e.id);
                            Instance edited = z;
                            edited.label = e.new_label;
                            add_difference(z, edited);
                          }
                        }},
             canonical);
  return BVector{std::move(b), task_of(req), data.n()};
}

}  // namespace unlearn
