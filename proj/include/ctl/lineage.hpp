#pragma once

#include "ctl/compute.hpp"
#include "ctl/error.hpp"

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ctl {

enum class CapabilityDomain { General, MathCoding };

enum class EventKind {
    Pretrain,
    FineTune,
    SyntheticDataGen,
    Distill,
    Kickstart,
    Reincarnate,
    Expand,
    Copy,
    CombineSoftware,
};

std::string_view to_string(CapabilityDomain d);
std::string_view to_string(EventKind k);
std::optional<CapabilityDomain> parse_capability_domain(std::string_view s);
std::optional<EventKind> parse_event_kind(std::string_view s);

/// Distill, Kickstart and Reincarnate: the child learns from a teacher
/// instead of inheriting its weights.
constexpr bool is_reuse(EventKind k) {
    return k == EventKind::Distill || k == EventKind::Kickstart || k == EventKind::Reincarnate;
}

/// Events whose child starts from the parent's weights, so the parent's
/// counted compute flows into the child.
constexpr bool inherits_weights(EventKind k) {
    return k == EventKind::FineTune || k == EventKind::SyntheticDataGen ||
           k == EventKind::Expand || k == EventKind::Copy || k == EventKind::CombineSoftware;
}

struct InferenceProfile {
    ComputeAmount per_request_compute;
    CapabilityDomain capability_domain = CapabilityDomain::General;

    friend bool operator==(const InferenceProfile&, const InferenceProfile&) = default;
};

struct ModelNode {
    std::string id;
    std::string name;
    bool deployed = true;  // false: trained but never launched ("incognito")
    CapabilityDomain capability_domain = CapabilityDomain::General;
    std::optional<InferenceProfile> inference;

    friend bool operator==(const ModelNode&, const ModelNode&) = default;
};

struct DerivationEvent {
    EventKind kind = EventKind::Pretrain;
    std::vector<std::string> parent_ids;  // teachers for reuse kinds
    std::string child_id;
    ComputeAmount compute;
    std::optional<MoneyAmount> cost;
    std::optional<double> expand_savings_fraction;  // Expand only
    std::optional<bool> surpass_teacher;            // Reincarnate only
    bool planned = false;                           // declared future event

    /// Every node is created by exactly one event, so the child id doubles
    /// as the event id.
    const std::string& id() const { return child_id; }

    friend bool operator==(const DerivationEvent&, const DerivationEvent&) = default;
};

struct Violation {
    ErrorCode code;
    std::string subject;  // node or event id
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct TeacherLink {
    std::string teacher_id;
    EventKind kind;

    friend bool operator==(const TeacherLink&, const TeacherLink&) = default;
    friend auto operator<=>(const TeacherLink&, const TeacherLink&) = default;
};

/**
 * Provenance graph of models and the events that produced them.
 *
 * Nodes are kept sorted by id and events by child id, so two lineages built
 * from the same facts in any order compare equal. The checked builders
 * (add_node / add_event) return new values; from_parts() accepts anything and
 * leaves checking to validate().
 */
class Lineage {
public:
    Lineage() = default;

    static Lineage from_parts(std::vector<ModelNode> nodes, std::vector<DerivationEvent> events);

    const std::vector<ModelNode>& nodes() const noexcept { return nodes_; }
    const std::vector<DerivationEvent>& events() const noexcept { return events_; }

    bool contains(std::string_view id) const { return find_node(id) != nullptr; }
    const ModelNode* find_node(std::string_view id) const;
    /// First creating event of `child`, or nullptr.
    const DerivationEvent* creating_event(std::string_view child) const;
    std::size_t creating_event_count(std::string_view child) const;

    // In-place edits of numeric fields on a caller-owned copy; used by sweeps.
    void set_event_compute(std::string_view child, ComputeAmount compute);
    void set_inference_compute(std::string_view model, ComputeAmount compute);

    friend bool operator==(const Lineage&, const Lineage&) = default;

private:
    friend Lineage add_node(const Lineage&, ModelNode);
    friend Lineage add_event(const Lineage&, DerivationEvent);

    void insert_node(ModelNode node);
    void insert_event(DerivationEvent event);

    std::vector<ModelNode> nodes_;
    std::vector<DerivationEvent> events_;
};

Lineage add_node(const Lineage& lineage, ModelNode node);
Lineage add_event(const Lineage& lineage, DerivationEvent event);

/// Kind-specific field rules for a single event; empty when the event is
/// well-formed in isolation.
std::vector<Violation> check_event_fields(const DerivationEvent& event);

std::vector<Violation> validate(const Lineage& lineage);

/// Transitive closure over parent ids, excluding `id` itself.
std::set<std::string> ancestors(const Lineage& lineage, std::string_view id);

/// Events creating `id` or any of its ancestors, each once. Pointers stay
/// valid while the lineage is alive and unmodified.
std::vector<const DerivationEvent*> events_in_scope(const Lineage& lineage, std::string_view id);
/// Teachers reached through Distill/Kickstart/Reincarnate edges anywhere in
/// the ancestry of `id` (including the event that created `id`).
std::set<TeacherLink> reuse_teachers(const Lineage& lineage, std::string_view id);

/// Topological order of node ids; throws CycleDetected when none exists.
std::vector<std::string> topological_order(const Lineage& lineage);

} // namespace ctl
