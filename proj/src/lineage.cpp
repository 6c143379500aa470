#include "ctl/lineage.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace ctl {

std::string_view to_string(CapabilityDomain d) {
    return d == CapabilityDomain::General ? "General" : "MathCoding";
}

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::Pretrain:         return "Pretrain";
        case EventKind::FineTune:         return "FineTune";
        case EventKind::SyntheticDataGen: return "SyntheticDataGen";
        case EventKind::Distill:          return "Distill";
        case EventKind::Kickstart:        return "Kickstart";
        case EventKind::Reincarnate:      return "Reincarnate";
        case EventKind::Expand:           return "Expand";
        case EventKind::Copy:             return "Copy";
        case EventKind::CombineSoftware:  return "CombineSoftware";
    }
    return "Pretrain";
}

std::optional<CapabilityDomain> parse_capability_domain(std::string_view s) {
    if (s == "General") return CapabilityDomain::General;
    if (s == "MathCoding") return CapabilityDomain::MathCoding;
    return std::nullopt;
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
    for (auto k : {EventKind::Pretrain, EventKind::FineTune, EventKind::SyntheticDataGen,
                   EventKind::Distill, EventKind::Kickstart, EventKind::Reincarnate,
                   EventKind::Expand, EventKind::Copy, EventKind::CombineSoftware}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

namespace {

auto event_key(const DerivationEvent& e) {
    return std::tie(e.child_id, e.kind, e.parent_ids);
}

bool event_less(const DerivationEvent& a, const DerivationEvent& b) {
    if (event_key(a) != event_key(b)) return event_key(a) < event_key(b);
    return a.compute.log10() < b.compute.log10();
}

bool node_less(const ModelNode& a, const ModelNode& b) { return a.id < b.id; }

} // namespace

Lineage Lineage::from_parts(std::vector<ModelNode> nodes, std::vector<DerivationEvent> events) {
    Lineage out;
    out.nodes_ = std::move(nodes);
    out.events_ = std::move(events);
    std::stable_sort(out.nodes_.begin(), out.nodes_.end(), node_less);
    std::stable_sort(out.events_.begin(), out.events_.end(), event_less);
    return out;
}

const ModelNode* Lineage::find_node(std::string_view id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const ModelNode& n, std::string_view v) { return n.id < v; });
    if (it == nodes_.end() || it->id != id) return nullptr;
    return &*it;
}

const DerivationEvent* Lineage::creating_event(std::string_view child) const {
    auto it = std::lower_bound(events_.begin(), events_.end(), child,
                               [](const DerivationEvent& e, std::string_view v) { return e.child_id < v; });
    if (it == events_.end() || it->child_id != child) return nullptr;
    return &*it;
}

std::size_t Lineage::creating_event_count(std::string_view child) const {
    return static_cast<std::size_t>(std::count_if(
        events_.begin(), events_.end(), [&](const DerivationEvent& e) { return e.child_id == child; }));
}

void Lineage::set_event_compute(std::string_view child, ComputeAmount compute) {
    for (auto& e : events_) {
        if (e.child_id == child) {
            e.compute = compute;
            return;
        }
    }
    throw Error(ErrorCode::UnknownId, "no event creates '" + std::string(child) + "'",
                std::string(child));
}

void Lineage::set_inference_compute(std::string_view model, ComputeAmount compute) {
    auto it = std::find_if(nodes_.begin(), nodes_.end(), [&](const ModelNode& n) { return n.id == model; });
    if (it == nodes_.end() || !it->inference) {
        throw Error(ErrorCode::UnknownId, "no inference profile on '" + std::string(model) + "'",
                    std::string(model));
    }
    it->inference->per_request_compute = compute;
}

void Lineage::insert_node(ModelNode node) {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), node, node_less);
    nodes_.insert(it, std::move(node));
}

void Lineage::insert_event(DerivationEvent event) {
    auto it = std::upper_bound(events_.begin(), events_.end(), event, event_less);
    events_.insert(it, std::move(event));
}

Lineage add_node(const Lineage& lineage, ModelNode node) {
    if (node.id.empty()) {
        throw Error(ErrorCode::SchemaError, "model id must not be empty", "id");
    }
    if (lineage.contains(node.id)) {
        throw Error(ErrorCode::DuplicateId, "model '" + node.id + "' already exists", node.id);
    }
    if (node.inference && node.inference->per_request_compute.is_zero()) {
        throw Error(ErrorCode::DomainError, "inference compute must be > 0", node.id);
    }
    Lineage out = lineage;
    out.insert_node(std::move(node));
    return out;
}

std::vector<Violation> check_event_fields(const DerivationEvent& e) {
    std::vector<Violation> out;
    auto bad = [&](std::string msg) {
        out.push_back({ErrorCode::KindFieldMismatch, e.child_id,
                       std::string(to_string(e.kind)) + " event for '" + e.child_id + "': " + msg});
    };
    const std::size_t parents = e.parent_ids.size();
    switch (e.kind) {
        case EventKind::Pretrain:
            if (parents != 0) bad("pretraining takes no parents");
            if (e.compute.is_zero()) bad("pretraining compute must be > 0");
            break;
        case EventKind::Distill:
            if (parents < 1) bad("distillation needs at least one teacher");
            break;
        case EventKind::Kickstart:
        case EventKind::Reincarnate:
            if (parents != 1) bad("exactly one teacher required");
            break;
        case EventKind::FineTune:
        case EventKind::SyntheticDataGen:
        case EventKind::Expand:
            if (parents != 1) bad("exactly one parent required");
            break;
        case EventKind::Copy:
        case EventKind::CombineSoftware:
            if (parents != 1) bad("exactly one parent required");
            if (!e.compute.is_zero()) bad("compute must be 0");
            break;
    }
    if (e.kind == EventKind::Expand) {
        if (!e.expand_savings_fraction) {
            bad("expand_savings_fraction is required");
        } else if (!(*e.expand_savings_fraction >= 0.0 && *e.expand_savings_fraction < 1.0)) {
            bad("expand_savings_fraction must be in [0, 1)");
        }
    } else if (e.expand_savings_fraction) {
        bad("expand_savings_fraction is only valid on Expand");
    }
    if (e.surpass_teacher && e.kind != EventKind::Reincarnate) {
        bad("surpass_teacher is only valid on Reincarnate");
    }
    std::vector<std::string> sorted = e.parent_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) bad("duplicate parent id");
    return out;
}

Lineage add_event(const Lineage& lineage, DerivationEvent event) {
    if (!lineage.contains(event.child_id)) {
        throw Error(ErrorCode::UnknownId, "unknown child '" + event.child_id + "'", event.child_id);
    }
    for (const auto& p : event.parent_ids) {
        if (!lineage.contains(p)) throw Error(ErrorCode::UnknownId, "unknown parent '" + p + "'", p);
    }
    if (auto v = check_event_fields(event); !v.empty()) {
        throw Error(ErrorCode::KindFieldMismatch, v.front().message, event.child_id);
    }
    for (const auto& p : event.parent_ids) {
        if (p == event.child_id || ancestors(lineage, p).contains(event.child_id)) {
            throw Error(ErrorCode::CycleDetected,
                        "event into '" + event.child_id + "' would make it its own ancestor",
                        event.child_id);
        }
    }
    if (lineage.creating_event(event.child_id) != nullptr) {
        throw Error(ErrorCode::ChildAlreadyCreated,
                    "'" + event.child_id + "' already has a creating event", event.child_id);
    }
    Lineage out = lineage;
    out.insert_event(std::move(event));
    return out;
}

std::vector<std::string> topological_order(const Lineage& lineage) {
    std::map<std::string, int> indegree;
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& n : lineage.nodes()) indegree[n.id];
    for (const auto& e : lineage.events()) {
        for (const auto& p : e.parent_ids) {
            if (!indegree.contains(p) || !indegree.contains(e.child_id)) continue;
            children[p].push_back(e.child_id);
            ++indegree[e.child_id];
        }
    }
    std::vector<std::string> ready;
    for (const auto& [id, d] : indegree) {
        if (d == 0) ready.push_back(id);
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        std::string id = ready.back();
        ready.pop_back();
        order.push_back(id);
        for (const auto& c : children[id]) {
            if (--indegree[c] == 0) ready.push_back(c);
        }
    }
    if (order.size() != indegree.size()) {
        throw Error(ErrorCode::CycleDetected, "lineage contains a cycle");
    }
    return order;
}

std::vector<Violation> validate(const Lineage& lineage) {
    std::vector<Violation> out;
    for (std::size_t i = 1; i < lineage.nodes().size(); ++i) {
        if (lineage.nodes()[i].id == lineage.nodes()[i - 1].id) {
            out.push_back({ErrorCode::DuplicateId, lineage.nodes()[i].id, "duplicate model id"});
        }
    }
    for (const auto& n : lineage.nodes()) {
        if (n.inference && n.inference->per_request_compute.is_zero()) {
            out.push_back({ErrorCode::DomainError, n.id, "inference compute must be > 0"});
        }
        const std::size_t creators = lineage.creating_event_count(n.id);
        if (creators == 0) {
            out.push_back({ErrorCode::MissingCreatingEvent, n.id,
                           "model '" + n.id + "' has no creating event"});
        } else if (creators > 1) {
            out.push_back({ErrorCode::ChildAlreadyCreated, n.id,
                           "model '" + n.id + "' has " + std::to_string(creators) + " creating events"});
        }
    }
    for (const auto& e : lineage.events()) {
        if (!lineage.contains(e.child_id)) {
            out.push_back({ErrorCode::UnknownId, e.child_id, "event child '" + e.child_id + "' is unknown"});
        }
        for (const auto& p : e.parent_ids) {
            if (!lineage.contains(p)) {
                out.push_back({ErrorCode::UnknownId, e.child_id,
                               "event into '" + e.child_id + "' references unknown parent '" + p + "'"});
            }
        }
        auto fields = check_event_fields(e);
        out.insert(out.end(), fields.begin(), fields.end());
    }
    try {
        (void)topological_order(lineage);
    } catch (const Error&) {
        out.push_back({ErrorCode::CycleDetected, "", "lineage contains a cycle"});
    }
    return out;
}

std::set<std::string> ancestors(const Lineage& lineage, std::string_view id) {
    if (!lineage.contains(id)) {
        throw Error(ErrorCode::UnknownId, "unknown model '" + std::string(id) + "'", std::string(id));
    }
    std::set<std::string> seen;
    std::vector<std::string> stack{std::string(id)};
    while (!stack.empty()) {
        const std::string cur = std::move(stack.back());
        stack.pop_back();
        for (const auto& e : lineage.events()) {
            if (e.child_id != cur) continue;
            for (const auto& p : e.parent_ids) {
                if (seen.insert(p).second) stack.push_back(p);
            }
        }
    }
    seen.erase(std::string(id));
    return seen;
}

// Hot path for sweeps: pointer walk, no string copies.
std::vector<const DerivationEvent*> events_in_scope(const Lineage& lineage, std::string_view id) {
    if (!lineage.contains(id)) {
        throw Error(ErrorCode::UnknownId, "unknown model '" + std::string(id) + "'", std::string(id));
    }
    const auto& events = lineage.events();
    auto by_child = [](const DerivationEvent& e, std::string_view v) { return e.child_id < v; };
    std::vector<const DerivationEvent*> out;
    std::vector<std::string_view> stack{id};
    while (!stack.empty()) {
        const std::string_view cur = stack.back();
        stack.pop_back();
        for (auto it = std::lower_bound(events.begin(), events.end(), cur, by_child);
             it != events.end() && it->child_id == cur; ++it) {
            if (std::find(out.begin(), out.end(), &*it) != out.end()) continue;
            out.push_back(&*it);
            for (const auto& p : it->parent_ids) stack.push_back(p);
        }
    }
    return out;
}

std::set<TeacherLink> reuse_teachers(const Lineage& lineage, std::string_view id) {
    std::set<TeacherLink> out;
    for (const DerivationEvent* e : events_in_scope(lineage, id)) {
        if (!is_reuse(e->kind)) continue;
        for (const auto& p : e->parent_ids) out.insert({p, e->kind});
    }
    return out;
}

} // namespace ctl
