#pragma once

// Shared builders and hand-rolled generators for the test binaries.

#include "ctl/lineage.hpp"
#include "ctl/rulesets.hpp"
#include "ctl/scenario.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ctl::testkit {

inline ComputeAmount flop(const char* text) { return ComputeAmount::parse(text); }

// Terse lineage construction through the checked add_node/add_event path.
class Builder {
public:
    Builder& model(const std::string& id, bool deployed = true) {
        ModelNode n;
        n.id = id;
        n.name = id;
        n.deployed = deployed;
        lineage_ = add_node(lineage_, n);
        return *this;
    }

    Builder& event(EventKind kind, std::vector<std::string> parents, const std::string& child, const char* compute,
                   std::optional<double> cost = std::nullopt) {
        if (!lineage_.contains(child)) model(child);
        DerivationEvent e;
        e.kind = kind;
        e.parent_ids = std::move(parents);
        e.child_id = child;
        e.compute = flop(compute);
        if (cost) e.cost = MoneyAmount(*cost);
        if (kind == EventKind::Expand) e.expand_savings_fraction = savings_;
        lineage_ = add_event(lineage_, e);
        return *this;
    }

    Builder& pretrain(const std::string& id, const char* compute, std::optional<double> cost = std::nullopt) {
        return event(EventKind::Pretrain, {}, id, compute, cost);
    }
    Builder& finetune(const std::string& parent, const std::string& id, const char* compute,
                      std::optional<double> cost = std::nullopt) {
        return event(EventKind::FineTune, {parent}, id, compute, cost);
    }
    Builder& distill(const std::string& teacher, const std::string& id, const char* compute) {
        return event(EventKind::Distill, {teacher}, id, compute);
    }
    Builder& expand(const std::string& parent, const std::string& id, const char* compute, double savings) {
        savings_ = savings;
        return event(EventKind::Expand, {parent}, id, compute);
    }
    Builder& inference(const std::string& id, const char* per_request,
                       CapabilityDomain domain = CapabilityDomain::General) {
        auto nodes = lineage_.nodes();
        for (auto& n : nodes) {
            if (n.id == id) n.inference = InferenceProfile{flop(per_request), domain};
        }
        lineage_ = Lineage::from_parts(nodes, lineage_.events());
        return *this;
    }

    const Lineage& get() const { return lineage_; }
    operator const Lineage&() const { return lineage_; }

private:
    Lineage lineage_;
    double savings_ = 0.5;
};

// Seeded so failures reproduce; print the seed in assertion messages.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(gen_); }
    template <class T>
    const T& pick(const std::vector<T>& items) {
        return items[static_cast<std::size_t>(integer(0, static_cast<int>(items.size()) - 1))];
    }
    // A log10 value near `centre`, so thresholds are actually straddled.
    ComputeAmount compute_near(double centre, double spread) {
        return ComputeAmount::from_log10(uniform(centre - spread, centre + spread));
    }

private:
    std::mt19937_64 gen_;
};

struct GenOptions {
    int min_nodes = 1;
    int max_nodes = 6;
    double centre_log10 = 25.0;  // pretraining compute is drawn around this
    double spread = 1.5;
    double planned_probability = 0.0;
    double inference_probability = 0.3;
    bool allow_multi_teacher = true;
};

inline const std::vector<EventKind>& derived_kinds() {
    static const std::vector<EventKind> kinds{
        EventKind::FineTune, EventKind::SyntheticDataGen, EventKind::Distill, EventKind::Kickstart,
        EventKind::Reincarnate, EventKind::Expand, EventKind::Copy, EventKind::CombineSoftware,
        EventKind::Pretrain,
    };
    return kinds;
}

// A random valid lineage: node i is created from nodes < i, so it is a DAG
// by construction. Values are drawn so that threshold boundaries matter.
inline Lineage random_lineage(Rng& rng, const GenOptions& opt = {}) {
    const int n = rng.integer(opt.min_nodes, opt.max_nodes);
    std::vector<ModelNode> nodes;
    std::vector<DerivationEvent> events;
    for (int i = 0; i < n; ++i) {
        ModelNode node;
        node.id = "m" + std::to_string(i);
        node.name = "model " + std::to_string(i);
        node.deployed = rng.chance(0.8);
        node.capability_domain = rng.chance(0.5) ? CapabilityDomain::General : CapabilityDomain::MathCoding;
        if (rng.chance(opt.inference_probability)) {
            node.inference = InferenceProfile{rng.compute_near(12.5, 3.0),
                                              rng.chance(0.5) ? CapabilityDomain::General
                                                              : CapabilityDomain::MathCoding};
        }
        nodes.push_back(node);

        DerivationEvent e;
        e.child_id = node.id;
        e.kind = i == 0 ? EventKind::Pretrain : rng.pick(derived_kinds());
        const double c = opt.centre_log10;
        const double s = opt.spread;
        switch (e.kind) {
            case EventKind::Pretrain: e.compute = rng.compute_near(c, s); break;
            case EventKind::FineTune:
            case EventKind::SyntheticDataGen:
            case EventKind::Expand: e.compute = rng.compute_near(c - 1.0, s); break;
            case EventKind::Distill:
            case EventKind::Kickstart:
            case EventKind::Reincarnate: e.compute = rng.compute_near(c - 1.5, s); break;
            case EventKind::Copy:
            case EventKind::CombineSoftware: e.compute = ComputeAmount::zero(); break;
        }
        if (e.kind != EventKind::Pretrain) {
            e.parent_ids.push_back("m" + std::to_string(rng.integer(0, i - 1)));
            if (e.kind == EventKind::Distill && opt.allow_multi_teacher && i > 1 && rng.chance(0.25)) {
                const std::string extra = "m" + std::to_string(rng.integer(0, i - 1));
                if (extra != e.parent_ids.front()) e.parent_ids.push_back(extra);
            }
        }
        if (e.kind == EventKind::Expand) e.expand_savings_fraction = rng.uniform(0.2, 0.76);
        if (e.kind == EventKind::Reincarnate && rng.chance(0.5)) e.surpass_teacher = rng.chance(0.5);
        if (rng.chance(0.7)) e.cost = MoneyAmount(std::pow(10.0, rng.uniform(5.0, 9.0)));
        e.planned = i > 0 && rng.chance(opt.planned_probability);
        events.push_back(std::move(e));
    }
    return Lineage::from_parts(std::move(nodes), std::move(events));
}

// Swept fields that resolve in `lineage`.
inline std::vector<std::string> sweep_targets(const Lineage& lineage) {
    std::vector<std::string> out;
    for (const auto& e : lineage.events()) {
        if (e.kind == EventKind::Copy || e.kind == EventKind::CombineSoftware) continue;
        out.push_back("events/" + e.child_id + "/flop");
    }
    for (const auto& n : lineage.nodes()) {
        if (n.inference) out.push_back("models/" + n.id + "/inference/per_request_flop");
    }
    return out;
}

inline Scenario random_scenario(Rng& rng, const GenOptions& opt = {}) {
    Scenario sc;
    sc.lineage = random_lineage(rng, opt);
    sc.subject = rng.pick(sc.lineage.nodes()).id;
    if (rng.chance(0.3)) {
        sc.scaling.inference_optimal_coefficient = rng.uniform(0.05, 0.2);
        sc.scaling.loss_compute_exponent = rng.uniform(0.1, 0.3);
    }
    if (rng.chance(0.5)) {
        std::vector<RulesetRef> refs;
        const auto& all = builtin_registry().all();
        const int k = rng.integer(1, 4);
        std::vector<std::string> ids;
        for (const auto& r : all) ids.push_back(r.id);
        for (int i = 0; i < k && !ids.empty(); ++i) {
            const auto j = static_cast<std::size_t>(rng.integer(0, static_cast<int>(ids.size()) - 1));
            refs.emplace_back(ids[j]);
            ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(j));
        }
        if (rng.chance(0.3)) {
            Ruleset custom = rng.pick(all);
            custom.id = "custom-" + std::to_string(rng.integer(0, 999));
            custom.threshold = rng.compute_near(25.0, 1.0);
            refs.emplace_back(custom);
        }
        sc.rulesets = std::move(refs);
    }
    if (rng.chance(0.5)) {
        const auto targets = sweep_targets(sc.lineage);
        if (!targets.empty()) {
            const double lo = rng.uniform(20.0, 25.0);
            sc.sweep = SweepSpec{rng.pick(targets), ComputeAmount::from_log10(lo),
                                 ComputeAmount::from_log10(lo + rng.uniform(0.5, 5.0)), rng.integer(2, 50)};
        }
    }
    return sc;
}

} // namespace ctl::testkit
