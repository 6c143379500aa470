#include "ctl/error.hpp"
#include "ctl/scenario.hpp"

#include <sstream>

namespace ctl {

using nlohmann::json;

namespace {

constexpr std::string_view kEventPrefix = "events/";
constexpr std::string_view kEventSuffix = "/flop";
constexpr std::string_view kModelPrefix = "models/";
constexpr std::string_view kInferenceSuffix = "/inference/per_request_flop";

struct Target {
    bool is_event = true;
    std::string id;
};

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
    return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

[[noreturn]] void unresolved(const std::string& target, const std::string& why) {
    throw Error(ErrorCode::SweepTargetUnresolved, "sweep target '" + target + "' " + why, "sweep.target");
}

Target resolve(const Lineage& lineage, const std::string& target) {
    std::string_view t = target;
    if (starts_with(t, kEventPrefix) && ends_with(t, kEventSuffix) &&
        t.size() > kEventPrefix.size() + kEventSuffix.size()) {
        std::string id(t.substr(kEventPrefix.size(), t.size() - kEventPrefix.size() - kEventSuffix.size()));
        const auto n = lineage.creating_event_count(id);
        if (n == 0) unresolved(target, "matches no event");
        if (n > 1) unresolved(target, "matches more than one event");
        const auto kind = lineage.creating_event(id)->kind;
        if (kind == EventKind::Copy || kind == EventKind::CombineSoftware) {
            unresolved(target, "names an event kind that carries no compute");
        }
        return {true, id};
    }
    if (starts_with(t, kModelPrefix) && ends_with(t, kInferenceSuffix) &&
        t.size() > kModelPrefix.size() + kInferenceSuffix.size()) {
        std::string id(t.substr(kModelPrefix.size(), t.size() - kModelPrefix.size() - kInferenceSuffix.size()));
        const ModelNode* node = lineage.find_node(id);
        if (node == nullptr) unresolved(target, "matches no model");
        if (!node->inference) unresolved(target, "names a model without an inference profile");
        return {false, id};
    }
    unresolved(target, "is not of the form events/<id>/flop or models/<id>/inference/per_request_flop");
}

void apply(Lineage& lineage, const Target& t, ComputeAmount value) {
    if (t.is_event) lineage.set_event_compute(t.id, value);
    else lineage.set_inference_compute(t.id, value);
}

const SweepSpec& require_sweep(const Scenario& sc) {
    if (!sc.sweep) throw Error(ErrorCode::SchemaError, "scenario has no sweep section", "sweep");
    return *sc.sweep;
}

} // namespace

std::vector<ComputeAmount> log_grid(ComputeAmount from, ComputeAmount to, int n) {
    if (n < 2 || n > kMaxSweepSteps) {
        throw Error(ErrorCode::SchemaError, "steps must be between 2 and " + std::to_string(kMaxSweepSteps),
                    "sweep.steps");
    }
    if (from.is_zero() || !(from < to)) throw Error(ErrorCode::SchemaError, "requires 0 < from < to", "sweep");
    std::vector<ComputeAmount> out;
    out.reserve(static_cast<std::size_t>(n));
    const double lo = from.log10();
    const double hi = to.log10();
    for (int i = 0; i < n; ++i) {
        if (i == 0) out.push_back(from);
        else if (i == n - 1) out.push_back(to);
        else out.push_back(ComputeAmount::from_log10(lo + (hi - lo) * i / (n - 1)));
    }
    return out;
}

void check_sweep_target(const Lineage& lineage, const std::string& target) {
    (void)resolve(lineage, target);
}

Scenario with_target_value(const Scenario& scenario, const std::string& target, ComputeAmount value) {
    const Target t = resolve(scenario.lineage, target);
    Scenario out = scenario;
    apply(out.lineage, t, value);
    return out;
}

std::vector<SweepRow> sweep(const Scenario& scenario, const Registry& registry, const ScalingConfig& cfg) {
    const SweepSpec& spec = require_sweep(scenario);
    const Target t = resolve(scenario.lineage, spec.target);
    Lineage work = scenario.lineage;
    std::vector<SweepRow> rows;
    for (const auto& value : log_grid(spec.from, spec.to, spec.steps)) {
        apply(work, t, value);
        for (const auto& rs : registry.all()) {
            const Verdict v = evaluate(work, scenario.subject, rs, cfg);
            rows.push_back({value, rs.id, v.status, v.breakdown.effective});
        }
    }
    return rows;
}

json sweep_to_json(const std::vector<SweepRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({{"value", r.value.to_decimal()},
                       {"ruleset", r.ruleset_id},
                       {"status", to_string(r.status)},
                       {"effective", {{"flop", r.effective.to_string()},
                                      {"log10", r.effective.is_zero() ? json(nullptr) : json(r.effective.log10())}}}});
    }
    return {{"rows", std::move(out)}};
}

std::string render_sweep(const std::vector<SweepRow>& rows, ReportFormat format) {
    if (format == ReportFormat::Json) return sweep_to_json(rows).dump(2) + "\n";
    std::ostringstream out;
    auto cell = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    out << cell("VALUE", 12) << cell("RULESET", 32) << cell("STATUS", 12) << "EFFECTIVE\n";
    for (const auto& r : rows) {
        out << cell(r.value.to_string(), 12) << cell(r.ruleset_id, 32) << cell(std::string(to_string(r.status)), 12)
            << r.effective.to_string() << "\n";
    }
    return out.str();
}

ComputeAmount find_crossing(const Scenario& scenario, const Ruleset& ruleset, const ScalingConfig& cfg,
                            double tolerance_ooms) {
    const SweepSpec& spec = require_sweep(scenario);
    if (!(tolerance_ooms > 0.0)) throw Error(ErrorCode::DomainError, "tolerance must be > 0", "tolerance_ooms");
    const Target t = resolve(scenario.lineage, spec.target);
    Lineage work = scenario.lineage;
    StatusProbe probe(work, scenario.subject, ruleset, cfg);
    auto covered = [&](ComputeAmount v) {
        apply(work, t, v);
        return probe.status() == CoverageStatus::Covered;
    };
    const bool lo_cov = covered(spec.from);
    const bool hi_cov = covered(spec.to);
    if (lo_cov == hi_cov) {
        throw Error(ErrorCode::NoCrossing,
                    std::string("'") + ruleset.id + "' is " + (lo_cov ? "Covered" : "not Covered") +
                        " at both ends of the sweep range",
                    "sweep");
    }
    if (lo_cov) {
        throw Error(ErrorCode::NonMonotone,
                    "'" + ruleset.id + "' is Covered at the low end of the range but not the high end", "sweep");
    }
    double lo = spec.from.log10();
    double hi = spec.to.log10();
    while (hi - lo > tolerance_ooms) {
        const double mid = 0.5 * (lo + hi);
        if (covered(ComputeAmount::from_log10(mid))) hi = mid;
        else lo = mid;
    }
    return ComputeAmount::from_log10(hi);
}

} // namespace ctl
