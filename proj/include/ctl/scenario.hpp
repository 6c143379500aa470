#pragma once

#include "ctl/compute.hpp"
#include "ctl/lineage.hpp"
#include "ctl/rulesets.hpp"
#include "ctl/scaling.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ctl {

/// A numeric field a sweep varies: "events/<child-id>/flop" or
/// "models/<model-id>/inference/per_request_flop".
struct SweepSpec {
    std::string target;
    ComputeAmount from;
    ComputeAmount to;
    int steps = 2;

    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

inline constexpr int kMaxSweepSteps = 10'000;

/// Either a built-in rule set id or an inline definition.
using RulesetRef = std::variant<std::string, Ruleset>;

struct Scenario {
    Lineage lineage;
    std::string subject;
    ScalingConfig scaling;
    std::optional<std::vector<RulesetRef>> rulesets;  // absent: every built-in
    std::optional<SweepSpec> sweep;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

Scenario parse_scenario(std::string_view text);
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);
std::string render_scenario(const Scenario& scenario);

nlohmann::json ruleset_to_json(const Ruleset& ruleset);
/// Inline rule set; an optional "base" key names a built-in to start from.
Ruleset ruleset_from_json(const nlohmann::json& j, const std::string& path);

/// Resolves the scenario's selection against the registry, throwing
/// SchemaError(rulesets) for unknown ids.
Registry selected_registry(const Scenario& scenario, const Registry& builtins);
/// Comma-separated ids or "all".
Registry selected_registry(std::string_view csv, const Registry& builtins);

enum class ReportFormat { Text, Json };

std::string render_report(const VerdictMap& verdicts, ReportFormat format);
nlohmann::json verdicts_to_json(const VerdictMap& verdicts);
VerdictMap verdicts_from_json(const nlohmann::json& j);
nlohmann::json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

nlohmann::json scaling_to_json(const ScalingConfig& cfg);

struct SweepRow {
    ComputeAmount value;
    std::string ruleset_id;
    CoverageStatus status = CoverageStatus::NotCovered;
    ComputeAmount effective;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// Rows ordered by grid index, then rule set id.
std::vector<SweepRow> sweep(const Scenario& scenario, const Registry& registry, const ScalingConfig& cfg);
std::string render_sweep(const std::vector<SweepRow>& rows, ReportFormat format);
nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows);

/// Smallest Covered value of the sweep target, found by log-domain
/// bisection to within `tolerance_ooms`. Throws NoCrossing when both ends of
/// the sweep range have the same Covered-ness and NonMonotone when only the
/// lower end is Covered.
ComputeAmount find_crossing(const Scenario& scenario, const Ruleset& ruleset, const ScalingConfig& cfg,
                            double tolerance_ooms = 1e-3);

/// Scenario copy with the sweep target set to `value`.
Scenario with_target_value(const Scenario& scenario, const std::string& target, ComputeAmount value);
/// Throws SweepTargetUnresolved unless `target` names exactly one field.
void check_sweep_target(const Lineage& lineage, const std::string& target);

/// n log-spaced values from `from` to `to` inclusive.
std::vector<ComputeAmount> log_grid(ComputeAmount from, ComputeAmount to, int n);

} // namespace ctl
