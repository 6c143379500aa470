#pragma once

#include "ctl/accounting.hpp"
#include "ctl/compute.hpp"
#include "ctl/lineage.hpp"
#include "ctl/scaling.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctl {

enum class Jurisdiction { UsFederal, Eu, CaState };
std::string_view to_string(Jurisdiction j);
std::optional<Jurisdiction> parse_jurisdiction(std::string_view s);

/// Threshold: compare effective compute to a threshold. Sb1047: the covered
/// model / covered model derivative classification.
enum class RuleEngine { Threshold, Sb1047 };

struct NotificationRule {
    int window_days = 14;

    friend bool operator==(const NotificationRule&, const NotificationRule&) = default;
};

// Compute the rule's source text is silent about. When leaving it out keeps
// the model below the threshold but counting it would not, the verdict is
// Ambiguous.
struct AmbiguityProbe {
    bool finetune = false;
    bool expansion = false;

    friend bool operator==(const AmbiguityProbe&, const AmbiguityProbe&) = default;
};

struct Sb1047Limbs {
    ComputeAmount finetune_threshold = ComputeAmount::parse("3e25");  // compared with >=
    MoneyAmount finetune_cost{10'000'000.0};                         // compared with >

    friend bool operator==(const Sb1047Limbs&, const Sb1047Limbs&) = default;
};

struct Ruleset {
    std::string id;
    Jurisdiction jurisdiction = Jurisdiction::UsFederal;
    RuleEngine engine = RuleEngine::Threshold;
    ComputeAmount threshold;
    std::optional<MoneyAmount> cost_threshold;
    CountingPolicy counting;
    bool teacher_propagation = false;
    std::optional<NotificationRule> notification_rule;
    AmbiguityProbe ambiguity;
    std::optional<Sb1047Limbs> sb1047;
    std::vector<std::string> citations;
    std::string description;

    friend bool operator==(const Ruleset&, const Ruleset&) = default;
};

/// Throws DomainError / SchemaError on an inconsistent rule set.
void validate(const Ruleset& ruleset);

struct ThresholdLine {
    std::string label;
    std::string comparator;  // ">" or ">="
    ComputeAmount compute;
    std::optional<MoneyAmount> cost;
};

/// Thresholds a rule set effectively applies, e.g. the lowered threshold of
/// a reuse patch.
std::vector<ThresholdLine> threshold_lines(const Ruleset& ruleset);

enum class CoverageStatus { Covered, NotCovered, Ambiguous };
std::string_view to_string(CoverageStatus s);
std::optional<CoverageStatus> parse_coverage_status(std::string_view s);

enum class Sb1047Category { CoveredModel, CoveredModelDerivative, Neither };
enum class DerivativeKind { Unmodified, NonFinetuneMods, SmallFinetune, CombinedSoftware };
std::string_view to_string(Sb1047Category c);
std::string_view to_string(DerivativeKind k);
std::optional<Sb1047Category> parse_sb1047_category(std::string_view s);
std::optional<DerivativeKind> parse_derivative_kind(std::string_view s);

struct Sb1047Class {
    Sb1047Category category = Sb1047Category::Neither;
    std::optional<DerivativeKind> derivative;  // set iff CoveredModelDerivative

    friend bool operator==(const Sb1047Class&, const Sb1047Class&) = default;
};

struct Obligation {
    std::string kind;
    std::optional<int> deadline_days;

    friend bool operator==(const Obligation&, const Obligation&) = default;
};

struct Verdict {
    std::string ruleset_id;
    CoverageStatus status = CoverageStatus::NotCovered;
    std::optional<Sb1047Class> classification;
    std::vector<std::string> triggered_rules;
    ComputeBreakdown breakdown;
    std::vector<std::string> citations;
    std::vector<Obligation> obligations;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

using VerdictMap = std::map<std::string, Verdict>;

/// Immutable after construction; lookups by id.
class Registry {
public:
    Registry() = default;
    explicit Registry(std::vector<Ruleset> rulesets);

    const std::vector<Ruleset>& all() const noexcept { return rulesets_; }
    const Ruleset* find(std::string_view id) const;
    const Ruleset& at(std::string_view id) const;

private:
    std::vector<Ruleset> rulesets_;  // sorted by id
};

std::vector<Ruleset> builtin_rulesets();
const Registry& builtin_registry();

Verdict evaluate(const Lineage& lineage, std::string_view id, const Ruleset& ruleset, const ScalingConfig& cfg);

/// Status only; same decision path as evaluate() without building text.
CoverageStatus evaluate_status(const Lineage& lineage, std::string_view id, const Ruleset& ruleset,
                               const ScalingConfig& cfg);

/// Repeated status checks for one subject while only numeric fields of the
/// lineage change between calls (sweeps, bisection). The lineage is held by
/// reference and must outlive the probe.
class StatusProbe {
public:
    StatusProbe(const Lineage& lineage, std::string_view id, const Ruleset& ruleset, const ScalingConfig& cfg);
    ~StatusProbe();
    StatusProbe(const StatusProbe&) = delete;
    StatusProbe& operator=(const StatusProbe&) = delete;

    CoverageStatus status();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

VerdictMap evaluate_all(const Lineage& lineage, std::string_view id, const Registry& registry,
                        const ScalingConfig& cfg);

/// Classification under the vetoed California bill with its stated limbs.
Verdict sb1047_classify(const Lineage& lineage, std::string_view id);
Verdict sb1047_classify(const Lineage& lineage, std::string_view id, const Ruleset& ruleset);
/// The classification alone, without a breakdown or notes.
Sb1047Class sb1047_classification(const Lineage& lineage, std::string_view id, const Ruleset& ruleset);

} // namespace ctl
