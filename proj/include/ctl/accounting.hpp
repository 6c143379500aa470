#pragma once

#include "ctl/compute.hpp"
#include "ctl/lineage.hpp"
#include "ctl/scaling.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctl {

enum class FinetuneCounting { Never, Always, IfAggregateAtLeastFraction };

struct FinetunePolicy {
    FinetuneCounting mode = FinetuneCounting::Always;
    double fraction = 0.15;  // only read for IfAggregateAtLeastFraction

    friend bool operator==(const FinetunePolicy&, const FinetunePolicy&) = default;
};

enum class ReuseMode { None, MultiplyStudentCompute, LowerThreshold };

// Without a factor the per-kind defaults of reuse_multiplier() apply.
struct ReuseAdjustment {
    ReuseMode mode = ReuseMode::None;
    std::optional<double> factor;

    friend bool operator==(const ReuseAdjustment&, const ReuseAdjustment&) = default;
};

enum class ExpansionMode { None, InflateByMaxSavings, LowerThreshold };

// `value` is the savings fraction s for InflateByMaxSavings and the divisor
// for LowerThreshold. Without a value each Expand event's own
// expand_savings_fraction is used.
struct ExpansionAdjustment {
    ExpansionMode mode = ExpansionMode::None;
    std::optional<double> value;

    friend bool operator==(const ExpansionAdjustment&, const ExpansionAdjustment&) = default;
};

struct CountingPolicy {
    FinetunePolicy count_finetune;
    bool count_synthetic_data = true;
    bool count_expansion = true;
    ReuseAdjustment reuse_adjustment;
    ExpansionAdjustment expansion_adjustment;
    bool inference_adjustment = false;

    friend bool operator==(const CountingPolicy&, const CountingPolicy&) = default;
};

void validate(const CountingPolicy& policy);

enum class AdjustmentEncoding { None, ComputeInflation, ThresholdLowering };
std::string_view to_string(AdjustmentEncoding e);

struct ReuseApplication {
    std::string event_id;
    std::string teacher_id;
    EventKind kind = EventKind::Distill;
    double multiplier = 1.0;  // 1.0 when the policy applies no reuse adjustment

    friend bool operator==(const ReuseApplication&, const ReuseApplication&) = default;
};

/**
 * Itemized compute for one model under one counting policy.
 *
 * `pretrain` is the compute of the event that started the model's weight
 * chain: the root pretraining run, or the student-side compute of the
 * nearest distillation / kickstarting / reincarnation event.
 *
 * effective = counted * reuse_factor^[inflation] * expansion_factor^[inflation]
 *             * 10^inference_equivalent_ooms
 */
struct ComputeBreakdown {
    ComputeAmount pretrain;
    EventKind creation_kind = EventKind::Pretrain;
    std::string creation_event;
    ComputeAmount finetune_total;
    bool finetune_counted = false;
    std::optional<double> finetune_fraction;
    ComputeAmount synthetic_data;
    bool synthetic_counted = false;
    ComputeAmount expansion;
    bool expansion_counted = false;
    ComputeAmount counted;
    std::vector<ReuseApplication> reuse_events;
    double reuse_factor = 1.0;
    AdjustmentEncoding reuse_encoding = AdjustmentEncoding::None;
    double expansion_factor = 1.0;
    AdjustmentEncoding expansion_encoding = AdjustmentEncoding::None;
    OomValue inference_equivalent_ooms;
    ComputeAmount effective;
    std::vector<std::string> notes;

    /// Divisor the threshold-lowering encodings apply to a rule's threshold.
    double threshold_divisor() const;
    /// Recomputes `effective` from the other fields.
    ComputeAmount recompute_effective() const;

    friend bool operator==(const ComputeBreakdown&, const ComputeBreakdown&) = default;
};

struct AccountingOptions {
    bool include_planned = false;  // count events flagged planned
    bool itemize = true;           // fill notes and reuse_events
};

/// The compute-independent part of a model's accounting: its weight chain
/// and the reuse events in its ancestry. Holds pointers into the lineage, so
/// it stays valid across numeric edits (set_event_compute and friends) but
/// not structural ones.
struct LineagePaths {
    const ModelNode* node = nullptr;
    std::vector<const DerivationEvent*> chain;  // creating event of the chain first, `id`'s last
    std::vector<const DerivationEvent*> reuse;  // reuse events in the ancestry, in events() order
};

LineagePaths lineage_paths(const Lineage& lineage, std::string_view id);

/// Counted training compute along the model's weight chain, no adjustments
/// (effective == counted).
ComputeBreakdown cumulative_training_compute(const Lineage& lineage, std::string_view id,
                                             const CountingPolicy& policy,
                                             const AccountingOptions& opts = {});

/// Sum of fine-tune compute on the weight chain over the chain's creation
/// compute. Throws NoPretrainRoot when the creation compute is zero.
double aggregate_finetune_fraction(const Lineage& lineage, std::string_view id);

/// Default compute-saving multipliers: Distill 10, Kickstart 9.58,
/// Reincarnate 12.5 (matching) or 3.5 (surpassing). A policy factor, when
/// set, applies uniformly. Throws KindError for non-reuse kinds.
double reuse_multiplier(EventKind kind, std::optional<bool> surpass_teacher,
                        const CountingPolicy& policy);

ComputeBreakdown effective_compute(const Lineage& lineage, std::string_view id,
                                   const CountingPolicy& policy, const ScalingConfig& cfg,
                                   const AccountingOptions& opts = {});
ComputeBreakdown effective_compute(const LineagePaths& paths, const CountingPolicy& policy,
                                   const ScalingConfig& cfg, const AccountingOptions& opts = {});

struct FinetuneCrossing {
    std::string event_id;
    double fraction = 0.0;

    friend bool operator==(const FinetuneCrossing&, const FinetuneCrossing&) = default;
};

/// The fine-tune event at which the running aggregate first reaches
/// `fraction_threshold` of the creation compute; empty when never reached.
std::vector<FinetuneCrossing> finetune_reporting_events(const Lineage& lineage, std::string_view id,
                                                        double fraction_threshold);

} // namespace ctl
