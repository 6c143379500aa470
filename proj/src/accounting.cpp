#include "ctl/accounting.hpp"

#include "ctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace ctl {

namespace {

std::string fmt_fraction(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", f);
    return buf;
}

std::string fmt_factor(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4gx", f);
    return buf;
}

bool counts(const DerivationEvent& e, const AccountingOptions& opts) {
    return opts.include_planned || !e.planned;
}

// Events from the chain's creation event (front) to the one that created
// `id` (back), following weight inheritance.
std::vector<const DerivationEvent*> weight_chain(const Lineage& lineage, std::string_view id) {
    std::vector<const DerivationEvent*> chain;
    std::string_view cur = id;
    for (;;) {
        const DerivationEvent* e = lineage.creating_event(cur);
        if (e == nullptr) {
            throw Error(ErrorCode::MissingCreatingEvent,
                        "model '" + std::string(cur) + "' has no creating event", std::string(cur));
        }
        chain.push_back(e);
        if (chain.size() > lineage.events().size()) {
            throw Error(ErrorCode::RecursionDepthExceeded, "weight chain does not terminate",
                        std::string(id));
        }
        if (!inherits_weights(e->kind)) break;
        if (e->parent_ids.size() != 1) {
            throw Error(ErrorCode::KindFieldMismatch, "event into '" + e->child_id + "' needs one parent",
                        e->child_id);
        }
        cur = e->parent_ids.front();
    }
    return {chain.rbegin(), chain.rend()};
}

struct ChainSums {
    const DerivationEvent* creation = nullptr;
    ComputeAmount creation_compute;
    ComputeAmount finetune;
    ComputeAmount synthetic;
    ComputeAmount expansion;
    std::vector<const DerivationEvent*> expands;
    bool any_planned = false;
};

ChainSums sum_chain(const std::vector<const DerivationEvent*>& chain, const AccountingOptions& opts) {
    ChainSums s;
    s.creation = chain.front();
    for (const DerivationEvent* e : chain) {
        if (!counts(*e, opts)) {
            s.any_planned = true;
            continue;
        }
        switch (e->kind) {
            case EventKind::FineTune:         s.finetune += e->compute; break;
            case EventKind::SyntheticDataGen: s.synthetic += e->compute; break;
            case EventKind::Expand:
                s.expansion += e->compute;
                s.expands.push_back(e);
                break;
            case EventKind::Copy:
            case EventKind::CombineSoftware:  break;
            default:                          s.creation_compute += e->compute; break;
        }
    }
    return s;
}

} // namespace

void validate(const CountingPolicy& p) {
    if (p.count_finetune.mode == FinetuneCounting::IfAggregateAtLeastFraction &&
        !(p.count_finetune.fraction > 0.0 && p.count_finetune.fraction < 1.0)) {
        throw Error(ErrorCode::DomainError, "fine-tune fraction must be in (0, 1)", "counting.finetune");
    }
    if (p.reuse_adjustment.factor &&
        !(*p.reuse_adjustment.factor >= 1.0 && std::isfinite(*p.reuse_adjustment.factor))) {
        throw Error(ErrorCode::DomainError, "reuse factor must be >= 1", "counting.reuse.factor");
    }
    if (const auto& v = p.expansion_adjustment.value) {
        if (p.expansion_adjustment.mode == ExpansionMode::InflateByMaxSavings && !(*v >= 0.0 && *v < 1.0)) {
            throw Error(ErrorCode::DomainError, "expansion savings must be in [0, 1)",
                        "counting.expansion_adjustment.savings");
        }
        if (p.expansion_adjustment.mode == ExpansionMode::LowerThreshold && !(*v >= 1.0 && std::isfinite(*v))) {
            throw Error(ErrorCode::DomainError, "expansion factor must be >= 1",
                        "counting.expansion_adjustment.factor");
        }
    }
}

std::string_view to_string(AdjustmentEncoding e) {
    switch (e) {
        case AdjustmentEncoding::None:              return "None";
        case AdjustmentEncoding::ComputeInflation:  return "ComputeInflation";
        case AdjustmentEncoding::ThresholdLowering: return "ThresholdLowering";
    }
    return "None";
}

double ComputeBreakdown::threshold_divisor() const {
    double d = 1.0;
    if (reuse_encoding == AdjustmentEncoding::ThresholdLowering) d *= reuse_factor;
    if (expansion_encoding == AdjustmentEncoding::ThresholdLowering) d *= expansion_factor;
    return d;
}

ComputeAmount ComputeBreakdown::recompute_effective() const {
    double ooms = inference_equivalent_ooms.ooms();
    if (reuse_encoding == AdjustmentEncoding::ComputeInflation) ooms += std::log10(reuse_factor);
    if (expansion_encoding == AdjustmentEncoding::ComputeInflation) ooms += std::log10(expansion_factor);
    return counted.scaled_ooms(ooms);
}

namespace {

ComputeBreakdown cumulative_from_chain(const std::vector<const DerivationEvent*>& chain, const CountingPolicy& policy,
                                       const AccountingOptions& opts) {
    const ChainSums sums = sum_chain(chain, opts);

    ComputeBreakdown b;
    b.pretrain = sums.creation_compute;
    b.creation_kind = sums.creation->kind;
    b.creation_event = sums.creation->id();
    b.finetune_total = sums.finetune;
    b.synthetic_data = sums.synthetic;
    b.expansion = sums.expansion;
    if (!sums.creation_compute.is_zero() && !sums.finetune.is_zero()) {
        b.finetune_fraction = ratio(sums.finetune, sums.creation_compute);
    } else if (sums.finetune.is_zero()) {
        b.finetune_fraction = 0.0;
    }

    switch (policy.count_finetune.mode) {
        case FinetuneCounting::Never:  b.finetune_counted = false; break;
        case FinetuneCounting::Always: b.finetune_counted = true; break;
        case FinetuneCounting::IfAggregateAtLeastFraction:
            b.finetune_counted =
                !sums.finetune.is_zero() &&
                (sums.creation_compute.is_zero() ||
                 sums.finetune.at_least(sums.creation_compute.scaled(policy.count_finetune.fraction)));
            break;
    }
    b.synthetic_counted = policy.count_synthetic_data;
    b.expansion_counted = policy.count_expansion;

    ComputeAmount total = sums.creation_compute;
    if (b.finetune_counted) total += sums.finetune;
    if (b.synthetic_counted) total += sums.synthetic;
    if (b.expansion_counted) total += sums.expansion;
    b.counted = total;
    b.effective = total;

    if (opts.itemize) {
        if (is_reuse(b.creation_kind)) {
            b.notes.push_back("weights start at " + std::string(to_string(b.creation_kind)) + " event '" +
                              b.creation_event +
                              "'; teacher compute not summed; fine-tune fraction measured against the "
                              "student-side compute");
        }
        if (!sums.finetune.is_zero() && !b.finetune_counted) {
            if (policy.count_finetune.mode == FinetuneCounting::Never) {
                b.notes.push_back("fine-tune compute " + sums.finetune.to_string() + " not counted");
            } else {
                b.notes.push_back("finetune below " + fmt_fraction(policy.count_finetune.fraction * 100.0) +
                                  "% of original training compute (" +
                                  fmt_fraction(b.finetune_fraction.value_or(0.0) * 100.0) + "%) - excluded");
            }
        } else if (!sums.finetune.is_zero() &&
                   policy.count_finetune.mode == FinetuneCounting::IfAggregateAtLeastFraction) {
            b.notes.push_back("finetune at " + fmt_fraction(b.finetune_fraction.value_or(0.0) * 100.0) +
                              "% of original training compute - counted");
        }
        if (!sums.synthetic.is_zero() && !b.synthetic_counted) {
            b.notes.push_back("synthetic data generation compute " + sums.synthetic.to_string() + " not counted");
        }
        if (!sums.expansion.is_zero() && !b.expansion_counted) {
            b.notes.push_back("model expansion compute " + sums.expansion.to_string() + " not counted");
        }
        if (sums.any_planned) b.notes.push_back("planned events excluded from current compute");
    }
    return b;
}

} // namespace

LineagePaths lineage_paths(const Lineage& lineage, std::string_view id) {
    LineagePaths paths;
    paths.node = lineage.find_node(id);
    if (paths.node == nullptr) {
        throw Error(ErrorCode::UnknownId, "unknown model '" + std::string(id) + "'", std::string(id));
    }
    paths.chain = weight_chain(lineage, id);
    for (const DerivationEvent* e : events_in_scope(lineage, id)) {
        if (is_reuse(e->kind)) paths.reuse.push_back(e);
    }
    std::sort(paths.reuse.begin(), paths.reuse.end());  // pointer order is events() order
    return paths;
}

ComputeBreakdown cumulative_training_compute(const Lineage& lineage, std::string_view id,
                                             const CountingPolicy& policy, const AccountingOptions& opts) {
    return cumulative_from_chain(lineage_paths(lineage, id).chain, policy, opts);
}

double aggregate_finetune_fraction(const Lineage& lineage, std::string_view id) {
    const ChainSums sums = sum_chain(lineage_paths(lineage, id).chain, {});
    if (sums.creation_compute.is_zero()) {
        throw Error(ErrorCode::NoPretrainRoot, "no training compute at the start of the weight chain of '" +
                                                   std::string(id) + "'",
                    std::string(id));
    }
    return ratio(sums.finetune, sums.creation_compute);
}

double reuse_multiplier(EventKind kind, std::optional<bool> surpass_teacher, const CountingPolicy& policy) {
    if (!is_reuse(kind)) {
        throw Error(ErrorCode::KindError, std::string(to_string(kind)) + " is not a model reuse technique");
    }
    if (policy.reuse_adjustment.factor) return *policy.reuse_adjustment.factor;
    switch (kind) {
        case EventKind::Distill:     return 10.0;
        case EventKind::Kickstart:   return 9.58;
        case EventKind::Reincarnate: return surpass_teacher.value_or(false) ? 3.5 : 12.5;
        default:                     break;
    }
    return 1.0;
}

ComputeBreakdown effective_compute(const Lineage& lineage, std::string_view id, const CountingPolicy& policy,
                                   const ScalingConfig& cfg, const AccountingOptions& opts) {
    return effective_compute(lineage_paths(lineage, id), policy, cfg, opts);
}

ComputeBreakdown effective_compute(const LineagePaths& paths, const CountingPolicy& policy, const ScalingConfig& cfg,
                                   const AccountingOptions& opts) {
    ComputeBreakdown b = cumulative_from_chain(paths.chain, policy, opts);

    // Reuse: every distillation / kickstarting / reincarnation event anywhere
    // in the ancestry compounds.
    const auto& reuse = policy.reuse_adjustment;
    if (reuse.mode != ReuseMode::None) {
        b.reuse_encoding = reuse.mode == ReuseMode::MultiplyStudentCompute ? AdjustmentEncoding::ComputeInflation
                                                                           : AdjustmentEncoding::ThresholdLowering;
    }
    {
        std::size_t reuse_count = 0;
        for (const DerivationEvent* ep : paths.reuse) {
            const DerivationEvent& e = *ep;
            if (!counts(e, opts)) continue;
            const double m = reuse.mode == ReuseMode::None ? 1.0 : reuse_multiplier(e.kind, e.surpass_teacher, policy);
            b.reuse_factor *= m;
            ++reuse_count;
            if (opts.itemize) {
                for (const auto& t : e.parent_ids) b.reuse_events.push_back({e.id(), t, e.kind, m});
            }
        }
        if (opts.itemize && reuse_count > 1 && reuse.mode != ReuseMode::None) {
            b.notes.push_back("reuse multipliers compounded over " + std::to_string(reuse_count) +
                              " reuse events (" + fmt_factor(b.reuse_factor) + ")");
        }
    }

    const auto& exp = policy.expansion_adjustment;
    if (exp.mode != ExpansionMode::None) {
        std::vector<const DerivationEvent*> expands;
        for (const auto* e : paths.chain) {
            if (e->kind == EventKind::Expand && counts(*e, opts)) expands.push_back(e);
        }
        if (!expands.empty()) {
            if (exp.value) {
                b.expansion_factor = exp.mode == ExpansionMode::InflateByMaxSavings ? 1.0 / (1.0 - *exp.value)
                                                                                    : *exp.value;
            } else {
                for (const auto* e : expands) b.expansion_factor /= 1.0 - e->expand_savings_fraction.value_or(0.0);
            }
            if (opts.itemize) {
                b.notes.push_back("model expansion adjustment " + fmt_factor(b.expansion_factor));
            }
        }
        b.expansion_encoding = exp.mode == ExpansionMode::InflateByMaxSavings ? AdjustmentEncoding::ComputeInflation
                                                                              : AdjustmentEncoding::ThresholdLowering;
    }

    if (policy.inference_adjustment && !b.counted.is_zero()) {
        const ModelNode* node = paths.node;
        if (node->inference) {
            const auto excess = excess_inference_ooms(node->inference->per_request_compute,
                                                      compute_optimal_inference(b.counted, cfg));
            b.inference_equivalent_ooms =
                training_equivalent_ooms(excess, node->inference->capability_domain, cfg);
            if (opts.itemize && b.inference_equivalent_ooms.ooms() > 0.0) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "inference %.3g OOM above compute-optimal ~ +%.3g OOM training",
                              excess.ooms(), b.inference_equivalent_ooms.ooms());
                b.notes.push_back(buf);
            }
        }
    }

    b.effective = b.recompute_effective();
    return b;
}

std::vector<FinetuneCrossing> finetune_reporting_events(const Lineage& lineage, std::string_view id,
                                                        double fraction_threshold) {
    const auto chain = lineage_paths(lineage, id).chain;
    const ChainSums sums = sum_chain(chain, {});
    if (sums.creation_compute.is_zero()) {
        throw Error(ErrorCode::NoPretrainRoot, "no training compute at the start of the weight chain of '" +
                                                   std::string(id) + "'",
                    std::string(id));
    }
    const ComputeAmount quantum = sums.creation_compute.scaled(fraction_threshold);
    ComputeAmount running;
    for (const auto* e : chain) {
        if (e->kind != EventKind::FineTune || e->planned) continue;
        running += e->compute;
        if (running.at_least(quantum)) {
            return {{e->id(), ratio(running, sums.creation_compute)}};
        }
    }
    return {};
}

} // namespace ctl
