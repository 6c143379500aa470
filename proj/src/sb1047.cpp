#include "ctl/error.hpp"
#include "ctl/rulesets.hpp"

#include <map>

namespace ctl {

namespace {

// Covered-model test as the bill states it. A model counts as a covered
// model "copy" when it is a covered model or an unmodified derivative of one;
// only those can seed further derivatives.
class Sb1047Classifier {
public:
    Sb1047Classifier(const Lineage& lineage, const Ruleset& rs) : lineage_(lineage), rs_(rs) {}

    Sb1047Class classify(const std::string& id, std::vector<std::string>* notes, std::size_t depth = 0) {
        if (auto it = memo_.find(id); it != memo_.end() && notes == nullptr) return it->second;
        if (depth > lineage_.nodes().size()) {
            throw Error(ErrorCode::RecursionDepthExceeded, "derivation recursion too deep", id);
        }
        const Sb1047Class c = compute(id, notes, depth);
        memo_[id] = c;
        return c;
    }

private:
    static bool copy_of_covered(const Sb1047Class& c) {
        return c.category == Sb1047Category::CoveredModel ||
               (c.category == Sb1047Category::CoveredModelDerivative &&
                c.derivative == DerivativeKind::Unmodified);
    }

    static Sb1047Class derivative(DerivativeKind k) { return {Sb1047Category::CoveredModelDerivative, k}; }
    static Sb1047Class neither() { return {Sb1047Category::Neither, std::nullopt}; }
    static Sb1047Class covered() { return {Sb1047Category::CoveredModel, std::nullopt}; }

    static void note(std::vector<std::string>* notes, std::string text) {
        if (notes != nullptr) notes->push_back(std::move(text));
    }

    // Trained from scratch with more than the compute threshold at more than
    // the cost threshold.
    bool trained_above_limbs(const DerivationEvent& e, std::vector<std::string>* notes) const {
        if (!e.compute.exceeds(rs_.threshold)) return false;
        if (!rs_.cost_threshold) return true;
        if (!e.cost) {
            note(notes, "training compute above " + rs_.threshold.to_string() +
                            " but no cost declared; cost limb treated as unmet");
            return false;
        }
        return *e.cost > *rs_.cost_threshold;
    }

    Sb1047Class compute(const std::string& id, std::vector<std::string>* notes, std::size_t depth) {
        const DerivationEvent* e = lineage_.creating_event(id);
        if (e == nullptr) {
            throw Error(ErrorCode::MissingCreatingEvent, "model '" + id + "' has no creating event", id);
        }
        if (e->planned) {
            note(notes, "creating event of '" + id + "' is planned; not yet a model");
            return neither();
        }
        const Sb1047Limbs& limbs = *rs_.sb1047;
        auto parent_covered = [&]() {
            for (const auto& p : e->parent_ids) {
                if (copy_of_covered(classify(p, nullptr, depth + 1))) return true;
            }
            return false;
        };

        switch (e->kind) {
            case EventKind::Pretrain:
                return trained_above_limbs(*e, notes) ? covered() : neither();

            case EventKind::Distill:
            case EventKind::Kickstart:
            case EventKind::Reincarnate:
                if (trained_above_limbs(*e, notes)) return covered();
                return parent_covered() ? derivative(DerivativeKind::NonFinetuneMods) : neither();

            case EventKind::FineTune: {
                if (!parent_covered()) return neither();
                const bool compute_limb = e->compute.at_least(limbs.finetune_threshold);
                const bool cost_limb = e->cost && *e->cost > limbs.finetune_cost;
                if (compute_limb && cost_limb) return covered();
                if (compute_limb) {
                    note(notes, "fine-tune reaches " + limbs.finetune_threshold.to_string() +
                                    " but cost does not exceed $" + std::to_string(static_cast<long long>(limbs.finetune_cost.usd())) +
                                    "; remains a derivative");
                } else if (cost_limb) {
                    note(notes, "fine-tune below " + limbs.finetune_threshold.to_string() +
                                    " with cost above $" + std::to_string(static_cast<long long>(limbs.finetune_cost.usd())) +
                                    "; the bill's derivative text also names this cost, which is not applied here");
                }
                return derivative(DerivativeKind::SmallFinetune);
            }

            case EventKind::Expand:
            case EventKind::SyntheticDataGen:
                return parent_covered() ? derivative(DerivativeKind::NonFinetuneMods) : neither();

            case EventKind::Copy:
                return parent_covered() ? derivative(DerivativeKind::Unmodified) : neither();

            case EventKind::CombineSoftware:
                return parent_covered() ? derivative(DerivativeKind::CombinedSoftware) : neither();
        }
        return neither();
    }

    const Lineage& lineage_;
    const Ruleset& rs_;
    std::map<std::string, Sb1047Class> memo_;
};

} // namespace

Verdict sb1047_classify(const Lineage& lineage, std::string_view id) {
    return sb1047_classify(lineage, id, builtin_registry().at("sb1047-vetoed"));
}

namespace {

void check_sb1047_args(const Lineage& lineage, std::string_view id, const Ruleset& rs) {
    if (!lineage.contains(id)) {
        throw Error(ErrorCode::UnknownId, "unknown model '" + std::string(id) + "'", std::string(id));
    }
    if (!rs.sb1047) {
        throw Error(ErrorCode::SchemaError, "rule set '" + rs.id + "' has no SB 1047 limbs", "sb1047");
    }
}

} // namespace

Sb1047Class sb1047_classification(const Lineage& lineage, std::string_view id, const Ruleset& rs) {
    check_sb1047_args(lineage, id, rs);
    return Sb1047Classifier(lineage, rs).classify(std::string(id), nullptr);
}

Verdict sb1047_classify(const Lineage& lineage, std::string_view id, const Ruleset& rs) {
    check_sb1047_args(lineage, id, rs);
    Verdict v;
    v.ruleset_id = rs.id;
    v.breakdown = cumulative_training_compute(lineage, id, rs.counting);
    Sb1047Classifier classifier(lineage, rs);
    const Sb1047Class c = classifier.classify(std::string(id), &v.breakdown.notes);
    v.classification = c;
    v.citations = rs.citations;
    switch (c.category) {
        case Sb1047Category::CoveredModel:
            v.status = CoverageStatus::Covered;
            v.triggered_rules.push_back(rs.id + ":covered-model");
            v.obligations.push_back({"sb1047-developer-duties", std::nullopt});
            break;
        case Sb1047Category::CoveredModelDerivative:
            v.status = CoverageStatus::Covered;
            v.triggered_rules.push_back(rs.id + ":covered-model-derivative:" + std::string(to_string(*c.derivative)));
            v.obligations.push_back({"sb1047-derivative-duties", std::nullopt});
            break;
        case Sb1047Category::Neither:
            v.status = CoverageStatus::NotCovered;
            break;
    }
    return v;
}

} // namespace ctl
