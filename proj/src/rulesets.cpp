#include "ctl/rulesets.hpp"

#include "ctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace ctl {

std::string_view to_string(Jurisdiction j) {
    switch (j) {
        case Jurisdiction::UsFederal: return "US-Federal";
        case Jurisdiction::Eu:        return "EU";
        case Jurisdiction::CaState:   return "CA-State";
    }
    return "US-Federal";
}

std::optional<Jurisdiction> parse_jurisdiction(std::string_view s) {
    if (s == "US-Federal") return Jurisdiction::UsFederal;
    if (s == "EU") return Jurisdiction::Eu;
    if (s == "CA-State") return Jurisdiction::CaState;
    return std::nullopt;
}

std::string_view to_string(CoverageStatus s) {
    switch (s) {
        case CoverageStatus::Covered:    return "Covered";
        case CoverageStatus::NotCovered: return "NotCovered";
        case CoverageStatus::Ambiguous:  return "Ambiguous";
    }
    return "NotCovered";
}

std::optional<CoverageStatus> parse_coverage_status(std::string_view s) {
    for (auto v : {CoverageStatus::Covered, CoverageStatus::NotCovered, CoverageStatus::Ambiguous}) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

std::string_view to_string(Sb1047Category c) {
    switch (c) {
        case Sb1047Category::CoveredModel:           return "CoveredModel";
        case Sb1047Category::CoveredModelDerivative: return "CoveredModelDerivative";
        case Sb1047Category::Neither:                return "Neither";
    }
    return "Neither";
}

std::string_view to_string(DerivativeKind k) {
    switch (k) {
        case DerivativeKind::Unmodified:       return "Unmodified";
        case DerivativeKind::NonFinetuneMods:  return "NonFinetuneMods";
        case DerivativeKind::SmallFinetune:    return "SmallFinetune";
        case DerivativeKind::CombinedSoftware: return "CombinedSoftware";
    }
    return "Unmodified";
}

std::optional<Sb1047Category> parse_sb1047_category(std::string_view s) {
    for (auto v : {Sb1047Category::CoveredModel, Sb1047Category::CoveredModelDerivative, Sb1047Category::Neither}) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

std::optional<DerivativeKind> parse_derivative_kind(std::string_view s) {
    for (auto v : {DerivativeKind::Unmodified, DerivativeKind::NonFinetuneMods, DerivativeKind::SmallFinetune,
                   DerivativeKind::CombinedSoftware}) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

void validate(const Ruleset& rs) {
    if (rs.id.empty()) throw Error(ErrorCode::SchemaError, "rule set id must not be empty", "id");
    if (rs.threshold.is_zero()) {
        throw Error(ErrorCode::DomainError, "rule set '" + rs.id + "': threshold must be > 0", "threshold");
    }
    if (rs.notification_rule && rs.notification_rule->window_days < 0) {
        throw Error(ErrorCode::DomainError, "rule set '" + rs.id + "': negative notification window",
                    "notification_days");
    }
    if (rs.engine == RuleEngine::Sb1047 && !rs.sb1047) {
        throw Error(ErrorCode::SchemaError, "rule set '" + rs.id + "': sb1047 engine needs its limbs", "sb1047");
    }
    validate(rs.counting);
}

std::vector<ThresholdLine> threshold_lines(const Ruleset& rs) {
    std::vector<ThresholdLine> out;
    out.push_back({rs.engine == RuleEngine::Sb1047 ? "covered model" : "training compute", ">", rs.threshold,
                   rs.cost_threshold});
    const auto& reuse = rs.counting.reuse_adjustment;
    if (reuse.mode != ReuseMode::None && reuse.factor) {
        out.push_back({reuse.mode == ReuseMode::LowerThreshold ? "reuse-derived model"
                                                               : "reuse-derived model (compute inflated, equivalent)",
                       ">", rs.threshold.scaled_ooms(-std::log10(*reuse.factor)), std::nullopt});
    }
    const auto& exp = rs.counting.expansion_adjustment;
    if (exp.mode != ExpansionMode::None && exp.value) {
        const double divisor = exp.mode == ExpansionMode::LowerThreshold ? *exp.value : 1.0 / (1.0 - *exp.value);
        out.push_back({exp.mode == ExpansionMode::LowerThreshold ? "expanded model"
                                                                 : "expanded model (compute inflated, equivalent)",
                       ">", rs.threshold.scaled_ooms(-std::log10(divisor)), std::nullopt});
    }
    if (rs.sb1047) {
        out.push_back({"fine-tune of a covered model", ">=", rs.sb1047->finetune_threshold, rs.sb1047->finetune_cost});
    }
    return out;
}

Registry::Registry(std::vector<Ruleset> rulesets) : rulesets_(std::move(rulesets)) {
    std::sort(rulesets_.begin(), rulesets_.end(), [](const Ruleset& a, const Ruleset& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < rulesets_.size(); ++i) {
        validate(rulesets_[i]);
        if (i > 0 && rulesets_[i].id == rulesets_[i - 1].id) {
            throw Error(ErrorCode::DuplicateId, "duplicate rule set id '" + rulesets_[i].id + "'", rulesets_[i].id);
        }
    }
}

const Ruleset* Registry::find(std::string_view id) const {
    auto it = std::lower_bound(rulesets_.begin(), rulesets_.end(), id,
                               [](const Ruleset& r, std::string_view v) { return r.id < v; });
    if (it == rulesets_.end() || it->id != id) return nullptr;
    return &*it;
}

const Ruleset& Registry::at(std::string_view id) const {
    if (const Ruleset* r = find(id)) return *r;
    throw Error(ErrorCode::SchemaError, "unknown rule set '" + std::string(id) + "'", "rulesets");
}

// ── Built-in rule sets ─────────────────────────────────────────────────────

namespace cite {
constexpr const char* kEoThreshold = "EO 14110 Sec. 4.2(b)(i): trained using >1e26 integer or floating-point operations";
constexpr const char* kEoReporting = "EO 14110 Sec. 4.2(a): reporting to the Secretary of Commerce";
constexpr const char* kAiActThreshold = "AI Act Art. 51(2): cumulative training computation >1e25 FLOP";
constexpr const char* kAiActRecital = "AI Act Recital 111: cumulative compute includes pre-training, synthetic data generation and fine-tuning";
constexpr const char* kAiActNotify = "AI Act Art. 52(1): notify the Commission within two weeks (14 days)";
constexpr const char* kSbCovered = "SB 1047 Sec. 22602: covered model trained with >1e26 OP at cost >$100,000,000";
constexpr const char* kSbFinetune = "SB 1047 Sec. 22602: covered model created by fine-tuning a covered model with >=3e25 OP at cost >$10,000,000";
constexpr const char* kSbDerivative = "SB 1047 Sec. 22602: covered model derivative (unmodified copy, non-fine-tune modification, fine-tune <3e25 OP, combined software)";
constexpr const char* kFinetune15 = "fine-tune materiality rule: fine-tuning counted once >=15% of original training compute (Chinchilla loss-noise bound 14.4%)";
constexpr const char* kReuseLowered = "model reuse rule: distillation/kickstarting/reincarnation save up to ~10x; threshold 1e25 (US) / 1e24 (EU) for reused models";
constexpr const char* kReuseTeacher = "model reuse rule: derived model covered whenever its teacher, incognito or not, is covered";
constexpr const char* kExpansionModerate = "model expansion rule: 20-76% compute savings; threshold 5e25 (US) / 5e24 (EU) for expanded models";
constexpr const char* kExpansionConservative = "model expansion rule, conservative 76% savings: threshold 2e25 (US) / 2e24 (EU) for expanded models";
constexpr const char* kInference = "inference rule: per-request inference above compute-optimal converted to training-equivalent OOM";
} // namespace cite

namespace {

Ruleset eo_literal() {
    Ruleset r;
    r.id = "eo14110-literal";
    r.jurisdiction = Jurisdiction::UsFederal;
    r.threshold = ComputeAmount::parse("1e26");
    r.counting.count_finetune = {FinetuneCounting::Never, 0.15};
    r.counting.count_synthetic_data = false;
    r.counting.count_expansion = false;
    r.ambiguity = {true, true};
    r.citations = {cite::kEoThreshold, cite::kEoReporting};
    r.description = "Executive Order 14110 as written; fine-tune and growth compute unaddressed";
    return r;
}

Ruleset eu_literal() {
    Ruleset r;
    r.id = "eu-aiact-literal";
    r.jurisdiction = Jurisdiction::Eu;
    r.threshold = ComputeAmount::parse("1e25");
    r.counting.count_finetune = {FinetuneCounting::Always, 0.15};
    r.counting.count_synthetic_data = true;
    r.counting.count_expansion = true;
    r.notification_rule = NotificationRule{14};
    r.citations = {cite::kAiActThreshold, cite::kAiActRecital, cite::kAiActNotify};
    r.description = "AI Act Art. 51(2) cumulative training compute presumption";
    return r;
}

double divisor_to(const ComputeAmount& base, const char* lowered) {
    return std::pow(10.0, base.log10() - ComputeAmount::parse(lowered).log10());
}

Ruleset with_reuse(Ruleset r, const std::string& id, ReuseMode mode, const char* lowered) {
    r.id = id;
    r.counting.reuse_adjustment = {mode, divisor_to(r.threshold, lowered)};
    r.teacher_propagation = true;
    r.citations.push_back(cite::kReuseLowered);
    r.citations.push_back(cite::kReuseTeacher);
    r.description += "; reuse patch (teacher propagation, ~10x savings)";
    return r;
}

Ruleset with_expansion(Ruleset r, const std::string& id, bool inflate, const char* lowered, double savings,
                       bool conservative) {
    r.id = id;
    r.counting.count_expansion = true;
    r.ambiguity.expansion = false;
    if (inflate) {
        r.counting.expansion_adjustment = {ExpansionMode::InflateByMaxSavings, savings};
    } else {
        r.counting.expansion_adjustment = {ExpansionMode::LowerThreshold, divisor_to(r.threshold, lowered)};
    }
    r.citations.push_back(conservative ? cite::kExpansionConservative : cite::kExpansionModerate);
    r.description += conservative ? "; conservative expansion patch" : "; moderate expansion patch";
    return r;
}

Ruleset with_inference(Ruleset r, const std::string& id) {
    r.id = id;
    r.counting.inference_adjustment = true;
    r.citations.push_back(cite::kInference);
    r.description += "; inference patch";
    return r;
}

Ruleset sb1047() {
    Ruleset r;
    r.id = "sb1047-vetoed";
    r.jurisdiction = Jurisdiction::CaState;
    r.engine = RuleEngine::Sb1047;
    r.threshold = ComputeAmount::parse("1e26");
    r.cost_threshold = MoneyAmount(100'000'000.0);
    r.sb1047 = Sb1047Limbs{};
    r.counting.count_finetune = {FinetuneCounting::Always, 0.15};
    r.citations = {cite::kSbCovered, cite::kSbFinetune, cite::kSbDerivative};
    r.description = "California SB 1047 (vetoed) covered model / derivative classification";
    return r;
}

} // namespace

std::vector<Ruleset> builtin_rulesets() {
    std::vector<Ruleset> out;
    const Ruleset eo = eo_literal();
    const Ruleset eu = eu_literal();
    out.push_back(eo);

    Ruleset ft15 = eo;
    ft15.id = "eo14110-ft15";
    ft15.counting.count_finetune = {FinetuneCounting::IfAggregateAtLeastFraction, 0.15};
    ft15.ambiguity.finetune = false;
    ft15.citations.push_back(cite::kFinetune15);
    ft15.description = "Executive Order 14110 with fine-tuning counted at >=15% of original training compute";
    out.push_back(ft15);

    out.push_back(eu);

    out.push_back(with_reuse(eo, "us-reuse-patch", ReuseMode::LowerThreshold, "1e25"));
    out.push_back(with_reuse(eo, "us-reuse-patch-inflate", ReuseMode::MultiplyStudentCompute, "1e25"));
    out.push_back(with_reuse(eu, "eu-reuse-patch", ReuseMode::LowerThreshold, "1e24"));
    out.push_back(with_reuse(eu, "eu-reuse-patch-inflate", ReuseMode::MultiplyStudentCompute, "1e24"));

    out.push_back(with_expansion(eo, "us-expansion-moderate", false, "5e25", 0.5, false));
    out.push_back(with_expansion(eo, "us-expansion-moderate-inflate", true, "5e25", 0.5, false));
    out.push_back(with_expansion(eo, "us-expansion-conservative", false, "2e25", 0.8, true));
    out.push_back(with_expansion(eo, "us-expansion-conservative-inflate", true, "2e25", 0.8, true));
    out.push_back(with_expansion(eu, "eu-expansion-moderate", false, "5e24", 0.5, false));
    out.push_back(with_expansion(eu, "eu-expansion-moderate-inflate", true, "5e24", 0.5, false));
    out.push_back(with_expansion(eu, "eu-expansion-conservative", false, "2e24", 0.8, true));
    out.push_back(with_expansion(eu, "eu-expansion-conservative-inflate", true, "2e24", 0.8, true));

    out.push_back(with_inference(eo, "us-inference-patch"));
    out.push_back(with_inference(eu, "eu-inference-patch"));

    out.push_back(sb1047());

    Ruleset us_all = with_inference(
        with_expansion(with_reuse(ft15, "us-recommended", ReuseMode::LowerThreshold, "1e25"), "us-recommended",
                       false, "5e25", 0.5, false),
        "us-recommended");
    us_all.ambiguity = {};
    us_all.description = "Executive Order 14110 with all recommended patches (15% fine-tune, reuse, expansion, inference)";
    out.push_back(us_all);

    Ruleset eu_all = with_inference(
        with_expansion(with_reuse(eu, "eu-recommended", ReuseMode::LowerThreshold, "1e24"), "eu-recommended", false,
                       "5e24", 0.5, false),
        "eu-recommended");
    eu_all.description = "AI Act with all recommended patches (reuse, expansion, inference)";
    out.push_back(eu_all);

    std::sort(out.begin(), out.end(), [](const Ruleset& a, const Ruleset& b) { return a.id < b.id; });
    return out;
}

const Registry& builtin_registry() {
    static const Registry registry(builtin_rulesets());
    return registry;
}

// ── Evaluation ─────────────────────────────────────────────────────────────

namespace {

struct Decision {
    CoverageStatus status = CoverageStatus::NotCovered;
    bool own = false;
    std::string covering_teacher;
    ComputeBreakdown breakdown;
    ComputeAmount applied_threshold;
    std::optional<ComputeBreakdown> probe;
};

// Structural facts are cached per model; statuses are memoized per
// evaluation and dropped by reset() once numbers in the lineage change.
class Evaluator {
public:
    Evaluator(const Lineage& lineage, const Ruleset& rs, const ScalingConfig& cfg)
        : lineage_(lineage), rs_(rs), cfg_(cfg) {}

    void reset() { memo_.clear(); }

    Decision decide(std::string_view id, bool itemize, std::size_t depth = 0) {
        if (depth > lineage_.nodes().size()) {
            throw Error(ErrorCode::RecursionDepthExceeded, "teacher recursion too deep", std::string(id));
        }
        const Node& n = node(id);
        Decision d;
        AccountingOptions opts;
        opts.itemize = itemize;
        d.breakdown = effective_compute(n.paths, rs_.counting, cfg_, opts);
        d.applied_threshold = rs_.threshold.scaled_ooms(-std::log10(d.breakdown.threshold_divisor()));
        d.own = d.breakdown.effective.exceeds(d.applied_threshold);
        if (d.own) {
            d.status = CoverageStatus::Covered;
            return d;
        }
        if (rs_.teacher_propagation) {
            for (const auto t : n.teachers) {
                if (status_of(t, depth + 1) == CoverageStatus::Covered) {
                    d.status = CoverageStatus::Covered;
                    d.covering_teacher = std::string(t);
                    return d;
                }
            }
        }
        const bool probe_ft = rs_.ambiguity.finetune && !d.breakdown.finetune_counted &&
                              !d.breakdown.finetune_total.is_zero();
        const bool probe_exp = rs_.ambiguity.expansion && !d.breakdown.expansion_counted &&
                               !d.breakdown.expansion.is_zero();
        if (probe_ft || probe_exp) {
            CountingPolicy wider = rs_.counting;
            if (probe_ft) wider.count_finetune.mode = FinetuneCounting::Always;
            if (probe_exp) wider.count_expansion = true;
            AccountingOptions probe_opts;
            probe_opts.itemize = false;
            auto probe = effective_compute(n.paths, wider, cfg_, probe_opts);
            const auto probe_threshold = rs_.threshold.scaled_ooms(-std::log10(probe.threshold_divisor()));
            if (probe.effective.exceeds(probe_threshold)) {
                d.status = CoverageStatus::Ambiguous;
                d.probe = std::move(probe);
            }
        }
        return d;
    }

private:
    struct Node {
        LineagePaths paths;
        std::vector<std::string_view> teachers;  // distinct, sorted; current (non-planned) reuse only
    };

    const Node& node(std::string_view id) {
        if (auto it = nodes_.find(id); it != nodes_.end()) return it->second;
        Node n;
        n.paths = lineage_paths(lineage_, id);
        for (const DerivationEvent* e : n.paths.reuse) {
            if (e->planned) continue;
            for (const auto& p : e->parent_ids) n.teachers.push_back(p);
        }
        std::sort(n.teachers.begin(), n.teachers.end());
        n.teachers.erase(std::unique(n.teachers.begin(), n.teachers.end()), n.teachers.end());
        const std::string_view key = n.paths.node->id;  // owned by the lineage
        return nodes_.emplace(key, std::move(n)).first->second;
    }

    CoverageStatus status_of(std::string_view id, std::size_t depth) {
        if (auto it = memo_.find(id); it != memo_.end()) return it->second;
        const CoverageStatus s = decide(id, false, depth).status;
        memo_.emplace(node(id).paths.node->id, s);
        return s;
    }

    const Lineage& lineage_;
    const Ruleset& rs_;
    const ScalingConfig& cfg_;
    std::map<std::string_view, Node> nodes_;
    std::map<std::string_view, CoverageStatus> memo_;
};

bool has_planned(const Lineage& lineage) {
    return std::any_of(lineage.events().begin(), lineage.events().end(),
                       [](const DerivationEvent& e) { return e.planned; });
}

std::string covered_obligation(Jurisdiction j) {
    switch (j) {
        case Jurisdiction::UsFederal: return "report-to-commerce";
        case Jurisdiction::Eu:        return "notify-commission";
        case Jurisdiction::CaState:   return "sb1047-developer-duties";
    }
    return "report";
}

std::optional<int> window(const Ruleset& rs) {
    if (rs.notification_rule) return rs.notification_rule->window_days;
    return std::nullopt;
}

} // namespace

struct StatusProbe::Impl {
    Impl(const Lineage& l, std::string_view i, const Ruleset& r, const ScalingConfig& c)
        : lineage(l), id(i), rs(r), evaluator(l, r, c) {}
    const Lineage& lineage;
    std::string id;
    const Ruleset& rs;
    Evaluator evaluator;
};

StatusProbe::StatusProbe(const Lineage& lineage, std::string_view id, const Ruleset& ruleset,
                         const ScalingConfig& cfg)
    : impl_(std::make_unique<Impl>(lineage, id, ruleset, cfg)) {
    if (!lineage.contains(id)) {
        throw Error(ErrorCode::UnknownId, "unknown model '" + std::string(id) + "'", std::string(id));
    }
}

StatusProbe::~StatusProbe() = default;

CoverageStatus StatusProbe::status() {
    if (impl_->rs.engine == RuleEngine::Sb1047) {
        return sb1047_classification(impl_->lineage, impl_->id, impl_->rs).category == Sb1047Category::Neither
                   ? CoverageStatus::NotCovered
                   : CoverageStatus::Covered;
    }
    impl_->evaluator.reset();
    return impl_->evaluator.decide(impl_->id, false).status;
}

CoverageStatus evaluate_status(const Lineage& lineage, std::string_view id, const Ruleset& rs,
                               const ScalingConfig& cfg) {
    return StatusProbe(lineage, id, rs, cfg).status();
}

Verdict evaluate(const Lineage& lineage, std::string_view id, const Ruleset& rs, const ScalingConfig& cfg) {
    if (!lineage.contains(id)) {
        throw Error(ErrorCode::UnknownId, "unknown model '" + std::string(id) + "'", std::string(id));
    }
    if (rs.engine == RuleEngine::Sb1047) return sb1047_classify(lineage, id, rs);

    Evaluator ev(lineage, rs, cfg);
    Decision d = ev.decide(id, true);

    Verdict v;
    v.ruleset_id = rs.id;
    v.status = d.status;
    v.breakdown = std::move(d.breakdown);
    v.citations = rs.citations;
    auto& notes = v.breakdown.notes;

    if (v.breakdown.threshold_divisor() != 1.0) {
        notes.push_back("threshold lowered to " + d.applied_threshold.to_string());
    }
    if (d.status == CoverageStatus::Covered) {
        if (d.own) {
            v.triggered_rules.push_back(rs.id + ":threshold");
        } else {
            v.triggered_rules.push_back(rs.id + ":teacher-propagation");
            notes.push_back("covered through teacher '" + d.covering_teacher + "'");
        }
        const auto& b = v.breakdown;
        if (b.finetune_counted && rs.counting.count_finetune.mode == FinetuneCounting::IfAggregateAtLeastFraction) {
            v.triggered_rules.push_back(rs.id + ":finetune-aggregate");
        }
        if (b.reuse_encoding != AdjustmentEncoding::None && b.reuse_factor != 1.0) {
            v.triggered_rules.push_back(rs.id + ":reuse-adjustment");
        }
        if (b.expansion_encoding != AdjustmentEncoding::None && b.expansion_factor != 1.0) {
            v.triggered_rules.push_back(rs.id + ":expansion-adjustment");
        }
        if (b.inference_equivalent_ooms.ooms() > 0.0) {
            v.triggered_rules.push_back(rs.id + ":inference-adjustment");
        }
        v.obligations.push_back({covered_obligation(rs.jurisdiction), window(rs)});
        if (rs.counting.count_finetune.mode == FinetuneCounting::IfAggregateAtLeastFraction && b.finetune_counted) {
            v.obligations.push_back({"report-finetune-crossing", window(rs)});
        }
    } else if (d.status == CoverageStatus::Ambiguous) {
        notes.push_back("source text silent on uncounted compute; counting it gives " +
                        d.probe->effective.to_string() + " > " + d.applied_threshold.to_string());
    }

    if (d.status != CoverageStatus::Covered && has_planned(lineage)) {
        AccountingOptions opts;
        opts.include_planned = true;
        opts.itemize = false;
        const auto planned = effective_compute(lineage, id, rs.counting, cfg, opts);
        const auto t = rs.threshold.scaled_ooms(-std::log10(planned.threshold_divisor()));
        if (planned.effective.exceeds(t)) {
            notes.push_back("planned events bring effective compute to " + planned.effective.to_string() +
                            ", above the threshold");
            v.obligations.push_back({rs.jurisdiction == Jurisdiction::Eu ? "notify-commission-anticipated"
                                                                         : "anticipated-coverage",
                                     window(rs)});
        }
    }
    return v;
}

VerdictMap evaluate_all(const Lineage& lineage, std::string_view id, const Registry& registry,
                        const ScalingConfig& cfg) {
    if (!lineage.contains(id)) {
        throw Error(ErrorCode::UnknownId, "unknown model '" + std::string(id) + "'", std::string(id));
    }
    VerdictMap out;
    for (const auto& rs : registry.all()) out.emplace(rs.id, evaluate(lineage, id, rs, cfg));
    return out;
}

} // namespace ctl
