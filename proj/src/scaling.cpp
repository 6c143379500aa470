#include "ctl/scaling.hpp"

#include "ctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace ctl {

namespace {

void require(bool ok, const char* field, const std::string& msg) {
    if (!ok) throw Error(ErrorCode::DomainError, std::string(field) + ": " + msg, field);
}

void check_anchors(const std::vector<Anchor>& anchors, const char* field) {
    require(!anchors.empty(), field, "at least one anchor required");
    require(anchors.front().excess_ooms == 0.0 && anchors.front().training_equivalent_ooms == 0.0,
            field, "first anchor must be (0, 0)");
    for (std::size_t i = 1; i < anchors.size(); ++i) {
        require(std::isfinite(anchors[i].excess_ooms) && std::isfinite(anchors[i].training_equivalent_ooms),
                field, "anchors must be finite");
        require(anchors[i].excess_ooms > anchors[i - 1].excess_ooms &&
                    anchors[i].training_equivalent_ooms > anchors[i - 1].training_equivalent_ooms,
                field, "anchors must be strictly increasing in both coordinates");
    }
}

double interpolate(const std::vector<Anchor>& anchors, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= anchors.back().excess_ooms) return anchors.back().training_equivalent_ooms;
    auto hi = std::upper_bound(anchors.begin(), anchors.end(), x,
                               [](double v, const Anchor& a) { return v < a.excess_ooms; });
    auto lo = hi - 1;
    const double t = (x - lo->excess_ooms) / (hi->excess_ooms - lo->excess_ooms);
    return lo->training_equivalent_ooms + t * (hi->training_equivalent_ooms - lo->training_equivalent_ooms);
}

} // namespace

ScalingConfig sampling_anchor_preset() {
    ScalingConfig cfg;
    const double five_x = std::log10(5.0);
    cfg.general_anchors = {{0.0, 0.0}, {1.0, five_x}};
    cfg.mathcoding_anchors = {{0.0, 0.0}, {1.0, five_x}, {3.0, 2.0}};
    return cfg;
}

void validate(const ScalingConfig& cfg) {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    require(positive(cfg.loss_compute_exponent), "loss_compute_exponent", "must be > 0");
    require(positive(cfg.loss_noise_std), "loss_noise_std", "must be > 0");
    require(positive(cfg.confidence_loss_ratio) && cfg.confidence_loss_ratio <= 1.0,
            "confidence_loss_ratio", "must be in (0, 1]");
    require(positive(cfg.inference_optimal_coefficient), "inference_optimal_coefficient", "must be > 0");
    check_anchors(cfg.general_anchors, "general_anchors");
    check_anchors(cfg.mathcoding_anchors, "mathcoding_anchors");

    // Both curves are piecewise linear, so comparing at every breakpoint of
    // either table (and past the last one) covers the whole half-line.
    std::set<double> xs;
    for (const auto& a : cfg.general_anchors) xs.insert(a.excess_ooms);
    for (const auto& a : cfg.mathcoding_anchors) xs.insert(a.excess_ooms);
    xs.insert(*xs.rbegin() + 1.0);
    for (double x : xs) {
        require(interpolate(cfg.mathcoding_anchors, x) + 1e-12 >= interpolate(cfg.general_anchors, x),
                "mathcoding_anchors", "math/coding curve must dominate the general curve");
    }
}

double compute_multiplier_for_loss_ratio(double loss_ratio, const ScalingConfig& cfg) {
    if (!(loss_ratio > 0.0 && loss_ratio <= 1.0)) {
        throw Error(ErrorCode::DomainError, "loss ratio must be in (0, 1]", "loss_ratio");
    }
    return std::pow(loss_ratio, -1.0 / cfg.loss_compute_exponent);
}

double loss_ratio_for_multiplier(double multiplier, const ScalingConfig& cfg) {
    if (!(multiplier >= 1.0) || !std::isfinite(multiplier)) {
        throw Error(ErrorCode::DomainError, "compute multiplier must be >= 1", "multiplier");
    }
    return std::pow(multiplier, -cfg.loss_compute_exponent);
}

double min_detectable_finetune_fraction(const ScalingConfig& cfg) {
    validate(cfg);
    return compute_multiplier_for_loss_ratio(cfg.confidence_loss_ratio, cfg) - 1.0;
}

ComputeAmount compute_optimal_inference(const ComputeAmount& training, const ScalingConfig& cfg) {
    if (training.is_zero()) {
        throw Error(ErrorCode::DomainError, "training compute must be > 0", "training");
    }
    return ComputeAmount::from_log10(std::log10(cfg.inference_optimal_coefficient) + 0.5 * training.log10());
}

OomValue excess_inference_ooms(const ComputeAmount& actual, const ComputeAmount& optimal) {
    if (actual.is_zero() || optimal.is_zero()) {
        throw Error(ErrorCode::DomainError, "inference compute must be > 0");
    }
    return OomValue(std::max(0.0, actual.log10() - optimal.log10()));
}

OomValue training_equivalent_ooms(const OomValue& excess, CapabilityDomain domain,
                                  const ScalingConfig& cfg) {
    const auto& table = domain == CapabilityDomain::MathCoding ? cfg.mathcoding_anchors : cfg.general_anchors;
    return OomValue(interpolate(table, excess.ooms()));
}

ComputeAmount inference_adjusted_compute(const ComputeAmount& training,
                                         const std::optional<InferenceProfile>& profile,
                                         const ScalingConfig& cfg) {
    if (training.is_zero()) {
        throw Error(ErrorCode::DomainError, "training compute must be > 0", "training");
    }
    if (!profile) return training;
    const auto excess = excess_inference_ooms(profile->per_request_compute,
                                              compute_optimal_inference(training, cfg));
    return training.scaled_ooms(training_equivalent_ooms(excess, profile->capability_domain, cfg).ooms());
}

} // namespace ctl
