#pragma once

#include "ctl/compute.hpp"
#include "ctl/lineage.hpp"

#include <optional>
#include <vector>

namespace ctl {

/// One point of the excess-inference -> training-equivalent curve, both in OOM.
struct Anchor {
    double excess_ooms = 0.0;
    double training_equivalent_ooms = 0.0;

    friend bool operator==(const Anchor&, const Anchor&) = default;
};

/**
 * Constants for the loss/compute and inference/training relations.
 *
 * Anchor tables are interpolated linearly and held flat after the last
 * anchor. The defaults sit at the midpoints of the published ranges: 2-3 OOM
 * of excess inference buys about 2 OOM of training (all domains) and 5-6 OOM
 * buys 3-4 OOM for math and coding.
 */
struct ScalingConfig {
    double loss_compute_exponent = 0.15;
    double loss_noise_std = 0.01;
    double confidence_loss_ratio = 0.98;       // ~2 sigma of loss noise
    double inference_optimal_coefficient = 0.1;  // 1e24 FLOP -> 1e11 per request
    std::vector<Anchor> general_anchors{{0.0, 0.0}, {2.5, 2.0}};
    std::vector<Anchor> mathcoding_anchors{{0.0, 0.0}, {2.5, 2.0}, {5.5, 3.5}};

    friend bool operator==(const ScalingConfig&, const ScalingConfig&) = default;
};

/// Alternative anchors from best-of-n sampling results: 10x samples ~ 5x
/// training, and for code 1000x inference ~ 100x training.
ScalingConfig sampling_anchor_preset();

/// Throws DomainError naming the offending field.
void validate(const ScalingConfig& cfg);

/// r^(-1/exponent): training compute multiplier needed to reach loss ratio r.
double compute_multiplier_for_loss_ratio(double loss_ratio, const ScalingConfig& cfg);
/// m^(-exponent): inverse of compute_multiplier_for_loss_ratio.
double loss_ratio_for_multiplier(double multiplier, const ScalingConfig& cfg);
/// Smallest fine-tune fraction of training compute whose loss gain is
/// distinguishable from noise.
double min_detectable_finetune_fraction(const ScalingConfig& cfg);

ComputeAmount compute_optimal_inference(const ComputeAmount& training, const ScalingConfig& cfg);
OomValue excess_inference_ooms(const ComputeAmount& actual, const ComputeAmount& optimal);
OomValue training_equivalent_ooms(const OomValue& excess, CapabilityDomain domain,
                                  const ScalingConfig& cfg);
ComputeAmount inference_adjusted_compute(const ComputeAmount& training,
                                         const std::optional<InferenceProfile>& profile,
                                         const ScalingConfig& cfg);

} // namespace ctl
