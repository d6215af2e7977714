/**
 * @file synth.hpp
 * @brief Planted-template generator for desk-scale verification.
 *
 * A random sparse base pattern B is shared by all groups. Half of its support
 * (rounded up) is "differentiated": on those edges group c gets
 * B(e) + s_e * effect * (c - (C-1)/2) with a random per-edge sign s_e, so any two
 * group templates differ there by at least `effect`. Subjects are their group
 * template plus symmetric Gaussian noise, clipped to [-1, 1], unit diagonal.
 */
#pragma once

#include "tmplgraph/dataset.hpp"
#include "tmplgraph/templates.hpp"

#include <cstdint>
#include <vector>

namespace tmplgraph {

struct SynthSpec {
    int num_rois = 16;
    int groups = 2;
    int subjects_per_group = 10;
    double support_density = 0.2;
    double effect_size = 0.6;
    double noise_sigma = 0.1;
    std::uint64_t seed = 0;

    /// Throws InvalidSpec.
    void validate() const;
};

struct SynthResult {
    LabeledDataset data;
    std::vector<Matrix> planted_templates;
    std::vector<Edge> base_support;            ///< nonzero base entries, i<j
    std::vector<Edge> differentiated_support;  ///< subset of base_support, i<j
};

SynthResult synth_generate(const SynthSpec& spec);

}  // namespace tmplgraph
