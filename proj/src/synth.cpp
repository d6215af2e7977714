#include "tmplgraph/synth.hpp"

#include "tmplgraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace tmplgraph {

namespace {

/// Library-independent draws on top of mt19937_64.
class Draws {
public:
    explicit Draws(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

    double sign() { return (gen_() >> 63) ? 1.0 : -1.0; }

    /// Box-Muller, one value per call.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace

void SynthSpec::validate() const {
    if (num_rois < 2 || groups < 1 || subjects_per_group < 1) {
        throw InvalidSpec("need at least 2 ROIs, 1 group and 1 subject per group");
    }
    if (!(support_density > 0.0 && support_density <= 1.0)) {
        throw InvalidSpec("support density must lie in (0, 1]");
    }
    if (!(std::isfinite(effect_size) && effect_size >= 0.0) || !(std::isfinite(noise_sigma) && noise_sigma >= 0.0)) {
        throw InvalidSpec("effect size and noise sigma must be finite and nonnegative");
    }
    if ((groups - 1) * effect_size > 2.0) {
        throw InvalidSpec("(groups - 1) * effect exceeds 2; planted templates would leave [-1, 1]");
    }
}

SynthResult synth_generate(const SynthSpec& spec) {
    spec.validate();
    Draws draws(spec.seed);
    const int m = spec.num_rois;
    const int groups = spec.groups;

    SynthResult out;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            if (draws.uniform() < spec.support_density) {
                out.base_support.emplace_back(i, j);
            }
        }
    }
    if (out.base_support.empty()) {
        const int i = static_cast<int>(draws.index(static_cast<std::size_t>(m - 1)));
        out.base_support.emplace_back(i, i + 1);
    }

    Matrix base = Matrix::Identity(m, m);
    for (const auto& [i, j] : out.base_support) {
        base(i, j) = base(j, i) = draws.sign() * draws.uniform(0.2, 0.5);
    }

    std::vector<Edge> shuffled = out.base_support;
    for (std::size_t k = shuffled.size(); k > 1; --k) {
        std::swap(shuffled[k - 1], shuffled[draws.index(k)]);
    }
    shuffled.resize((shuffled.size() + 1) / 2);
    std::sort(shuffled.begin(), shuffled.end());
    out.differentiated_support = shuffled;

    const double half_span = 0.5 * (groups - 1) * spec.effect_size;
    const double max_base = 1.0 - half_span;
    out.planted_templates.assign(static_cast<std::size_t>(groups), base);
    for (const auto& [i, j] : out.differentiated_support) {
        const double b = std::clamp(base(i, j), -max_base, max_base);
        const double s = draws.sign();
        for (int c = 0; c < groups; ++c) {
            const double v = b + s * spec.effect_size * (c - 0.5 * (groups - 1));
            Matrix& t = out.planted_templates[static_cast<std::size_t>(c)];
            t(i, j) = t(j, i) = v;
        }
    }

    std::vector<Subject> subjects;
    for (int c = 0; c < groups; ++c) {
        const Matrix& t = out.planted_templates[static_cast<std::size_t>(c)];
        for (int n = 0; n < spec.subjects_per_group; ++n) {
            Matrix w = t;
            if (spec.noise_sigma > 0.0) {
                for (int i = 0; i < m; ++i) {
                    for (int j = i + 1; j < m; ++j) {
                        const double v = std::clamp(t(i, j) + spec.noise_sigma * draws.normal(), -1.0, 1.0);
                        w(i, j) = w(j, i) = v;
                    }
                }
            }
            char id[32];
            std::snprintf(id, sizeof id, "g%d_s%03d", c, n);
            subjects.push_back({id, ConnectivityMatrix(std::move(w)), c});
        }
    }
    out.data = LabeledDataset(std::move(subjects), groups);
    return out;
}

}  // namespace tmplgraph
