#pragma once

// The shipped synthetic benchmark: 96 channels, 5 of which raise their rate
// during each of four "wrist_up" cues separated by rest.

#include "lpsvm/data.hpp"
#include "lpsvm/sparse.hpp"

#include <string>
#include <vector>

namespace lpsvm::benchmark {

inline constexpr const char* kMovement = "wrist_up";
inline constexpr std::size_t kCueLength = 50;
inline constexpr std::size_t kRestLength = 50;
inline constexpr std::size_t kCues = 4;

inline CueSchedule schedule() {
    std::vector<CueInterval> intervals;
    std::size_t t = 0;
    const auto add = [&](std::size_t len, const char* tag) {
        intervals.push_back({t, t + len, tag});
        t += len;
    };
    add(kRestLength, kRestTag);
    for (std::size_t c = 0; c < kCues; ++c) {
        add(kCueLength, kMovement);
        add(kRestLength, kRestTag);
    }
    return CueSchedule(std::move(intervals));
}

inline SyntheticSpec spec() {
    SyntheticSpec s;
    s.channels = 96;
    s.active_channels = {7, 23, 41, 58, 80};
    s.baseline_rate = 10.0;
    s.active_rate = 18.0;
    s.noise_scale = 3.0;
    s.schedule = schedule();
    s.seed = 1;
    s.target = kMovement;
    return s;
}

/// Default sparse configuration for the benchmark. The benchmark is always
/// z-scored before solving: raw rates share a large positive mean, which lets
/// any channel stand in for the offset.
inline SolverConfig solver_config() {
    SolverConfig c;
    c.beta = 2.0;
    c.p = 0.2;
    c.epsilon = 1e-3;
    c.alpha = 1.0;
    return c;
}

struct Instance {
    Dataset raw;
    Dataset standardized;
    Standardizer standardizer;
    std::vector<std::size_t> ground_truth;
};

inline Instance load() {
    auto gen = generate_synthetic(spec());
    auto z = Standardizer::fit(gen.dataset);
    auto standardized = z.apply(gen.dataset);
    return {std::move(gen.dataset), std::move(standardized), std::move(z), std::move(gen.ground_truth)};
}

} // namespace lpsvm::benchmark
