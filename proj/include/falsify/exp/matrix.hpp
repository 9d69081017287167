#pragma once

#include <algorithm>
#include <vector>

#include "falsify/exp/config.hpp"

namespace falsify {

// Optional axis filters for the experiment matrix; empty means "all".
struct MatrixFilter {
    std::vector<Scenario> scenarios;
    std::vector<ScannerSetting> scanners;
    std::vector<Algorithm> algorithms;
};

namespace detail {

template <typename T>
std::vector<T> dedup_or_all(std::vector<T> v, std::initializer_list<T> all) {
    if (v.empty()) return all;
    std::vector<T> out;
    for (const T& x : v) {
        if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
    }
    return out;
}

}  // namespace detail

// Full 3 x 3 x 3 configuration matrix in deterministic order; the defaults
// argument supplies everything except the three varied axes.
inline std::vector<ExperimentConfig> build_matrix(const ExperimentConfig& defaults,
                                                  const MatrixFilter& filter = {}) {
    auto scenarios = detail::dedup_or_all(filter.scenarios,
        {Scenario::Crossing, Scenario::HeadOn, Scenario::Overtaking});
    auto scanners = detail::dedup_or_all(filter.scanners,
        {ScannerSetting::None, ScannerSetting::R1_25, ScannerSetting::R2_0});
    auto algorithms = detail::dedup_or_all(filter.algorithms,
        {Algorithm::RL_acc, Algorithm::RL_max, Algorithm::RS});

    std::vector<ExperimentConfig> out;
    for (Scenario sc : scenarios) {
        for (ScannerSetting st : scanners) {
            for (Algorithm al : algorithms) {
                ExperimentConfig c = defaults;
                c.scenario = sc;
                c.scanner = st;
                c.algorithm = al;
                out.push_back(c);
            }
        }
    }
    return out;
}

}  // namespace falsify
