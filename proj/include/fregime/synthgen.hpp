#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fregime/hmm.hpp"
#include "fregime/panel.hpp"

namespace fregime::synthgen {

/// Adds coefficient * x_source[t - lag] to x_target[t] on days whose true
/// regime equals `regime` (any regime when regime < 0).
struct CrossLag {
    int source = 0;
    int target = 1;
    int regime = -1;
    int lag = 1;
    double coefficient = 0.0;
};

struct SyntheticSpec {
    hmm::HmmParams hmm;
    Eigen::Index T = 0;
    std::optional<CrossLag> cross_lag;
    std::uint64_t seed = 0;
    std::vector<std::string> factor_names;  // defaults: six factor names for d = 6, else F0..F{d-1}
    Date start = Date{std::chrono::year{2000}, std::chrono::January, std::chrono::day{3}};
};

struct SyntheticPanel {
    FactorPanel panel;
    std::vector<int> labels;
};

/// Simulates the chain and the scale-mixture Student-t (or Gaussian)
/// emissions on consecutive weekdays. Deterministic in `seed`.
SyntheticPanel generate(const SyntheticSpec& spec);

/// Three regimes with volatility-norm ratios about 1 : 1.8 : 4, nu of
/// 12 / 7 / 4 and persistent transitions, in six dimensions.
hmm::HmmParams table_like_params();

/// Best agreement fraction over all relabelings of `estimated` (K <= 8).
double label_accuracy(const std::vector<int>& estimated, const std::vector<int>& truth, int n_states);

}  // namespace fregime::synthgen
