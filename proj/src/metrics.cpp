#include "xlwm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "xlwm/error.hpp"

namespace xlwm {

namespace {

void require_nonempty(const ScoreSet& scores) {
    if (scores.positives.empty() || scores.negatives.empty()) {
        throw Error("empty-scores", "both positive and negative scores are required");
    }
}

}  // namespace

double auc(const ScoreSet& scores) {
    require_nonempty(scores);
    std::uint64_t wins = 0, ties = 0;
    for (double p : scores.positives) {
        for (double n : scores.negatives) {
            if (p > n) {
                ++wins;
            } else if (p == n) {
                ++ties;
            }
        }
    }
    const double pairs2 = 2.0 * static_cast<double>(scores.positives.size()) *
                          static_cast<double>(scores.negatives.size());
    return static_cast<double>(2 * wins + ties) / pairs2;
}

double tpr_at_fpr(const ScoreSet& scores, double fpr) {
    require_nonempty(scores);
    if (!(fpr >= 0.0 && fpr < 1.0)) {
        throw Error("bad-fpr", "fpr must be in [0,1)");
    }
    const auto k = std::min(scores.negatives.size() - 1,
                            static_cast<std::size_t>(std::floor(
                                fpr * static_cast<double>(scores.negatives.size()))));
    std::vector<double> negatives = scores.negatives;
    std::sort(negatives.begin(), negatives.end(), std::greater<>());
    const double threshold = negatives[k];  // (k+1)-th largest

    std::size_t hits = 0;
    for (double p : scores.positives) {
        if (p > threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(scores.positives.size());
}

std::vector<std::pair<double, double>> roc_points(const ScoreSet& scores) {
    require_nonempty(scores);
    // (score, is_positive) descending by score; at equal scores step both
    // counts before emitting, so ties produce a diagonal segment.
    std::vector<std::pair<double, bool>> all;
    all.reserve(scores.positives.size() + scores.negatives.size());
    for (double p : scores.positives) all.emplace_back(p, true);
    for (double n : scores.negatives) all.emplace_back(n, false);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second && !b.second;
    });

    const double np = static_cast<double>(scores.positives.size());
    const double nn = static_cast<double>(scores.negatives.size());
    std::vector<std::pair<double, double>> points;
    points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < all.size()) {
        const double score = all[i].first;
        while (i < all.size() && all[i].first == score) {
            if (all[i].second) {
                ++tp;
            } else {
                ++fp;
            }
            ++i;
        }
        points.emplace_back(static_cast<double>(fp) / nn, static_cast<double>(tp) / np);
    }
    return points;
}

}  // namespace xlwm
