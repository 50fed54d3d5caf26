#pragma once

#include <utility>
#include <vector>

namespace xlwm {

struct ScoreSet {
    std::vector<double> positives;  // watermarked detection scores
    std::vector<double> negatives;  // non-watermarked detection scores
};

// Exact pairwise AUC: (sum over (p,n) of [p>n] + 0.5*[p==n]) / (|P|*|N|).
double auc(const ScoreSet& scores);

// k = floor(fpr*|N|); threshold = (k+1)-th largest negative; TPR = fraction of
// positives strictly greater than the threshold, which guarantees at most k
// false positives on the negative sample itself.
double tpr_at_fpr(const ScoreSet& scores, double fpr);

// ROC step points (fpr, tpr), threshold swept from +inf down through every
// distinct score; starts at (0,0) and ends at (1,1).
std::vector<std::pair<double, double>> roc_points(const ScoreSet& scores);

}  // namespace xlwm
