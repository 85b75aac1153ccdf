#include "vessel/error.hpp"
#include "vessel/imageio.hpp"

#include <array>
#include <cmath>

namespace vessel {

namespace {

constexpr int kBins = 256;

int bin_of(double v, double lo, double span) {
    const int b = static_cast<int>(std::floor((v - lo) / span * kBins));
    return b < 0 ? 0 : (b >= kBins ? kBins - 1 : b);
}

}  // namespace

OtsuLevel otsu_level(const SoftSegmentation& seg) {
    if (seg.size() == 0) throw InvalidArgument("empty segmentation", "seg");
    if (!seg.allFinite()) throw InvalidArgument("non-finite values", "seg");
    const double lo = seg.minCoeff();
    const double hi = seg.maxCoeff();
    if (!(hi > lo)) throw DegenerateInput("degenerate histogram: all values identical");
    const double span = hi - lo;

    std::array<double, kBins> hist{};
    for (Eigen::Index i = 0; i < seg.size(); ++i) hist[bin_of(seg.data()[i], lo, span)] += 1.0;

    const double total = static_cast<double>(seg.size());
    double sum_all = 0.0;
    for (int b = 0; b < kBins; ++b) sum_all += b * hist[b];

    // Class 0 = bins [0, k), class 1 = bins [k, 256). Strict '>' keeps the lowest k on ties.
    double w0 = 0.0, sum0 = 0.0, best = -1.0;
    int best_bin = 1;
    for (int k = 1; k < kBins; ++k) {
        w0 += hist[k - 1];
        sum0 += (k - 1) * hist[k - 1];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double m0 = sum0 / w0;
        const double m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            best_bin = k;
        }
    }
    return {lo + span * best_bin / kBins, best_bin};
}

BinaryMask otsu_threshold(const SoftSegmentation& seg) {
    const OtsuLevel level = otsu_level(seg);
    const double lo = seg.minCoeff();
    const double span = seg.maxCoeff() - lo;
    BinaryMask mask(seg.rows(), seg.cols());
    for (Eigen::Index i = 0; i < seg.size(); ++i) mask.data()[i] = bin_of(seg.data()[i], lo, span) >= level.bin;
    return mask;
}

}  // namespace vessel
