#include "ocpsps/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ocpsps {

namespace {

GridMap fused_spatial_map(const FrameInference& frame, const FilterConfig& cfg) {
    int h = cfg.fused_height;
    int w = cfg.fused_width;
    if (h <= 0 || w <= 0) {
        for (const GridMap& level : frame.soft_mask_levels) {
            h = std::max(h, level.height);
            w = std::max(w, level.width);
        }
    }
    return fuse_levels(frame.soft_mask_levels, h, w);
}

}  // namespace

double spatial_error(const FrameInference& frame, const FilterConfig& cfg) {
    if (frame.detections.empty())
        throw NoDetections("spatial error is undefined for a frame without detections");
    GridMap fused = fused_spatial_map(frame, cfg);
    double sum = 0.0;
    for (const Detection& det : frame.detections) {
        double overlap = box_mask_overlap(det.bbox, fused, cfg.bin_thresh);
        sum += overlap > cfg.gamma ? 1.0 : overlap;
    }
    return 1.0 - sum / static_cast<double>(frame.detections.size());
}

std::vector<double> normalize_training_error(const std::vector<double>& raw_losses) {
    if (raw_losses.empty()) return {};
    auto [lo_it, hi_it] = std::minmax_element(raw_losses.begin(), raw_losses.end());
    double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(raw_losses.size(), 0.0);
    if (hi > lo) {
        for (size_t i = 0; i < raw_losses.size(); ++i) out[i] = (raw_losses[i] - lo) / (hi - lo);
    }
    return out;
}

double total_error(double err_spatial, double err_training, double alpha) {
    return alpha * err_training + (1.0 - alpha) * err_spatial;
}

FilterResult filter_batch(const std::vector<FrameInference>& frames, const FilterConfig& cfg) {
    FilterResult result;
    result.errors.reserve(frames.size());

    std::vector<double> raw_losses;
    raw_losses.reserve(frames.size());
    for (const FrameInference& f : frames) raw_losses.push_back(f.predicted_loss);
    std::vector<double> training = normalize_training_error(raw_losses);

    for (size_t i = 0; i < frames.size(); ++i) {
        const FrameInference& f = frames[i];
        FrameError err;
        err.frame_id = f.frame_id;
        err.err_training = training[i];
        if (f.detections.empty()) {
            err.err_spatial = 0.0;
            err.empty_frame = true;
        } else if (f.soft_mask_levels.empty()) {
            // Spatial filtering disabled for this source; training error only.
            err.err_spatial = 0.0;
        } else {
            err.err_spatial = spatial_error(f, cfg);
        }
        err.err_total = total_error(err.err_spatial, err.err_training, cfg.alpha);
        result.errors.push_back(err);
    }

    // Removal budget: both the absolute cap and the fraction cap apply.
    size_t budget = std::min<size_t>(
        cfg.max_removals < 0 ? 0 : static_cast<size_t>(cfg.max_removals),
        static_cast<size_t>(std::floor(frames.size() * std::clamp(cfg.max_removal_fraction, 0.0, 1.0))));

    std::vector<size_t> order(frames.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (result.errors[a].err_total != result.errors[b].err_total)
            return result.errors[a].err_total > result.errors[b].err_total;
        return frames[a].frame_id < frames[b].frame_id;
    });

    std::vector<bool> rejected_flag(frames.size(), false);
    for (size_t rank = 0; rank < order.size() && rank < budget; ++rank) {
        size_t i = order[rank];
        if (result.errors[i].err_total <= cfg.trust_threshold) break;  // sorted, rest are lower
        rejected_flag[i] = true;
        result.errors[i].trusted = false;
        result.rejected.push_back(frames[i]);
    }
    for (size_t i = 0; i < frames.size(); ++i) {
        if (!rejected_flag[i]) result.trusted.push_back(frames[i]);
    }
    return result;
}

}  // namespace ocpsps
