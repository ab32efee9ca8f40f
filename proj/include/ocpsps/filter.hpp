#pragma once

#include <vector>

#include "ocpsps/ingest.hpp"

namespace ocpsps {

/// Knobs of the filter layer. gamma is the overlap-indicator threshold of the
/// spatial error; alpha mixes the training error into the total error. It is
/// a different parameter from the cost weight of the assignment engine even
/// though the source material reuses the symbol.
struct FilterConfig {
    double gamma = 0.7;
    double alpha = 0.4;
    double bin_thresh = 0.5;
    /// Resolution of the fused spatial map; 0 means "largest level shape".
    int fused_height = 0;
    int fused_width = 0;
    double trust_threshold = 0.5;
    /// Removal budget: at most min(max_removals, floor(batch * max_removal_fraction)).
    int max_removals = 100;
    double max_removal_fraction = 1.0;
};

struct FrameError {
    std::string frame_id;
    double err_spatial = 0.0;
    double err_training = 0.0;
    double err_total = 0.0;
    bool trusted = true;
    /// Frames without detections assert nothing spatially; they are trusted
    /// with err_spatial = 0 and flagged here for audit.
    bool empty_frame = false;
};

/// Fuses the frame's soft-mask levels and evaluates
/// 1 - mean(indicator(overlap_i)) with indicator(R) = 1 if R > gamma else R.
/// Throws NoDetections for empty frames and EmptyLevels without masks.
double spatial_error(const FrameInference& frame, const FilterConfig& cfg);

/// Batch min-max normalization; a constant batch maps to all zeros.
std::vector<double> normalize_training_error(const std::vector<double>& raw_losses);

/// alpha * err_training + (1 - alpha) * err_spatial.
double total_error(double err_spatial, double err_training, double alpha);

struct FilterResult {
    std::vector<FrameInference> trusted;   // survivors, input order
    std::vector<FrameInference> rejected;  // removed frames, worst first
    std::vector<FrameError> errors;        // one per input frame, input order
};

/// Ranks frames by err_total descending (ties by frame_id ascending) and
/// rejects the worst ones above trust_threshold, within the removal budget.
FilterResult filter_batch(const std::vector<FrameInference>& frames, const FilterConfig& cfg);

}  // namespace ocpsps
