#pragma once

#include "ocpsps/sim.hpp"

namespace ocpsps {

/// Generator for closed-loop test datasets: grid-laid parking slots per
/// sector, a perfect detector echoing the labels, soft masks covering every
/// slot and a mild synthetic traffic feed.
struct SyntheticConfig {
    int lots = 6;
    int sectors_per_lot = 2;
    int slots_per_sector = 8;
    int days = 5;
    int start_hour = 15;
    int end_hour = 18;
    std::uint64_t seed = 20220937;
    double occupied_fraction_lo = 0.3;
    double occupied_fraction_hi = 0.7;
    double detection_score = 0.95;
    int mask_height = 16;
    int mask_width = 16;
    double predicted_loss = 0.1;
    bool with_overlap_masks = false;
};

SimDataset make_synthetic_dataset(const SyntheticConfig& cfg = {});

/// Detector noise: each detection is independently hit with probability
/// `rate`; a hit either drops the detection or flips available<->occupied.
std::vector<FrameInference> corrupt_detections(const std::vector<FrameInference>& frames,
                                               double rate, std::uint64_t seed);

}  // namespace ocpsps
