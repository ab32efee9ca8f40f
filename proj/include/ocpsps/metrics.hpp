#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ocpsps/ingest.hpp"
#include "ocpsps/json_io.hpp"

namespace ocpsps {

/// Ground-truth size gate: boxes below this normalized area are dropped from
/// matching and from the recall denominator.
struct SizeFilter {
    double min_normalized_area = 0.005;
};

struct DetectionEvalReport {
    double recall_05_095 = 0.0;
    double map_05 = 0.0;
    double map_075 = 0.0;
    double map_05_095 = 0.0;
    std::map<SlotClass, double> per_class_ap_05;
};

/// COCO-style evaluation: per image and class, detections in descending score
/// greedily match the unmatched ground truth with highest IoU >= threshold;
/// AP uses 101-point interpolation, averaged over classes with ground truth
/// and over IoU thresholds 0.5:0.05:0.95.
DetectionEvalReport evaluate_detections(const std::vector<FrameInference>& predictions,
                                        const std::vector<GroundTruthFrame>& truths,
                                        const SizeFilter& size_filter = {});

/// Sum over rounds of |C_g - C_p| / C_g. Throws ZeroGroundTruthCost.
double err_cost(const std::vector<double>& gt_costs, const std::vector<double>& pred_costs);

/// Sum over rounds and lots of |N_g - N_p| / N_g(round). Throws EmptyRound
/// when a round books nothing in the ground truth.
double err_assign(const std::vector<std::vector<std::int64_t>>& gt_counts,
                  const std::vector<std::vector<std::int64_t>>& pred_counts);

json detection_report_to_json(const DetectionEvalReport& report);

}  // namespace ocpsps
