#include "ocpsps/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ocpsps/json_io.hpp"

namespace ocpsps {

namespace {

constexpr int kNumIouThresholds = 10;  // 0.50, 0.55, ..., 0.95
constexpr int kNumRecallPoints = 101;

double iou_threshold(int t) { return 0.5 + 0.05 * t; }

struct ScoredFlag {
    double score;
    std::string frame_id;
    size_t det_index;
    bool tp;
};

struct ClassEval {
    double ap = 0.0;
    double recall = 0.0;
};

// 101-point interpolated average precision over a globally sorted detection
// pool.
ClassEval pr_curve(std::vector<ScoredFlag> pool, std::int64_t gt_total) {
    ClassEval eval;
    if (gt_total <= 0) return eval;
    std::sort(pool.begin(), pool.end(), [](const ScoredFlag& a, const ScoredFlag& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.frame_id != b.frame_id) return a.frame_id < b.frame_id;
        return a.det_index < b.det_index;
    });

    std::vector<double> precision, recall;
    precision.reserve(pool.size());
    recall.reserve(pool.size());
    std::int64_t tp = 0, fp = 0;
    for (const ScoredFlag& s : pool) {
        s.tp ? ++tp : ++fp;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_total));
    }
    eval.recall = pool.empty() ? 0.0 : recall.back();

    // Monotone precision envelope from the right.
    std::vector<double> envelope = precision;
    for (int k = static_cast<int>(envelope.size()) - 2; k >= 0; --k)
        envelope[k] = std::max(envelope[k], envelope[k + 1]);

    double ap_sum = 0.0;
    size_t k = 0;
    for (int r = 0; r < kNumRecallPoints; ++r) {
        double target = static_cast<double>(r) / (kNumRecallPoints - 1);
        while (k < recall.size() && recall[k] < target) ++k;
        if (k < recall.size()) ap_sum += envelope[k];
    }
    eval.ap = ap_sum / kNumRecallPoints;
    return eval;
}

struct GtBox {
    BBox bbox;
    SlotClass slot_class;
};

}  // namespace

DetectionEvalReport evaluate_detections(const std::vector<FrameInference>& predictions,
                                        const std::vector<GroundTruthFrame>& truths,
                                        const SizeFilter& size_filter) {
    std::map<std::string, const GroundTruthFrame*> truth_index;
    for (const GroundTruthFrame& gt : truths) truth_index[gt.frame_id] = &gt;
    if (truth_index.size() != truths.size())
        throw MismatchedFrames("duplicate ground-truth frame ids");
    std::set<std::string> pred_ids;
    for (const FrameInference& f : predictions) {
        if (!pred_ids.insert(f.frame_id).second)
            throw MismatchedFrames("duplicate prediction frame id '" + f.frame_id + "'");
        if (!truth_index.count(f.frame_id))
            throw MismatchedFrames("prediction frame '" + f.frame_id + "' has no ground truth");
    }
    for (const GroundTruthFrame& gt : truths) {
        if (!pred_ids.count(gt.frame_id))
            throw MismatchedFrames("ground-truth frame '" + gt.frame_id + "' has no predictions");
    }

    const SlotClass classes[] = {SlotClass::Available, SlotClass::Occupied, SlotClass::Illegal,
                                 SlotClass::Restricted};

    // Medium/large gate applied once.
    std::map<std::string, std::vector<GtBox>> gt_boxes;
    std::map<SlotClass, std::int64_t> gt_totals;
    for (const GroundTruthFrame& gt : truths) {
        auto& boxes = gt_boxes[gt.frame_id];
        for (const auto& [quad, cls] : gt.labels) {
            BBox box = quad.wrapping_box();
            if (box.area() < size_filter.min_normalized_area) continue;
            boxes.push_back({box, cls});
            gt_totals[cls]++;
        }
    }

    DetectionEvalReport report;
    double ap_sum_all = 0.0, recall_sum_all = 0.0;
    int cells = 0;
    std::map<int, double> ap_sum_by_threshold;  // threshold index -> sum over classes

    for (SlotClass cls : classes) {
        std::int64_t gt_total = gt_totals.count(cls) ? gt_totals[cls] : 0;
        if (gt_total == 0) continue;  // class absent from ground truth

        for (int t = 0; t < kNumIouThresholds; ++t) {
            double threshold = iou_threshold(t);
            std::vector<ScoredFlag> pool;

            for (const FrameInference& frame : predictions) {
                const auto& boxes = gt_boxes[frame.frame_id];
                std::vector<size_t> det_order;
                for (size_t i = 0; i < frame.detections.size(); ++i) {
                    if (frame.detections[i].slot_class == cls) det_order.push_back(i);
                }
                std::stable_sort(det_order.begin(), det_order.end(), [&](size_t a, size_t b) {
                    return frame.detections[a].score > frame.detections[b].score;
                });

                std::vector<bool> matched(boxes.size(), false);
                for (size_t i : det_order) {
                    const Detection& det = frame.detections[i];
                    double best_iou = 0.0;
                    int best_gt = -1;
                    for (size_t g = 0; g < boxes.size(); ++g) {
                        if (matched[g] || boxes[g].slot_class != cls) continue;
                        double overlap = iou(det.bbox, boxes[g].bbox);
                        if (overlap > best_iou) {
                            best_iou = overlap;
                            best_gt = static_cast<int>(g);
                        }
                    }
                    bool tp = best_gt >= 0 && best_iou >= threshold;
                    if (tp) matched[best_gt] = true;
                    pool.push_back({det.score, frame.frame_id, i, tp});
                }
            }

            ClassEval eval = pr_curve(std::move(pool), gt_total);
            ap_sum_all += eval.ap;
            recall_sum_all += eval.recall;
            ap_sum_by_threshold[t] += eval.ap;
            ++cells;
            if (t == 0) report.per_class_ap_05[cls] = eval.ap;
        }
    }

    int class_count = cells / kNumIouThresholds;
    if (class_count > 0) {
        report.map_05 = ap_sum_by_threshold[0] / class_count;
        report.map_075 = ap_sum_by_threshold[5] / class_count;
        report.map_05_095 = ap_sum_all / cells;
        report.recall_05_095 = recall_sum_all / cells;
    }
    return report;
}

double err_cost(const std::vector<double>& gt_costs, const std::vector<double>& pred_costs) {
    if (gt_costs.size() != pred_costs.size())
        throw Error("err_cost requires one predicted cost per round");
    double total = 0.0;
    for (size_t i = 0; i < gt_costs.size(); ++i) {
        if (!(gt_costs[i] > 0.0))
            throw ZeroGroundTruthCost("round " + std::to_string(i) +
                                      " has non-positive ground-truth cost");
        total += std::abs(gt_costs[i] - pred_costs[i]) / gt_costs[i];
    }
    return total;
}

double err_assign(const std::vector<std::vector<std::int64_t>>& gt_counts,
                  const std::vector<std::vector<std::int64_t>>& pred_counts) {
    if (gt_counts.size() != pred_counts.size())
        throw Error("err_assign requires one predicted row per round");
    double total = 0.0;
    for (size_t i = 0; i < gt_counts.size(); ++i) {
        if (gt_counts[i].size() != pred_counts[i].size())
            throw Error("err_assign rows must have equal lot counts");
        std::int64_t round_total = 0;
        for (std::int64_t n : gt_counts[i]) round_total += n;
        if (round_total <= 0)
            throw EmptyRound("round " + std::to_string(i) + " books no ground-truth slots");
        for (size_t j = 0; j < gt_counts[i].size(); ++j) {
            total += static_cast<double>(std::abs(gt_counts[i][j] - pred_counts[i][j])) /
                     static_cast<double>(round_total);
        }
    }
    return total;
}

json detection_report_to_json(const DetectionEvalReport& report) {
    json j;
    j["recall_05_095"] = report.recall_05_095;
    j["map_05"] = report.map_05;
    j["map_075"] = report.map_075;
    j["map_05_095"] = report.map_05_095;
    json per_class;
    for (const auto& [cls, ap] : report.per_class_ap_05) per_class[to_string(cls)] = ap;
    j["per_class_ap_05"] = std::move(per_class);
    return j;
}

}  // namespace ocpsps
