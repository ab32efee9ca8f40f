#include "ocpsps/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "ocpsps/json_io.hpp"

namespace ocpsps {

SimDataset load_sim_dataset(const std::filesystem::path& dir) {
    SimDataset dataset;
    dataset.predictions = load_frames(dir / "detections.jsonl");
    dataset.truths = load_ground_truth(dir / "groundtruth.jsonl");
    dataset.lots = load_lots(dir / "lots.json");
    if (std::filesystem::exists(dir / "traffic.json"))
        dataset.traffic = load_traffic(dir / "traffic.json");
    return dataset;
}

void write_sim_dataset(const SimDataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_frames(dataset.predictions, dir / "detections.jsonl");
    write_ground_truth(dataset.truths, dir / "groundtruth.jsonl");
    write_lots(dataset.lots, dir / "lots.json");
    write_traffic(dataset.traffic, dir / "traffic.json");
}

namespace {

struct OriginRegion {
    double lat_min, lat_max, lon_min, lon_max;
};

OriginRegion resolve_region(const SimConfig& cfg, const std::vector<ParkingLot>& lots) {
    if (cfg.origin_lat_min < cfg.origin_lat_max && cfg.origin_lon_min < cfg.origin_lon_max)
        return {cfg.origin_lat_min, cfg.origin_lat_max, cfg.origin_lon_min, cfg.origin_lon_max};
    if (lots.empty()) return {-0.01, 0.01, -0.01, 0.01};
    OriginRegion region{lots[0].gps_lat, lots[0].gps_lat, lots[0].gps_lon, lots[0].gps_lon};
    for (const ParkingLot& lot : lots) {
        region.lat_min = std::min(region.lat_min, lot.gps_lat);
        region.lat_max = std::max(region.lat_max, lot.gps_lat);
        region.lon_min = std::min(region.lon_min, lot.gps_lon);
        region.lon_max = std::max(region.lon_max, lot.gps_lon);
    }
    region.lat_min -= cfg.origin_margin_deg;
    region.lat_max += cfg.origin_margin_deg;
    region.lon_min -= cfg.origin_margin_deg;
    region.lon_max += cfg.origin_margin_deg;
    return region;
}

std::vector<Request> generate_requests_in_region(const SimConfig& cfg, int day,
                                                 const OriginRegion& region,
                                                 std::mt19937_64& rng) {
    std::vector<Request> requests;
    requests.reserve(static_cast<size_t>(std::max(0, cfg.requests_per_day)));
    const std::int64_t window_sec =
        static_cast<std::int64_t>(cfg.end_hour - cfg.start_hour) * 3600;
    std::uniform_int_distribution<std::int64_t> arrival(0, std::max<std::int64_t>(0, window_sec - 1));
    std::uniform_real_distribution<double> lat(region.lat_min, region.lat_max);
    std::uniform_real_distribution<double> lon(region.lon_min, region.lon_max);
    for (int k = 0; k < cfg.requests_per_day; ++k) {
        Request r;
        std::ostringstream id;
        id << "d" << day << "_r" << k;
        r.request_id = id.str();
        r.arrival_time = static_cast<std::int64_t>(day) * 86400 +
                         static_cast<std::int64_t>(cfg.start_hour) * 3600 + arrival(rng);
        r.origin = {lat(rng), lon(rng)};
        requests.push_back(std::move(r));
    }
    return requests;
}

}  // namespace

std::vector<Request> generate_requests(const SimConfig& cfg, int day, std::mt19937_64& rng) {
    return generate_requests_in_region(cfg, day, resolve_region(cfg, {}), rng);
}

namespace {

FrameInference truth_as_frame(const GroundTruthFrame& gt, std::int64_t timestamp) {
    FrameInference frame;
    frame.frame_id = gt.frame_id;
    frame.lot_id = gt.lot_id;
    frame.sector_id = gt.sector_id;
    frame.timestamp = timestamp;
    for (const auto& [quad, cls] : gt.labels) {
        Detection det;
        det.bbox = quad.wrapping_box();
        det.slot_class = cls;
        det.score = 1.0;
        det.keypoints = quad;
        frame.detections.push_back(std::move(det));
    }
    return frame;
}

struct PipelineOutput {
    Assignment assignment;
    std::vector<LotSnapshot> snapshots;
};

PipelineOutput assign_from_store(const OccupancyStore& store,
                                 const std::vector<Request>& requests,
                                 const std::vector<ParkingLot>& lots,
                                 const RoutingProvider& routing, const CostWeights& weights,
                                 const std::map<std::string, double>& traffic_factor) {
    PipelineOutput out;
    out.snapshots = store.snapshot_all();
    std::vector<SlotRef> slots = collect_available_slots(out.snapshots);
    std::map<std::string, double> occupancy;
    for (const LotSnapshot& snap : out.snapshots) occupancy[snap.lot_id] = snap.occupancy_rate;
    auto [selected_requests, selected_slots] = prioritize(requests, slots, occupancy);
    CostMatrix matrix =
        build_cost_matrix(selected_requests, selected_slots, lots, routing, weights, traffic_factor);
    out.assignment = hungarian(matrix);
    // Requests dropped by the protocol stay unassigned.
    std::set<std::string> kept;
    for (const Request& r : selected_requests) kept.insert(r.request_id);
    for (const Request& r : requests) {
        if (!kept.count(r.request_id)) out.assignment.unassigned_requests.push_back(r.request_id);
    }
    return out;
}

std::vector<std::int64_t> booked_per_lot(const Assignment& assignment,
                                         const std::vector<ParkingLot>& lots) {
    std::map<std::string, std::int64_t> counts;
    for (const MatchedPair& pair : assignment.pairs) counts[pair.slot.lot_id]++;
    std::vector<std::int64_t> out;
    out.reserve(lots.size());
    for (const ParkingLot& lot : lots) out.push_back(counts[lot.lot_id]);
    return out;
}

}  // namespace

RoundResult run_round(const std::vector<GroundTruthFrame>& truths,
                      const std::vector<FrameInference>& predictions,
                      const std::vector<Request>& requests, const SimConfig& cfg,
                      const std::vector<ParkingLot>& lots, const RoutingProvider& routing,
                      const std::map<std::string, double>& traffic_factor,
                      OccupancyStore& gt_store, OccupancyStore& pred_store) {
    std::map<std::string, const GroundTruthFrame*> truth_index;
    for (const GroundTruthFrame& gt : truths) truth_index[gt.frame_id] = &gt;

    // Ground-truth pipeline: masked labels committed as trusted detections.
    std::vector<FrameInference> masked_preds;
    masked_preds.reserve(predictions.size());
    for (const FrameInference& pred : predictions) {
        auto it = truth_index.find(pred.frame_id);
        if (it == truth_index.end())
            throw MismatchedFrames("prediction frame '" + pred.frame_id + "' has no ground truth");
        const GroundTruthFrame& gt = *it->second;
        GroundTruthFrame masked_gt = mask_ground_truth(gt);
        FrameError trusted_err;
        trusted_err.frame_id = gt.frame_id;
        gt_store.commit(truth_as_frame(masked_gt, pred.timestamp), trusted_err);
        masked_preds.push_back(apply_overlap_mask(pred, gt));
    }

    // Prediction pipeline: overlap mask -> result filter -> store.
    if (cfg.filter_enabled) {
        FilterResult filtered = filter_batch(masked_preds, cfg.filter);
        for (size_t i = 0; i < masked_preds.size(); ++i)
            pred_store.commit(masked_preds[i], filtered.errors[i]);
    } else {
        for (const FrameInference& frame : masked_preds) {
            FrameError trusted_err;
            trusted_err.frame_id = frame.frame_id;
            pred_store.commit(frame, trusted_err);
        }
    }

    RoundResult result;
    PipelineOutput gt_out =
        assign_from_store(gt_store, requests, lots, routing, cfg.weights, traffic_factor);
    PipelineOutput pred_out =
        assign_from_store(pred_store, requests, lots, routing, cfg.weights, traffic_factor);
    result.gt_assignment = std::move(gt_out.assignment);
    result.pred_assignment = std::move(pred_out.assignment);
    result.gt_snapshots = std::move(gt_out.snapshots);
    result.pred_snapshots = std::move(pred_out.snapshots);
    result.gt_counts = booked_per_lot(result.gt_assignment, lots);
    result.pred_counts = booked_per_lot(result.pred_assignment, lots);
    return result;
}

double RepeatMetrics::mean_err_cost() const {
    if (days.empty()) return 0.0;
    double sum = 0.0;
    for (const DayMetrics& d : days) sum += d.err_cost;
    return sum / static_cast<double>(days.size());
}

double RepeatMetrics::mean_err_assign() const {
    if (days.empty()) return 0.0;
    double sum = 0.0;
    for (const DayMetrics& d : days) sum += d.err_assign;
    return sum / static_cast<double>(days.size());
}

namespace {

double mean_of(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    double m = mean_of(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

SimReport run_simulation(const SimDataset& dataset, const SimConfig& cfg) {
    ValidationReport validation =
        validate_dataset(dataset.predictions, dataset.truths, dataset.lots);
    if (!validation.ok())
        throw Error("dataset failed validation: " + std::to_string(validation.findings.size()) +
                    " finding(s), first: " + validation.findings.front().message);

    // Participating lots.
    std::vector<ParkingLot> lots;
    if (cfg.lots.empty()) {
        lots = dataset.lots;
        std::sort(lots.begin(), lots.end(),
                  [](const ParkingLot& a, const ParkingLot& b) { return a.lot_id < b.lot_id; });
    } else {
        std::map<std::string, const ParkingLot*> index;
        for (const ParkingLot& lot : dataset.lots) index[lot.lot_id] = &lot;
        for (const std::string& lot_id : cfg.lots) {
            auto it = index.find(lot_id);
            if (it == index.end()) throw UnknownLot("configured lot '" + lot_id + "' not in dataset");
            lots.push_back(*it->second);
        }
    }
    std::set<std::string> lot_filter;
    for (const ParkingLot& lot : lots) lot_filter.insert(lot.lot_id);

    // Rounds, keyed by (day, hour) from the prediction timestamps.
    std::map<std::string, const GroundTruthFrame*> truth_index;
    for (const GroundTruthFrame& gt : dataset.truths) truth_index[gt.frame_id] = &gt;
    std::map<int, std::map<int, std::vector<const FrameInference*>>> rounds;
    for (const FrameInference& frame : dataset.predictions) {
        if (!lot_filter.count(frame.lot_id)) continue;
        rounds[frame.day_index()][frame.hour_of_day()].push_back(&frame);
    }
    std::vector<int> day_indices;
    for (const auto& [day, by_hour] : rounds) day_indices.push_back(day);
    if (static_cast<int>(day_indices.size()) < cfg.days)
        throw Error("dataset covers " + std::to_string(day_indices.size()) +
                    " day(s) but the configuration needs " + std::to_string(cfg.days));
    day_indices.resize(static_cast<size_t>(cfg.days));

    OriginRegion region = resolve_region(cfg, lots);

    SimReport report;
    report.days = cfg.days;
    report.rounds_per_day = cfg.rounds_per_day();
    report.repeats = cfg.repeats;
    report.rng_seed = cfg.rng_seed;

    for (int repeat = 0; repeat < cfg.repeats; ++repeat) {
        std::seed_seq seq{static_cast<std::uint64_t>(cfg.rng_seed),
                          static_cast<std::uint64_t>(repeat)};
        std::mt19937_64 rng(seq);

        // Per-repeat traffic perturbation, one factor per lot.
        std::uniform_real_distribution<double> perturb(cfg.traffic_perturb_lo,
                                                       cfg.traffic_perturb_hi);
        std::map<std::string, double> repeat_perturb;
        for (const ParkingLot& lot : lots) repeat_perturb[lot.lot_id] = perturb(rng);

        OccupancyStore gt_store, pred_store;
        for (const ParkingLot& lot : lots) {
            gt_store.register_lot(lot);
            pred_store.register_lot(lot);
        }

        RepeatMetrics repeat_metrics;
        repeat_metrics.repeat = repeat;

        for (size_t day_pos = 0; day_pos < day_indices.size(); ++day_pos) {
            int day = day_indices[day_pos];
            std::vector<Request> day_requests = generate_requests_in_region(cfg, day, region, rng);

            // One routing matrix per day covering every request origin.
            std::vector<GeoPoint> origins;
            origins.reserve(day_requests.size());
            for (const Request& r : day_requests) origins.push_back(r.origin);
            StaticMatrixRoutingProvider routing =
                make_geodesic_matrix(origins, lots, cfg.road_speed_kmh);

            std::vector<double> gt_costs, pred_costs;
            std::vector<std::vector<std::int64_t>> gt_counts, pred_counts;

            for (int hour = cfg.start_hour; hour < cfg.end_hour; ++hour) {
                auto& by_hour = rounds[day];
                auto hour_it = by_hour.find(hour);
                if (hour_it == by_hour.end() || hour_it->second.empty())
                    throw Error("no frames for day " + std::to_string(day) + " hour " +
                                std::to_string(hour));

                std::vector<FrameInference> round_preds;
                std::vector<GroundTruthFrame> round_truths;
                for (const FrameInference* frame : hour_it->second) {
                    round_preds.push_back(*frame);
                    auto truth_it = truth_index.find(frame->frame_id);
                    if (truth_it == truth_index.end())
                        throw MismatchedFrames("prediction frame '" + frame->frame_id +
                                               "' has no ground truth");
                    round_truths.push_back(*truth_it->second);
                }

                std::vector<Request> round_requests;
                for (const Request& r : day_requests) {
                    int hour_of_request = static_cast<int>((r.arrival_time % 86400) / 3600);
                    if (hour_of_request == hour) round_requests.push_back(r);
                }

                std::map<std::string, double> traffic_factor;
                for (const ParkingLot& lot : lots) {
                    traffic_factor[lot.lot_id] = dataset.traffic.factor(day, hour, lot.lot_id) *
                                                 repeat_perturb[lot.lot_id];
                }

                RoundResult round = run_round(round_truths, round_preds, round_requests, cfg, lots,
                                              routing, traffic_factor, gt_store, pred_store);
                gt_costs.push_back(round.gt_assignment.total_cost);
                pred_costs.push_back(round.pred_assignment.total_cost);
                gt_counts.push_back(round.gt_counts);
                pred_counts.push_back(round.pred_counts);
            }

            DayMetrics day_metrics;
            day_metrics.day = day;
            day_metrics.err_cost = err_cost(gt_costs, pred_costs);
            day_metrics.err_assign = err_assign(gt_counts, pred_counts);
            repeat_metrics.days.push_back(day_metrics);
        }
        report.per_repeat.push_back(std::move(repeat_metrics));
    }

    // Aggregates over repeats (per-repeat value = mean over its days).
    std::vector<double> repeat_cost, repeat_assign;
    for (const RepeatMetrics& r : report.per_repeat) {
        repeat_cost.push_back(r.mean_err_cost());
        repeat_assign.push_back(r.mean_err_assign());
    }
    report.err_cost_mean = mean_of(repeat_cost);
    report.err_cost_std = sample_std(repeat_cost);
    report.err_assign_mean = mean_of(repeat_assign);
    report.err_assign_std = sample_std(repeat_assign);
    for (int d = 0; d < cfg.days; ++d) {
        std::vector<double> day_cost, day_assign;
        for (const RepeatMetrics& r : report.per_repeat) {
            day_cost.push_back(r.days[static_cast<size_t>(d)].err_cost);
            day_assign.push_back(r.days[static_cast<size_t>(d)].err_assign);
        }
        report.per_day_err_cost_mean.push_back(mean_of(day_cost));
        report.per_day_err_assign_mean.push_back(mean_of(day_assign));
    }
    return report;
}

json sim_report_to_json(const SimReport& report) {
    json j;
    j["days"] = report.days;
    j["rounds_per_day"] = report.rounds_per_day;
    j["repeats"] = report.repeats;
    j["rng_seed"] = report.rng_seed;
    json per_repeat = json::array();
    for (const RepeatMetrics& r : report.per_repeat) {
        json rj;
        rj["repeat"] = r.repeat;
        json days = json::array();
        for (const DayMetrics& d : r.days) {
            json dj;
            dj["day"] = d.day;
            dj["err_cost"] = d.err_cost;
            dj["err_assign"] = d.err_assign;
            days.push_back(std::move(dj));
        }
        rj["days"] = std::move(days);
        rj["err_cost_mean"] = r.mean_err_cost();
        rj["err_assign_mean"] = r.mean_err_assign();
        per_repeat.push_back(std::move(rj));
    }
    j["per_repeat"] = std::move(per_repeat);
    j["summary"] = {
        {"err_cost", {{"mean", report.err_cost_mean}, {"std", report.err_cost_std},
                      {"per_day_mean", report.per_day_err_cost_mean}}},
        {"err_assign", {{"mean", report.err_assign_mean}, {"std", report.err_assign_std},
                        {"per_day_mean", report.per_day_err_assign_mean}}}};
    return j;
}

std::string sim_report_to_csv(const SimReport& report) {
    std::ostringstream out;
    out << "repeat,day,err_cost,err_assign\n";
    char line[128];
    for (const RepeatMetrics& r : report.per_repeat) {
        for (const DayMetrics& d : r.days) {
            std::snprintf(line, sizeof(line), "%d,%d,%.6f,%.6f\n", r.repeat, d.day, d.err_cost,
                          d.err_assign);
            out << line;
        }
    }
    return out.str();
}

}  // namespace ocpsps
