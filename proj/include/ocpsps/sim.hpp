#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ocpsps/assignment.hpp"
#include "ocpsps/filter.hpp"
#include "ocpsps/metrics.hpp"

namespace ocpsps {

/// Closed-loop simulation protocol: requests per day over an afternoon
/// window, repeated with fresh request/traffic draws.
struct SimConfig {
    int days = 5;
    int start_hour = 15;
    int end_hour = 18;
    int requests_per_day = 100;
    int repeats = 10;
    std::uint64_t rng_seed = 42;
    FilterConfig filter;
    bool filter_enabled = true;
    CostWeights weights;
    /// Lots taking part; empty means every lot of the dataset.
    std::vector<std::string> lots;
    /// Request origin region; when degenerate (min >= max) it is derived from
    /// the lot coordinates expanded by origin_margin_deg.
    double origin_lat_min = 0.0, origin_lat_max = 0.0;
    double origin_lon_min = 0.0, origin_lon_max = 0.0;
    double origin_margin_deg = 0.02;
    /// Per-repeat traffic perturbation drawn uniformly per lot.
    double traffic_perturb_lo = 0.8, traffic_perturb_hi = 1.25;
    double road_speed_kmh = 40.0;

    int rounds_per_day() const { return end_hour - start_hour; }
};

struct SimDataset {
    std::vector<GroundTruthFrame> truths;
    std::vector<FrameInference> predictions;
    std::vector<ParkingLot> lots;
    TrafficFeed traffic;
};

SimDataset load_sim_dataset(const std::filesystem::path& dir);
void write_sim_dataset(const SimDataset& dataset, const std::filesystem::path& dir);

/// requests_per_day requests for one day: arrival uniform over the window,
/// origin uniform over the region. Deterministic per rng state.
std::vector<Request> generate_requests(const SimConfig& cfg, int day, std::mt19937_64& rng);

struct RoundResult {
    Assignment gt_assignment;
    Assignment pred_assignment;
    std::vector<std::int64_t> gt_counts;    // booked slots per configured lot
    std::vector<std::int64_t> pred_counts;
    std::vector<LotSnapshot> gt_snapshots;
    std::vector<LotSnapshot> pred_snapshots;
};

/// One evaluation round: both pipelines consume the same requests, routing
/// and traffic; the ground truth commits its masked labels directly while the
/// prediction side runs overlap mask -> result filter -> store.
RoundResult run_round(const std::vector<GroundTruthFrame>& truths,
                      const std::vector<FrameInference>& predictions,
                      const std::vector<Request>& requests, const SimConfig& cfg,
                      const std::vector<ParkingLot>& lots, const RoutingProvider& routing,
                      const std::map<std::string, double>& traffic_factor,
                      OccupancyStore& gt_store, OccupancyStore& pred_store);

struct DayMetrics {
    int day = 0;
    double err_cost = 0.0;
    double err_assign = 0.0;
};

struct RepeatMetrics {
    int repeat = 0;
    std::vector<DayMetrics> days;

    double mean_err_cost() const;
    double mean_err_assign() const;
};

struct SimReport {
    int days = 0;
    int rounds_per_day = 0;
    int repeats = 0;
    std::uint64_t rng_seed = 0;
    std::vector<RepeatMetrics> per_repeat;
    double err_cost_mean = 0.0, err_cost_std = 0.0;
    double err_assign_mean = 0.0, err_assign_std = 0.0;
    std::vector<double> per_day_err_cost_mean;
    std::vector<double> per_day_err_assign_mean;
};

SimReport run_simulation(const SimDataset& dataset, const SimConfig& cfg);

json sim_report_to_json(const SimReport& report);
std::string sim_report_to_csv(const SimReport& report);

}  // namespace ocpsps
