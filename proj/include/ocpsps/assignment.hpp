#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ocpsps/routing.hpp"
#include "ocpsps/json_io.hpp"
#include "ocpsps/store.hpp"

namespace ocpsps {

struct Request {
    std::string request_id;
    std::int64_t arrival_time = 0;
    GeoPoint origin;
};

/// Weight of the price term in the assignment cost; the remaining weight goes
/// to travel time plus route distance.
struct CostWeights {
    double gamma = 0.5;
};

struct SlotRef {
    std::string lot_id;
    std::string sector_id;
    BBox bbox;
};

struct CostComponents {
    double price = 0.0;
    double travel = 0.0;
    double distance = 0.0;
};

/// Request x slot cost matrix. Components are min-max normalized to [0,1]
/// across the matrix before weighting.
struct CostMatrix {
    std::vector<Request> requests;
    std::vector<SlotRef> slots;
    std::vector<double> costs;                 // row-major, requests x slots
    std::vector<CostComponents> components;    // normalized, row-major

    double at(size_t row, size_t col) const { return costs[row * slots.size() + col]; }
    const CostComponents& components_at(size_t row, size_t col) const {
        return components[row * slots.size() + col];
    }
};

struct MatchedPair {
    std::string request_id;
    SlotRef slot;
    double cost = 0.0;
    CostComponents components;
};

struct Assignment {
    std::vector<MatchedPair> pairs;  // ordered by request row
    double total_cost = 0.0;
    std::vector<std::string> unassigned_requests;
};

/// Flattens snapshots into assignable slots, ordered by (lot, sector, bbox).
std::vector<SlotRef> collect_available_slots(const std::vector<LotSnapshot>& snapshots);

/// cost = gamma * price + (1 - gamma) * (travel + distance), each component
/// min-max normalized across the matrix. Travel time is scaled by the
/// per-lot traffic factor before normalization (1.0 when absent).
CostMatrix build_cost_matrix(const std::vector<Request>& requests,
                             const std::vector<SlotRef>& slots,
                             const std::vector<ParkingLot>& lots,
                             const RoutingProvider& routing, const CostWeights& weights,
                             const std::map<std::string, double>& lot_traffic_factor = {});

/// Pre-assignment reduction: with more requests than slots keep the earliest
/// arrivals; with more slots than requests draw slots from lots in ascending
/// occupancy rate, round-robin across lots of equal rate.
std::pair<std::vector<Request>, std::vector<SlotRef>> prioritize(
    const std::vector<Request>& requests, const std::vector<SlotRef>& slots,
    const std::map<std::string, double>& lot_occupancy);

struct RawAssignment {
    std::vector<std::pair<int, int>> pairs;  // (row, col), ordered by row
    double total_cost = 0.0;
    std::vector<int> unassigned_rows;
};

/// Minimum-cost assignment of a rectangular matrix. Rectangular input is
/// padded to square with dummy cost 1 + max(real); the result only contains
/// real pairs. Deterministic: cost ties resolve toward the lowest row, then
/// the lowest column. Throws NonFiniteCost.
RawAssignment solve_assignment(const std::vector<std::vector<double>>& costs);

Assignment hungarian(const CostMatrix& matrix);

json assignment_to_json(const Assignment& assignment);
void write_assignment(const Assignment& assignment, const std::filesystem::path& path);

std::vector<Request> load_requests(const std::filesystem::path& path);
void write_requests(const std::vector<Request>& requests, const std::filesystem::path& path);

}  // namespace ocpsps
