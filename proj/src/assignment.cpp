#include "ocpsps/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "ocpsps/json_io.hpp"

namespace ocpsps {

std::vector<SlotRef> collect_available_slots(const std::vector<LotSnapshot>& snapshots) {
    std::vector<SlotRef> slots;
    for (const LotSnapshot& snap : snapshots) {
        for (const AvailableSlot& slot : snap.available_slots)
            slots.push_back({snap.lot_id, slot.sector_id, slot.bbox});
    }
    std::sort(slots.begin(), slots.end(), [](const SlotRef& a, const SlotRef& b) {
        if (a.lot_id != b.lot_id) return a.lot_id < b.lot_id;
        if (a.sector_id != b.sector_id) return a.sector_id < b.sector_id;
        return bbox_less(a.bbox, b.bbox);
    });
    return slots;
}

namespace {

void min_max_normalize(std::vector<double>& values) {
    if (values.empty()) return;
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi > lo) {
        for (double& v : values) v = (v - lo) / (hi - lo);
    } else {
        std::fill(values.begin(), values.end(), 0.0);
    }
}

}  // namespace

CostMatrix build_cost_matrix(const std::vector<Request>& requests,
                             const std::vector<SlotRef>& slots,
                             const std::vector<ParkingLot>& lots,
                             const RoutingProvider& routing, const CostWeights& weights,
                             const std::map<std::string, double>& lot_traffic_factor) {
    CostMatrix matrix;
    matrix.requests = requests;
    matrix.slots = slots;
    const size_t rows = requests.size(), cols = slots.size();
    matrix.costs.assign(rows * cols, 0.0);
    matrix.components.assign(rows * cols, {});
    if (rows == 0 || cols == 0) return matrix;

    std::map<std::string, const ParkingLot*> lot_index;
    for (const ParkingLot& lot : lots) lot_index[lot.lot_id] = &lot;
    for (const SlotRef& slot : slots) {
        if (!lot_index.count(slot.lot_id))
            throw UnknownLot("slot references unregistered lot '" + slot.lot_id + "'");
    }

    // One routing query per (request, lot); slots of a lot share the route.
    std::map<std::pair<size_t, std::string>, RouteEstimate> routes;
    for (size_t r = 0; r < rows; ++r) {
        for (const SlotRef& slot : slots) {
            auto key = std::make_pair(r, slot.lot_id);
            if (!routes.count(key))
                routes[key] = routing.route(requests[r].origin, *lot_index[slot.lot_id]);
        }
    }

    std::vector<double> price(rows * cols), travel(rows * cols), distance(rows * cols);
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < cols; ++c) {
            const SlotRef& slot = slots[c];
            const ParkingLot& lot = *lot_index[slot.lot_id];
            const RouteEstimate& route = routes[{r, slot.lot_id}];
            auto factor_it = lot_traffic_factor.find(slot.lot_id);
            double factor = factor_it == lot_traffic_factor.end() ? 1.0 : factor_it->second;
            size_t i = r * cols + c;
            price[i] = lot.price;
            travel[i] = route.travel_min * factor;
            distance[i] = route.distance_km;
        }
    }
    min_max_normalize(price);
    min_max_normalize(travel);
    min_max_normalize(distance);

    double gamma = weights.gamma;
    for (size_t i = 0; i < rows * cols; ++i) {
        matrix.components[i] = {price[i], travel[i], distance[i]};
        matrix.costs[i] = gamma * price[i] + (1.0 - gamma) * (travel[i] + distance[i]);
    }
    return matrix;
}

std::pair<std::vector<Request>, std::vector<SlotRef>> prioritize(
    const std::vector<Request>& requests, const std::vector<SlotRef>& slots,
    const std::map<std::string, double>& lot_occupancy) {
    const size_t m = requests.size(), n = slots.size();
    if (m > n) {
        std::vector<Request> selected = requests;
        std::stable_sort(selected.begin(), selected.end(), [](const Request& a, const Request& b) {
            if (a.arrival_time != b.arrival_time) return a.arrival_time < b.arrival_time;
            return a.request_id < b.request_id;
        });
        selected.resize(n);
        return {std::move(selected), slots};
    }
    if (n > m) {
        // Group slots per lot, keeping their deterministic in-lot order.
        std::map<std::string, std::deque<SlotRef>> per_lot;
        for (const SlotRef& slot : slots) per_lot[slot.lot_id].push_back(slot);

        std::vector<std::pair<double, std::string>> lot_order;
        for (const auto& [lot_id, group] : per_lot) {
            auto it = lot_occupancy.find(lot_id);
            lot_order.emplace_back(it == lot_occupancy.end() ? 0.0 : it->second, lot_id);
        }
        std::sort(lot_order.begin(), lot_order.end());

        std::vector<SlotRef> selected;
        selected.reserve(m);
        size_t g = 0;
        while (selected.size() < m && g < lot_order.size()) {
            // All lots sharing this occupancy rate take turns, one slot each.
            size_t g_end = g;
            while (g_end < lot_order.size() && lot_order[g_end].first == lot_order[g].first) ++g_end;
            bool any = true;
            while (selected.size() < m && any) {
                any = false;
                for (size_t k = g; k < g_end && selected.size() < m; ++k) {
                    auto& group = per_lot[lot_order[k].second];
                    if (!group.empty()) {
                        selected.push_back(group.front());
                        group.pop_front();
                        any = true;
                    }
                }
            }
            g = g_end;
        }
        return {requests, std::move(selected)};
    }
    return {requests, slots};
}

namespace {

struct JvResult {
    std::vector<int> row_to_col;
    std::vector<double> u, v;  // dual potentials, 1-indexed
};

// Shortest-augmenting-path assignment on a square matrix, O(n^3).
JvResult jv_solve(const std::vector<double>& cost, int n) {
    const double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[static_cast<size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    }
    return {std::move(row_to_col), std::move(u), std::move(v)};
}

double row_order_total(const std::vector<double>& cost, int n, const std::vector<int>& row_to_col) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost[static_cast<size_t>(i) * n + row_to_col[i]];
    return total;
}

// Among the minimum-cost matchings, move toward the one whose column sequence
// is lexicographically smallest. Candidate edges are the tight edges of the
// JV duals; a guard keeps the JV matching whenever float noise would make the
// canonical form more expensive.
std::vector<int> canonicalize_ties(const std::vector<double>& cost, int n, const JvResult& jv) {
    double scale = 1.0;
    for (double c : cost) scale = std::max(scale, std::abs(c));
    const double eps = 1e-9 * scale;

    std::vector<std::vector<int>> tight(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double reduced = cost[static_cast<size_t>(i) * n + j] - jv.u[i + 1] - jv.v[j + 1];
            if (reduced <= eps) tight[i].push_back(j);
        }
    }
    for (int i = 0; i < n; ++i) {
        int j = jv.row_to_col[i];
        if (std::find(tight[i].begin(), tight[i].end(), j) == tight[i].end()) {
            tight[i].push_back(j);
            std::sort(tight[i].begin(), tight[i].end());
        }
    }

    std::vector<int> row_to_col = jv.row_to_col;
    std::vector<int> col_to_row(n);
    for (int i = 0; i < n; ++i) col_to_row[row_to_col[i]] = i;

    std::vector<char> fixed(n, 0);
    std::vector<char> visited(n, 0);

    // Kuhn augmentation over tight edges, skipping fixed rows' columns.
    auto try_augment = [&](auto&& self, int row) -> bool {
        for (int j : tight[row]) {
            if (visited[j]) continue;
            int owner = col_to_row[j];
            if (owner >= 0 && fixed[owner]) continue;
            visited[j] = 1;
            if (owner < 0 || self(self, owner)) {
                row_to_col[row] = j;
                col_to_row[j] = row;
                return true;
            }
        }
        return false;
    };

    for (int i = 0; i < n; ++i) {
        int cur = row_to_col[i];
        for (int c : tight[i]) {
            if (c >= cur) break;
            int displaced = col_to_row[c];
            if (displaced >= 0 && fixed[displaced]) continue;
            // Tentatively give column c to row i and re-seat the displaced row.
            row_to_col[i] = c;
            col_to_row[c] = i;
            col_to_row[cur] = -1;
            if (displaced >= 0) row_to_col[displaced] = -1;
            std::fill(visited.begin(), visited.end(), 0);
            visited[c] = 1;
            bool ok = displaced < 0 || try_augment(try_augment, displaced);
            if (ok) {
                cur = c;
                break;
            }
            // Revert.
            if (displaced >= 0) {
                row_to_col[displaced] = c;
                col_to_row[c] = displaced;
            } else {
                col_to_row[c] = -1;
            }
            row_to_col[i] = cur;
            col_to_row[cur] = i;
        }
        fixed[i] = 1;
    }

    if (row_order_total(cost, n, row_to_col) <= row_order_total(cost, n, jv.row_to_col))
        return row_to_col;
    return jv.row_to_col;
}

}  // namespace

RawAssignment solve_assignment(const std::vector<std::vector<double>>& costs) {
    RawAssignment result;
    const int rows = static_cast<int>(costs.size());
    const int cols = rows > 0 ? static_cast<int>(costs[0].size()) : 0;
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(costs[i].size()) != cols)
            throw Error("cost matrix rows must have equal length");
        for (double c : costs[i]) {
            if (!std::isfinite(c)) throw NonFiniteCost("cost matrix contains a non-finite value");
        }
    }
    if (rows == 0 || cols == 0) {
        for (int i = 0; i < rows; ++i) result.unassigned_rows.push_back(i);
        return result;
    }

    double max_real = -std::numeric_limits<double>::infinity();
    for (const auto& row : costs)
        for (double c : row) max_real = std::max(max_real, c);
    const double dummy_cost = 1.0 + max_real;

    const int n = std::max(rows, cols);
    std::vector<double> padded(static_cast<size_t>(n) * n, dummy_cost);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) padded[static_cast<size_t>(i) * n + j] = costs[i][j];

    JvResult jv = jv_solve(padded, n);
    std::vector<int> row_to_col = canonicalize_ties(padded, n, jv);

    for (int i = 0; i < rows; ++i) {
        int j = row_to_col[i];
        if (j < cols) {
            result.pairs.emplace_back(i, j);
            result.total_cost += costs[i][j];
        } else {
            result.unassigned_rows.push_back(i);
        }
    }
    return result;
}

Assignment hungarian(const CostMatrix& matrix) {
    const size_t rows = matrix.requests.size(), cols = matrix.slots.size();
    std::vector<std::vector<double>> costs(rows, std::vector<double>(cols));
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < cols; ++c) costs[r][c] = matrix.at(r, c);

    RawAssignment raw = solve_assignment(costs);
    Assignment assignment;
    assignment.total_cost = raw.total_cost;
    for (const auto& [r, c] : raw.pairs) {
        MatchedPair pair;
        pair.request_id = matrix.requests[r].request_id;
        pair.slot = matrix.slots[c];
        pair.cost = matrix.at(r, c);
        pair.components = matrix.components_at(r, c);
        assignment.pairs.push_back(std::move(pair));
    }
    for (int r : raw.unassigned_rows)
        assignment.unassigned_requests.push_back(matrix.requests[r].request_id);
    return assignment;
}

json assignment_to_json(const Assignment& assignment) {
    json j;
    json pairs = json::array();
    for (const MatchedPair& pair : assignment.pairs) {
        json pj;
        pj["request_id"] = pair.request_id;
        pj["lot_id"] = pair.slot.lot_id;
        pj["sector_id"] = pair.slot.sector_id;
        pj["bbox"] = json::array(
            {pair.slot.bbox.x_min, pair.slot.bbox.y_min, pair.slot.bbox.x_max, pair.slot.bbox.y_max});
        pj["cost"] = pair.cost;
        pj["components"] = {{"price", pair.components.price},
                            {"travel", pair.components.travel},
                            {"distance", pair.components.distance}};
        pairs.push_back(std::move(pj));
    }
    j["pairs"] = std::move(pairs);
    j["total_cost"] = assignment.total_cost;
    j["unassigned_requests"] = assignment.unassigned_requests;
    return j;
}

void write_assignment(const Assignment& assignment, const std::filesystem::path& path) {
    atomic_write(path, dump_canonical(assignment_to_json(assignment), 2) + "\n");
}

std::vector<Request> load_requests(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<Request> requests;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        Request request;
        request.request_id = record.at("request_id").get<std::string>();
        if (!seen.insert(request.request_id).second)
            throw InvariantViolation("request_id", "duplicate id '" + request.request_id + "'");
        request.arrival_time = record.at("arrival_time").get<std::int64_t>();
        const auto& origin = record.at("origin");
        request.origin = {origin[0].get<double>(), origin[1].get<double>()};
        if (request.origin.lat < -90.0 || request.origin.lat > 90.0 ||
            request.origin.lon < -180.0 || request.origin.lon > 180.0)
            throw InvariantViolation("origin", "lat in [-90,90], lon in [-180,180]");
        requests.push_back(std::move(request));
    }
    return requests;
}

void write_requests(const std::vector<Request>& requests, const std::filesystem::path& path) {
    std::ostringstream out;
    for (const Request& r : requests) {
        json rj;
        rj["request_id"] = r.request_id;
        rj["arrival_time"] = r.arrival_time;
        rj["origin"] = json::array({r.origin.lat, r.origin.lon});
        out << dump_canonical(rj) << '\n';
    }
    atomic_write(path, out.str());
}

}  // namespace ocpsps
