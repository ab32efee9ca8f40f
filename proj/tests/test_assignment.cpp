#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "helpers.hpp"
#include "ocpsps/assignment.hpp"

using namespace ocpsps;

namespace {

// Exhaustive minimum over all row->column injections, summing in row order.
double brute_force_min(const std::vector<std::vector<double>>& costs) {
    const int rows = static_cast<int>(costs.size());
    const int cols = static_cast<int>(costs[0].size());
    std::vector<int> perm(std::max(rows, cols));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < rows; ++i) {
            if (perm[i] < cols) total += costs[i][perm[i]];
        }
        // a rectangular matrix books min(rows, cols) real pairs
        int real_pairs = 0;
        for (int i = 0; i < rows; ++i)
            if (perm[i] < cols) ++real_pairs;
        if (real_pairs == std::min(rows, cols)) best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::vector<std::vector<double>> random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> costs(rows, std::vector<double>(cols));
    for (auto& row : costs)
        for (double& c : row) c = unit(rng);
    return costs;
}

Request request_at(const std::string& id, std::int64_t arrival, double lat = 37.0,
                   double lon = 127.0) {
    return Request{id, arrival, {lat, lon}};
}

SlotRef slot_in(const std::string& lot, int index) {
    double x = 0.05 + 0.1 * index;
    return SlotRef{lot, lot + "_s0", BBox{x, 0.1, x + 0.08, 0.3}};
}

}  // namespace

TEST_SUITE_BEGIN("assignment");

TEST_CASE("solve_assignment pinned cases") {
    SUBCASE("zero diagonal") {
        RawAssignment r = solve_assignment({{0, 1}, {1, 0}});
        CHECK(r.total_cost == 0.0);
        REQUIRE(r.pairs.size() == 2);
        CHECK(r.pairs[0] == std::pair<int, int>{0, 0});
        CHECK(r.pairs[1] == std::pair<int, int>{1, 1});
    }
    SUBCASE("3x3 brute-force verified example") {
        RawAssignment r = solve_assignment({{4, 1, 3}, {2, 0, 5}, {3, 2, 2}});
        CHECK(r.total_cost == 5.0);  // 1 + 2 + 2
        CHECK(r.unassigned_rows.empty());
    }
    SUBCASE("rectangular input keeps min(M,N) pairs") {
        RawAssignment r = solve_assignment({{1, 2}, {3, 4}, {5, 6}});
        CHECK(r.pairs.size() == 2);
        CHECK(r.unassigned_rows.size() == 1);
    }
    SUBCASE("empty side") {
        RawAssignment r = solve_assignment({});
        CHECK(r.pairs.empty());
        RawAssignment r2 = solve_assignment({{}, {}});
        CHECK(r2.pairs.empty());
        CHECK(r2.unassigned_rows.size() == 2);
    }
    SUBCASE("non-finite cost rejected") {
        CHECK_THROWS_AS(solve_assignment({{0.0, std::nan("")}}), NonFiniteCost);
        CHECK_THROWS_AS(solve_assignment({{std::numeric_limits<double>::infinity()}}),
                        NonFiniteCost);
    }
    SUBCASE("all-equal matrix takes the diagonal through the tie-break") {
        RawAssignment r = solve_assignment({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
        REQUIRE(r.pairs.size() == 3);
        for (int i = 0; i < 3; ++i) CHECK(r.pairs[i] == std::pair<int, int>{i, i});
    }
}

TEST_CASE("oracle equivalence on random matrices") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> dim(1, 6);
    for (int i = 0; i < 300; ++i) {
        int rows = dim(rng), cols = dim(rng);
        auto costs = random_matrix(rng, rows, cols);
        RawAssignment r = solve_assignment(costs);
        double expected = brute_force_min(costs);
        // re-sum the solver's pairs in row order to compare exactly
        double total = 0.0;
        for (auto [row, col] : r.pairs) total += costs[row][col];
        CHECK(total == expected);
        CHECK(r.total_cost == doctest::Approx(expected).epsilon(1e-12));
        CHECK(r.pairs.size() == static_cast<size_t>(std::min(rows, cols)));
    }
}

TEST_CASE("assignment pairs are injective on both sides") {
    std::mt19937_64 rng(103);
    for (int i = 0; i < 100; ++i) {
        auto costs = random_matrix(rng, 7, 5);
        RawAssignment r = solve_assignment(costs);
        std::set<int> rows, cols;
        for (auto [row, col] : r.pairs) {
            CHECK(rows.insert(row).second);
            CHECK(cols.insert(col).second);
        }
    }
}

TEST_CASE("constant shift leaves the matching unchanged") {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> shift_dist(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        auto costs = random_matrix(rng, 5, 5);
        RawAssignment base = solve_assignment(costs);
        double shift = shift_dist(rng);
        auto shifted = costs;
        for (auto& row : shifted)
            for (double& c : row) c += shift;
        RawAssignment moved = solve_assignment(shifted);
        CHECK(moved.pairs == base.pairs);
    }
}

TEST_CASE("prioritize") {
    std::map<std::string, double> occupancy{{"A", 0.9}, {"B", 0.1}};

    SUBCASE("equal sizes pass through") {
        std::vector<Request> requests{request_at("r1", 10), request_at("r2", 5)};
        std::vector<SlotRef> slots{slot_in("A", 0), slot_in("B", 0)};
        auto [rs, ss] = prioritize(requests, slots, occupancy);
        CHECK(rs.size() == 2);
        CHECK(ss.size() == 2);
        CHECK(rs[0].request_id == "r1");  // order untouched
    }
    SUBCASE("more requests than slots keeps the earliest arrivals") {
        std::vector<Request> requests{request_at("r1", 50), request_at("r2", 10),
                                      request_at("r3", 30), request_at("r4", 20),
                                      request_at("r5", 40)};
        std::vector<SlotRef> slots{slot_in("A", 0), slot_in("A", 1), slot_in("B", 0)};
        auto [rs, ss] = prioritize(requests, slots, occupancy);
        REQUIRE(rs.size() == 3);
        CHECK(rs[0].request_id == "r2");
        CHECK(rs[1].request_id == "r4");
        CHECK(rs[2].request_id == "r3");
        CHECK(ss.size() == 3);
    }
    SUBCASE("more slots than requests draws from low-occupancy lots") {
        std::vector<Request> requests{request_at("r1", 1), request_at("r2", 2)};
        std::vector<SlotRef> slots{slot_in("A", 0), slot_in("A", 1), slot_in("A", 2),
                                   slot_in("B", 0), slot_in("B", 1), slot_in("B", 2)};
        auto [rs, ss] = prioritize(requests, slots, occupancy);
        REQUIRE(ss.size() == 2);
        CHECK(ss[0].lot_id == "B");
        CHECK(ss[1].lot_id == "B");
    }
    SUBCASE("equal rates round-robin across lots") {
        std::map<std::string, double> equal{{"A", 0.5}, {"B", 0.5}};
        std::vector<Request> requests{request_at("r1", 1), request_at("r2", 2)};
        std::vector<SlotRef> slots{slot_in("A", 0), slot_in("A", 1), slot_in("B", 0),
                                   slot_in("B", 1)};
        auto [rs, ss] = prioritize(requests, slots, equal);
        REQUIRE(ss.size() == 2);
        CHECK(ss[0].lot_id == "A");
        CHECK(ss[1].lot_id == "B");
    }
    SUBCASE("never returns more than min(M,N)") {
        std::mt19937_64 rng(109);
        std::uniform_int_distribution<int> count(0, 12);
        for (int i = 0; i < 100; ++i) {
            int m = count(rng), n = count(rng);
            std::vector<Request> requests;
            for (int k = 0; k < m; ++k) requests.push_back(request_at("r" + std::to_string(k), k));
            std::vector<SlotRef> slots;
            for (int k = 0; k < n; ++k) slots.push_back(slot_in(k % 2 ? "A" : "B", k));
            auto [rs, ss] = prioritize(requests, slots, occupancy);
            CHECK(std::min(rs.size(), ss.size()) <= static_cast<size_t>(std::min(m, n)));
            CHECK(rs.size() == static_cast<size_t>(std::min(m, n)) ||
                  ss.size() == static_cast<size_t>(std::min(m, n)));
        }
    }
}

namespace {

std::vector<ParkingLot> two_lots(double price_a = 1.0, double price_b = 3.0) {
    ParkingLot a;
    a.lot_id = "A";
    a.gps_lat = 37.0;
    a.gps_lon = 127.0;
    a.price = price_a;
    a.capacity = 8;
    ParkingLot b = a;
    b.lot_id = "B";
    b.gps_lat = 37.5;
    b.gps_lon = 127.5;
    b.price = price_b;
    return {a, b};
}

}  // namespace

TEST_CASE("build_cost_matrix") {
    std::vector<ParkingLot> lots = two_lots();

    SUBCASE("degenerate 1x1 normalizes to zero") {
        std::vector<Request> requests{request_at("r1", 1, 37.0, 127.0)};
        std::vector<SlotRef> slots{slot_in("A", 0)};
        StaticMatrixRoutingProvider routing =
            make_geodesic_matrix({{37.0, 127.0}}, lots);
        CostMatrix m = build_cost_matrix(requests, slots, lots, routing, {0.5});
        CHECK(m.at(0, 0) == 0.0);
        CHECK(m.components_at(0, 0).price == 0.0);
        CHECK(m.components_at(0, 0).travel == 0.0);
        CHECK(m.components_at(0, 0).distance == 0.0);
    }
    SUBCASE("gamma 1 depends only on the lot price") {
        std::vector<Request> requests{request_at("r1", 1, 37.0, 127.0),
                                      request_at("r2", 2, 37.6, 127.6)};
        std::vector<SlotRef> slots{slot_in("A", 0), slot_in("A", 1), slot_in("B", 0)};
        std::vector<GeoPoint> origins{{37.0, 127.0}, {37.6, 127.6}};
        StaticMatrixRoutingProvider routing = make_geodesic_matrix(origins, lots);
        CostMatrix m = build_cost_matrix(requests, slots, lots, routing, {1.0});
        // columns of lot A cost 0 (cheapest), lot B costs 1, for every row
        for (size_t r = 0; r < 2; ++r) {
            CHECK(m.at(r, 0) == 0.0);
            CHECK(m.at(r, 1) == 0.0);
            CHECK(m.at(r, 2) == 1.0);
        }
    }
    SUBCASE("cost equals the weighted component sum") {
        std::vector<Request> requests{request_at("r1", 1, 37.0, 127.0),
                                      request_at("r2", 2, 37.4, 127.4)};
        std::vector<SlotRef> slots{slot_in("A", 0), slot_in("B", 0)};
        std::vector<GeoPoint> origins{{37.0, 127.0}, {37.4, 127.4}};
        StaticMatrixRoutingProvider routing = make_geodesic_matrix(origins, lots);
        double gamma = 0.5;
        CostMatrix m = build_cost_matrix(requests, slots, lots, routing, {gamma});
        for (size_t r = 0; r < 2; ++r) {
            for (size_t c = 0; c < 2; ++c) {
                const CostComponents& comp = m.components_at(r, c);
                CHECK(m.at(r, c) == doctest::Approx(gamma * comp.price +
                                                    (1 - gamma) * (comp.travel + comp.distance))
                                        .epsilon(1e-12));
                CHECK(comp.price >= 0.0);
                CHECK(comp.price <= 1.0);
                CHECK(comp.travel >= 0.0);
                CHECK(comp.travel <= 1.0);
                CHECK(comp.distance >= 0.0);
                CHECK(comp.distance <= 1.0);
            }
        }
    }
    SUBCASE("price scaling leaves the matching unchanged") {
        std::mt19937_64 rng(113);
        std::uniform_real_distribution<double> coord(36.9, 37.6);
        std::vector<Request> requests;
        std::vector<GeoPoint> origins;
        for (int k = 0; k < 5; ++k) {
            double lat = coord(rng), lon = coord(rng) + 90.0;
            requests.push_back(request_at("r" + std::to_string(k), k, lat, lon));
            origins.push_back({lat, lon});
        }
        std::vector<SlotRef> slots{slot_in("A", 0), slot_in("A", 1), slot_in("B", 0),
                                   slot_in("B", 1), slot_in("B", 2)};
        StaticMatrixRoutingProvider routing = make_geodesic_matrix(origins, two_lots());
        CostMatrix base = build_cost_matrix(requests, slots, two_lots(), routing, {0.5});
        CostMatrix scaled = build_cost_matrix(requests, slots, two_lots(7.0, 21.0), routing, {0.5});
        Assignment a1 = hungarian(base);
        Assignment a2 = hungarian(scaled);
        REQUIRE(a1.pairs.size() == a2.pairs.size());
        for (size_t i = 0; i < a1.pairs.size(); ++i) {
            CHECK(a1.pairs[i].request_id == a2.pairs[i].request_id);
            CHECK(a1.pairs[i].slot.lot_id == a2.pairs[i].slot.lot_id);
            CHECK(a1.pairs[i].slot.sector_id == a2.pairs[i].slot.sector_id);
        }
    }
    SUBCASE("traffic factors scale travel before normalization") {
        std::vector<Request> requests{request_at("r1", 1, 37.0, 127.0)};
        std::vector<SlotRef> slots{slot_in("A", 0), slot_in("B", 0)};
        StaticMatrixRoutingProvider routing = make_geodesic_matrix({{37.0, 127.0}}, lots);
        // lot A is at the origin: travel 0 regardless of factor; push B's travel
        CostMatrix base = build_cost_matrix(requests, slots, lots, routing, {0.0});
        CostMatrix jammed = build_cost_matrix(requests, slots, lots, routing, {0.0},
                                              {{"B", 4.0}});
        CHECK(base.components_at(0, 1).travel == 1.0);
        CHECK(jammed.components_at(0, 1).travel == 1.0);  // still the max after scaling
        CHECK(base.components_at(0, 0).travel == 0.0);
    }
    SUBCASE("unregistered lot rejected") {
        std::vector<Request> requests{request_at("r1", 1)};
        std::vector<SlotRef> slots{slot_in("Z", 0)};
        StaticMatrixRoutingProvider routing = make_geodesic_matrix({{37.0, 127.0}}, lots);
        CHECK_THROWS_AS(build_cost_matrix(requests, slots, lots, routing, {0.5}), UnknownLot);
    }
}

TEST_CASE("hungarian on a cost matrix carries slot and component data") {
    std::vector<ParkingLot> lots = two_lots();
    std::vector<Request> requests{request_at("r1", 1, 37.0, 127.0),
                                  request_at("r2", 2, 37.5, 127.5),
                                  request_at("r3", 3, 37.2, 127.2)};
    std::vector<GeoPoint> origins{{37.0, 127.0}, {37.5, 127.5}, {37.2, 127.2}};
    std::vector<SlotRef> slots{slot_in("A", 0), slot_in("B", 0)};
    StaticMatrixRoutingProvider routing = make_geodesic_matrix(origins, lots);
    CostMatrix matrix = build_cost_matrix(requests, slots, lots, routing, {0.5});
    Assignment assignment = hungarian(matrix);
    CHECK(assignment.pairs.size() == 2);
    CHECK(assignment.unassigned_requests.size() == 1);
    double resum = 0.0;
    for (const MatchedPair& p : assignment.pairs) resum += p.cost;
    CHECK(assignment.total_cost == doctest::Approx(resum).epsilon(1e-9));
}

TEST_SUITE_END();
