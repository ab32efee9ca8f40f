#include "ocpsps/routing.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "ocpsps/json_io.hpp"

namespace ocpsps {

namespace {
constexpr double kOriginTolerance = 1e-9;
}

StaticMatrixRoutingProvider::StaticMatrixRoutingProvider(
    std::vector<GeoPoint> origins, std::vector<std::string> lot_ids,
    std::vector<std::vector<double>> distance_km, std::vector<std::vector<double>> travel_min)
    : origins_(std::move(origins)),
      lot_ids_(std::move(lot_ids)),
      distance_km_(std::move(distance_km)),
      travel_min_(std::move(travel_min)) {
    if (distance_km_.size() != origins_.size() || travel_min_.size() != origins_.size())
        throw Error("routing matrix row count does not match origin count");
    for (size_t r = 0; r < origins_.size(); ++r) {
        if (distance_km_[r].size() != lot_ids_.size() || travel_min_[r].size() != lot_ids_.size())
            throw Error("routing matrix column count does not match lot count");
    }
    for (size_t c = 0; c < lot_ids_.size(); ++c) lot_cols_[lot_ids_[c]] = c;
}

StaticMatrixRoutingProvider StaticMatrixRoutingProvider::from_file(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.filename().string() + ": " + e.what());
    }
    std::vector<GeoPoint> origins;
    for (const auto& o : j.at("origins")) origins.push_back({o[0].get<double>(), o[1].get<double>()});
    std::vector<std::string> lot_ids = j.at("lots").get<std::vector<std::string>>();
    auto matrix = [&](const char* key) {
        std::vector<std::vector<double>> rows;
        for (const auto& row : j.at(key)) rows.push_back(row.get<std::vector<double>>());
        return rows;
    };
    return StaticMatrixRoutingProvider(std::move(origins), std::move(lot_ids),
                                       matrix("distance_km"), matrix("travel_min"));
}

void StaticMatrixRoutingProvider::save(const std::filesystem::path& path) const {
    json j;
    json origins = json::array();
    for (const GeoPoint& o : origins_) origins.push_back(json::array({o.lat, o.lon}));
    j["origins"] = std::move(origins);
    j["lots"] = lot_ids_;
    j["distance_km"] = distance_km_;
    j["travel_min"] = travel_min_;
    atomic_write(path, dump_canonical(j, 2) + "\n");
}

RouteEstimate StaticMatrixRoutingProvider::route(const GeoPoint& origin,
                                                 const ParkingLot& lot) const {
    auto col_it = lot_cols_.find(lot.lot_id);
    if (col_it == lot_cols_.end())
        throw RoutingUnavailable("no routing column for lot '" + lot.lot_id + "'");
    for (size_t r = 0; r < origins_.size(); ++r) {
        if (std::abs(origins_[r].lat - origin.lat) <= kOriginTolerance &&
            std::abs(origins_[r].lon - origin.lon) <= kOriginTolerance) {
            return {distance_km_[r][col_it->second], travel_min_[r][col_it->second]};
        }
    }
    std::ostringstream msg;
    msg << "no routing row for origin (" << origin.lat << ", " << origin.lon << ")";
    throw RoutingUnavailable(msg.str());
}

HttpRoutingProvider::HttpRoutingProvider(std::string host, int port, std::string path,
                                         int timeout_sec)
    : host_(std::move(host)), port_(port), path_(std::move(path)), timeout_sec_(timeout_sec) {}

RouteEstimate HttpRoutingProvider::route(const GeoPoint& origin, const ParkingLot& lot) const {
    std::tuple<double, double, std::string> key{origin.lat, origin.lon, lot.lot_id};
    {
        std::shared_lock lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }

    // One client per in-flight request keeps concurrent queries independent.
    httplib::Client client(host_, port_);
    client.set_connection_timeout(timeout_sec_);
    client.set_read_timeout(timeout_sec_);
    std::ostringstream query;
    query << path_ << "?from_lat=" << origin.lat << "&from_lon=" << origin.lon
          << "&to_lat=" << lot.gps_lat << "&to_lon=" << lot.gps_lon;
    auto response = client.Get(query.str());
    if (!response || response->status != 200)
        throw RoutingUnavailable("routing request to " + host_ + " failed for lot '" +
                                 lot.lot_id + "'");
    RouteEstimate estimate;
    try {
        json body = json::parse(response->body);
        estimate.distance_km = body.at("distance_km").get<double>();
        estimate.travel_min = body.at("travel_min").get<double>();
    } catch (const std::exception& e) {
        throw RoutingUnavailable(std::string("malformed routing response: ") + e.what());
    }

    std::unique_lock lock(cache_mutex_);
    cache_.emplace(key, estimate);
    return estimate;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    constexpr double kEarthRadiusKm = 6371.0;
    constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
    double lat1 = a.lat * kDegToRad, lat2 = b.lat * kDegToRad;
    double dlat = (b.lat - a.lat) * kDegToRad;
    double dlon = (b.lon - a.lon) * kDegToRad;
    double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

StaticMatrixRoutingProvider make_geodesic_matrix(const std::vector<GeoPoint>& origins,
                                                 const std::vector<ParkingLot>& lots,
                                                 double road_speed_kmh) {
    std::vector<std::string> lot_ids;
    lot_ids.reserve(lots.size());
    for (const ParkingLot& lot : lots) lot_ids.push_back(lot.lot_id);
    std::vector<std::vector<double>> distance(origins.size(), std::vector<double>(lots.size()));
    std::vector<std::vector<double>> travel(origins.size(), std::vector<double>(lots.size()));
    for (size_t r = 0; r < origins.size(); ++r) {
        for (size_t c = 0; c < lots.size(); ++c) {
            double km = haversine_km(origins[r], {lots[c].gps_lat, lots[c].gps_lon});
            distance[r][c] = km;
            travel[r][c] = km / road_speed_kmh * 60.0;
        }
    }
    return StaticMatrixRoutingProvider(origins, std::move(lot_ids), std::move(distance),
                                       std::move(travel));
}

}  // namespace ocpsps
