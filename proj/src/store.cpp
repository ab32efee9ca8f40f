#include "ocpsps/store.hpp"

#include <algorithm>
#include <fstream>

#include "ocpsps/json_io.hpp"

namespace ocpsps {

void OccupancyStore::register_lot(const ParkingLot& lot) {
    std::unique_lock lock(registry_mutex_);
    lots_[lot.lot_id] = lot;
    auto& sector_list = lot_sectors_[lot.lot_id];
    for (const std::string& sector_id : lot.sectors) {
        if (!sectors_.count(sector_id)) {
            auto entry = std::make_shared<SectorEntry>();
            entry->state.sector_id = sector_id;
            entry->state.lot_id = lot.lot_id;
            sectors_[sector_id] = std::move(entry);
        }
        if (std::find(sector_list.begin(), sector_list.end(), sector_id) == sector_list.end())
            sector_list.push_back(sector_id);
    }
    std::sort(sector_list.begin(), sector_list.end());
}

SectorState OccupancyStore::commit(const FrameInference& frame, const FrameError& frame_error) {
    std::shared_ptr<SectorEntry> entry;
    {
        std::unique_lock lock(registry_mutex_);
        auto it = sectors_.find(frame.sector_id);
        if (it == sectors_.end()) {
            entry = std::make_shared<SectorEntry>();
            entry->state.sector_id = frame.sector_id;
            entry->state.lot_id = frame.lot_id;
            sectors_[frame.sector_id] = entry;
            auto& sector_list = lot_sectors_[frame.lot_id];
            sector_list.push_back(frame.sector_id);
            std::sort(sector_list.begin(), sector_list.end());
        } else {
            entry = it->second;
        }
    }

    std::lock_guard sector_lock(entry->mutex);
    SectorState& state = entry->state;
    if (state.status != SectorState::Status::NoData && frame.timestamp < state.last_update)
        throw StaleFrame("frame '" + frame.frame_id + "' at t=" + std::to_string(frame.timestamp) +
                         " is older than the stored state at t=" + std::to_string(state.last_update));

    state.lot_id = frame.lot_id;
    state.last_update = frame.timestamp;
    if (frame_error.trusted) {
        state.status = SectorState::Status::Trusted;
        state.detections = frame.detections;
        state.unusable_error = 0.0;
        state.unusable_since = 0;
    } else {
        state.status = SectorState::Status::Unusable;
        state.detections.clear();
        state.unusable_error = frame_error.err_total;
        state.unusable_since = frame.timestamp;
    }
    return state;
}

LotSnapshot OccupancyStore::snapshot_locked(const std::string& lot_id) const {
    auto sector_it = lot_sectors_.find(lot_id);
    LotSnapshot snap;
    snap.lot_id = lot_id;
    if (sector_it == lot_sectors_.end()) return snap;

    // Lock all sectors of the lot (already sorted) for a consistent view.
    std::vector<std::shared_ptr<SectorEntry>> entries;
    for (const std::string& sector_id : sector_it->second) {
        auto it = sectors_.find(sector_id);
        if (it != sectors_.end()) entries.push_back(it->second);
    }
    std::vector<std::unique_lock<std::mutex>> locks;
    locks.reserve(entries.size());
    for (auto& entry : entries) locks.emplace_back(entry->mutex);

    std::int64_t available = 0;
    for (const auto& entry : entries) {
        const SectorState& state = entry->state;
        switch (state.status) {
            case SectorState::Status::NoData:
                break;
            case SectorState::Status::Unusable:
                snap.unusable_sector_count++;
                break;
            case SectorState::Status::Trusted:
                for (const Detection& d : state.detections) {
                    if (d.slot_class == SlotClass::Available) {
                        snap.available_slots.push_back({state.sector_id, d.bbox});
                        available++;
                    } else if (d.slot_class == SlotClass::Occupied) {
                        snap.occupied_count++;
                    }
                }
                break;
        }
    }
    std::sort(snap.available_slots.begin(), snap.available_slots.end(),
              [](const AvailableSlot& a, const AvailableSlot& b) {
                  if (a.sector_id != b.sector_id) return a.sector_id < b.sector_id;
                  return bbox_less(a.bbox, b.bbox);
              });
    std::int64_t denom = snap.occupied_count + available;
    snap.occupancy_rate = denom > 0 ? static_cast<double>(snap.occupied_count) / denom : 0.0;
    return snap;
}

LotSnapshot OccupancyStore::snapshot(const std::string& lot_id) const {
    std::shared_lock lock(registry_mutex_);
    if (!lots_.count(lot_id)) throw UnknownLot("lot '" + lot_id + "' is not registered");
    return snapshot_locked(lot_id);
}

std::vector<LotSnapshot> OccupancyStore::snapshot_all() const {
    std::shared_lock lock(registry_mutex_);
    std::vector<LotSnapshot> snaps;
    snaps.reserve(lots_.size());
    for (const auto& [lot_id, lot] : lots_) snaps.push_back(snapshot_locked(lot_id));
    return snaps;
}

std::vector<std::string> OccupancyStore::lot_ids() const {
    std::shared_lock lock(registry_mutex_);
    std::vector<std::string> ids;
    ids.reserve(lots_.size());
    for (const auto& [lot_id, lot] : lots_) ids.push_back(lot_id);
    return ids;
}

json snapshot_to_json(const LotSnapshot& snap) {
    json j;
    j["lot_id"] = snap.lot_id;
    json slots = json::array();
    for (const AvailableSlot& slot : snap.available_slots) {
        json sj;
        sj["sector_id"] = slot.sector_id;
        sj["bbox"] = json::array({slot.bbox.x_min, slot.bbox.y_min, slot.bbox.x_max, slot.bbox.y_max});
        slots.push_back(std::move(sj));
    }
    j["available_slots"] = std::move(slots);
    j["occupied_count"] = snap.occupied_count;
    j["unusable_sector_count"] = snap.unusable_sector_count;
    j["occupancy_rate"] = snap.occupancy_rate;
    return j;
}

LotSnapshot snapshot_from_json(const json& j) {
    LotSnapshot snap;
    snap.lot_id = j.at("lot_id").get<std::string>();
    for (const auto& sj : j.at("available_slots")) {
        const auto& b = sj.at("bbox");
        snap.available_slots.push_back(
            {sj.at("sector_id").get<std::string>(),
             BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()}});
    }
    snap.occupied_count = j.at("occupied_count").get<std::int64_t>();
    snap.unusable_sector_count = j.at("unusable_sector_count").get<std::int64_t>();
    snap.occupancy_rate = j.at("occupancy_rate").get<double>();
    return snap;
}

void write_snapshots(const std::vector<LotSnapshot>& snaps, const std::filesystem::path& path) {
    json arr = json::array();
    for (const LotSnapshot& snap : snaps) arr.push_back(snapshot_to_json(snap));
    atomic_write(path, dump_canonical(arr, 2) + "\n");
}

std::vector<LotSnapshot> load_snapshots(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    json arr;
    try {
        arr = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.filename().string() + ": " + e.what());
    }
    std::vector<LotSnapshot> snaps;
    for (const auto& j : arr) snaps.push_back(snapshot_from_json(j));
    return snaps;
}

}  // namespace ocpsps
