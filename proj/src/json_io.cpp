#include "ocpsps/json_io.hpp"

#include <cmath>
#include <fstream>

#include "ocpsps/errors.hpp"

namespace ocpsps {

double round6(double v) {
    double r = std::round(v * 1e6) / 1e6;
    return r == 0.0 ? 0.0 : r;  // normalize -0
}

json canonicalize(json j) {
    if (j.is_number_float()) {
        return json(round6(j.get<double>()));
    }
    if (j.is_object()) {
        for (auto& [key, value] : j.items()) value = canonicalize(value);
        return j;
    }
    if (j.is_array()) {
        for (auto& value : j) value = canonicalize(value);
        return j;
    }
    return j;
}

std::string dump_canonical(const json& j, int indent) {
    return canonicalize(j).dump(indent);
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw Error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace ocpsps
