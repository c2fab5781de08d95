#ifndef CONEFP_IO_HPP
#define CONEFP_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "conefp/grid.hpp"

namespace conefp::io {

/// Write atomically: stage into a sibling temp file, then rename over the
/// target so readers never observe a half-written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

/// CSV with header "<abscissa>,u1,u2" and one row per grid node, printed
/// with enough digits to round-trip binary64.
inline std::string grid_pair_csv(const GridPair& u, const std::string& abscissa = "t") {
    std::ostringstream os;
    os << abscissa << ",u1,u2\n";
    char buf[96];
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(u.size() - 1);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", t, u.u1.values[j], u.u2.values[j]);
        os << buf;
    }
    return os.str();
}

inline void write_grid_pair_csv(const std::filesystem::path& path, const GridPair& u,
                                const std::string& abscissa = "t") {
    write_file_atomic(path, grid_pair_csv(u, abscissa));
}

/// Read a CSV produced by write_grid_pair_csv (header line skipped; the
/// abscissa column is ignored and assumed uniform).
inline GridPair read_grid_pair_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line); // header
    std::vector<double> u1, u2;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double t, a, b;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &a, &b) != 3)
            throw std::runtime_error("malformed CSV row in " + path.string() + ": " + line);
        u1.push_back(a);
        u2.push_back(b);
    }
    if (u1.size() < 2) throw std::runtime_error("CSV " + path.string() + " holds fewer than 2 rows");
    return GridPair(GridFunction(std::move(u1)), GridFunction(std::move(u2)));
}

} // namespace conefp::io

#endif // CONEFP_IO_HPP
