#pragma once

// Placement of channel weights on the 10x10 electrode grid, with CSV and PGM export.

#include "lpsvm/csv.hpp"
#include "lpsvm/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>

namespace lpsvm {

inline constexpr std::size_t kGridSide = 10;

template <class T>
using GridOf = std::array<std::array<std::optional<T>, kGridSide>, kGridSide>;

/// Values on the grid; an empty optional is the sentinel for an unmapped cell.
using HeatGrid = GridOf<double>;

struct ElectrodeMap {
    GridOf<std::size_t> grid{};

    /// Row-major identity placement of channels 0..m-1; trailing cells stay empty.
    static ElectrodeMap identity(std::size_t channels = 96) {
        if (channels > kGridSide * kGridSide) throw ConfigError("at most 100 channels fit on the grid");
        ElectrodeMap map;
        for (std::size_t j = 0; j < channels; ++j) map.grid[j / kGridSide][j % kGridSide] = j;
        return map;
    }

    std::size_t mapped() const {
        std::size_t n = 0;
        for (const auto& row : grid)
            for (const auto& cell : row) n += cell.has_value();
        return n;
    }

    /// Every present index unique and < channels.
    void validate(std::size_t channels) const {
        std::set<std::size_t> seen;
        for (std::size_t r = 0; r < kGridSide; ++r)
            for (std::size_t c = 0; c < kGridSide; ++c) {
                const auto& cell = grid[r][c];
                if (!cell) continue;
                if (*cell >= channels)
                    throw ConfigError("map cell (" + std::to_string(r) + "," + std::to_string(c) + ") names channel " +
                                      std::to_string(*cell) + " but only " + std::to_string(channels) + " exist");
                if (!seen.insert(*cell).second) throw ConfigError("channel " + std::to_string(*cell) + " mapped twice");
            }
    }
};

/// 10 lines of 10 comma-separated channel indices; an empty field leaves the cell unmapped.
inline ElectrodeMap read_electrode_map(std::istream& in) {
    const auto lines = csv::read_lines(in);
    if (lines.size() != kGridSide) throw Error("electrode map must have 10 rows, found " + std::to_string(lines.size()));
    ElectrodeMap map;
    for (std::size_t r = 0; r < kGridSide; ++r) {
        const auto fields = csv::split_line(lines[r]);
        if (fields.size() != kGridSide) throw Error("electrode map row " + std::to_string(r + 1) + " must have 10 fields");
        for (std::size_t c = 0; c < kGridSide; ++c) {
            if (fields[c].empty()) continue;
            const auto v = csv::parse_int(fields[c]);
            if (!v || *v < 0) throw Error("bad channel index '" + fields[c] + "' in electrode map row " + std::to_string(r + 1));
            map.grid[r][c] = static_cast<std::size_t>(*v);
        }
    }
    return map;
}

inline ElectrodeMap load_electrode_map(const std::string& path) {
    auto in = csv::open_input(path);
    return read_electrode_map(in);
}

enum class WeightTransform { raw, abs, log_abs };

inline WeightTransform parse_transform(const std::string& s) {
    if (s == "raw") return WeightTransform::raw;
    if (s == "abs") return WeightTransform::abs;
    if (s == "log_abs" || s == "log-abs") return WeightTransform::log_abs;
    throw ConfigError("unknown transform '" + s + "'");
}

inline HeatGrid map_weights(const Vector& w, const ElectrodeMap& map, WeightTransform transform) {
    map.validate(static_cast<std::size_t>(w.size()));
    HeatGrid out{};
    for (std::size_t r = 0; r < kGridSide; ++r)
        for (std::size_t c = 0; c < kGridSide; ++c) {
            const auto& cell = map.grid[r][c];
            if (!cell) continue;
            const double v = w(static_cast<Index>(*cell));
            switch (transform) {
            case WeightTransform::raw: out[r][c] = v; break;
            case WeightTransform::abs: out[r][c] = std::abs(v); break;
            case WeightTransform::log_abs: out[r][c] = std::log10(std::abs(v) + 1e-16); break;
            }
        }
    return out;
}

inline void write_grid_csv(std::ostream& out, const HeatGrid& grid) {
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < kGridSide; ++c) {
            if (c) out << ',';
            if (row[c]) out << csv::format_double(*row[c]);
        }
        out << '\n';
    }
}

inline HeatGrid read_grid_csv(std::istream& in) {
    const auto lines = csv::read_lines(in);
    if (lines.size() != kGridSide) throw Error("grid must have 10 rows");
    HeatGrid grid{};
    for (std::size_t r = 0; r < kGridSide; ++r) {
        const auto fields = csv::split_line(lines[r]);
        if (fields.size() != kGridSide) throw Error("grid row " + std::to_string(r + 1) + " must have 10 fields");
        for (std::size_t c = 0; c < kGridSide; ++c) {
            if (fields[c].empty()) continue;
            const auto v = csv::parse_double(fields[c]);
            if (!v) throw Error("bad grid value '" + fields[c] + "'");
            grid[r][c] = *v;
        }
    }
    return grid;
}

/// Binary PGM (P5), 10x10, 8-bit. Mapped cells are min-max scaled to 0..255
/// (255 for all of them when min == max); unmapped cells are 0.
inline void write_grid_pgm(std::ostream& out, const HeatGrid& grid) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& row : grid)
        for (const auto& cell : row)
            if (cell) {
                lo = std::min(lo, *cell);
                hi = std::max(hi, *cell);
            }
    out << "P5\n" << kGridSide << ' ' << kGridSide << "\n255\n";
    for (const auto& row : grid)
        for (const auto& cell : row) {
            std::uint8_t px = 0;
            if (cell) px = hi > lo ? static_cast<std::uint8_t>(std::lround(255.0 * (*cell - lo) / (hi - lo))) : 255;
            out.put(static_cast<char>(px));
        }
}

enum class GridFormat { csv, pgm };

inline GridFormat parse_grid_format(const std::string& s) {
    if (s == "csv") return GridFormat::csv;
    if (s == "pgm") return GridFormat::pgm;
    throw ConfigError("unknown grid format '" + s + "'");
}

inline void export_grid(const HeatGrid& grid, GridFormat format, const std::string& path) {
    auto out = csv::open_output(path);
    if (format == GridFormat::csv)
        write_grid_csv(out, grid);
    else
        write_grid_pgm(out, grid);
    if (!out) throw Error("failed writing '" + path + "'");
}

} // namespace lpsvm
