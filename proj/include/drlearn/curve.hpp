#ifndef DRLEARN_CURVE_HPP
#define DRLEARN_CURVE_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "drlearn/matrix.hpp"

namespace drlearn {

/// Per-epoch training records, serialized as CSV with a header row. The
/// column set is fixed per experiment kind; the first column is always the
/// epoch index and must be strictly increasing.
struct LearningCurve {
    std::vector<std::string> columns;
    std::vector<Vector> rows;

    void add_row(const Vector& row) {
        if (row.size() != columns.size())
            throw std::invalid_argument("LearningCurve: row width does not match columns");
        for (double v : row)
            if (!std::isfinite(v)) throw std::invalid_argument("LearningCurve: non-finite value");
        if (!rows.empty() && row[0] <= rows.back()[0])
            throw std::invalid_argument("LearningCurve: epochs must be strictly increasing");
        rows.push_back(row);
    }
};

/// Fixed %.10g formatting, so identical runs serialize byte-identically.
inline std::string format_csv_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline void write_csv(const LearningCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // binary: identical bytes on every platform
    if (!out) throw std::runtime_error("cannot write " + path);
    for (std::size_t c = 0; c < curve.columns.size(); ++c) {
        if (c) out << ',';
        out << curve.columns[c];
    }
    out << '\n';
    for (const auto& row : curve.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_csv_value(row[c]);
        }
        out << '\n';
    }
}

} // namespace drlearn

#endif
