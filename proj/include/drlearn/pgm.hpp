#ifndef DRLEARN_PGM_HPP
#define DRLEARN_PGM_HPP

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "drlearn/matrix.hpp"

namespace drlearn {

/// Write a tiled grayscale raster (binary PGM, maxval 255). Each matrix row
/// is one square tile of side sqrt(cols); tiles are laid out in a
/// tiles_per_side x tiles_per_side mosaic, row-major. Values must be in
/// [0,1].
inline void write_pgm_grid(const Matrix& tiles, std::size_t tiles_per_side, const std::string& path) {
    if (tiles.rows() != tiles_per_side * tiles_per_side)
        throw std::invalid_argument("write_pgm_grid: row count must equal tiles_per_side^2");
    const std::size_t side = static_cast<std::size_t>(std::lround(std::sqrt(double(tiles.cols()))));
    if (side * side != tiles.cols())
        throw std::invalid_argument("write_pgm_grid: tile length is not a perfect square");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    const std::size_t image_side = tiles_per_side * side;
    out << "P5\n" << image_side << " " << image_side << "\n255\n";
    for (std::size_t py = 0; py < image_side; ++py) {
        const std::size_t tile_row = py / side;
        const std::size_t y = py % side;
        for (std::size_t px = 0; px < image_side; ++px) {
            const std::size_t tile_col = px / side;
            const std::size_t x = px % side;
            const double v = tiles(tile_row * tiles_per_side + tile_col, y * side + x);
            if (v < 0.0 || v > 1.0) throw std::invalid_argument("write_pgm_grid: value outside [0,1]");
            out.put(char(static_cast<unsigned char>(std::lround(v * 255.0))));
        }
    }
}

} // namespace drlearn

#endif
