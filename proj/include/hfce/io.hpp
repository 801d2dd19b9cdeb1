#ifndef HFCE_IO_HPP
#define HFCE_IO_HPP

#include <string>

#include "hfce/channel.hpp"
#include "hfce/polar_grid.hpp"

namespace hfce {

/// Writes <base>.hdr.csv (geometry, paths, subarray VR) and <base>.bin
/// (h_user, ris_bs column-major, h_cascaded as little-endian re/im double
/// pairs). The pair is the cross-implementation regression format.
void export_channel(const SystemGeometry& geom, const ChannelRealization& ch,
                    const std::string& base_path);

struct ImportedChannel {
    SystemGeometry geom;
    ChannelRealization ch;
};

ImportedChannel import_channel(const std::string& base_path);

/// (angle, range, curvature) rows for inspection and cross-language checks.
void write_grid_csv(const PolarGrid& grid, const std::string& path);

}  // namespace hfce

#endif
