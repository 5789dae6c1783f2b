#pragma once

#include "ppct/projector.hpp"

#include <string>

namespace ppct {

enum class RampFilter { RamLak, SheppLogan, Hann };

/// Parses "ram-lak", "shepp-logan" or "hann".
RampFilter parse_filter(const std::string& name);

/// Filtered back projection of parallel data onto an n x n image. Needs at least
/// two angles covering a half turn; offsets must be uniform.
Image fbp_parallel(const ParallelSinogram& ps, RampFilter filter, int n);

} // namespace ppct
