#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace smq {

inline constexpr std::array<std::string_view, 12> kTimelinePalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};

std::string_view timeline_color(int mapped_class);

/// Standalone SVG with the ground truth bar above the prediction bar. The
/// prediction is relabelled with its own Hungarian mapping onto `gt` first.
/// One <rect> per segment of each bar.
std::string timeline_svg(const std::vector<int>& pred, const std::vector<int>& gt, double width = 1000.0,
                         double bar_height = 30.0);

}  // namespace smq
