#include "smq/plot.hpp"

#include <algorithm>
#include <cstdio>

#include "smq/error.hpp"
#include "smq/metrics.hpp"

namespace smq {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

void emit_bar(std::string& svg, const std::vector<int>& labels, double y, double scale, double height) {
  for (const auto& s : to_segments(labels)) {
    svg += "  <rect x=\"" + fmt(static_cast<double>(s.start) * scale) + "\" y=\"" + fmt(y) + "\" width=\"" +
           fmt(static_cast<double>(s.end - s.start) * scale) + "\" height=\"" + fmt(height) + "\" fill=\"" +
           std::string(timeline_color(s.label)) + "\"/>\n";
  }
}

}  // namespace

std::string_view timeline_color(int mapped_class) {
  const auto n = static_cast<int>(kTimelinePalette.size());
  return kTimelinePalette[static_cast<std::size_t>(((mapped_class % n) + n) % n)];
}

std::string timeline_svg(const std::vector<int>& pred, const std::vector<int>& gt, double width,
                         double bar_height) {
  if (pred.size() != gt.size()) {
    throw InvalidArgument("plot: prediction has " + std::to_string(pred.size()) + " frames, ground truth " +
                          std::to_string(gt.size()));
  }
  if (gt.empty()) throw InvalidArgument("plot: empty label sequence");
  if (*std::min_element(pred.begin(), pred.end()) < 0 || *std::min_element(gt.begin(), gt.end()) < 0) {
    throw InvalidArgument("plot: labels must be non-negative");
  }
  const auto num_pred = static_cast<std::size_t>(*std::max_element(pred.begin(), pred.end()) + 1);
  const auto num_gt = static_cast<std::size_t>(*std::max_element(gt.begin(), gt.end()) + 1);
  const std::vector<LabelSeq> p{pred}, g{gt};
  const auto mapped = apply_mapping(p, hungarian_match(p, g, num_pred, num_gt)).front();

  const double margin = 10.0, gap = 10.0;
  const double scale = width / static_cast<double>(gt.size());
  const double total_w = width + 2 * margin;
  const double total_h = 2 * bar_height + gap + 2 * margin;
  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(total_w) + "\" height=\"" + fmt(total_h) +
         "\" viewBox=\"0 0 " + fmt(total_w) + " " + fmt(total_h) + "\">\n";
  svg += " <g id=\"ground_truth\" transform=\"translate(" + fmt(margin) + ",0)\">\n";
  emit_bar(svg, gt, margin, scale, bar_height);
  svg += " </g>\n";
  svg += " <g id=\"prediction\" transform=\"translate(" + fmt(margin) + ",0)\">\n";
  emit_bar(svg, mapped, margin + bar_height + gap, scale, bar_height);
  svg += " </g>\n</svg>\n";
  return svg;
}

}  // namespace smq
