#pragma once

#include <string>
#include <vector>

namespace aewb {

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;  // color ramp input; ignored by svg_polyline
};

// Standalone SVG scatter plot: fixed 640x480 viewBox, axes with the data
// ranges as labels, one circle per point shaded on a linear blue-to-red
// ramp over `value`. Output carries no timestamps and is byte-stable for
// equal inputs. A degenerate range places points at the plot center.
std::string svg_scatter(const std::vector<PlotPoint>& points);

// Same frame as svg_scatter but a single polyline through the points in
// the order given (e.g. a precision-recall curve).
std::string svg_polyline(const std::vector<PlotPoint>& points);

}  // namespace aewb
