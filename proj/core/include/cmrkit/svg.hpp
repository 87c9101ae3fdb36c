#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cmrkit {

// Minimal self-contained SVG line/scatter plot. Deterministic output: no
// timestamps, fixed number formatting.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void add_points(std::vector<std::pair<double, double>> pts,
                  std::string color, std::string name);
  void add_line(std::vector<std::pair<double, double>> pts, std::string color,
                std::string name, bool dashed = false);
  // Extra note under the x-axis label (e.g. the unit-to-token conversion).
  void set_x_note(std::string note) { x_note_ = std::move(note); }

  std::string render() const;
  void write(const std::string& path) const;

 private:
  struct Series {
    std::vector<std::pair<double, double>> pts;
    std::string color;
    std::string name;
    bool line = false;
    bool dashed = false;
  };

  std::string title_, x_label_, y_label_, x_note_;
  std::vector<Series> series_;
};

}  // namespace cmrkit
