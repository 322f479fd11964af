#pragma once

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace hothand {

// Minimal self-contained SVG line/step chart, enough to reproduce the
// trajectory overlay and decoded-state step plots without a plotting
// dependency.
class SvgChart {
  public:
    SvgChart(int width, int height) : width_(width), height_(height) {}

    void add_line(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  bool step = false) {
        lines_.push_back({pts, color, step});
        for (const auto& [x, y] : pts) {
            xmin_ = std::min(xmin_, x);
            xmax_ = std::max(xmax_, x);
            ymin_ = std::min(ymin_, y);
            ymax_ = std::max(ymax_, y);
        }
    }

    void add_marker(double x, double y, const std::string& color) {
        markers_.push_back({x, y, color});
        xmin_ = std::min(xmin_, x);
        xmax_ = std::max(xmax_, x);
        ymin_ = std::min(ymin_, y);
        ymax_ = std::max(ymax_, y);
    }

    std::string render() const {
        const double pad = 40.0;
        double xspan = xmax_ - xmin_, yspan = ymax_ - ymin_;
        if (xspan <= 0.0) xspan = 1.0;
        if (yspan <= 0.0) yspan = 1.0;
        auto px = [&](double x) { return pad + (x - xmin_) / xspan * (width_ - 2 * pad); };
        auto py = [&](double y) { return height_ - pad - (y - ymin_) / yspan * (height_ - 2 * pad); };

        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
            << height_ << "\">\n";
        out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        if (ymin_ <= 0.0 && 0.0 <= ymax_)
            out << "<line x1=\"" << fmt(px(xmin_)) << "\" y1=\"" << fmt(py(0)) << "\" x2=\""
                << fmt(px(xmax_)) << "\" y2=\"" << fmt(py(0))
                << "\" stroke=\"red\" stroke-dasharray=\"6 4\"/>\n";
        for (const auto& line : lines_) {
            out << "<polyline fill=\"none\" stroke=\"" << line.color << "\" points=\"";
            double prev_y = 0.0;
            for (std::size_t i = 0; i < line.pts.size(); ++i) {
                const auto& [x, y] = line.pts[i];
                if (line.step && i > 0) out << fmt(px(x)) << ',' << fmt(py(prev_y)) << ' ';
                out << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
                prev_y = y;
            }
            out << "\"/>\n";
        }
        for (const auto& m : markers_)
            out << "<circle cx=\"" << fmt(px(m.x)) << "\" cy=\"" << fmt(py(m.y))
                << "\" r=\"4\" fill=\"" << m.color << "\"/>\n";
        out << "</svg>\n";
        return out.str();
    }

  private:
    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return buf;
    }

    struct Line {
        std::vector<std::pair<double, double>> pts;
        std::string color;
        bool step;
    };
    struct Marker {
        double x, y;
        std::string color;
    };

    int width_, height_;
    std::vector<Line> lines_;
    std::vector<Marker> markers_;
    double xmin_ = std::numeric_limits<double>::max();
    double xmax_ = std::numeric_limits<double>::lowest();
    double ymin_ = std::numeric_limits<double>::max();
    double ymax_ = std::numeric_limits<double>::lowest();
};

}  // namespace hothand
