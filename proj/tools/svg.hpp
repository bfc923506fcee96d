#pragma once

#include "critreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace critreg::svg {

// Blue-white-red ramp on t in [0, 1].
inline std::string ramp(double t) {
    if (!std::isfinite(t)) return "#808080";
    t = std::clamp(t, 0.0, 1.0);
    double r, g, b;
    if (t < 0.5) {
        const double s = t / 0.5;
        r = 0.23 + 0.77 * s; g = 0.30 + 0.70 * s; b = 0.75 + 0.25 * s;
    } else {
        const double s = (t - 0.5) / 0.5;
        r = 1.0 - 0.29 * s; g = 1.0 - 0.98 * s; b = 1.0 - 0.85 * s;
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", int(r * 255 + 0.5), int(g * 255 + 0.5), int(b * 255 + 0.5));
    return buf;
}

class Canvas {
public:
    Canvas(BoundingBox box, double width_px = 640.0) : box_(box) {
        const double w = box.hi.x - box.lo.x, h = box.hi.y - box.lo.y;
        scale_ = width_px / w;
        width_ = width_px;
        height_ = h * scale_;
    }

    void rect(Vec2 centre, double size, const std::string& fill) {
        const Vec2 c = map(centre);
        const double s = size * scale_;
        os_ << "<rect x=\"" << num(c.x - s / 2) << "\" y=\"" << num(c.y - s / 2) << "\" width=\"" << num(s)
            << "\" height=\"" << num(s) << "\" fill=\"" << fill << "\"/>\n";
    }

    void polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width = 1.5, bool closed = false) {
        os_ << (closed ? "<polygon" : "<polyline") << " fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
            << num(width) << "\" points=\"";
        for (const auto& p : pts) {
            const Vec2 q = map(p);
            os_ << num(q.x) << ',' << num(q.y) << ' ';
        }
        os_ << "\"/>\n";
    }

    void circle(Vec2 centre, double radius_px, const std::string& fill, const std::string& stroke = "none") {
        const Vec2 c = map(centre);
        os_ << "<circle cx=\"" << num(c.x) << "\" cy=\"" << num(c.y) << "\" r=\"" << num(radius_px) << "\" fill=\""
            << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }

    void text(Vec2 at, const std::string& s, double size_px = 12) {
        const Vec2 c = map(at);
        os_ << "<text x=\"" << num(c.x) << "\" y=\"" << num(c.y) << "\" font-size=\"" << num(size_px)
            << "\" font-family=\"sans-serif\">" << s << "</text>\n";
    }

    [[nodiscard]] std::string str() const {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\"" << num(height_)
            << "\" viewBox=\"0 0 " << num(width_) << ' ' << num(height_) << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << os_.str() << "</svg>\n";
        return out.str();
    }

private:
    Vec2 map(Vec2 p) const { return {(p.x - box_.lo.x) * scale_, (box_.hi.y - p.y) * scale_}; }
    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }

    BoundingBox box_;
    double scale_ = 1.0;
    double width_ = 0.0;
    double height_ = 0.0;
    std::ostringstream os_;
};

inline BoundingBox padded(BoundingBox b, double frac = 0.05) {
    const double p = frac * std::max(b.hi.x - b.lo.x, b.hi.y - b.lo.y);
    return {{b.lo.x - p, b.lo.y - p}, {b.hi.x + p, b.hi.y + p}};
}

} // namespace critreg::svg
