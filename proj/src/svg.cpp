// Copyright 2026 The striker Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "striker/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace striker::svg {

Writer::Writer(double width, double height) : width_(width), height_(height) {}

void Writer::rect(double x, double y, double w, double h, const std::string& fill,
                  const std::string& stroke, double stroke_width) {
  body_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"" << fill << "\"";
  if (!stroke.empty()) {
    body_ << " stroke=\"" << stroke << "\" stroke-width=\"" << stroke_width << "\"";
  }
  body_ << "/>\n";
}

void Writer::circle(double cx, double cy, double r, const std::string& fill) {
  body_ << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << r << "\" fill=\"" << fill
        << "\"/>\n";
}

void Writer::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                  double stroke_width) {
  body_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
        << "\" stroke=\"" << stroke << "\" stroke-width=\"" << stroke_width << "\"/>\n";
}

void Writer::text(double x, double y, const std::string& content, double size,
                  const std::string& fill, const std::string& anchor) {
  body_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
        << "\" font-family=\"monospace\" fill=\"" << fill << "\" text-anchor=\"" << anchor
        << "\">" << content << "</text>\n";
}

std::string Writer::finish() const {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
      << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n"
      << body_.str() << "</svg>\n";
  return out.str();
}

std::string heat_color(double value, double lo, double hi) {
  double t = 0.0;
  if (std::isfinite(value) && hi > lo) t = std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
  if (!std::isfinite(value)) return "#bbbbbb";
  const int r0 = 0xf7, g0 = 0xfb, b0 = 0xff;
  const int r1 = 0x08, g1 = 0x30, b1 = 0x6b;
  const int r = static_cast<int>(std::lround(r0 + t * (r1 - r0)));
  const int g = static_cast<int>(std::lround(g0 + t * (g1 - g0)));
  const int b = static_cast<int>(std::lround(b0 + t * (b1 - b0)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("svg: cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("svg: short write " + path);
}

}  // namespace striker::svg
