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

#pragma once

#include <sstream>
#include <string>

namespace striker::svg {

// Minimal SVG document builder; coordinates are raw pixels.
class Writer {
 public:
  Writer(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "", double stroke_width = 0.0);
  void circle(double cx, double cy, double r, const std::string& fill);
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width);
  void text(double x, double y, const std::string& content, double size,
            const std::string& fill = "#000000", const std::string& anchor = "middle");
  std::string finish() const;

 private:
  std::ostringstream body_;
  double width_, height_;
};

// Linear two-stop color scale for heatmaps ("#f7fbff" -> "#08306b").
std::string heat_color(double value, double lo, double hi);

void write_file(const std::string& path, const std::string& content);

}  // namespace striker::svg
