#pragma once

#include <iosfwd>
#include <string>

#include "dlab/econometrics.hpp"

namespace dlab::cli {

/// Self-contained SVG of an effect curve: a line with a shaded 95% band for
/// EQ1, dots with error bars for EQ2 (grey when not significant).
void write_curve_svg(std::ostream& out, const EffectCurve& curve, const std::string& title);

}  // namespace dlab::cli
