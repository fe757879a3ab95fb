#pragma once

#include <vector>

namespace autores {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

// Ordinary least squares y = slope x + intercept. Throws InvalidArgument on
// fewer than two points or a degenerate abscissa.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace autores
