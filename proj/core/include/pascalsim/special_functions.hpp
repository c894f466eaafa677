#pragma once

#include "pascalsim/common.hpp"

namespace pascalsim {

/// Gaussian tail probability Q(x) = erfc(x / sqrt 2) / 2.
double q_function(double x);

/// Physicists' Hermite polynomial H_n(x), n <= 32.
double hermite_poly(int n, double x);

/// r-th derivative of Q at x0 (r >= 1), through H_{r-1}(x0 / sqrt 2).
double q_derivative(int r, double x0);

/// Complex error function for |Im z| <= 12.
cplx erf_complex(cplx z);

/// Faddeeva function w(z) = exp(-z^2) erfc(-jz) for Im z >= 0.
cplx faddeeva_w(cplx z);

}  // namespace pascalsim
