#pragma once

#include <complex>
#include <vector>

#include "relids/grid.hpp"

namespace relids {

/// In-place d-dimensional DFT on an N^d array in grid layout.
/// forward: sum_x u(x) e^{-i 2pi <m,k>/N}; backward: e^{+i ...}.
/// No normalization on either direction.
void dft_forward(const BoxGrid& g, std::vector<Complex>& data);
void dft_backward(const BoxGrid& g, std::vector<Complex>& data);

/// Forward transform normalized as the continuum Fourier coefficient
/// uhat(xi_k) = h^d sum_x u(x) e^{-i<x, xi_k>}, with xi in DFT order.
std::vector<Complex> fourier_coefficients(const GridFunction& u);

/// Inverse of fourier_coefficients: u(x) = L^{-d} sum_k uhat_k e^{+i<x, xi_k>}.
GridFunction fourier_synthesis(const BoxGrid& g, const std::vector<Complex>& coeffs);

}  // namespace relids
