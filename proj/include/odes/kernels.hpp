#ifndef ODES_KERNELS_HPP
#define ODES_KERNELS_HPP

#include <Eigen/Dense>
#include <vector>

#include "odes/errors.hpp"

namespace odes {

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

// K_0(x, x') = min(x, x'); for k > 0,
// K_k(x, x') = int_0^1 (x-t)_+^k (x'-t)_+^k dt / (k!)^2.
// The integrand vanishes past min(x, x') and is a degree-2k polynomial
// before it, so a (k+1)-point Gauss rule on [0, min(x, x')] is exact.
double kernel_entry(int k, double x, double x2);

struct KernelSystem {
    int order = 0;
    Eigen::MatrixXd matrix;   // raw entries K_k(x_i, x_j)
    std::vector<double> design;
};

KernelSystem build_kernel(int k, const std::vector<double>& xs);

}  // namespace odes

#endif
