#pragma once

#include <cstddef>
#include <vector>

// Independent eigensolver used only by tests: classical cyclic Jacobi
// rotations on a dense symmetric matrix. Slow but simple enough to trust,
// and shares no code with the bisection/inverse-iteration path under test.

namespace sbsa::testsupport {

struct DenseEigen {
    std::vector<double> values;  // ascending
    std::vector<double> vectors; // row k = unit eigenvector for values[k]
};

// a: n*n row-major symmetric matrix (copied internally).
DenseEigen jacobi_eigen(const std::vector<double>& a, std::size_t n);

// Convenience: build the dense matrix of a symmetric tridiagonal operator.
std::vector<double> dense_from_tridiagonal(const std::vector<double>& diag,
                                           const std::vector<double>& off);

} // namespace sbsa::testsupport
