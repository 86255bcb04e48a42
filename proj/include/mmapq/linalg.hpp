#pragma once

#include <Eigen/Dense>
#include <complex>

namespace mmapq {

using cplx = std::complex<double>;

// exp(A) for small dense matrices; scalar fast path for 1x1.
Eigen::MatrixXcd matrix_exp(const Eigen::MatrixXcd& A);

// Strong connectivity of the directed graph with an edge i->j whenever
// A(i,j) > tol, i != j.
bool strongly_connected(const Eigen::MatrixXd& A, double tol = 1e-14);

// Unique solution of pi * G = 0, pi * e = 1 for an irreducible conservative
// generator G; throws ReducibleError otherwise.
Eigen::RowVectorXd stationary_row(const Eigen::MatrixXd& G);

// Unique solution of rho * P = rho, rho * e = 1 for an irreducible stochastic
// matrix P; throws ReducibleError otherwise.
Eigen::RowVectorXd stationary_of_stochastic(const Eigen::MatrixXd& P);

}  // namespace mmapq
