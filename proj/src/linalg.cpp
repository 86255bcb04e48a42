#include "mmapq/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "mmapq/errors.hpp"

namespace mmapq {

Eigen::MatrixXcd matrix_exp(const Eigen::MatrixXcd& A) {
    if (A.rows() == 1) {
        Eigen::MatrixXcd out(1, 1);
        out(0, 0) = std::exp(A(0, 0));
        return out;
    }
    return A.exp();
}

bool strongly_connected(const Eigen::MatrixXd& A, double tol) {
    const int n = static_cast<int>(A.rows());
    if (n <= 1) return true;
    auto reaches_all = [&](bool transpose) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                const double w = transpose ? A(v, u) : A(u, v);
                if (u != v && !seen[v] && w > tol) {
                    seen[v] = 1;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == n;
    };
    return reaches_all(false) && reaches_all(true);
}

namespace {

Eigen::RowVectorXd solve_left_null(const Eigen::MatrixXd& M) {
    // pi * M = 0, pi * e = 1  ==  (M^T with one row of ones) pi^T = e_last
    const int n = static_cast<int>(M.rows());
    Eigen::MatrixXd A = M.transpose();
    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::VectorXd pi = A.partialPivLu().solve(b);
    if (!pi.allFinite()) throw ReducibleError("stationary system is singular");
    return pi.transpose();
}

}  // namespace

Eigen::RowVectorXd stationary_row(const Eigen::MatrixXd& G) {
    if (!strongly_connected(G)) throw ReducibleError("generator is not irreducible");
    Eigen::RowVectorXd pi = solve_left_null(G);
    if ((pi.array() <= 0.0).any() || (pi * G).cwiseAbs().maxCoeff() > 1e-9)
        throw ReducibleError("no strictly positive stationary solution");
    return pi;
}

Eigen::RowVectorXd stationary_of_stochastic(const Eigen::MatrixXd& P) {
    if (!strongly_connected(P)) throw ReducibleError("embedded chain is not irreducible");
    const Eigen::MatrixXd G = P - Eigen::MatrixXd::Identity(P.rows(), P.cols());
    Eigen::RowVectorXd rho = solve_left_null(G);
    if ((rho.array() < -1e-12).any()) throw ReducibleError("negative embedded solution");
    return rho.cwiseMax(0.0);
}

}  // namespace mmapq
