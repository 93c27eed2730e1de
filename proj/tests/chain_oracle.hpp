#pragma once

#include <Eigen/Dense>
#include <utility>

#include "rb/core.hpp"

namespace rb::test {

// Stationary solve of the (t+1)-state chain induced by "always play in g, wait t-1 steps in b".
// States: 0 = last observed g, k = 1..t = last observed b k steps ago. Returns (R, Q).
inline std::pair<double, double> chain_RQ(const FeedbackArm& a, int t) {
    const int S = t + 1;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);
    P(0, 0) = 1.0 - a.beta;
    P(0, 1) = a.beta;
    for (int k = 1; k < t; ++k) P(k, k + 1) = 1.0;
    double vt = a.stationary() * (1.0 - std::pow(1.0 - a.alpha - a.beta, t));
    P(t, 0) += vt;
    P(t, 1) += 1.0 - vt;
    // pi (P - I) = 0 with sum pi = 1
    Eigen::MatrixXd A = (P - Eigen::MatrixXd::Identity(S, S)).transpose();
    A.row(S - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
    rhs[S - 1] = 1.0;
    Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
    double R = a.r * pi[0];
    double Q = pi[0] + pi[t];
    return {R, Q};
}

}  // namespace rb::test
