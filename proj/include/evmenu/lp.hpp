#pragma once

// Dense linear programming: maximize c.x subject to A x <= b, Aeq x = beq,
// lo <= x <= hi. Two-phase tableau simplex; the final basis is refactored to
// produce the reported primal point and duals.
//
// Dual sign convention (maximization): duals of <= rows are >= 0, equality
// duals are free, and reduced_costs[j] = c_j - A_j^T y is the multiplier of
// the active bound (> 0 at an upper bound, < 0 at a lower bound).

#include <cstddef>
#include <string>
#include <vector>

namespace evmenu::lp {

enum class Status { Optimal, Infeasible, Unbounded };

std::string to_string(Status s);

struct Problem {
    std::vector<double> objective;
    std::vector<std::vector<double>> ineq_rows;
    std::vector<double> ineq_rhs;
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<double> lower;  // empty means all zero
    std::vector<double> upper;  // empty means all +inf

    explicit Problem(std::size_t num_vars = 0) : objective(num_vars, 0.0) {}

    std::size_t num_vars() const { return objective.size(); }
    std::size_t add_ineq(std::vector<double> row, double rhs);
    std::size_t add_eq(std::vector<double> row, double rhs);
    double lower_of(std::size_t j) const;
    double upper_of(std::size_t j) const;
};

struct Solution {
    Status status = Status::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
    std::vector<double> ineq_duals;
    std::vector<double> eq_duals;
    std::vector<double> reduced_costs;
    std::size_t iterations = 0;

    bool optimal() const { return status == Status::Optimal; }
};

// Throws std::invalid_argument on inconsistent dimensions, non-finite
// coefficients or lo > hi.
Solution solve(const Problem& problem);

// b.y + sum over bounds of the reduced-cost terms; equals the primal
// objective at an optimum (strong duality).
double dual_objective(const Problem& problem, const Solution& solution);

}  // namespace evmenu::lp
