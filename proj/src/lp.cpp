#include "evmenu/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace evmenu::lp {

std::string to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
    }
    return "unknown";
}

std::size_t Problem::add_ineq(std::vector<double> row, double rhs) {
    row.resize(num_vars(), 0.0);
    ineq_rows.push_back(std::move(row));
    ineq_rhs.push_back(rhs);
    return ineq_rows.size() - 1;
}

std::size_t Problem::add_eq(std::vector<double> row, double rhs) {
    row.resize(num_vars(), 0.0);
    eq_rows.push_back(std::move(row));
    eq_rhs.push_back(rhs);
    return eq_rows.size() - 1;
}

double Problem::lower_of(std::size_t j) const { return lower.empty() ? 0.0 : lower[j]; }

double Problem::upper_of(std::size_t j) const {
    return upper.empty() ? std::numeric_limits<double>::infinity() : upper[j];
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kOptTol = 1e-10;
constexpr std::size_t kDegenerateStreak = 50;
constexpr std::size_t kMaxIterations = 200000;

// How an original variable maps onto nonnegative standard-form columns.
enum class VarKind { Shift, Reflect, Free };

struct VarMap {
    VarKind kind;
    double offset;  // lo for Shift, hi for Reflect
    std::size_t col;
    std::size_t neg_col;  // Free only
};

enum class RowKind { Le, Eq };
enum class Origin { Ineq, Eq, Upper };

struct StdRow {
    RowKind kind;
    Origin origin;
    std::size_t index;  // index into the origin list
    std::vector<double> coef;
    double rhs;
    double scale = 1.0;  // row was divided by this
    double sign = 1.0;   // row was multiplied by this after scaling
};

void check_input(const Problem& p) {
    const std::size_t n = p.num_vars();
    auto finite_row = [&](const std::vector<double>& row) {
        if (row.size() != n) throw std::invalid_argument("lp: row length differs from the number of variables");
        for (double a : row) {
            if (!std::isfinite(a)) throw std::invalid_argument("lp: non-finite constraint coefficient");
        }
    };
    for (double c : p.objective) {
        if (!std::isfinite(c)) throw std::invalid_argument("lp: non-finite objective coefficient");
    }
    if (p.ineq_rows.size() != p.ineq_rhs.size() || p.eq_rows.size() != p.eq_rhs.size())
        throw std::invalid_argument("lp: row and rhs counts differ");
    for (const auto& r : p.ineq_rows) finite_row(r);
    for (const auto& r : p.eq_rows) finite_row(r);
    for (double b : p.ineq_rhs) {
        if (std::isnan(b) || b == -kInf) throw std::invalid_argument("lp: invalid inequality rhs");
    }
    for (double b : p.eq_rhs) {
        if (!std::isfinite(b)) throw std::invalid_argument("lp: non-finite equality rhs");
    }
    if ((!p.lower.empty() && p.lower.size() != n) || (!p.upper.empty() && p.upper.size() != n))
        throw std::invalid_argument("lp: bound vectors have the wrong length");
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = p.lower_of(j), hi = p.upper_of(j);
        if (std::isnan(lo) || std::isnan(hi) || lo == kInf || hi == -kInf || lo > hi)
            throw std::invalid_argument("lp: invalid variable bounds");
    }
}

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), data_(rows * (cols + 1), 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data_[i * (n_ + 1) + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * (n_ + 1) + j]; }
    double& rhs(std::size_t i) { return at(i, n_); }
    double rhs(std::size_t i) const { return at(i, n_); }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

    void pivot(std::size_t r, std::size_t c, std::vector<double>& reduced) {
        double* pr = &data_[r * (n_ + 1)];
        const double inv = 1.0 / pr[c];
        for (std::size_t j = 0; j <= n_; ++j) pr[j] *= inv;
        pr[c] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* pi = &data_[i * (n_ + 1)];
            const double f = pi[c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_; ++j) pi[j] -= f * pr[j];
            pi[c] = 0.0;
        }
        const double f = reduced[c];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= n_; ++j) reduced[j] -= f * pr[j];
            reduced[c] = 0.0;
        }
    }

    void drop_row(std::size_t r) {
        data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(r * (n_ + 1)),
                    data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * (n_ + 1)));
        --m_;
    }

private:
    std::size_t m_, n_;
    std::vector<double> data_;
};

struct Simplex {
    Tableau tab;
    std::vector<std::size_t> basis;    // basic column per row
    std::vector<std::size_t> row_ids;  // standard row behind each tableau row
    std::vector<bool> barred;          // columns that may not enter
    std::size_t iterations = 0;

    // reduced[j] = c_j - c_B B^-1 A_j; reduced[n] holds -objective.
    std::vector<double> reduced_costs(const std::vector<double>& cost) const {
        const std::size_t n = tab.cols();
        std::vector<double> d(n + 1, 0.0);
        for (std::size_t j = 0; j < n; ++j) d[j] = cost[j];
        for (std::size_t i = 0; i < tab.rows(); ++i) {
            const double cb = cost[basis[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= n; ++j) d[j] -= cb * tab.at(i, j);
        }
        return d;
    }

    // Returns false when unbounded.
    bool optimize(const std::vector<double>& cost) {
        std::vector<double> d = reduced_costs(cost);
        const std::size_t n = tab.cols();
        std::size_t degenerate = 0;
        while (true) {
            if (++iterations > kMaxIterations) throw std::runtime_error("lp: iteration limit reached");
            const bool bland = degenerate >= kDegenerateStreak;
            std::size_t enter = n;
            double best = kOptTol;
            for (std::size_t j = 0; j < n; ++j) {
                if (barred[j] || d[j] <= kOptTol) continue;
                if (bland) {
                    enter = j;
                    break;
                }
                if (d[j] > best) {
                    best = d[j];
                    enter = j;
                }
            }
            if (enter == n) return true;

            std::size_t leave = tab.rows();
            double ratio = kInf;
            for (std::size_t i = 0; i < tab.rows(); ++i) {
                const double a = tab.at(i, enter);
                if (a <= kPivotTol) continue;
                const double rtest = std::max(tab.rhs(i), 0.0) / a;
                const double slack = 1e-12 * std::max(1.0, rtest);
                if (leave == tab.rows() || rtest < ratio - slack ||
                    (rtest <= ratio + slack && basis[i] < basis[leave])) {
                    ratio = std::min(ratio, rtest);
                    leave = i;
                }
            }
            if (leave == tab.rows()) return false;
            degenerate = (ratio <= 1e-12) ? degenerate + 1 : 0;
            tab.pivot(leave, enter, d);
            basis[leave] = enter;
        }
    }
};

}  // namespace

Solution solve(const Problem& problem) {
    check_input(problem);
    const std::size_t n = problem.num_vars();

    // Map variables to nonnegative columns.
    std::vector<VarMap> vars(n);
    std::size_t ncols = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = problem.lower_of(j), hi = problem.upper_of(j);
        if (std::isfinite(lo)) {
            vars[j] = {VarKind::Shift, lo, ncols++, 0};
        } else if (std::isfinite(hi)) {
            vars[j] = {VarKind::Reflect, hi, ncols++, 0};
        } else {
            vars[j] = {VarKind::Free, 0.0, ncols, ncols + 1};
            ncols += 2;
        }
    }
    const std::size_t nstruct = ncols;

    // Express a row over original variables as a row over structural columns; returns rhs shift.
    auto map_row = [&](const std::vector<double>& row, std::vector<double>& out) {
        out.assign(nstruct, 0.0);
        double shift = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double a = row[j];
            if (a == 0.0) continue;
            switch (vars[j].kind) {
                case VarKind::Shift:
                    out[vars[j].col] += a;
                    shift += a * vars[j].offset;
                    break;
                case VarKind::Reflect:
                    out[vars[j].col] -= a;
                    shift += a * vars[j].offset;
                    break;
                case VarKind::Free:
                    out[vars[j].col] += a;
                    out[vars[j].neg_col] -= a;
                    break;
            }
        }
        return shift;
    };

    std::vector<StdRow> rows;
    Solution sol;
    sol.ineq_duals.assign(problem.ineq_rows.size(), 0.0);
    sol.eq_duals.assign(problem.eq_rows.size(), 0.0);

    auto infeasible = [&]() {
        sol.status = Status::Infeasible;
        return sol;
    };

    for (std::size_t k = 0; k < problem.ineq_rows.size(); ++k) {
        if (problem.ineq_rhs[k] == kInf) continue;  // never binding
        StdRow r{RowKind::Le, Origin::Ineq, k, {}, 0.0};
        r.rhs = problem.ineq_rhs[k] - map_row(problem.ineq_rows[k], r.coef);
        rows.push_back(std::move(r));
    }
    for (std::size_t k = 0; k < problem.eq_rows.size(); ++k) {
        StdRow r{RowKind::Eq, Origin::Eq, k, {}, 0.0};
        r.rhs = problem.eq_rhs[k] - map_row(problem.eq_rows[k], r.coef);
        rows.push_back(std::move(r));
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = problem.lower_of(j), hi = problem.upper_of(j);
        if (vars[j].kind == VarKind::Shift && std::isfinite(hi)) {
            StdRow r{RowKind::Le, Origin::Upper, j, std::vector<double>(nstruct, 0.0), hi - lo};
            r.coef[vars[j].col] = 1.0;
            rows.push_back(std::move(r));
        }
    }

    // Scale rows to unit infinity norm; resolve empty rows directly.
    std::vector<StdRow> kept;
    for (StdRow& r : rows) {
        double norm = 0.0;
        for (double a : r.coef) norm = std::max(norm, std::abs(a));
        if (norm == 0.0) {
            const double tol = 1e-9 * std::max(1.0, std::abs(r.rhs));
            if ((r.kind == RowKind::Le && r.rhs < -tol) || (r.kind == RowKind::Eq && std::abs(r.rhs) > tol))
                return infeasible();
            continue;
        }
        for (double& a : r.coef) a /= norm;
        r.rhs /= norm;
        r.scale = norm;
        if (r.rhs < 0) {
            for (double& a : r.coef) a = -a;
            r.rhs = -r.rhs;
            r.sign = -1.0;
        }
        kept.push_back(std::move(r));
    }
    rows = std::move(kept);
    const std::size_t m = rows.size();

    // Columns: structural, one slack per Le row, one artificial per row lacking a usable slack.
    std::vector<std::size_t> slack_col(m, SIZE_MAX), art_col(m, SIZE_MAX);
    std::size_t total = nstruct;
    for (std::size_t i = 0; i < m; ++i) {
        if (rows[i].kind == RowKind::Le) slack_col[i] = total++;
    }
    const std::size_t first_art = total;
    for (std::size_t i = 0; i < m; ++i) {
        if (rows[i].kind == RowKind::Eq || rows[i].sign < 0) art_col[i] = total++;
    }

    Simplex spx{Tableau(m, total), std::vector<std::size_t>(m), std::vector<std::size_t>(m), std::vector<bool>(total, false)};
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < nstruct; ++j) spx.tab.at(i, j) = rows[i].coef[j];
        if (slack_col[i] != SIZE_MAX) spx.tab.at(i, slack_col[i]) = rows[i].sign;
        if (art_col[i] != SIZE_MAX) spx.tab.at(i, art_col[i]) = 1.0;
        spx.tab.rhs(i) = rows[i].rhs;
        spx.basis[i] = art_col[i] != SIZE_MAX ? art_col[i] : slack_col[i];
        spx.row_ids[i] = i;
    }

    double bmax = 1.0;
    for (const StdRow& r : rows) bmax = std::max(bmax, std::abs(r.rhs));

    // Phase 1.
    if (first_art < total) {
        std::vector<double> cost1(total, 0.0);
        for (std::size_t j = first_art; j < total; ++j) cost1[j] = -1.0;
        spx.optimize(cost1);
        double infeas = 0.0;
        for (std::size_t i = 0; i < spx.tab.rows(); ++i) {
            if (spx.basis[i] >= first_art) infeas += spx.tab.rhs(i);
        }
        if (infeas > 1e-9 * bmax) return infeasible();

        // Drive remaining artificials out of the basis or drop redundant rows.
        std::vector<double> scratch(total + 1, 0.0);
        for (std::size_t i = 0; i < spx.tab.rows();) {
            if (spx.basis[i] < first_art) {
                ++i;
                continue;
            }
            std::size_t c = first_art;
            double best = 1e-7;
            for (std::size_t j = 0; j < first_art; ++j) {
                if (std::abs(spx.tab.at(i, j)) > best) {
                    best = std::abs(spx.tab.at(i, j));
                    c = j;
                }
            }
            if (c < first_art) {
                spx.tab.pivot(i, c, scratch);
                spx.basis[i] = c;
                ++i;
            } else {
                spx.tab.drop_row(i);
                spx.basis.erase(spx.basis.begin() + static_cast<std::ptrdiff_t>(i));
                spx.row_ids.erase(spx.row_ids.begin() + static_cast<std::ptrdiff_t>(i));
            }
        }
        for (std::size_t j = first_art; j < total; ++j) spx.barred[j] = true;
    }

    // Phase 2 with the objective scaled to unit infinity norm.
    std::vector<double> cstruct(nstruct, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double c = problem.objective[j];
        switch (vars[j].kind) {
            case VarKind::Shift:
                cstruct[vars[j].col] += c;
                break;
            case VarKind::Reflect:
                cstruct[vars[j].col] -= c;
                break;
            case VarKind::Free:
                cstruct[vars[j].col] += c;
                cstruct[vars[j].neg_col] -= c;
                break;
        }
    }
    double cscale = 0.0;
    for (double c : cstruct) cscale = std::max(cscale, std::abs(c));
    if (cscale == 0.0) cscale = 1.0;
    std::vector<double> cost(total, 0.0);
    for (std::size_t j = 0; j < nstruct; ++j) cost[j] = cstruct[j] / cscale;

    if (!spx.optimize(cost)) {
        sol.status = Status::Unbounded;
        sol.iterations = spx.iterations;
        return sol;
    }
    sol.iterations = spx.iterations;

    // Refactor the final basis on the scaled standard-form matrix.
    const std::size_t mb = spx.tab.rows();
    // rows[].coef already carries the sign flip.
    auto column = [&](std::size_t col, std::size_t row) -> double {
        if (col < nstruct) return rows[row].coef[col];
        if (slack_col[row] == col) return rows[row].sign;
        if (art_col[row] == col) return 1.0;
        return 0.0;
    };

    std::vector<double> xstd(total, 0.0);
    std::vector<double> ystd(m, 0.0);
    bool refactored = false;
    if (mb > 0) {
        Eigen::MatrixXd B(mb, mb);
        Eigen::VectorXd b(mb), cb(mb);
        for (std::size_t r = 0; r < mb; ++r) {
            const std::size_t row = spx.row_ids[r];
            b(static_cast<Eigen::Index>(r)) = rows[row].rhs;
            for (std::size_t k = 0; k < mb; ++k)
                B(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = column(spx.basis[k], row);
        }
        for (std::size_t k = 0; k < mb; ++k) cb(static_cast<Eigen::Index>(k)) = cost[spx.basis[k]];
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        const Eigen::VectorXd xb = lu.solve(b);
        const Eigen::VectorXd y = lu.transpose().solve(cb);
        const double resid = (B * xb - b).lpNorm<Eigen::Infinity>();
        bool ok = xb.allFinite() && y.allFinite() && resid <= 1e-9 * bmax;
        for (Eigen::Index k = 0; ok && k < xb.size(); ++k) ok = xb(k) >= -1e-9 * bmax;
        if (ok) {
            for (std::size_t k = 0; k < mb; ++k) xstd[spx.basis[k]] = std::max(0.0, xb(static_cast<Eigen::Index>(k)));
            for (std::size_t r = 0; r < mb; ++r) ystd[spx.row_ids[r]] = y(static_cast<Eigen::Index>(r));
            refactored = true;
        }
    }
    if (!refactored) {
        for (std::size_t r = 0; r < mb; ++r) xstd[spx.basis[r]] = std::max(0.0, spx.tab.rhs(r));
        // y from reduced costs of each row's identity column (slack or artificial).
        const std::vector<double> d = spx.reduced_costs(cost);
        for (std::size_t row = 0; row < m; ++row) {
            const std::size_t col = art_col[row] != SIZE_MAX ? art_col[row] : slack_col[row];
            ystd[row] = -d[col] / column(col, row);
        }
    }

    // Back to original variables.
    sol.x.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        switch (vars[j].kind) {
            case VarKind::Shift: sol.x[j] = vars[j].offset + xstd[vars[j].col]; break;
            case VarKind::Reflect: sol.x[j] = vars[j].offset - xstd[vars[j].col]; break;
            case VarKind::Free: sol.x[j] = xstd[vars[j].col] - xstd[vars[j].neg_col]; break;
        }
    }
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.objective += problem.objective[j] * sol.x[j];

    // Row duals: standard row = sign * original / scale, objective divided by cscale.
    std::vector<double> upper_duals(n, 0.0);
    for (std::size_t row = 0; row < m; ++row) {
        const double y = ystd[row] * rows[row].sign / rows[row].scale * cscale;
        switch (rows[row].origin) {
            case Origin::Ineq: sol.ineq_duals[rows[row].index] = std::max(0.0, y); break;
            case Origin::Eq: sol.eq_duals[rows[row].index] = y; break;
            case Origin::Upper: upper_duals[rows[row].index] = y; break;
        }
    }
    sol.reduced_costs.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = problem.objective[j];
        for (std::size_t k = 0; k < problem.ineq_rows.size(); ++k) d -= problem.ineq_rows[k][j] * sol.ineq_duals[k];
        for (std::size_t k = 0; k < problem.eq_rows.size(); ++k) d -= problem.eq_rows[k][j] * sol.eq_duals[k];
        sol.reduced_costs[j] = d;
    }
    sol.status = Status::Optimal;
    return sol;
}

double dual_objective(const Problem& problem, const Solution& s) {
    double value = 0.0;
    for (std::size_t k = 0; k < problem.ineq_rows.size(); ++k) {
        if (s.ineq_duals[k] != 0.0) value += problem.ineq_rhs[k] * s.ineq_duals[k];
    }
    for (std::size_t k = 0; k < problem.eq_rows.size(); ++k) value += problem.eq_rhs[k] * s.eq_duals[k];
    for (std::size_t j = 0; j < problem.num_vars(); ++j) {
        const double d = s.reduced_costs[j];
        if (d > 0) value += d * problem.upper_of(j);
        else if (d < 0) value += d * problem.lower_of(j);
    }
    return value;
}

}  // namespace evmenu::lp
