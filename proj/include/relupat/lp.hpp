#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "relupat/affine.hpp"
#include "relupat/postcondition.hpp"
#include "relupat/types.hpp"

namespace relupat {

constexpr double kLpStrictEps = 1e-6;
constexpr double kLpPivotTol = 1e-9;
constexpr double kLpFeasTol = 1e-7;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct LpConstraint {
    Vec coeffs;
    Relation rel = Relation::Le;
    double rhs = 0.0;
};

struct LinearProgram {
    int num_vars = 0;
    std::optional<Vec> objective;  // maximize; absent means feasibility only
    std::vector<LpConstraint> constraints;
    Bounds var_bounds;  // optional; missing entries mean free

    void add(Vec coeffs, Relation rel, double rhs) {
        constraints.push_back({std::move(coeffs), rel, rhs});
    }
};

enum class LpStatus { Optimal, Feasible, Infeasible, Unbounded, NumericFailure };

struct LpOutcome {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    Vec point;

    bool feasible() const {
        return status == LpStatus::Optimal || status == LpStatus::Feasible;
    }
};

namespace lpdetail {

// Dense two-phase tableau simplex over nonnegative variables.
// Rows: a.x (rel) b with b >= 0 after normalization.
class Simplex {
public:
    // returns status; on success `solution` holds the nonnegative variable values
    LpStatus run(const std::vector<Vec>& rows, const std::vector<Relation>& rels, const Vec& rhs,
                 const Vec& objective, bool maximize_phase2, Vec& solution, double& obj_value) {
        int m = static_cast<int>(rows.size());
        int n = m == 0 ? static_cast<int>(objective.size()) : static_cast<int>(rows[0].size());
        // Count slack/surplus and artificial columns.
        int num_slack = 0, num_art = 0;
        for (Relation r : rels) {
            if (r == Relation::Le || r == Relation::Ge) ++num_slack;
            if (r == Relation::Ge || r == Relation::Eq) ++num_art;
        }
        total_ = n + num_slack + num_art;
        art_begin_ = n + num_slack;
        rows_ = m;
        tab_.assign(m, Vec(total_ + 1, 0.0));
        basis_.assign(m, -1);

        int slack_idx = n, art_idx = art_begin_;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) tab_[i][j] = rows[i][j];
            tab_[i][total_] = rhs[i];
            switch (rels[i]) {
                case Relation::Le:
                    tab_[i][slack_idx] = 1.0;
                    basis_[i] = slack_idx++;
                    break;
                case Relation::Ge:
                    tab_[i][slack_idx] = -1.0;
                    ++slack_idx;
                    tab_[i][art_idx] = 1.0;
                    basis_[i] = art_idx++;
                    break;
                case Relation::Eq:
                    tab_[i][art_idx] = 1.0;
                    basis_[i] = art_idx++;
                    break;
                default:
                    return LpStatus::NumericFailure;  // strict rows must be pre-converted
            }
        }
        max_iters_ = 10 * (total_ + m) * (total_ + m);

        if (num_art > 0) {
            // Phase 1: minimize sum of artificials == maximize -sum.
            Vec phase1(total_, 0.0);
            for (int j = art_begin_; j < total_; ++j) phase1[j] = -1.0;
            LpStatus st = optimize(phase1, art_begin_);
            if (st != LpStatus::Optimal) return st;
            double art_sum = 0.0;
            for (int i = 0; i < m; ++i)
                if (basis_[i] >= art_begin_) art_sum += tab_[i][total_];
            if (art_sum > 1e-7) return LpStatus::Infeasible;
            // Pivot remaining artificials out of the basis where possible.
            for (int i = 0; i < m; ++i) {
                if (basis_[i] < art_begin_) continue;
                int piv = -1;
                for (int j = 0; j < art_begin_; ++j)
                    if (std::abs(tab_[i][j]) > kLpPivotTol) {
                        piv = j;
                        break;
                    }
                if (piv >= 0) pivot(i, piv);
                // else: redundant row, its artificial stays at value ~0
            }
        }

        Vec obj(total_, 0.0);
        for (int j = 0; j < n; ++j) obj[j] = maximize_phase2 ? objective[j] : 0.0;
        LpStatus st = optimize(obj, art_begin_);
        if (st != LpStatus::Optimal) return st;

        solution.assign(n, 0.0);
        for (int i = 0; i < m; ++i)
            if (basis_[i] < n) solution[basis_[i]] = tab_[i][total_];
        obj_value = 0.0;
        for (int j = 0; j < n; ++j) obj_value += objective.empty() ? 0.0 : objective[j] * solution[j];
        return LpStatus::Optimal;
    }

private:
    // Maximize obj over the current basis. Columns >= forbid_from are kept out
    // of the basis (used to lock artificials out in phase 2).
    LpStatus optimize(const Vec& obj, int forbid_from) {
        int m = rows_;
        Vec red(total_ + 1, 0.0);
        auto reduced_costs = [&]() {
            for (int j = 0; j <= total_; ++j) {
                double c = j < total_ ? obj[j] : 0.0;
                for (int i = 0; i < m; ++i) c -= obj[basis_[i]] * tab_[i][j];
                red[j] = c;
            }
        };
        int degenerate_streak = 0;
        bool bland = false;
        for (int iter = 0; iter < max_iters_; ++iter) {
            reduced_costs();
            int enter = -1;
            if (!bland) {
                double best = kLpPivotTol;
                for (int j = 0; j < total_; ++j) {
                    if (in_basis(j)) continue;
                    if (j >= forbid_from && obj[j] == 0.0) continue;
                    if (red[j] > best) {
                        best = red[j];
                        enter = j;
                    }
                }
            } else {
                for (int j = 0; j < total_; ++j) {
                    if (in_basis(j)) continue;
                    if (j >= forbid_from && obj[j] == 0.0) continue;
                    if (red[j] > kLpPivotTol) {
                        enter = j;
                        break;
                    }
                }
            }
            if (enter < 0) return LpStatus::Optimal;
            // Ratio test.
            int leave = -1;
            double best_ratio = kInf;
            for (int i = 0; i < m; ++i) {
                double a = tab_[i][enter];
                if (a > kLpPivotTol) {
                    double ratio = tab_[i][total_] / a;
                    if (ratio < best_ratio - kLpPivotTol ||
                        (bland && ratio < best_ratio + kLpPivotTol && leave >= 0 &&
                         basis_[i] < basis_[leave])) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            if (best_ratio < kLpPivotTol) {
                if (++degenerate_streak > 2 * (total_ + m)) bland = true;
            } else {
                degenerate_streak = 0;
            }
            pivot(leave, enter);
        }
        return LpStatus::NumericFailure;
    }

    bool in_basis(int j) const {
        for (int b : basis_)
            if (b == j) return true;
        return false;
    }

    void pivot(int row, int col) {
        double p = tab_[row][col];
        for (int j = 0; j <= total_; ++j) tab_[row][j] /= p;
        for (int i = 0; i < rows_; ++i) {
            if (i == row) continue;
            double f = tab_[i][col];
            if (f == 0.0) continue;
            for (int j = 0; j <= total_; ++j) tab_[i][j] -= f * tab_[row][j];
        }
        basis_[row] = col;
    }

    std::vector<Vec> tab_;
    std::vector<int> basis_;
    int total_ = 0, art_begin_ = 0, rows_ = 0, max_iters_ = 0;
};

}  // namespace lpdetail

// Strict relations are epsilon-separated, free variables are split, bounded
// variables are shifted, then a two-phase simplex runs on the standard form.
inline LpOutcome solve(const LinearProgram& lp) {
    int n = lp.num_vars;
    // Per-variable bounds; missing -> free.
    Bounds bounds(n, {-kInf, kInf});
    for (int j = 0; j < n && j < static_cast<int>(lp.var_bounds.size()); ++j)
        bounds[j] = lp.var_bounds[j];

    // Transform to nonnegative variables:
    //   lo finite:             x = lo + u
    //   lo = -inf, hi finite:  x = hi - u
    //   both infinite:         x = u - v
    struct VarMap {
        int col = -1, col_neg = -1;
        double shift = 0.0, sign = 1.0;
    };
    std::vector<VarMap> vmap(n);
    int cols = 0;
    for (int j = 0; j < n; ++j) {
        auto [lo, hi] = bounds[j];
        if (lo > hi) return {LpStatus::Infeasible, 0.0, {}};
        if (std::isfinite(lo)) {
            vmap[j] = {cols++, -1, lo, 1.0};
        } else if (std::isfinite(hi)) {
            vmap[j] = {cols++, -1, hi, -1.0};
        } else {
            vmap[j] = {cols, cols + 1, 0.0, 1.0};
            cols += 2;
        }
    }

    std::vector<Vec> rows;
    std::vector<Relation> rels;
    Vec rhs;
    auto add_row = [&](const Vec& coeffs, Relation rel, double b) {
        Vec row(cols, 0.0);
        double shift_total = 0.0;
        for (int j = 0; j < n; ++j) {
            double c = coeffs[j];
            if (c == 0.0) continue;
            const VarMap& m = vmap[j];
            row[m.col] += c * m.sign;
            if (m.col_neg >= 0) row[m.col_neg] -= c;
            shift_total += c * m.shift;
        }
        double b2 = b - shift_total;
        if (b2 < 0) {
            for (double& v : row) v = -v;
            b2 = -b2;
            rel = rel == Relation::Le ? Relation::Ge : rel == Relation::Ge ? Relation::Le : rel;
        }
        rows.push_back(std::move(row));
        rels.push_back(rel);
        rhs.push_back(b2);
    };

    for (const auto& c : lp.constraints) {
        if (static_cast<int>(c.coeffs.size()) != n) throw Error("lp: constraint length mismatch");
        double eps = kLpStrictEps * std::max(1.0, std::abs(c.rhs));
        switch (c.rel) {
            case Relation::Le: add_row(c.coeffs, Relation::Le, c.rhs); break;
            case Relation::Ge: add_row(c.coeffs, Relation::Ge, c.rhs); break;
            case Relation::Eq: add_row(c.coeffs, Relation::Eq, c.rhs); break;
            case Relation::Lt: add_row(c.coeffs, Relation::Le, c.rhs - eps); break;
            case Relation::Gt: add_row(c.coeffs, Relation::Ge, c.rhs + eps); break;
        }
    }
    // Finite upper bounds of lower-bounded variables become rows.
    for (int j = 0; j < n; ++j) {
        auto [lo, hi] = bounds[j];
        if (std::isfinite(lo) && std::isfinite(hi)) {
            Vec e(n, 0.0);
            e[j] = 1.0;
            add_row(e, Relation::Le, hi);
        }
    }

    Vec obj_cols(cols, 0.0);
    double const_term = 0.0;
    if (lp.objective) {
        if (static_cast<int>(lp.objective->size()) != n) throw Error("lp: objective length mismatch");
        for (int j = 0; j < n; ++j) {
            double c = (*lp.objective)[j];
            if (c == 0.0) continue;
            const VarMap& m = vmap[j];
            obj_cols[m.col] += c * m.sign;
            if (m.col_neg >= 0) obj_cols[m.col_neg] -= c;
            const_term += c * m.shift;
        }
    }

    lpdetail::Simplex sx;
    Vec sol;
    double val = 0.0;
    LpStatus st = sx.run(rows, rels, rhs, obj_cols, lp.objective.has_value(), sol, val);
    if (st != LpStatus::Optimal) return {st, 0.0, {}};

    Vec point(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const VarMap& m = vmap[j];
        double u = m.col < static_cast<int>(sol.size()) ? sol[m.col] : 0.0;
        double v = m.col_neg >= 0 ? sol[m.col_neg] : 0.0;
        point[j] = m.sign * u - v + m.shift;
    }
    LpOutcome out;
    out.status = lp.objective ? LpStatus::Optimal : LpStatus::Feasible;
    out.point = std::move(point);
    out.value = val + const_term;
    return out;
}

// Direct check of an LP point against the original mixed-relation constraints.
inline bool check_point(const LinearProgram& lp, const Vec& point, double tol = kLpFeasTol) {
    for (const auto& c : lp.constraints) {
        double lhs = dot(c.coeffs, point);
        double eps = kLpStrictEps * std::max(1.0, std::abs(c.rhs));
        switch (c.rel) {
            case Relation::Le:
                if (!(lhs <= c.rhs + tol)) return false;
                break;
            case Relation::Ge:
                if (!(lhs >= c.rhs - tol)) return false;
                break;
            case Relation::Eq:
                if (!(std::abs(lhs - c.rhs) <= tol)) return false;
                break;
            case Relation::Lt:
                if (!(lhs <= c.rhs - eps / 2)) return false;
                break;
            case Relation::Gt:
                if (!(lhs >= c.rhs + eps / 2)) return false;
                break;
        }
    }
    for (int j = 0; j < lp.num_vars && j < static_cast<int>(lp.var_bounds.size()); ++j) {
        if (point[j] < lp.var_bounds[j].first - tol) return false;
        if (point[j] > lp.var_bounds[j].second + tol) return false;
    }
    return true;
}

struct MaxBoxResult {
    bool feasible = false;
    Bounds box;  // per-dimension [lo, hi], only when feasible
};

// Widest axis-aligned box inside the polytope, within seed bounds. Variables
// are the 2n box corners; each halfspace is imposed at its worst-case corner
// (sign-based lo/hi substitution), so every point of the box satisfies it.
inline MaxBoxResult max_box(const Polytope& poly, const Bounds& seed_bounds) {
    int n = static_cast<int>(seed_bounds.size());
    Bounds seed = seed_bounds;
    if (poly.box)
        for (int i = 0; i < n && i < static_cast<int>(poly.box->size()); ++i) {
            seed[i].first = std::max(seed[i].first, (*poly.box)[i].first);
            seed[i].second = std::min(seed[i].second, (*poly.box)[i].second);
            if (seed[i].first > seed[i].second) return {};
        }

    LinearProgram lp;
    lp.num_vars = 2 * n;  // lo_0..lo_{n-1}, hi_0..hi_{n-1}
    lp.var_bounds.resize(2 * n);
    for (int i = 0; i < n; ++i) {
        lp.var_bounds[i] = seed[i];
        lp.var_bounds[n + i] = seed[i];
    }
    Vec obj(2 * n, 0.0);
    for (int i = 0; i < n; ++i) {
        obj[i] = -1.0;      // -lo_i
        obj[n + i] = 1.0;   // +hi_i
    }
    lp.objective = obj;
    for (int i = 0; i < n; ++i) {
        Vec row(2 * n, 0.0);
        row[i] = 1.0;
        row[n + i] = -1.0;
        lp.add(std::move(row), Relation::Le, 0.0);  // lo_i <= hi_i
    }
    // Off: max over box of w.x + b <= 0  -> positive coeff picks hi, negative lo.
    for (const auto& h : poly.nonstrict) {
        Vec row(2 * n, 0.0);
        for (int i = 0; i < n; ++i) {
            if (h.w[i] >= 0)
                row[n + i] += h.w[i];
            else
                row[i] += h.w[i];
        }
        lp.add(std::move(row), Relation::Le, -h.b);
    }
    // On: min over box of w.x + b > 0 -> positive coeff picks lo, negative hi.
    for (const auto& h : poly.strict) {
        Vec row(2 * n, 0.0);
        for (int i = 0; i < n; ++i) {
            if (h.w[i] >= 0)
                row[i] += h.w[i];
            else
                row[n + i] += h.w[i];
        }
        lp.add(std::move(row), Relation::Gt, -h.b);
    }
    LpOutcome out = solve(lp);
    if (!out.feasible()) return {};
    MaxBoxResult res;
    res.feasible = true;
    res.box.resize(n);
    for (int i = 0; i < n; ++i) {
        double lo = out.point[i], hi = out.point[n + i];
        if (lo > hi) std::swap(lo, hi);  // numerical noise on degenerate dims
        res.box[i] = {lo, hi};
    }
    return res;
}

}  // namespace relupat
