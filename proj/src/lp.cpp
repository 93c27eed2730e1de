#include "rb/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "rb/core.hpp"

namespace rb {

int LpModel::add_var(double cost, double lower, double upper, std::string name) {
    obj.push_back(cost);
    lb.push_back(lower);
    ub.push_back(upper);
    var_names.push_back(std::move(name));
    return static_cast<int>(obj.size()) - 1;
}

int LpModel::add_row(std::vector<std::pair<int, double>> coef, Rel rel, double rhs, std::string name) {
    rows.push_back(LpRow{std::move(coef), rel, rhs, std::move(name)});
    return static_cast<int>(rows.size()) - 1;
}

const char* lp_status_name(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

double LpSolution::row_activity(const LpModel& m, int i) const {
    double a = 0.0;
    for (auto [j, v] : m.rows[i].coef) a += v * x[j];
    return a;
}

void require_optimal(const LpSolution& sol, const std::string& context) {
    if (sol.status == LpStatus::Infeasible) throw Error(ErrorKind::Infeasible, context);
    if (sol.status == LpStatus::Unbounded) throw Error(ErrorKind::Unbounded, context);
}

namespace {

enum class ColKind { Structural, Slack, Artificial };

struct SparseCol {
    std::vector<int> r;
    std::vector<double> v;
};

struct VarMap {
    int c1 = -1;
    double s1 = 1.0;
    int c2 = -1;  // negative part of a free variable
    double offset = 0.0;
};

struct StandardForm {
    int m = 0;
    std::vector<SparseCol> cols;
    std::vector<ColKind> kind;
    std::vector<double> cost;  // internal min costs, zero for slack/artificial
    std::vector<double> b;
    std::vector<int> init_basis;
    std::vector<double> flip;  // per internal row
    std::vector<VarMap> vmap;
    int n_orig_rows = 0;
};

StandardForm standardize(const LpModel& model) {
    StandardForm sf;
    const int n = model.num_vars();
    double sgn = model.sense == Sense::Min ? 1.0 : -1.0;
    std::vector<std::map<int, double>> rowcoef;
    std::vector<double> rhs;
    std::vector<Rel> rel;

    sf.vmap.resize(n);
    int ncol = 0;
    std::vector<double> struct_cost;
    std::vector<std::pair<int, double>> ub_rows;  // (col, bound)
    for (int j = 0; j < n; ++j) {
        double l = model.lb[j], u = model.ub[j];
        if (l > u) throw Error(ErrorKind::InvalidInput, "variable lower bound exceeds upper bound");
        VarMap& vm = sf.vmap[j];
        if (std::isfinite(l)) {
            vm.c1 = ncol++;
            vm.offset = l;
            struct_cost.push_back(sgn * model.obj[j]);
            if (std::isfinite(u)) ub_rows.push_back({vm.c1, u - l});
        } else if (std::isfinite(u)) {
            vm.c1 = ncol++;
            vm.s1 = -1.0;
            vm.offset = u;
            struct_cost.push_back(-sgn * model.obj[j]);
        } else {
            vm.c1 = ncol++;
            vm.c2 = ncol++;
            struct_cost.push_back(sgn * model.obj[j]);
            struct_cost.push_back(-sgn * model.obj[j]);
        }
    }
    for (const auto& row : model.rows) {
        std::map<int, double> acc;
        double r = row.rhs;
        for (auto [j, a] : row.coef) {
            if (j < 0 || j >= n) throw Error(ErrorKind::InvalidInput, "row references unknown variable");
            if (!std::isfinite(a)) throw Error(ErrorKind::InvalidInput, "non-finite LP coefficient");
            const VarMap& vm = sf.vmap[j];
            r -= a * vm.offset;
            acc[vm.c1] += a * vm.s1;
            if (vm.c2 >= 0) acc[vm.c2] -= a;
        }
        rowcoef.push_back(std::move(acc));
        rhs.push_back(r);
        rel.push_back(row.rel);
    }
    sf.n_orig_rows = static_cast<int>(rowcoef.size());
    for (auto [c, u] : ub_rows) {
        rowcoef.push_back({{c, 1.0}});
        rhs.push_back(u);
        rel.push_back(Rel::Le);
    }
    sf.m = static_cast<int>(rowcoef.size());
    const int m = sf.m;
    sf.flip.assign(m, 1.0);
    for (int i = 0; i < m; ++i)
        if (rhs[i] < 0.0) sf.flip[i] = -1.0;

    sf.cols.resize(ncol);
    sf.kind.assign(ncol, ColKind::Structural);
    sf.cost = struct_cost;
    for (int i = 0; i < m; ++i) {
        for (auto [c, a] : rowcoef[i]) {
            if (a == 0.0) continue;
            sf.cols[c].r.push_back(i);
            sf.cols[c].v.push_back(sf.flip[i] * a);
        }
    }
    sf.b.resize(m);
    sf.init_basis.assign(m, -1);
    for (int i = 0; i < m; ++i) {
        sf.b[i] = sf.flip[i] * rhs[i];
        if (rel[i] == Rel::Eq) continue;
        double coef = (rel[i] == Rel::Le ? 1.0 : -1.0) * sf.flip[i];
        SparseCol s;
        s.r.push_back(i);
        s.v.push_back(coef);
        sf.cols.push_back(std::move(s));
        sf.kind.push_back(ColKind::Slack);
        sf.cost.push_back(0.0);
        if (coef > 0.0) sf.init_basis[i] = static_cast<int>(sf.cols.size()) - 1;
    }
    for (int i = 0; i < m; ++i) {
        if (sf.init_basis[i] >= 0) continue;
        SparseCol a;
        a.r.push_back(i);
        a.v.push_back(1.0);
        sf.cols.push_back(std::move(a));
        sf.kind.push_back(ColKind::Artificial);
        sf.cost.push_back(0.0);
        sf.init_basis[i] = static_cast<int>(sf.cols.size()) - 1;
    }
    return sf;
}

class RevisedSimplex {
public:
    RevisedSimplex(const StandardForm& sf, const LpOptions& opt, bool always_bland)
        : sf_(sf), opt_(opt), always_bland_(always_bland) {
        m_ = sf.m;
        N_ = static_cast<int>(sf.cols.size());
        basis_ = sf.init_basis;
        pos_.assign(N_, -1);
        rejected_.assign(N_, 0);
        for (int i = 0; i < m_; ++i) pos_[basis_[i]] = i;
        Binv_ = Eigen::MatrixXd::Identity(m_, m_);
        // initial basis columns are +1 unit vectors
        xB_ = Eigen::Map<const Eigen::VectorXd>(sf.b.data(), m_);
    }

    // returns false when unbounded; throws on numeric failure
    bool run(bool phase1, int& iterations) {
        std::vector<double> cost(N_);
        for (int j = 0; j < N_; ++j)
            cost[j] = phase1 ? (sf_.kind[j] == ColKind::Artificial ? 1.0 : 0.0) : sf_.cost[j];
        bool bland = always_bland_;
        int since_refactor = 0;
        Eigen::VectorXd cB(m_), y(m_), w(m_);
        while (true) {
            if (iterations >= opt_.max_iterations)
                throw Error(ErrorKind::NumericFailure, "simplex iteration limit reached");
            for (int i = 0; i < m_; ++i) cB[i] = cost[basis_[i]];
            y.noalias() = Binv_.transpose() * cB;
            int q = -1;
            double best = -opt_.tol;
            double dq = 0.0;
            for (int j = 0; j < N_; ++j) {
                if (pos_[j] >= 0 || rejected_[j]) continue;
                if (!phase1 && sf_.kind[j] == ColKind::Artificial) continue;
                const SparseCol& c = sf_.cols[j];
                double d = cost[j];
                for (std::size_t k = 0; k < c.r.size(); ++k) d -= y[c.r[k]] * c.v[k];
                if (bland) {
                    if (d < -opt_.tol) { q = j; dq = d; break; }
                } else if (d < best) {
                    best = d;
                    q = j;
                    dq = d;
                }
            }
            if (q < 0) {
                clear_rejected();
                return true;
            }
            column(q, w);
            int p = -1;
            double theta = kInf;
            for (int i = 0; i < m_; ++i) {
                double wi = w[i];
                bool art = !phase1 && sf_.kind[basis_[i]] == ColKind::Artificial;
                double ratio;
                if (art && std::abs(wi) > opt_.pivot_tol) {
                    ratio = 0.0;
                } else if (wi > opt_.pivot_tol) {
                    ratio = std::max(0.0, xB_[i]) / wi;
                } else {
                    continue;
                }
                if (p < 0 || ratio < theta - 1e-12 * (1.0 + theta)) {
                    p = i;
                    theta = ratio;
                } else if (ratio <= theta + 1e-12 * (1.0 + theta)) {
                    bool take = bland ? basis_[i] < basis_[p] : std::abs(wi) > std::abs(w[p]);
                    if (take) { p = i; theta = std::min(theta, ratio); }
                }
            }
            if (p < 0) {
                // a reduced cost that is roundoff on tiny column entries is not a ray
                if (dq > -1e-7) {
                    rejected_[q] = 1;
                    rejected_list_.push_back(q);
                    continue;
                }
                return false;
            }
            clear_rejected();
            pivot(p, q, w, theta);
            ++iterations;
            bool degenerate = theta <= 1e-12;
            bland = always_bland_ || degenerate;
            if (++since_refactor >= opt_.refactor_every) {
                refactor();
                since_refactor = 0;
            }
        }
    }

    void drive_out_artificials() {
        for (int p = 0; p < m_; ++p) {
            if (sf_.kind[basis_[p]] != ColKind::Artificial) continue;
            Eigen::VectorXd rho = Binv_.row(p).transpose();
            int q = -1;
            double best = 1e-7;
            for (int j = 0; j < N_; ++j) {
                if (pos_[j] >= 0 || sf_.kind[j] == ColKind::Artificial) continue;
                const SparseCol& c = sf_.cols[j];
                double v = 0.0;
                for (std::size_t k = 0; k < c.r.size(); ++k) v += rho[c.r[k]] * c.v[k];
                if (std::abs(v) > best) { best = std::abs(v); q = j; }
            }
            if (q < 0) continue;  // redundant row; artificial stays basic at zero
            Eigen::VectorXd w(m_);
            column(q, w);
            pivot(p, q, w, 0.0);
        }
    }

    void refactor() {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
        for (int i = 0; i < m_; ++i) {
            const SparseCol& c = sf_.cols[basis_[i]];
            for (std::size_t k = 0; k < c.r.size(); ++k) B(c.r[k], i) = c.v[k];
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        Binv_ = lu.inverse();
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(sf_.b.data(), m_);
        xB_ = Binv_ * b;
        if (!Binv_.allFinite()) throw Error(ErrorKind::NumericFailure, "singular basis");
        double bscale = 1.0 + b.cwiseAbs().maxCoeff();
        if (xB_.size() > 0 && xB_.minCoeff() < -1e-7 * bscale)
            throw Error(ErrorKind::NumericFailure, "basis lost primal feasibility");
    }

    double artificial_sum() const {
        double s = 0.0;
        for (int i = 0; i < m_; ++i)
            if (sf_.kind[basis_[i]] == ColKind::Artificial) s += std::max(0.0, xB_[i]);
        return s;
    }

    std::vector<double> primal() const {
        std::vector<double> x(N_, 0.0);
        for (int i = 0; i < m_; ++i) x[basis_[i]] = std::max(0.0, xB_[i]);
        return x;
    }

    std::vector<double> duals() const {
        Eigen::VectorXd cB(m_);
        for (int i = 0; i < m_; ++i) cB[i] = sf_.cost[basis_[i]];
        Eigen::VectorXd y = Binv_.transpose() * cB;
        return std::vector<double>(y.data(), y.data() + m_);
    }

private:
    void clear_rejected() {
        for (int j : rejected_list_) rejected_[j] = 0;
        rejected_list_.clear();
    }

    void column(int q, Eigen::VectorXd& w) const {
        w.setZero(m_);
        const SparseCol& c = sf_.cols[q];
        for (std::size_t k = 0; k < c.r.size(); ++k) w.noalias() += c.v[k] * Binv_.col(c.r[k]);
    }

    void pivot(int p, int q, const Eigen::VectorXd& w, double theta) {
        double wp = w[p];
        if (std::abs(wp) < opt_.pivot_tol) throw Error(ErrorKind::NumericFailure, "pivot below tolerance");
        xB_ -= theta * w;
        xB_[p] = theta;
        Eigen::RowVectorXd rowp = Binv_.row(p) / wp;
        Binv_.noalias() -= w * rowp;
        Binv_.row(p) = rowp;
        pos_[basis_[p]] = -1;
        basis_[p] = q;
        pos_[q] = p;
    }

    const StandardForm& sf_;
    const LpOptions& opt_;
    bool always_bland_;
    int m_ = 0, N_ = 0;
    std::vector<int> basis_;
    std::vector<int> pos_;
    std::vector<char> rejected_;
    std::vector<int> rejected_list_;
    Eigen::MatrixXd Binv_;
    Eigen::VectorXd xB_;
};


void fill_residuals(const LpModel& model, LpSolution& sol) {
    const int n = model.num_vars();
    const int m = model.num_rows();
    double sgn = model.sense == Sense::Min ? 1.0 : -1.0;
    sol.reduced_cost.assign(n, 0.0);
    for (int j = 0; j < n; ++j) sol.reduced_cost[j] = model.obj[j];
    double pr = 0.0, dr = 0.0;
    double dual_obj = 0.0;
    for (int i = 0; i < m; ++i) {
        const LpRow& row = model.rows[i];
        double a = sol.row_activity(model, i);
        double y = sol.dual[i];
        for (auto [j, v] : row.coef) sol.reduced_cost[j] -= v * y;
        double viol = 0.0;
        if (row.rel == Rel::Le) viol = std::max(0.0, a - row.rhs);
        else if (row.rel == Rel::Ge) viol = std::max(0.0, row.rhs - a);
        else viol = std::abs(a - row.rhs);
        pr = std::max(pr, viol);
        // in min form, a <= row has y <= 0 and a >= row has y >= 0
        double ys = sgn * y;
        if (row.rel == Rel::Le) dr = std::max(dr, std::max(0.0, ys));
        else if (row.rel == Rel::Ge) dr = std::max(dr, std::max(0.0, -ys));
        dual_obj += row.rhs * y;
    }
    for (int j = 0; j < n; ++j) {
        double x = sol.x[j], l = model.lb[j], u = model.ub[j];
        pr = std::max(pr, std::max(0.0, l - x));
        pr = std::max(pr, std::max(0.0, x - u));
        double d = sgn * sol.reduced_cost[j];  // min-form reduced cost
        bool at_l = std::isfinite(l) && std::abs(x - l) <= 1e-9 * (1.0 + std::abs(l));
        bool at_u = std::isfinite(u) && std::abs(x - u) <= 1e-9 * (1.0 + std::abs(u));
        if (at_l && at_u) {
        } else if (at_l) {
            dr = std::max(dr, std::max(0.0, -d));
        } else if (at_u) {
            dr = std::max(dr, std::max(0.0, d));
        } else {
            dr = std::max(dr, std::abs(d));
        }
        double bnd = x;
        if (std::isfinite(l) && (!std::isfinite(u) || std::abs(x - l) <= std::abs(u - x))) bnd = l;
        else if (std::isfinite(u)) bnd = u;
        dual_obj += sol.reduced_cost[j] * bnd;
    }
    sol.primal_residual = pr;
    sol.dual_residual = dr;
    sol.dual_objective = dual_obj;
    sol.cs_residual = check_complementary_slackness(model, sol).max();
}

LpSolution solve_once(const LpModel& model, const StandardForm& sf, const LpOptions& opt, bool bland) {
    RevisedSimplex rs(sf, opt, bland);
    LpSolution sol;
    int it = 0;
    bool any_art = false;
    for (int i = 0; i < sf.m; ++i)
        if (sf.kind[sf.init_basis[i]] == ColKind::Artificial) any_art = true;
    if (any_art) {
        rs.run(true, it);
        rs.refactor();
        double bscale = 1.0;
        for (double v : sf.b) bscale = std::max(bscale, std::abs(v));
        if (rs.artificial_sum() > 1e-7 * bscale) {
            sol.status = LpStatus::Infeasible;
            sol.iterations = it;
            return sol;
        }
        rs.drive_out_artificials();
        rs.refactor();
    }
    if (!rs.run(false, it)) {
        sol.status = LpStatus::Unbounded;
        sol.iterations = it;
        return sol;
    }
    rs.refactor();
    sol.status = LpStatus::Optimal;
    sol.iterations = it;
    std::vector<double> xs = rs.primal();
    std::vector<double> yi = rs.duals();
    const int n = model.num_vars();
    sol.x.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const VarMap& vm = sf.vmap[j];
        double v = vm.offset + vm.s1 * xs[vm.c1];
        if (vm.c2 >= 0) v -= xs[vm.c2];
        sol.x[j] = v;
    }
    double sgn = model.sense == Sense::Min ? 1.0 : -1.0;
    sol.dual.assign(model.num_rows(), 0.0);
    for (int i = 0; i < sf.n_orig_rows; ++i) sol.dual[i] = sgn * sf.flip[i] * yi[i];
    sol.objective = 0.0;
    for (int j = 0; j < n; ++j) sol.objective += model.obj[j] * sol.x[j];
    fill_residuals(model, sol);
    return sol;
}

}  // namespace

LpSolution lp_solve(const LpModel& model, const LpOptions& opt) {
    if (static_cast<int>(model.lb.size()) != model.num_vars() ||
        static_cast<int>(model.ub.size()) != model.num_vars())
        throw Error(ErrorKind::InvalidInput, "LP bound vectors have wrong length");
    for (double c : model.obj)
        if (!std::isfinite(c)) throw Error(ErrorKind::InvalidInput, "non-finite objective coefficient");
    if (!opt.dump_path.empty()) {
        std::ofstream os(opt.dump_path);
        write_cplex_lp(model, os);
    }
    StandardForm sf = standardize(model);
    std::string last;
    for (int attempt = 0; attempt <= opt.max_restarts; ++attempt) {
        try {
            return solve_once(model, sf, opt, attempt > 0);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NumericFailure) throw;
            last = e.what();
        }
    }
    throw Error(ErrorKind::NumericFailure, "simplex failed after restarts (" + last + ")");
}

LpSolution lp_solve_dual(const LpModel& model, const LpOptions& opt) {
    const int n = model.num_vars();
    const double sgn = model.sense == Sense::Min ? 1.0 : -1.0;
    // primal in min form over shifted columns x = off + s x', x' >= 0 (or free when kind == 1)
    std::vector<double> off(n, 0.0), s(n, 1.0);
    std::vector<int> kind(n, 0);  // 0 nonnegative, 1 free, 2 fixed
    std::vector<LpRow> rows = model.rows;
    for (int j = 0; j < n; ++j) {
        double l = model.lb[j], u = model.ub[j];
        if (l > u) throw Error(ErrorKind::InvalidInput, "variable lower bound exceeds upper bound");
        if (l == u) { kind[j] = 2; off[j] = l; }
        else if (std::isfinite(l)) {
            off[j] = l;
            if (std::isfinite(u)) rows.push_back(LpRow{{{j, 1.0}}, Rel::Le, u, {}});
        } else if (std::isfinite(u)) { off[j] = u; s[j] = -1.0; }
        else kind[j] = 1;
    }
    const int m = static_cast<int>(rows.size());
    LpModel d;
    d.sense = Sense::Max;
    std::vector<std::vector<std::pair<int, double>>> cols(n);
    for (int i = 0; i < m; ++i) {
        double b = rows[i].rhs;
        for (auto [j, a] : rows[i].coef) {
            b -= a * off[j];
            if (kind[j] != 2) cols[j].emplace_back(i, a * s[j]);
        }
        double lo = rows[i].rel == Rel::Le ? -kInf : rows[i].rel == Rel::Eq ? -kInf : 0.0;
        double hi = rows[i].rel == Rel::Ge ? kInf : rows[i].rel == Rel::Eq ? kInf : 0.0;
        d.add_var(b, lo, hi);
    }
    std::vector<int> drow(n, -1);
    for (int j = 0; j < n; ++j) {
        if (kind[j] == 2) continue;
        drow[j] = d.add_row(cols[j], kind[j] == 1 ? Rel::Eq : Rel::Le, sgn * model.obj[j] * s[j]);
    }
    LpSolution ds = lp_solve(d, opt);
    LpSolution sol;
    sol.iterations = ds.iterations;
    if (ds.status != LpStatus::Optimal) {
        sol.status = ds.status == LpStatus::Unbounded ? LpStatus::Infeasible : LpStatus::Unbounded;
        return sol;
    }
    sol.status = LpStatus::Optimal;
    sol.x.assign(n, 0.0);
    for (int j = 0; j < n; ++j) sol.x[j] = off[j] + (drow[j] >= 0 ? s[j] * ds.dual[drow[j]] : 0.0);
    sol.dual.assign(model.num_rows(), 0.0);
    for (int i = 0; i < model.num_rows(); ++i) sol.dual[i] = sgn * ds.x[i];
    sol.objective = 0.0;
    for (int j = 0; j < n; ++j) sol.objective += model.obj[j] * sol.x[j];
    fill_residuals(model, sol);
    return sol;
}

CsReport check_complementary_slackness(const LpModel& model, const LpSolution& sol) {
    CsReport rep;
    for (int i = 0; i < model.num_rows(); ++i) {
        const LpRow& row = model.rows[i];
        if (row.rel == Rel::Eq) continue;
        double slack = std::abs(row.rhs - sol.row_activity(model, i));
        double prod = std::abs(sol.dual[i]) * slack;
        if (prod > rep.max_row) { rep.max_row = prod; rep.worst_row = i; }
    }
    std::vector<double> d = sol.reduced_cost;
    if (d.size() != model.obj.size()) {
        d = model.obj;
        for (int i = 0; i < model.num_rows(); ++i)
            for (auto [j, v] : model.rows[i].coef) d[j] -= v * sol.dual[i];
    }
    for (int j = 0; j < model.num_vars(); ++j) {
        double l = model.lb[j], u = model.ub[j], x = sol.x[j];
        double dist;
        if (!std::isfinite(l) && !std::isfinite(u)) dist = 1.0;
        else {
            dist = kInf;
            if (std::isfinite(l)) dist = std::min(dist, std::abs(x - l));
            if (std::isfinite(u)) dist = std::min(dist, std::abs(u - x));
        }
        double prod = std::abs(d[j]) * dist;
        if (prod > rep.max_col) { rep.max_col = prod; rep.worst_col = j; }
    }
    return rep;
}

namespace {
std::string vname(const LpModel& m, int j) {
    if (j < static_cast<int>(m.var_names.size()) && !m.var_names[j].empty()) return m.var_names[j];
    return "x" + std::to_string(j);
}
}  // namespace

void write_cplex_lp(const LpModel& model, std::ostream& os) {
    os.precision(17);
    os << (model.sense == Sense::Min ? "Minimize\n" : "Maximize\n") << " obj:";
    for (int j = 0; j < model.num_vars(); ++j)
        if (model.obj[j] != 0.0) os << (model.obj[j] < 0 ? " - " : " + ") << std::abs(model.obj[j]) << ' ' << vname(model, j);
    os << "\nSubject To\n";
    for (int i = 0; i < model.num_rows(); ++i) {
        const LpRow& row = model.rows[i];
        os << ' ' << (row.name.empty() ? "c" + std::to_string(i) : row.name) << ':';
        for (auto [j, v] : row.coef) os << (v < 0 ? " - " : " + ") << std::abs(v) << ' ' << vname(model, j);
        os << (row.rel == Rel::Le ? " <= " : row.rel == Rel::Ge ? " >= " : " = ") << row.rhs << '\n';
    }
    os << "Bounds\n";
    for (int j = 0; j < model.num_vars(); ++j) {
        double l = model.lb[j], u = model.ub[j];
        if (l == 0.0 && !std::isfinite(u)) continue;
        if (!std::isfinite(l) && !std::isfinite(u)) { os << ' ' << vname(model, j) << " free\n"; continue; }
        os << ' ' << (std::isfinite(l) ? std::to_string(l) : std::string("-inf")) << " <= " << vname(model, j)
           << " <= " << (std::isfinite(u) ? std::to_string(u) : std::string("+inf")) << '\n';
    }
    os << "End\n";
}

}  // namespace rb
