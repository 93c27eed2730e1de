#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace rb {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Min, Max };
enum class Rel { Le, Eq, Ge };

struct LpRow {
    std::vector<std::pair<int, double>> coef;
    Rel rel = Rel::Le;
    double rhs = 0.0;
    std::string name;
};

struct LpModel {
    Sense sense = Sense::Min;
    std::vector<double> obj;
    std::vector<double> lb;
    std::vector<double> ub;
    std::vector<std::string> var_names;
    std::vector<LpRow> rows;

    int add_var(double cost, double lower = 0.0, double upper = kInf, std::string name = {});
    int add_row(std::vector<std::pair<int, double>> coef, Rel rel, double rhs, std::string name = {});
    int num_vars() const { return static_cast<int>(obj.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* lp_status_name(LpStatus s);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    double dual_objective = 0.0;
    std::vector<double> x;
    // dual[i] = d(objective)/d(rhs_i), in the model's own sense
    std::vector<double> dual;
    std::vector<double> reduced_cost;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double cs_residual = 0.0;
    int iterations = 0;

    double row_activity(const LpModel& m, int i) const;
};

struct LpOptions {
    double tol = 1e-9;
    double pivot_tol = 1e-10;
    int refactor_every = 100;
    int max_iterations = 1000000;
    int max_restarts = 2;
    std::string dump_path;  // when set, the model is written in CPLEX-LP format first
};

// Throws Error(NumericFailure) when the pivot tolerance keeps failing after restarts.
LpSolution lp_solve(const LpModel& model, const LpOptions& opt = {});

// Same contract, solved through the dual model; cheaper when rows far outnumber columns.
// A primal reported Unbounded may also be infeasible.
LpSolution lp_solve_dual(const LpModel& model, const LpOptions& opt = {});

// Throws Error(Infeasible/Unbounded) unless the solution is optimal.
void require_optimal(const LpSolution& sol, const std::string& context);

struct CsReport {
    double max_row = 0.0;   // max |dual_i * slack_i|
    double max_col = 0.0;   // max |reduced_cost_j * distance to active bound|
    int worst_row = -1;
    int worst_col = -1;
    double max() const { return max_row > max_col ? max_row : max_col; }
};

CsReport check_complementary_slackness(const LpModel& model, const LpSolution& sol);

void write_cplex_lp(const LpModel& model, std::ostream& os);

}  // namespace rb
