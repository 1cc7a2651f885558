#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace ems::lp {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Variable {
    std::string name;
    double lb = 0.0;
    double ub = kInf;
};

enum class Rel { LessEq, Eq, GreaterEq };

struct ConstraintRow {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;  // (variable index, coefficient)
    Rel rel = Rel::LessEq;
    double rhs = 0.0;
};

/// Minimization LP. Duals follow the shadow-price convention
/// y_i = d(objective)/d(rhs_i): non-positive for <= rows, non-negative for >=
/// rows, free for equalities.
struct LinearProgram {
    std::vector<Variable> vars;
    std::vector<ConstraintRow> cons;
    std::vector<double> obj;
    double obj_constant = 0.0;

    int add_variable(const std::string& name, double lb, double ub, double cost = 0.0);
    int add_constraint(const std::string& name, std::vector<std::pair<int, double>> coeffs,
                       Rel rel, double rhs);
    void set_cost(int var, double cost);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpSolution {
    LpStatus status = LpStatus::IterLimit;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<double> dual;          // per constraint
    std::vector<double> reduced_cost;  // per variable
    int iterations = 0;
    std::string diagnostic;

    // Self-check metrics filled in by the solver at optimality.
    double max_primal_residual = 0.0;
    double duality_gap = 0.0;        // |primal - dual objective|
    double complementarity = 0.0;    // sum |dual * slack| + |rc * bound slack|
};

struct SolverOptions {
    int max_iterations = 500000;
    double tol = 1e-9;        // reduced-cost / ratio tolerance
    double feas_tol = 1e-7;   // phase-1 acceptance
    int refactor_every = 128;
    int stall_limit = 500;    // iterations without improvement before Bland pivoting
};

/// Pluggable solver seam; the bundled implementation is a dense revised
/// simplex with bounded variables and Bland anti-cycling.
class LpBackend {
public:
    virtual ~LpBackend() = default;
    virtual LpSolution solve(const LinearProgram& lp) const = 0;
};

class SimplexSolver : public LpBackend {
public:
    explicit SimplexSolver(SolverOptions opt = {}) : opt_(opt) {}
    LpSolution solve(const LinearProgram& lp) const override;

private:
    SolverOptions opt_;
};

LpSolution solve(const LinearProgram& lp, const SolverOptions& opt = {});

/// MPS dump for cross-checking against external solvers.
std::string write_mps(const LinearProgram& lp, const std::string& name = "EMSLP");

}  // namespace ems::lp
